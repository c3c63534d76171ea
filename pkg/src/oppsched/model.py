"""Domain types, validation and file ingestion for opportunity instances."""

from __future__ import annotations

import csv
import io
import json
import math
import os
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Union

import numpy as np

from .errors import (
    DuplicateId,
    EmptyInstance,
    InvalidProbability,
    InvalidReward,
    InvalidSchedule,
    InvalidTime,
    ParseError,
)

CSV_COLUMNS = ("id", "reward", "prob", "mean_time")
CSV_OPTIONAL_COLUMNS = ("dist",)


# --- response-time distributions -------------------------------------------


@dataclass(frozen=True, slots=True)
class Deterministic:
    """Response time that always equals ``mean``."""

    mean: float
    code = "det"

    def cdf(self, t: float) -> float:
        return 1.0 if t >= self.mean else 0.0

    def from_uniform(self, u):
        """Inverse-CDF transform; the draw is ignored."""
        return self.mean + np.zeros_like(u) if isinstance(u, np.ndarray) else self.mean


@dataclass(frozen=True, slots=True)
class Exponential:
    """Memoryless response time with the given mean."""

    mean: float
    code = "exp"

    def cdf(self, t: float) -> float:
        if t <= 0:
            return 0.0
        return -math.expm1(-t / self.mean)

    def from_uniform(self, u):
        # u in [0, 1) so 1 - u is in (0, 1]
        if isinstance(u, np.ndarray):
            return -self.mean * np.log1p(-u)
        return -self.mean * math.log1p(-u)


ResponseTimeDistribution = Union[Deterministic, Exponential]

_FAMILIES = {"det": Deterministic, "exp": Exponential}
DEFAULT_DIST = "exp"


def make_distribution(code: str, mean: float) -> ResponseTimeDistribution:
    try:
        family = _FAMILIES[code]
    except KeyError:
        raise ParseError(f"unknown distribution {code!r}; expected one of {sorted(_FAMILIES)}") from None
    return family(float(mean))


# --- opportunities and instances --------------------------------------------


@dataclass(frozen=True, slots=True)
class Opportunity:
    """A selectable option paying ``reward`` with probability ``success_prob``.

    The outcome is revealed after a random response time drawn from
    ``response_dist``; ``mean_response_time`` is that distribution's mean.
    """

    id: str
    reward: float
    success_prob: float
    response_dist: ResponseTimeDistribution

    def __post_init__(self) -> None:
        r, p, theta = self.reward, self.success_prob, self.response_dist.mean
        if not (math.isfinite(r) and r >= 0):
            raise InvalidReward(f"opportunity {self.id!r}: reward must be finite and >= 0, got {r}")
        if not (0 < p <= 1):
            raise InvalidProbability(f"opportunity {self.id!r}: prob must lie in (0, 1], got {p}")
        if not (math.isfinite(theta) and theta > 0):
            raise InvalidTime(f"opportunity {self.id!r}: mean_time must be finite and > 0, got {theta}")

    @classmethod
    def create(
        cls, id: str, reward: float, prob: float, mean_time: float, dist: str = DEFAULT_DIST
    ) -> Opportunity:
        return cls(str(id), float(reward), float(prob), make_distribution(dist, mean_time))

    @property
    def mean_response_time(self) -> float:
        return self.response_dist.mean

    @property
    def dist_code(self) -> str:
        return self.response_dist.code

    def to_record(self) -> dict:
        return {
            "id": self.id,
            "reward": self.reward,
            "prob": self.success_prob,
            "mean_time": self.mean_response_time,
            "dist": self.dist_code,
        }


@dataclass(frozen=True, slots=True)
class Instance:
    """Validated, ordered collection of opportunities with distinct ids.

    Position ``k`` in ``opportunities`` is the opportunity's index ``k``
    (0-based in the API, shown 1-based to users).
    """

    opportunities: tuple[Opportunity, ...]

    def __post_init__(self) -> None:
        if not self.opportunities:
            raise EmptyInstance("instance needs at least one opportunity")
        seen: set[str] = set()
        for opp in self.opportunities:
            if opp.id in seen:
                raise DuplicateId(f"duplicate opportunity id {opp.id!r}")
            seen.add(opp.id)

    def __len__(self) -> int:
        return len(self.opportunities)

    def __getitem__(self, k: int) -> Opportunity:
        return self.opportunities[k]

    def __iter__(self):
        return iter(self.opportunities)

    @property
    def n(self) -> int:
        return len(self.opportunities)

    @property
    def rewards(self) -> tuple[float, ...]:
        return tuple(o.reward for o in self.opportunities)

    @property
    def probs(self) -> tuple[float, ...]:
        return tuple(o.success_prob for o in self.opportunities)

    @property
    def mean_times(self) -> tuple[float, ...]:
        return tuple(o.mean_response_time for o in self.opportunities)

    def with_distribution(self, code: str) -> Instance:
        """Copy of the instance with every response time switched to family ``code``."""
        return Instance(
            tuple(
                Opportunity(o.id, o.reward, o.success_prob, make_distribution(code, o.mean_response_time))
                for o in self.opportunities
            )
        )


@dataclass(frozen=True, slots=True)
class Schedule:
    """A trying order: ``order[k]`` is the 0-based index of the opportunity tried (k+1)-th."""

    order: tuple[int, ...]

    def __post_init__(self) -> None:
        order = tuple(int(i) for i in self.order)
        object.__setattr__(self, "order", order)
        if sorted(order) != list(range(len(order))):
            raise InvalidSchedule(f"not a permutation of 1..{len(order)}: {self}")

    @classmethod
    def identity(cls, n: int) -> Schedule:
        return cls(tuple(range(n)))

    @classmethod
    def from_one_based(cls, indices: Iterable[int]) -> Schedule:
        return cls(tuple(int(i) - 1 for i in indices))

    @classmethod
    def parse(cls, text: str) -> Schedule:
        """Parse the ``-``-joined 1-based form, e.g. ``"4-1-5-2-3"``."""
        try:
            indices = [int(tok) for tok in text.strip().split("-")]
        except ValueError:
            raise InvalidSchedule(f"cannot parse schedule {text!r}; expected e.g. 4-1-5-2-3") from None
        return cls.from_one_based(indices)

    def one_based(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in self.order)

    def __str__(self) -> str:
        return "-".join(str(i + 1) for i in self.order)

    def __len__(self) -> int:
        return len(self.order)

    def __iter__(self):
        return iter(self.order)

    def check(self, inst: Instance) -> None:
        if len(self.order) != inst.n:
            raise InvalidSchedule(f"schedule {self} has length {len(self.order)}, instance has n={inst.n}")


# --- validation and ingestion -----------------------------------------------


def _record_to_opportunity(rec, position: int) -> Opportunity:
    if isinstance(rec, Opportunity):
        return rec
    if not isinstance(rec, Mapping):
        raise ParseError(f"record {position + 1}: expected a mapping, got {type(rec).__name__}")
    try:
        reward, prob, mean_time = rec["reward"], rec["prob"], rec["mean_time"]
    except KeyError as exc:
        raise ParseError(f"record {position + 1}: missing field {exc.args[0]!r}") from None
    where = f"record {position + 1}"
    dist = rec.get("dist") or DEFAULT_DIST
    ident = rec.get("id", str(position + 1))
    return Opportunity.create(
        ident,
        _number(reward, f"{where}, field reward"),
        _number(prob, f"{where}, field prob"),
        _number(mean_time, f"{where}, field mean_time"),
        dist,
    )


def validate_instance(raw: Sequence) -> Instance:
    """Build an :class:`Instance` from opportunity records, preserving order.

    Records may be :class:`Opportunity` objects or mappings with keys
    ``id, reward, prob, mean_time`` and optional ``dist``.
    """
    if not raw:
        raise EmptyInstance("no opportunity records")
    return Instance(tuple(_record_to_opportunity(rec, k) for k, rec in enumerate(raw)))


def _number(value, where: str) -> float:
    if isinstance(value, bool):
        raise ParseError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, str):
        try:
            return float(value.strip())
        except ValueError:
            pass
    raise ParseError(f"{where}: expected a number, got {value!r}")


def _rows_from_csv(text: str) -> list[dict]:
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise EmptyInstance("empty CSV input") from None
    if tuple(header[:4]) != CSV_COLUMNS or header[4:] not in ([], list(CSV_OPTIONAL_COLUMNS)):
        raise ParseError(f"bad CSV header {','.join(header)!r}; expected id,reward,prob,mean_time[,dist]")
    rows = []
    for line_no, row in enumerate(reader, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != len(header):
            raise ParseError(f"line {line_no}: expected {len(header)} columns, got {len(row)}")
        cells = dict(zip(header, (c.strip() for c in row)))
        rec = {"id": cells["id"]}
        for key in ("reward", "prob", "mean_time"):
            rec[key] = _number(cells[key], f"line {line_no}, column {key}")
        if cells.get("dist"):
            rec["dist"] = cells["dist"]
        rows.append(rec)
    return rows


def _rows_from_json(text: str) -> list[dict]:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc}") from None
    if not isinstance(data, list):
        raise ParseError("JSON input must be an array of opportunity objects")
    rows = []
    for k, obj in enumerate(data):
        where = f"record {k + 1}"
        if not isinstance(obj, dict):
            raise ParseError(f"{where}: expected an object")
        missing = [key for key in CSV_COLUMNS if key not in obj]
        if missing:
            raise ParseError(f"{where}: missing field(s) {', '.join(missing)}")
        if not isinstance(obj["id"], str):
            raise ParseError(f"{where}: id must be a string")
        rec = {"id": obj["id"]}
        for key in ("reward", "prob", "mean_time"):
            if isinstance(obj[key], str):
                raise ParseError(f"{where}, field {key}: expected a number, got {obj[key]!r}")
            rec[key] = _number(obj[key], f"{where}, field {key}")
        if obj.get("dist") is not None:
            if obj["dist"] not in _FAMILIES:
                raise ParseError(f"{where}: unknown dist {obj['dist']!r}")
            rec["dist"] = obj["dist"]
        rows.append(rec)
    return rows


def infer_format(path: str | os.PathLike) -> str:
    suffix = Path(path).suffix.lower()
    if suffix in (".csv", ".json"):
        return suffix[1:]
    raise ParseError(f"cannot infer format from {str(path)!r}; pass csv or json explicitly")


def parse_instance_file(source: str | os.PathLike | IO[str], format: str | None = None) -> Instance:
    """Read an instance from a CSV/JSON file path or an open text stream."""
    if hasattr(source, "read"):
        text = source.read()
        if format is None:
            raise ParseError("format is required when reading from a stream")
    else:
        format = format or infer_format(source)
        text = Path(source).read_text(encoding="utf-8")
    if format == "csv":
        rows = _rows_from_csv(text)
    elif format == "json":
        rows = _rows_from_json(text)
    else:
        raise ParseError(f"unknown format {format!r}")
    return validate_instance(rows)


def serialize_instance(inst: Instance, format: str = "csv") -> str:
    """Render ``inst`` in the given file format; floats keep full precision."""
    records = [o.to_record() for o in inst]
    if format == "json":
        return json.dumps(records, indent=2) + "\n"
    if format != "csv":
        raise ParseError(f"unknown format {format!r}")
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS + CSV_OPTIONAL_COLUMNS)
    for rec in records:
        writer.writerow([rec["id"], repr(rec["reward"]), repr(rec["prob"]), repr(rec["mean_time"]), rec["dist"]])
    return buf.getvalue()
