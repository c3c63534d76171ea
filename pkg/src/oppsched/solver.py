"""Optimal trying orders: sort-key solver, exhaustive oracle, frontier and Pareto tools."""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from itertools import permutations
from typing import NamedTuple

import numpy as np

from .analytics import EvaluatedSchedule, check_eta, evaluate
from .errors import EmptyInput, InstanceTooLarge, InvalidRange, InvalidSteps, UnknownIndex
from .model import Instance, Opportunity, Schedule

DEFAULT_MAX_N = 10


@dataclass(frozen=True, slots=True)
class SortKey:
    """Priority of one opportunity at a given tradeoff weight.

    ``key`` is reward minus ``eta`` times the expected waiting per unit of
    success probability; ``tiebreak`` is that waiting ratio itself.
    """

    key: float
    tiebreak: float
    index: int

    def rank(self) -> tuple[float, float, int]:
        """Ascending sort tuple: key descending, then tiebreak and index ascending."""
        return (-self.key, self.tiebreak, self.index)


@dataclass(frozen=True, slots=True)
class FrontierPoint:
    eta: float
    schedule: Schedule
    expected_reward: float
    expected_finish_time: float
    objective: float


class CloudPoint(NamedTuple):
    schedule: Schedule
    expected_reward: float
    expected_finish_time: float


def sort_key(opp: Opportunity, eta: float, index: int = 0) -> SortKey:
    eta = check_eta(eta)
    ratio = opp.mean_response_time / opp.success_prob
    return SortKey(opp.reward - eta * ratio, ratio, index)


def sort_keys(inst: Instance, eta: float) -> list[SortKey]:
    return [sort_key(opp, eta, k) for k, opp in enumerate(inst)]


def solve(inst: Instance, eta: float) -> EvaluatedSchedule:
    """Maximise expected reward minus ``eta`` times expected finish time.

    Opportunities are tried in non-increasing order of their sort key, which
    is optimal; ties go to the smaller waiting ratio, then the smaller index.
    """
    keys = sort_keys(inst, eta)
    order = tuple(k.index for k in sorted(keys, key=SortKey.rank))
    return evaluate(inst, Schedule(order), eta)


# --- exhaustive enumeration -------------------------------------------------


@lru_cache(maxsize=16)
def _lex_permutations(n: int) -> np.ndarray:
    perms = np.array(list(permutations(range(n))), dtype=np.intp).reshape(math.factorial(n), n)
    perms.setflags(write=False)
    return perms


def _prefix_blocks(n: int):
    """Yield the permutations of range(n) in lexicographic order, one block per first element."""
    tail = _lex_permutations(n - 1)
    for first in range(n):
        rest = np.array([x for x in range(n) if x != first], dtype=np.intp)
        block = np.empty((tail.shape[0], n), dtype=np.intp)
        block[:, 0] = first
        block[:, 1:] = rest[tail]
        yield block


def _evaluate_block(perms: np.ndarray, inst: Instance) -> tuple[np.ndarray, np.ndarray]:
    # Same operation order as analytics._reward_and_time, so values agree bit for bit.
    r = np.asarray(inst.rewards)
    p = np.asarray(inst.probs)
    th = np.asarray(inst.mean_times)
    m, n = perms.shape
    reach = np.ones(m)
    prefix = np.zeros(m)
    r_bar = np.zeros(m)
    t_acc = np.zeros(m)
    for k in range(n):
        idx = perms[:, k]
        pk = p[idx]
        c = reach * pk
        prefix = prefix + th[idx]
        r_bar = r_bar + r[idx] * c
        t_acc = t_acc + c * prefix
        reach = reach * (1.0 - pk)
    return r_bar, reach * prefix + t_acc


def _check_size(inst: Instance, max_n: int) -> None:
    if inst.n > max_n:
        raise InstanceTooLarge(
            f"n={inst.n} exceeds max_n={max_n}: exhaustive search visits n! = {math.factorial(inst.n):,} "
            f"orders (10! is already 3,628,800); raise max_n explicitly to proceed"
        )


def _block_best(block: np.ndarray, inst: Instance, eta: float) -> tuple[float, tuple[int, ...]]:
    r_bar, t_bar = _evaluate_block(block, inst)
    j = r_bar - eta * t_bar
    best = int(np.argmax(j))  # first maximiser, i.e. lexicographically smallest in the block
    return float(j[best]), tuple(int(i) for i in block[best])


def brute_force(inst: Instance, eta: float, max_n: int = DEFAULT_MAX_N, workers: int = 1) -> EvaluatedSchedule:
    """Exhaustive optimum over all n! orders; exact ties go to the lexicographically smallest order.

    The output does not depend on ``workers``.
    """
    eta = check_eta(eta)
    _check_size(inst, max_n)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(lambda b: _block_best(b, inst, eta), _prefix_blocks(inst.n)))
    else:
        results = [_block_best(b, inst, eta) for b in _prefix_blocks(inst.n)]
    # blocks arrive in lexicographic order, so the earliest maximiser wins ties
    best_j, best_order = results[0]
    for j, order in results[1:]:
        if j > best_j:
            best_j, best_order = j, order
    return evaluate(inst, Schedule(best_order), eta)


def enumerate_cloud(inst: Instance, max_n: int = DEFAULT_MAX_N) -> list[CloudPoint]:
    """(R̄, T̄) of every order, in lexicographic order of the schedules."""
    _check_size(inst, max_n)
    out = []
    for block in _prefix_blocks(inst.n):
        r_bar, t_bar = _evaluate_block(block, inst)
        for row, r, t in zip(block.tolist(), r_bar.tolist(), t_bar.tolist()):
            out.append(CloudPoint(Schedule(tuple(row)), r, t))
    return out


# --- tradeoff frontier and Pareto filtering ---------------------------------


def eta_grid(eta_min: float, eta_max: float, steps: int) -> list[float]:
    eta_min, eta_max = check_eta(eta_min), check_eta(eta_max)
    if eta_min > eta_max:
        raise InvalidRange(f"eta_min={eta_min} exceeds eta_max={eta_max}")
    if isinstance(steps, bool) or int(steps) != steps or steps < 1:
        raise InvalidSteps(f"steps must be an integer >= 1, got {steps}")
    if steps == 1:
        return [eta_min]
    return np.linspace(eta_min, eta_max, int(steps)).tolist()


def frontier_sweep(inst: Instance, eta_min: float, eta_max: float, steps: int) -> list[FrontierPoint]:
    """Solve on a uniform eta grid, collapsing runs of identical schedules."""
    points: list[FrontierPoint] = []
    for eta in eta_grid(eta_min, eta_max, steps):
        ev = solve(inst, eta)
        if points and points[-1].schedule == ev.schedule:
            continue
        points.append(FrontierPoint(eta, ev.schedule, ev.expected_reward, ev.expected_finish_time, ev.objective))
    return points


FRONTIER_COLUMNS = ("eta", "schedule", "expected_reward", "expected_finish_time", "objective")


def frontier_to_csv(points: Sequence[FrontierPoint], fmt=repr) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(FRONTIER_COLUMNS)
    for pt in points:
        writer.writerow(
            [fmt(pt.eta), str(pt.schedule), fmt(pt.expected_reward), fmt(pt.expected_finish_time), fmt(pt.objective)]
        )
    return buf.getvalue()


def pareto_filter(points: Iterable[tuple[float, float]]) -> list[tuple[float, float]]:
    """Non-dominated (T̄, R̄) pairs: shorter time and larger reward are both better.

    Exact duplicates are kept once; the result is sorted by time ascending.
    """
    pts = [(float(t), float(r)) for t, r in points]
    if not pts:
        raise EmptyInput("pareto_filter needs at least one point")
    pts.sort(key=lambda tr: (tr[0], -tr[1]))
    kept = []
    best_r = -math.inf
    for t, r in pts:
        if r > best_r:
            kept.append((t, r))
            best_r = r
    return kept


def pareto_mask(points: Sequence[tuple[float, float]]) -> list[bool]:
    front = set(pareto_filter(points))
    return [(float(t), float(r)) in front for t, r in points]


# --- sequential decisions ---------------------------------------------------


def sequential_replan(inst: Instance, eta: float, failed_prefix: Sequence[int] = ()) -> tuple[int, ...]:
    """Best order for the opportunities not yet rejected.

    ``failed_prefix`` holds 0-based indices already tried without success;
    the remaining subproblem is solved afresh and its order returned with
    indices into the original instance.
    """
    check_eta(eta)
    failed = [int(i) for i in failed_prefix]
    for i in failed:
        if not 0 <= i < inst.n:
            raise UnknownIndex(f"index {i + 1} is not in 1..{inst.n}")
    if len(set(failed)) != len(failed):
        raise UnknownIndex(f"repeated index in failed prefix {[i + 1 for i in failed]}")
    remaining = [k for k in range(inst.n) if k not in set(failed)]
    if not remaining:
        return ()
    sub = Instance(tuple(inst[k] for k in remaining))
    return tuple(remaining[k] for k in solve(sub, eta).schedule.order)
