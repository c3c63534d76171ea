"""Seeded Monte Carlo play of the sequential opportunity game.

Replications are grouped in fixed blocks of ``BLOCK_SIZE``. Block ``b`` draws
from its own Philox stream keyed by ``(seed, b)``, and replication ``k`` always
consumes row ``k % BLOCK_SIZE`` of block ``k // BLOCK_SIZE``: ``2n`` uniforms,
the first ``n`` deciding success at each schedule position and the last ``n``
its response time. Results therefore depend only on ``(seed, k)``, never on
how blocks are spread over threads.
"""

from __future__ import annotations

import json
import math
from collections import Counter
from collections.abc import Iterable
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .analytics import TimePoint
from .errors import InvalidReplications, NegativeTime
from .model import Instance, Schedule

BLOCK_SIZE = 8192
_QUANTILES = (0.05, 0.25, 0.5, 0.75, 0.95)


@dataclass(frozen=True, slots=True)
class GameOutcome:
    """Result of one play; ``accepted_position`` is 1-based, ``None`` if every trial failed."""

    accepted_position: int | None
    reward: float
    finish_time: float


@dataclass(frozen=True)
class SimulationRun:
    """Raw per-replication results (``positions`` 0-based, -1 for no acceptance)."""

    positions: np.ndarray
    rewards: np.ndarray
    finish_times: np.ndarray

    def __len__(self) -> int:
        return len(self.rewards)


@dataclass(frozen=True)
class SimulationSummary:
    replications: int
    mean_reward: float
    mean_finish_time: float
    reward_std_error: float
    finish_time_std_error: float
    reward_histogram: dict[float, int]
    finish_time_quantiles: dict[float, float]
    finish_time_samples: np.ndarray = field(repr=False, compare=False)

    def to_dict(self) -> dict:
        return {
            "replications": self.replications,
            "mean_reward": self.mean_reward,
            "mean_finish_time": self.mean_finish_time,
            "reward_std_error": self.reward_std_error,
            "finish_time_std_error": self.finish_time_std_error,
            "reward_histogram": {repr(k): v for k, v in sorted(self.reward_histogram.items())},
            "finish_time_quantiles": {repr(k): v for k, v in self.finish_time_quantiles.items()},
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


def replication_rng(seed: int, replication: int, n: int) -> np.random.Generator:
    """Generator positioned at the first draw of a replication for an ``n``-opportunity game."""
    block, row = divmod(replication, BLOCK_SIZE)
    rng = block_rng(seed, block)
    if row:
        rng.random(row * 2 * n)  # skip earlier rows of the block
    return rng


def _check_replications(replications: int) -> int:
    if isinstance(replications, bool) or int(replications) != replications or replications < 1:
        raise InvalidReplications(f"replications must be an integer >= 1, got {replications}")
    return int(replications)


def play_once(inst: Instance, sched: Schedule, rng: np.random.Generator) -> GameOutcome:
    """Play one game, consuming exactly ``2n`` uniforms from ``rng``."""
    sched.check(inst)
    n = inst.n
    u = rng.random(2 * n)
    clock = 0.0
    for pos, k in enumerate(sched.order):
        opp = inst[k]
        clock = clock + float(opp.response_dist.from_uniform(u[n + pos]))
        if u[pos] < opp.success_prob:
            return GameOutcome(pos + 1, opp.reward, clock)
    return GameOutcome(None, 0.0, clock)


def _play_block(inst: Instance, sched: Schedule, rng: np.random.Generator, m: int):
    n = inst.n
    order = sched.order
    u = rng.random((m, 2 * n))
    probs = np.array([inst[k].success_prob for k in order])
    rewards = np.array([inst[k].reward for k in order])
    times = np.empty((m, n))
    for pos, k in enumerate(order):
        times[:, pos] = inst[k].response_dist.from_uniform(u[:, n + pos])
    clock = np.cumsum(times, axis=1)
    success = u[:, :n] < probs
    accepted = success.any(axis=1)
    first = np.argmax(success, axis=1)
    rows = np.arange(m)
    positions = np.where(accepted, first, -1)
    finish = np.where(accepted, clock[rows, first], clock[:, -1])
    reward = np.where(accepted, rewards[first], 0.0)
    return positions, reward, finish


def run_replications(
    inst: Instance, sched: Schedule, replications: int, seed: int, threads: int = 1
) -> SimulationRun:
    sched.check(inst)
    replications = _check_replications(replications)
    sizes = [min(BLOCK_SIZE, replications - start) for start in range(0, replications, BLOCK_SIZE)]

    def job(b: int):
        return _play_block(inst, sched, block_rng(seed, b), sizes[b])

    if threads > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(job, range(len(sizes))))
    else:
        parts = [job(b) for b in range(len(sizes))]
    positions, rewards, finish = (np.concatenate(col) for col in zip(*parts))
    return SimulationRun(positions, rewards, finish)


def _mean_and_se(x: np.ndarray) -> tuple[float, float]:
    n = len(x)
    mean = math.fsum(x) / n
    var = math.fsum((x - mean) ** 2) / n
    return mean, math.sqrt(var / n)


def summarize(run: SimulationRun) -> SimulationSummary:
    mean_r, se_r = _mean_and_se(run.rewards)
    mean_t, se_t = _mean_and_se(run.finish_times)
    hist = Counter(run.rewards.tolist())
    qs = np.quantile(run.finish_times, _QUANTILES)
    return SimulationSummary(
        replications=len(run),
        mean_reward=mean_r,
        mean_finish_time=mean_t,
        reward_std_error=se_r,
        finish_time_std_error=se_t,
        reward_histogram=dict(sorted(hist.items())),
        finish_time_quantiles={q: float(v) for q, v in zip(_QUANTILES, qs)},
        finish_time_samples=run.finish_times,
    )


def simulate(inst: Instance, sched: Schedule, replications: int, seed: int, threads: int = 1) -> SimulationSummary:
    """Monte Carlo estimate of the reward and finish-time laws of ``sched``."""
    return summarize(run_replications(inst, sched, replications, seed, threads))


def empirical_curves(
    inst: Instance,
    sched: Schedule,
    ts: Iterable[float],
    replications: int,
    seed: int,
    threads: int = 1,
) -> list[TimePoint]:
    """Empirical counterpart of :func:`oppsched.analytics.time_curves`, valid for any response law."""
    ts = [float(t) for t in ts]
    if any(not (t >= 0) for t in ts):
        raise NegativeTime("time points must be >= 0")
    run = run_replications(inst, sched, replications, seed, threads)
    n, total = inst.n, len(run)
    points = []
    for t in ts:
        done = run.finish_times <= t
        absorbed = np.bincount(run.positions[done & (run.positions >= 0)], minlength=n)
        absorb = tuple(int(a) / total for a in absorbed)
        points.append(
            TimePoint(
                t,
                math.fsum(run.rewards[done]) / total,
                int(done.sum()) / total,
                1.0 - math.fsum(absorb),
                absorb,
            )
        )
    return points
