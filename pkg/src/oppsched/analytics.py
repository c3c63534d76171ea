"""Exact evaluation of a fixed trying order.

Everything here is plain double-precision arithmetic in a fixed sequential
order, so results are reproducible bit for bit; the vectorised permutation
evaluator in :mod:`oppsched.solver` follows the same operation order.
"""

from __future__ import annotations

import csv
import io
import math
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .errors import NegativeEta, NegativeTime, UnsupportedDistribution
from .model import Deterministic, Instance, Schedule


@dataclass(frozen=True, slots=True)
class SuccessCoefficients:
    """First-success probabilities per position, plus the all-fail probability.

    ``first_success[i]`` is the probability that the first acceptance happens at
    trial ``i + 1``; ``all_fail`` is the probability that every trial is rejected.
    """

    first_success: tuple[float, ...]
    all_fail: float

    @property
    def c(self) -> tuple[float, ...]:
        """All n + 1 coefficients, the all-fail one last."""
        return self.first_success + (self.all_fail,)

    def total(self) -> float:
        return math.fsum(self.c)


@dataclass(frozen=True, slots=True)
class EvaluatedSchedule:
    schedule: Schedule
    expected_reward: float
    expected_finish_time: float
    eta: float
    objective: float

    def to_dict(self) -> dict:
        return {
            "schedule": str(self.schedule),
            "eta": self.eta,
            "expected_reward": self.expected_reward,
            "expected_finish_time": self.expected_finish_time,
            "objective": self.objective,
        }


@dataclass(frozen=True, slots=True)
class TimePoint:
    """Reward and finish-time laws at time ``t``.

    ``absorb_probs[i]`` is the probability that by time ``t`` the game has
    ended with acceptance at schedule position ``i + 1``.
    """

    t: float
    expected_reward: float
    finish_cdf: float
    zero_reward_prob: float
    absorb_probs: tuple[float, ...]


def check_eta(eta: float) -> float:
    eta = float(eta)
    if not (math.isfinite(eta) and eta >= 0):
        raise NegativeEta(f"eta must be finite and >= 0, got {eta}")
    return eta


def success_coefficients(inst: Instance, sched: Schedule) -> SuccessCoefficients:
    sched.check(inst)
    probs = inst.probs
    first = []
    reach = 1.0  # probability that trial k is attempted
    for k in sched.order:
        first.append(reach * probs[k])
        reach = reach * (1.0 - probs[k])
    return SuccessCoefficients(tuple(first), reach)


def _prefix_times(inst: Instance, sched: Schedule) -> list[float]:
    thetas = inst.mean_times
    out = []
    acc = 0.0
    for k in sched.order:
        acc = acc + thetas[k]
        out.append(acc)
    return out


def _reward_and_time(inst: Instance, sched: Schedule) -> tuple[float, float]:
    coeffs = success_coefficients(inst, sched)
    rewards = inst.rewards
    prefix = _prefix_times(inst, sched)
    r_bar = 0.0
    t_acc = 0.0
    for k, c, s in zip(sched.order, coeffs.first_success, prefix):
        r_bar = r_bar + rewards[k] * c
        t_acc = t_acc + c * s
    t_bar = coeffs.all_fail * prefix[-1] + t_acc
    return r_bar, t_bar


def expected_reward(inst: Instance, sched: Schedule) -> float:
    """Eventual expected reward of trying opportunities in ``sched`` order."""
    return _reward_and_time(inst, sched)[0]


def expected_finish_time(inst: Instance, sched: Schedule) -> float:
    """Expected time until the game ends, by acceptance or exhaustion.

    Depends only on the mean response times, not on their distributions.
    """
    return _reward_and_time(inst, sched)[1]


def evaluate(inst: Instance, sched: Schedule, eta: float) -> EvaluatedSchedule:
    eta = check_eta(eta)
    r_bar, t_bar = _reward_and_time(inst, sched)
    return EvaluatedSchedule(sched, r_bar, t_bar, eta, r_bar - eta * t_bar)


def time_curves(inst: Instance, sched: Schedule, ts: Iterable[float]) -> list[TimePoint]:
    """Closed-form reward/finish-time laws at each ``t`` for deterministic response times."""
    sched.check(inst)
    ts = [float(t) for t in ts]
    if any(not (t >= 0) for t in ts):
        raise NegativeTime("time points must be >= 0")
    for opp in inst:
        if not isinstance(opp.response_dist, Deterministic):
            raise UnsupportedDistribution(
                f"closed-form curves need deterministic response times; opportunity {opp.id!r} "
                f"is {opp.dist_code!r} (use the simulator's empirical curves)"
            )
    coeffs = success_coefficients(inst, sched)
    prefix = _prefix_times(inst, sched)
    rewards = [inst.rewards[k] for k in sched.order]
    points = []
    for t in ts:
        reached = [1.0 if t >= s else 0.0 for s in prefix]
        absorb = tuple(c * u for c, u in zip(coeffs.first_success, reached))
        exp_r = 0.0
        finish = 0.0
        for r, a in zip(rewards, absorb):
            exp_r = exp_r + r * a
            finish = finish + a
        finish = min(1.0, coeffs.all_fail * reached[-1] + finish)
        points.append(TimePoint(t, exp_r, finish, 1.0 - math.fsum(absorb), absorb))
    return points


CURVE_COLUMNS = ("t", "expected_reward", "finish_cdf", "zero_reward_prob")


def curves_to_csv(points: Sequence[TimePoint], fmt=repr) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CURVE_COLUMNS)
    for p in points:
        writer.writerow([fmt(p.t), fmt(p.expected_reward), fmt(p.finish_cdf), fmt(p.zero_reward_prob)])
    return buf.getvalue()
