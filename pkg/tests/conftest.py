from __future__ import annotations

import itertools
import math

import numpy as np
import pytest
from hypothesis import settings
from hypothesis import strategies as st

from oppsched import Instance, Opportunity, Schedule, load_fixture

settings.register_profile("repo", deadline=None)
settings.load_profile("repo")


def make_instance(rows, dist="exp") -> Instance:
    """rows of (reward, prob, mean_time); ids are 1-based positions."""
    return Instance(tuple(Opportunity.create(str(k + 1), r, p, th, dist) for k, (r, p, th) in enumerate(rows)))


def random_instance(rng: np.random.Generator, n: int, dist="exp") -> Instance:
    """Ranges used by the oracle-equivalence criterion: r in [0,30], p in (0.02,1], theta in (0.5,50]."""
    rows = []
    for _ in range(n):
        r = rng.uniform(0, 30)
        p = 1.0 - rng.uniform(0, 0.98)  # (0.02, 1]
        th = 50.0 - rng.uniform(0, 49.5)  # (0.5, 50]
        rows.append((r, p, th))
    return make_instance(rows, dist)


def outcome_oracle(inst: Instance, sched: Schedule):
    """Expected reward, expected finish time and finish-time atoms by summing over
    all 2^n success/failure patterns (deterministic times at the means)."""
    n = inst.n
    order = sched.order
    r_bar = 0.0
    t_bar = 0.0
    atoms = []  # (finish_time, accepted position or None, probability)
    for pattern in itertools.product((True, False), repeat=n):
        prob = 1.0
        for k, ok in zip(order, pattern):
            p = inst[k].success_prob
            prob *= p if ok else (1.0 - p)
        if prob == 0.0:
            continue
        first = next((pos for pos, ok in enumerate(pattern) if ok), None)
        stop = n if first is None else first + 1
        finish = sum(inst[k].mean_response_time for k in order[:stop])
        reward = 0.0 if first is None else inst[order[first]].reward
        r_bar += prob * reward
        t_bar += prob * finish
        atoms.append((finish, first, prob))
    return r_bar, t_bar, atoms


@st.composite
def instances(draw, min_n=1, max_n=7, dist=st.sampled_from(["det", "exp"])):
    n = draw(st.integers(min_n, max_n))
    rows = []
    for _ in range(n):
        r = draw(st.floats(0, 30, allow_nan=False))
        p = draw(st.floats(0.02, 1.0, exclude_min=True))
        th = draw(st.floats(0.5, 50, exclude_min=True))
        rows.append((r, p, th))
    return make_instance(rows, draw(dist))


@st.composite
def instance_and_schedule(draw, **kw):
    inst = draw(instances(**kw))
    order = draw(st.permutations(range(inst.n)))
    return inst, Schedule(tuple(order))


@pytest.fixture(scope="session")
def table1() -> Instance:
    return load_fixture("table1")


@pytest.fixture(scope="session")
def random20() -> Instance:
    return load_fixture("random20")


@pytest.fixture
def hand2() -> Instance:
    """r=(1,2), p=(0.5,0.5), theta=(1,2) with deterministic times."""
    return make_instance([(1, 0.5, 1), (2, 0.5, 2)], dist="det")


SIGMA0_ONE_BASED = (9, 4, 12, 1, 16, 17, 20, 7, 10, 6, 18, 11, 13, 15, 2, 5, 8, 3, 14, 19)
SIGMA05_ONE_BASED = (12, 16, 7, 11, 2, 17, 1, 6, 3, 4, 14, 9, 15, 10, 19, 20, 8, 18, 5, 13)


# --- acceptance reporting ---------------------------------------------------

_ACCEPTANCE: list[tuple[str, str, str]] = []


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(label): exit criterion; reported in the terminal summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    marker = item.get_closest_marker("acceptance")
    if marker is None:
        return
    if rep.when == "call" or (rep.when == "setup" and rep.outcome != "passed"):
        _ACCEPTANCE.append((marker.args[0], "PASS" if rep.passed else "FAIL", item.name))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for label, status, name in _ACCEPTANCE:
        terminalreporter.write_line(f"{status}  {label}  ({name})")
