"""Optimal ordering of sequential stochastic opportunities.

Each opportunity pays a reward with some probability after a random response
time, and only one can be pending at a time. The library evaluates trying
orders exactly, finds the order maximising expected reward minus ``eta``
times expected finish time, and checks everything by exhaustive search and
Monte Carlo simulation.
"""

from .analytics import (
    EvaluatedSchedule,
    SuccessCoefficients,
    TimePoint,
    evaluate,
    expected_finish_time,
    expected_reward,
    success_coefficients,
    time_curves,
)
from .errors import OppschedError
from .fixtures import load_fixture
from .model import (
    Deterministic,
    Exponential,
    Instance,
    Opportunity,
    Schedule,
    parse_instance_file,
    serialize_instance,
    validate_instance,
)
from .simulator import GameOutcome, SimulationSummary, empirical_curves, play_once, simulate
from .solver import (
    FrontierPoint,
    SortKey,
    brute_force,
    enumerate_cloud,
    frontier_sweep,
    pareto_filter,
    sequential_replan,
    solve,
    sort_key,
)

__version__ = "0.1.0"
