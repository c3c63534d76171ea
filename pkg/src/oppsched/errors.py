"""Exception hierarchy shared by every module.

Each domain error carries its class name as a stable, machine-readable code
(``err.code``), which the CLI prints on failure.
"""

from __future__ import annotations


class OppschedError(ValueError):
    """Base class for all domain errors raised by the library."""

    @property
    def code(self) -> str:
        return type(self).__name__


# model
class EmptyInstance(OppschedError):
    pass


class InvalidProbability(OppschedError):
    pass


class InvalidReward(OppschedError):
    pass


class InvalidTime(OppschedError):
    pass


class DuplicateId(OppschedError):
    pass


class ParseError(OppschedError):
    pass


class InvalidSchedule(OppschedError):
    pass


# analytics
class NegativeEta(OppschedError):
    pass


class NegativeTime(OppschedError):
    pass


class UnsupportedDistribution(OppschedError):
    pass


# solver
class InstanceTooLarge(OppschedError):
    pass


class InvalidRange(OppschedError):
    pass


class InvalidSteps(OppschedError):
    pass


class EmptyInput(OppschedError):
    pass


class UnknownIndex(OppschedError):
    pass


# simulator
class InvalidReplications(OppschedError):
    pass
