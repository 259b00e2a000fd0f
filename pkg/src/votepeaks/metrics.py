"""Percentage arithmetic, jitter, and integer-window classification."""

from dataclasses import dataclass
from enum import Enum
from math import floor, isfinite
from typing import Optional

from .errors import UndefinedMetricError


class MetricKind(Enum):
    """Which station-level percentage is being analysed."""

    TURNOUT = "turnout"              # ballots / registered
    LEADER_RESULT = "leader_result"  # leader_votes / ballots
    LEADER_SHARE = "leader_share"    # leader_votes / registered

    @property
    def needs_ballots(self) -> bool:
        return self is MetricKind.LEADER_RESULT


@dataclass(frozen=True)
class JitterSpec:
    """Uniform numerator jitter and how many independent draws to average."""

    enabled: bool = True
    draws: int = 100

    def __post_init__(self):
        if self.draws < 1:
            raise ValueError(f"jitter draws must be >= 1, got {self.draws}")

    @property
    def effective_draws(self) -> int:
        return self.draws if self.enabled else 1


@dataclass(frozen=True)
class IntegerBand:
    """Window around whole percentages that counts as an integer hit.

    The default halfwidth of 0.05 makes the window exactly one 0.1%-wide
    histogram bin centred on the integer.  0% and 100% are outside the
    default range because tiny stations and genuinely full turnout pile up
    there naturally.
    """

    halfwidth: float = 0.05
    lo: int = 1
    hi: int = 99

    def __post_init__(self):
        if not 0.0 < self.halfwidth <= 0.5:
            raise ValueError(f"halfwidth must be in (0, 0.5], got {self.halfwidth}")
        if not 0 <= self.lo <= self.hi <= 100:
            raise ValueError(f"need 0 <= lo <= hi <= 100, got [{self.lo}, {self.hi}]")


def percent(numerator: int, denominator: int, jitter_value: float = 0.0) -> float:
    """100 * (numerator + jitter_value) / denominator.

    The jitter value comes from U(-0.5, 0.5) and smears the integer
    numerator over one count unit, which removes integer-division artifacts
    from downstream histograms and counts.
    """
    if denominator <= 0:
        raise UndefinedMetricError(
            f"percentage undefined for denominator {denominator}")
    if not -0.5 <= jitter_value <= 0.5:
        raise ValueError(f"jitter value out of [-0.5, 0.5]: {jitter_value}")
    return (numerator + jitter_value) * 100.0 / denominator


def integer_hit(p: float, band: IntegerBand = IntegerBand()) -> Optional[int]:
    """The integer k in [band.lo, band.hi] with |p - k| <= halfwidth, or None.

    At most one such k exists because halfwidth <= 0.5.
    """
    if not isfinite(p):
        raise ValueError(f"percentage must be finite, got {p}")
    k = int(floor(p + 0.5))
    if band.lo <= k <= band.hi and abs(p - k) <= band.halfwidth:
        return k
    return None


def is_integer_hit(p: float, band: IntegerBand = IntegerBand()) -> bool:
    return integer_hit(p, band) is not None


def target_ballot_count(registered: int, target_percent: float) -> int:
    """Ballot count a forger reports to hit target_percent of registered.

    Rounds half away from zero: 1755 registered at an 85% target gives
    1491.75, reported as 1492.
    """
    if registered < 0:
        raise ValueError(f"registered must be >= 0, got {registered}")
    if not 0.0 <= target_percent <= 100.0:
        raise ValueError(f"target percent out of [0, 100]: {target_percent}")
    return min(registered, int(floor(registered * target_percent / 100.0 + 0.5)))


def station_percent(record, metric: MetricKind, jitter_value: float = 0.0) -> float:
    """Dispatch percent() to the metric's numerator and denominator."""
    if metric is MetricKind.TURNOUT:
        return percent(record.ballots, record.registered, jitter_value)
    if metric is MetricKind.LEADER_RESULT:
        return percent(record.leader_votes, record.ballots, jitter_value)
    if metric is MetricKind.LEADER_SHARE:
        return percent(record.leader_votes, record.registered, jitter_value)
    raise TypeError(f"unknown metric {metric!r}")


def metric_fractions(metric: MetricKind, registered, ballots, leader_votes):
    """(numerator, denominator) arrays for a metric, for vectorized callers."""
    if metric is MetricKind.TURNOUT:
        return ballots, registered
    if metric is MetricKind.LEADER_RESULT:
        return leader_votes, ballots
    if metric is MetricKind.LEADER_SHARE:
        return leader_votes, registered
    raise TypeError(f"unknown metric {metric!r}")
