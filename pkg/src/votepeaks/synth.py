"""Synthetic elections: honest generation and round-percentage fraud injection.

The honest generator draws each station's true rates from Beta distributions
(cross-station heterogeneity) and realizes counts through binomials, so by
construction the data satisfy the fraud-free null.  Fraud injection then
retargets a seeded random subset of stations to whole-percent values the way
the forgery works in practice: pick a round target, back out the count that
produces it, and record the ground truth.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import floor, log
from typing import Dict, List, Optional, Tuple

import numpy as np

from . import rng
from .dataset import ElectionDataset, StationRecord, from_records
from .metrics import target_ballot_count


def default_target_weights() -> Dict[int, float]:
    """Integer targets weighted toward round multiples of five.

    Multiples of 5 in [60, 95] get double weight; the other integers in
    [50, 99] unit weight.
    """
    weights = {k: 1.0 for k in range(50, 100)}
    for k in range(60, 96, 5):
        weights[k] = 2.0
    return weights


@dataclass(frozen=True)
class SynthSpec:
    station_count: int
    median_registered: float = 1000.0
    sigma_registered: float = 0.7
    min_registered: int = 10
    max_registered: int = 5000
    turnout_alpha: float = 7.0
    turnout_beta: float = 3.0
    leader_alpha: float = 6.0
    leader_beta: float = 4.0
    region_count: int = 10
    seed: int = 0

    def __post_init__(self):
        if self.station_count < 1:
            raise ValueError(
                f"station_count must be >= 1, got {self.station_count}")
        for name in ("median_registered", "sigma_registered", "turnout_alpha",
                     "turnout_beta", "leader_alpha", "leader_beta"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be > 0")
        if not 1 <= self.min_registered <= self.max_registered:
            raise ValueError("need 1 <= min_registered <= max_registered")
        if self.region_count < 1:
            raise ValueError("region_count must be >= 1")


@dataclass(frozen=True)
class FraudSpec:
    fraction: float
    target_metric: str = "turnout"   # turnout | leader_result | both
    target_weights: Optional[Dict[int, float]] = None
    seed: int = 0

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction out of [0, 1]: {self.fraction}")
        if self.target_metric not in ("turnout", "leader_result", "both"):
            raise ValueError(
                f"target_metric must be turnout, leader_result or both, "
                f"got {self.target_metric!r}")
        weights = self.weights()
        if any(w < 0 for w in weights.values()) or not any(
                w > 0 for w in weights.values()):
            raise ValueError("target weights must be non-negative with at "
                             "least one positive entry")

    def weights(self) -> Dict[int, float]:
        return dict(self.target_weights) if self.target_weights else \
            default_target_weights()


@dataclass(frozen=True)
class StationLabel:
    station_id: str
    falsified: bool
    # parallel tuples of falsified metrics and their integer targets
    target_metrics: Tuple[str, ...] = ()
    target_percents: Tuple[int, ...] = ()


@dataclass(frozen=True)
class GroundTruth:
    labels: Tuple[StationLabel, ...]

    @property
    def falsified_count(self) -> int:
        return sum(1 for l in self.labels if l.falsified)

    def write_csv(self, path) -> None:
        lines = ["station_id,label,target_metric,target_percent"]
        for l in self.labels:
            if l.falsified:
                lines.append(f"{l.station_id},falsified,"
                             f"{';'.join(l.target_metrics)},"
                             f"{';'.join(str(t) for t in l.target_percents)}")
            else:
                lines.append(f"{l.station_id},honest,,")
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")


def generate_honest(spec: SynthSpec, election_id: str = "synthetic") -> ElectionDataset:
    """Honest election: log-normal sizes, Beta rates, binomial counts."""
    g = rng.philox(spec.seed, rng.DOMAIN_SYNTH)
    n_st = spec.station_count
    sizes = g.lognormal(mean=log(spec.median_registered),
                        sigma=spec.sigma_registered, size=n_st)
    registered = np.clip(np.rint(sizes), spec.min_registered,
                         spec.max_registered).astype(np.int64)
    turnout_rate = g.beta(spec.turnout_alpha, spec.turnout_beta, size=n_st)
    ballots = g.binomial(registered, turnout_rate)
    leader_rate = g.beta(spec.leader_alpha, spec.leader_beta, size=n_st)
    leader = g.binomial(ballots, leader_rate)
    records = []
    for i in range(n_st):
        region = f"region-{i % spec.region_count:03d}"
        records.append(StationRecord(
            region=region,
            territory=f"{region}-tik-{(i // spec.region_count) % 3}",
            station_id=f"ps-{i + 1:06d}",
            registered=int(registered[i]),
            ballots=int(ballots[i]),
            leader_votes=int(leader[i]),
        ))
    return from_records(election_id, records)


def _round_half_away(x: float) -> int:
    return int(floor(x + 0.5)) if x >= 0 else -int(floor(-x + 0.5))


def _falsify_turnout(r: StationRecord, target: int) -> StationRecord:
    new_ballots = target_ballot_count(r.registered, target)
    if r.ballots > 0:
        scaled = _round_half_away(r.leader_votes * new_ballots / r.ballots)
        new_leader = min(scaled, new_ballots)
    else:
        new_leader = 0
    return StationRecord(r.region, r.territory, r.station_id,
                         r.registered, new_ballots, new_leader)


def _falsify_leader(r: StationRecord, target: int) -> StationRecord:
    new_leader = target_ballot_count(r.ballots, target)
    return StationRecord(r.region, r.territory, r.station_id,
                         r.registered, r.ballots, new_leader)


def inject_fraud(dataset: ElectionDataset, fraud: FraudSpec):
    """Retarget a random station subset to integer percentages.

    Turnout targets replace the ballot count with the value that reports the
    target percent, rescaling leader votes proportionally (rounded half away
    from zero, clamped to the new ballot count) so the leader share stays
    plausible.  Leader-result targets replace the leader count only.

    Returns (falsified dataset, GroundTruth); honest stations are untouched.
    """
    g = rng.philox(fraud.seed, rng.DOMAIN_FRAUD)
    n = len(dataset)
    n_falsify = int(floor(fraud.fraction * n + 0.5))
    chosen = set(g.choice(n, size=n_falsify, replace=False).tolist()) \
        if n_falsify else set()
    weights = fraud.weights()
    targets = np.array(sorted(weights), dtype=np.int64)
    probs = np.array([weights[int(k)] for k in targets], dtype=float)
    probs /= probs.sum()

    records: List[StationRecord] = []
    labels: List[StationLabel] = []
    for i, r in enumerate(dataset.records):
        if i not in chosen:
            records.append(r)
            labels.append(StationLabel(r.station_id, False))
            continue
        metrics = []
        picked = []
        if fraud.target_metric in ("turnout", "both"):
            t = int(g.choice(targets, p=probs))
            r = _falsify_turnout(r, t)
            metrics.append("turnout")
            picked.append(t)
        if fraud.target_metric in ("leader_result", "both"):
            t = int(g.choice(targets, p=probs))
            r = _falsify_leader(r, t)
            metrics.append("leader_result")
            picked.append(t)
        r.validate()
        records.append(r)
        labels.append(StationLabel(r.station_id, True,
                                   tuple(metrics), tuple(picked)))
    out = from_records(dataset.election_id, records)
    return out, GroundTruth(tuple(labels))
