"""Integer-percentage anomaly statistic against a binomial Monte Carlo null.

The observed statistic counts stations whose turnout or leader-result
percentage (numerator-jittered) falls within a narrow window of a whole
percent, averaged over independent jitter draws.  The null model re-simulates
every station's counts from binomials at the station's own observed rates
(ballots* ~ Binomial(registered, ballots/registered) and, nested, leader* ~
Binomial(ballots*, leader_votes/ballots)), counting each iteration with one
fresh jitter draw per metric.  Excess is observed minus the Monte Carlo mean;
an observed value above the 99.9th percentile of the null counts has
empirical p < 0.001.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from . import _kernels, rng
from .dataset import ElectionDataset, FilterSpec, StationRecord, apply_filter
from .errors import EmptyDatasetError
from .metrics import IntegerBand, JitterSpec
from .rng import Substream


@dataclass(frozen=True)
class AnomalyConfig:
    iterations: int = 10000
    seed: int = 0
    band: IntegerBand = field(default_factory=IntegerBand)
    jitter: JitterSpec = field(default_factory=JitterSpec)
    # Unlike histograms, anomaly counting keeps 100%-turnout stations by
    # default; 100 itself sits outside the default integer band anyway.
    filter: FilterSpec = field(
        default_factory=lambda: FilterSpec(exclude_full_turnout=False))
    percentile: float = 99.9

    def __post_init__(self):
        if self.iterations < 100:
            raise ValueError(
                f"iterations must be >= 100, got {self.iterations}")
        if not 50.0 < self.percentile < 100.0:
            raise ValueError(
                f"percentile must be in (50, 100), got {self.percentile}")

    def echo(self) -> dict:
        return {
            "iterations": self.iterations,
            "seed": self.seed,
            "band": {"halfwidth": self.band.halfwidth,
                     "lo": self.band.lo, "hi": self.band.hi},
            "jitter": {"enabled": self.jitter.enabled,
                       "draws": self.jitter.draws},
            "filter": {"min_registered": self.filter.min_registered,
                       "exclude_full_turnout": self.filter.exclude_full_turnout},
            "percentile": self.percentile,
        }


@dataclass(frozen=True)
class MetricAnomaly:
    observed: float        # mean integer-hit stations over jitter draws
    expected: float        # Monte Carlo mean
    excess: float
    threshold: float       # configured percentile of centered null counts
    threshold_lower: float # matching lower tail, for symmetric display only
    p_value: float
    per_integer: tuple     # ((k, observed, expected), ...) for k in band

    def to_dict(self) -> dict:
        return {
            "observed": self.observed,
            "expected": self.expected,
            "excess": self.excess,
            "threshold": self.threshold,
            "threshold_lower": self.threshold_lower,
            "p_value": self.p_value,
            "per_integer": [
                {"integer": k, "observed": o, "expected": e}
                for k, o, e in self.per_integer
            ],
        }


@dataclass(frozen=True)
class AnomalyReport:
    election_id: str
    dataset_digest: str
    config: dict
    stations_total: int
    stations_included: int
    exclusions: dict
    turnout: MetricAnomaly
    leader: MetricAnomaly
    either: MetricAnomaly

    def to_dict(self) -> dict:
        return {
            "election_id": self.election_id,
            "dataset_digest": self.dataset_digest,
            "config": self.config,
            "stations": {
                "total": self.stations_total,
                "included": self.stations_included,
                "excluded": self.exclusions,
            },
            "turnout": self.turnout.to_dict(),
            "leader": self.leader.to_dict(),
            "either": self.either.to_dict(),
        }


def _classify(registered, ballots_num, leader_num, ballots_den,
              jitter_t, jitter_l, band: IntegerBand):
    """Vectorized integer-hit classification for one jitter realization.

    Returns hit masks and matched integers for both metrics.  Stations with
    zero ballots cannot hit the leader metric.
    """
    pct_t = (ballots_num + jitter_t) * 100.0 / registered
    kt = np.floor(pct_t + 0.5).astype(np.int64)
    hit_t = ((kt >= band.lo) & (kt <= band.hi)
             & (np.abs(pct_t - kt) <= band.halfwidth))
    has_ballots = ballots_den > 0
    safe_den = np.where(has_ballots, ballots_den, 1)
    pct_l = (leader_num + jitter_l) * 100.0 / safe_den
    kl = np.floor(pct_l + 0.5).astype(np.int64)
    hit_l = (has_ballots & (kl >= band.lo) & (kl <= band.hi)
             & (np.abs(pct_l - kl) <= band.halfwidth))
    return hit_t, kt, hit_l, kl


def _tally(hit_t, kt, hit_l, kl):
    """(turnout, leader, either) counts plus per-integer tallies.

    A station hitting both metrics counts once toward "either" and is
    attributed to its turnout integer there.
    """
    per_t = np.bincount(kt[hit_t], minlength=101)
    per_l = np.bincount(kl[hit_l], minlength=101)
    either_k = np.where(hit_t, kt, kl)
    per_e = np.bincount(either_k[hit_t | hit_l], minlength=101)
    return (int(hit_t.sum()), int(hit_l.sum()), int((hit_t | hit_l).sum()),
            per_t, per_l, per_e)


def count_integer_stations(records: Sequence[StationRecord],
                           band: IntegerBand = IntegerBand(),
                           jitter_t=None, jitter_l=None):
    """Integer-hit counts over pre-filtered records for one jitter draw.

    jitter_t / jitter_l are per-station numerator offsets in [-0.5, 0.5]
    (None means no jitter).  Returns (turnout count, leader count, either
    count, per-integer turnout tallies, per-integer leader tallies) with the
    tallies as length-101 arrays indexed by integer.
    """
    n = len(records)
    registered = np.fromiter((r.registered for r in records), np.int64, n)
    ballots = np.fromiter((r.ballots for r in records), np.int64, n)
    leader = np.fromiter((r.leader_votes for r in records), np.int64, n)
    zt = np.zeros(n) if jitter_t is None else np.asarray(jitter_t)
    zl = np.zeros(n) if jitter_l is None else np.asarray(jitter_l)
    hit_t, kt, hit_l, kl = _classify(registered, ballots, leader, ballots,
                                     zt, zl, band)
    t, l, e, per_t, per_l, _ = _tally(hit_t, kt, hit_l, kl)
    return t, l, e, per_t, per_l


def simulate_station(record: StationRecord, stream: Substream):
    """One draw from the plug-in binomial null for a single station.

    ballots* ~ Binomial(registered, ballots/registered); leader* ~
    Binomial(ballots*, leader_votes/ballots) when ballots > 0, else 0.
    """
    if record.registered <= 0:
        raise ValueError(f"station {record.key}: registered must be > 0")
    ballots_sim = stream.binomial(record.registered,
                                  record.ballots / record.registered)
    if record.ballots > 0:
        leader_sim = stream.binomial(ballots_sim,
                                     record.leader_votes / record.ballots)
    else:
        leader_sim = 0
    return ballots_sim, leader_sim


def _observed(registered, ballots, leader, config: AnomalyConfig):
    """Observed statistic: hit counts averaged over the jitter draws."""
    draws = config.jitter.effective_draws
    n = registered.shape[0]
    sum_t = sum_l = sum_e = 0
    per_t = np.zeros(101, np.int64)
    per_l = np.zeros(101, np.int64)
    per_e = np.zeros(101, np.int64)
    for j in range(draws):
        if config.jitter.enabled:
            g = rng.philox(config.seed, rng.DOMAIN_OBSERVED_JITTER, j)
            ut = g.uniform(-0.5, 0.5, n)
            ul = g.uniform(-0.5, 0.5, n)
        else:
            ut = ul = np.zeros(n)
        hit_t, kt, hit_l, kl = _classify(registered, ballots, leader, ballots,
                                         ut, ul, config.band)
        t, l, e, pt, pl, pe = _tally(hit_t, kt, hit_l, kl)
        sum_t += t
        sum_l += l
        sum_e += e
        per_t += pt
        per_l += pl
        per_e += pe
    return (sum_t / draws, sum_l / draws, sum_e / draws,
            per_t / draws, per_l / draws, per_e / draws)


def _simulated_counts(registered, ballots, leader, config: AnomalyConfig,
                      threads: int):
    """Null-model hit counts per iteration plus per-integer sums.

    Iterations are partitioned into contiguous chunks; every (iteration,
    station) pair derives its own counter-based stream, so the result is
    identical for any chunking or execution order.
    """
    turnout_rate = ballots / registered
    leader_rate = np.where(ballots > 0, leader / np.where(ballots > 0, ballots, 1), 0.0)
    iters = config.iterations
    args = (config.seed, registered, turnout_rate, leader_rate)
    tail = (config.band.halfwidth, config.band.lo, config.band.hi,
            config.jitter.enabled)
    if threads <= 1:
        counts, pt, pl, pe = _kernels.mc_integer_counts(*args, 0, iters, *tail)
        return counts, pt, pl, pe
    bounds = np.linspace(0, iters, threads + 1).astype(np.int64)
    chunks = [(int(lo), int(hi)) for lo, hi in zip(bounds[:-1], bounds[1:])
              if hi > lo]
    with ThreadPoolExecutor(max_workers=len(chunks)) as pool:
        results = list(pool.map(
            lambda c: _kernels.mc_integer_counts(*args, c[0], c[1], *tail),
            chunks))
    counts = np.concatenate([r[0] for r in results])
    per = [sum(r[i] for r in results) for i in (1, 2, 3)]
    return counts, per[0], per[1], per[2]


def _metric_anomaly(observed: float, counts: np.ndarray,
                    per_obs: np.ndarray, per_exp: np.ndarray,
                    config: AnomalyConfig) -> MetricAnomaly:
    iters = counts.shape[0]
    expected = float(counts.mean())
    centered = counts - expected
    threshold = float(np.percentile(centered, config.percentile))
    threshold_lower = float(np.percentile(centered, 100.0 - config.percentile))
    p_value = (1 + int((counts >= observed).sum())) / (iters + 1)
    per_integer = tuple(
        (k, float(per_obs[k]), float(per_exp[k] / iters))
        for k in range(config.band.lo, config.band.hi + 1))
    return MetricAnomaly(observed=float(observed), expected=expected,
                         excess=float(observed - expected),
                         threshold=threshold, threshold_lower=threshold_lower,
                         p_value=p_value, per_integer=per_integer)


def run_anomaly(dataset: ElectionDataset, config: AnomalyConfig,
                threads: int = 1) -> AnomalyReport:
    """Full anomaly analysis for one election; deterministic given seed."""
    from .metrics import MetricKind
    included, tally = apply_filter(dataset, config.filter, MetricKind.TURNOUT)
    if not included:
        raise EmptyDatasetError(
            f"election {dataset.election_id}: no stations left after filtering")
    n = len(included)
    registered = np.fromiter((r.registered for r in included), np.int64, n)
    ballots = np.fromiter((r.ballots for r in included), np.int64, n)
    leader = np.fromiter((r.leader_votes for r in included), np.int64, n)

    obs_t, obs_l, obs_e, pot, pol, poe = _observed(registered, ballots,
                                                   leader, config)
    counts, pet, pel, pee = _simulated_counts(registered, ballots, leader,
                                              config, threads)
    return AnomalyReport(
        election_id=dataset.election_id,
        dataset_digest=dataset.source_digest,
        config=config.echo(),
        stations_total=len(dataset),
        stations_included=n,
        exclusions=tally.as_dict(),
        turnout=_metric_anomaly(obs_t, counts[:, 0], pot, pet, config),
        leader=_metric_anomaly(obs_l, counts[:, 1], pol, pel, config),
        either=_metric_anomaly(obs_e, counts[:, 2], poe, pee, config),
    )


def series_table(reports: Sequence[AnomalyReport]) -> List[dict]:
    """One row per election with the excess/threshold curves of the series."""
    rows = []
    for r in reports:
        rows.append({
            "election_id": r.election_id,
            "turnout_excess": r.turnout.excess,
            "turnout_threshold": r.turnout.threshold,
            "turnout_p_value": r.turnout.p_value,
            "leader_excess": r.leader.excess,
            "leader_threshold": r.leader.threshold,
            "leader_p_value": r.leader.p_value,
            "either_excess": r.either.excess,
            "either_threshold": r.either.threshold,
            "either_p_value": r.either.p_value,
        })
    return rows


def run_series(datasets: Sequence[ElectionDataset], config: AnomalyConfig,
               threads: int = 1):
    """Analyse a sequence of elections; returns (reports, combined table)."""
    if not datasets:
        raise ValueError("run_series needs at least one dataset")
    reports = []
    for ds in datasets:
        try:
            reports.append(run_anomaly(ds, config, threads=threads))
        except Exception as exc:
            raise type(exc)(f"election {ds.election_id}: {exc}") from exc
    return reports, series_table(reports)
