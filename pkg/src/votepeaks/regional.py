"""Peak attribution by region and round-product (leader share) scanning.

Both analyses use exact, jitter-free percentages: jitter exists to break up
integer-division artifacts in counting statistics, whereas here we inspect a
named bin or a named cluster directly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

from .dataset import ElectionDataset
from .metrics import IntegerBand, MetricKind, integer_hit, station_percent


@dataclass(frozen=True)
class PeakAttribution:
    metric: MetricKind
    bin_center: float
    halfwidth: float
    group_by: str
    total_in_bin: int
    per_group: tuple            # ((label, count), ...) sorted by count desc
    top_group_share: float

    def to_dict(self) -> dict:
        return {
            "metric": self.metric.value,
            "bin_center": self.bin_center,
            "halfwidth": self.halfwidth,
            "group_by": self.group_by,
            "total_in_bin": self.total_in_bin,
            "per_group": [{"group": g, "count": c} for g, c in self.per_group],
            "top_group_share": self.top_group_share,
        }


@dataclass(frozen=True)
class RoundProductHit:
    group: str
    station_count: int
    target: float               # the round leader-share multiple hit
    mean_turnout: float
    mean_leader_result: float
    leader_share: float         # mean leader share of the cluster
    distance_to_target: float

    def to_dict(self) -> dict:
        return {
            "group": self.group,
            "station_count": self.station_count,
            "target": self.target,
            "mean_turnout": self.mean_turnout,
            "mean_leader_result": self.mean_leader_result,
            "leader_share": self.leader_share,
            "distance_to_target": self.distance_to_target,
        }


def _group_label(record, group_by: str) -> str:
    if group_by == "region":
        return record.region
    if group_by == "territory":
        return record.territory
    raise ValueError(f"group_by must be 'region' or 'territory', got {group_by!r}")


def attribute_bin(dataset: ElectionDataset, metric: MetricKind,
                  bin_center: float, halfwidth: float,
                  group_by: str = "region") -> PeakAttribution:
    """Who contributes to one histogram bin, grouped by region or territory.

    Collects stations whose exact metric percentage lies within
    [bin_center - halfwidth, bin_center + halfwidth]; stations where the
    metric is undefined cannot be in any bin.  An empty bin is a valid
    result, not an error.
    """
    if not 0.0 <= bin_center <= 100.0:
        raise ValueError(f"bin_center out of [0, 100]: {bin_center}")
    if halfwidth <= 0:
        raise ValueError(f"halfwidth must be > 0, got {halfwidth}")
    if group_by not in ("region", "territory"):
        raise ValueError(
            f"group_by must be 'region' or 'territory', got {group_by!r}")
    counts: dict = {}
    total = 0
    for r in dataset.records:
        den = r.ballots if metric.needs_ballots else r.registered
        if den == 0:
            continue
        pct = station_percent(r, metric)
        if abs(pct - bin_center) <= halfwidth:
            label = _group_label(r, group_by)
            counts[label] = counts.get(label, 0) + 1
            total += 1
    per_group = tuple(sorted(counts.items(), key=lambda kv: (-kv[1], kv[0])))
    share = per_group[0][1] / total if total else 0.0
    return PeakAttribution(metric=metric, bin_center=bin_center,
                           halfwidth=halfwidth, group_by=group_by,
                           total_in_bin=total, per_group=per_group,
                           top_group_share=share)


def round_product_scan(dataset: ElectionDataset, group_by: str = "region",
                       round_step: float = 0.5, tolerance: float = 0.05,
                       min_cluster: int = 20,
                       band: IntegerBand = IntegerBand(),
                       ) -> List[RoundProductHit]:
    """Clusters whose leader share sits on a round value without integer turnout.

    The leader share (leader votes over registered voters) is the exact
    product of turnout and leader result per station, so a tight cluster at
    e.g. 64.3% turnout and 62.2% leader result lands on a suspiciously round
    40.0% share.  For each group, stations within `tolerance` of the same
    multiple of `round_step` whose turnout is not itself integer-centered
    form a cluster; clusters of at least `min_cluster` stations are
    reported, largest first.
    """
    if round_step <= 0:
        raise ValueError(f"round_step must be > 0, got {round_step}")
    if group_by not in ("region", "territory"):
        raise ValueError(
            f"group_by must be 'region' or 'territory', got {group_by!r}")
    clusters: dict = {}
    for r in dataset.records:
        if r.registered == 0 or r.ballots == 0:
            continue
        turnout = station_percent(r, MetricKind.TURNOUT)
        if integer_hit(turnout, band) is not None:
            continue
        share = station_percent(r, MetricKind.LEADER_SHARE)
        target = round(share / round_step) * round_step
        if abs(share - target) > tolerance:
            continue
        key = (_group_label(r, group_by), round(target / round_step))
        clusters.setdefault(key, []).append(r)
    hits = []
    for (label, step_index), members in clusters.items():
        if len(members) < min_cluster:
            continue
        target = step_index * round_step
        turnouts = [station_percent(r, MetricKind.TURNOUT) for r in members]
        results = [station_percent(r, MetricKind.LEADER_RESULT) for r in members]
        shares = [station_percent(r, MetricKind.LEADER_SHARE) for r in members]
        mean_share = sum(shares) / len(shares)
        hits.append(RoundProductHit(
            group=label,
            station_count=len(members),
            target=target,
            mean_turnout=sum(turnouts) / len(turnouts),
            mean_leader_result=sum(results) / len(results),
            leader_share=mean_share,
            distance_to_target=abs(mean_share - target),
        ))
    hits.sort(key=lambda h: (-h.station_count, h.group, h.target))
    return hits
