"""Jittered fixed-width percentage histograms and peak detection.

Bins tile [0, 100] and are centred on multiples of the bin width, so with
the default 0.1% width the bin at 50% covers 50 +/- 0.05%.  Each included
station contributes one increment per jitter draw; normalized counts divide
by the number of draws, which keeps total mass equal to the included station
count.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List

import numpy as np

from . import rng
from .dataset import ElectionDataset, ExclusionTally, FilterSpec, apply_filter
from .metrics import JitterSpec, MetricKind, metric_fractions


@dataclass(frozen=True)
class HistogramSpec:
    metric: MetricKind
    bin_width: float = 0.1
    jitter: JitterSpec = field(default_factory=JitterSpec)
    filter: FilterSpec = field(default_factory=FilterSpec)
    seed: int = 0

    def __post_init__(self):
        if self.bin_width <= 0:
            raise ValueError(f"bin_width must be > 0, got {self.bin_width}")
        ratio = 100.0 / self.bin_width
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"bin_width must divide 100 evenly, got {self.bin_width}")

    @property
    def n_bins(self) -> int:
        return int(round(100.0 / self.bin_width)) + 1

    def bin_centers(self) -> np.ndarray:
        return np.arange(self.n_bins) * self.bin_width


@dataclass(frozen=True)
class Histogram:
    spec: HistogramSpec
    counts: np.ndarray          # raw increments, one per station per draw
    included_count: int
    exclusions: ExclusionTally
    draws: int                  # jitter draws accumulated (1 if disabled)

    @property
    def normalized(self) -> np.ndarray:
        return self.counts / self.draws

    def bin_centers(self) -> np.ndarray:
        return self.spec.bin_centers()


@dataclass(frozen=True)
class Peak:
    bin_center: float
    height: float       # normalized count
    baseline: float     # local median of normalized counts
    prominence: float
    is_integer_centered: bool


def bin_index(values: np.ndarray, bin_width: float, n_bins: int) -> np.ndarray:
    """Containing bin per value; boundary values go to the upper bin.

    Values outside [0, 100] (possible only via jitter at extreme
    percentages) clamp into the end bins.
    """
    idx = np.floor(np.asarray(values) / bin_width + 0.5).astype(np.int64)
    return np.clip(idx, 0, n_bins - 1)


def build_histogram(dataset: ElectionDataset, spec: HistogramSpec) -> Histogram:
    included, tally = apply_filter(dataset, spec.filter, spec.metric)
    n_bins = spec.n_bins
    counts = np.zeros(n_bins, np.int64)
    n = len(included)
    if n == 0:
        return Histogram(spec, counts, 0, tally, spec.jitter.effective_draws)

    registered = np.fromiter((r.registered for r in included), np.int64, n)
    ballots = np.fromiter((r.ballots for r in included), np.int64, n)
    leader = np.fromiter((r.leader_votes for r in included), np.int64, n)
    num, den = metric_fractions(spec.metric, registered, ballots, leader)

    draws = spec.jitter.effective_draws
    for j in range(draws):
        if spec.jitter.enabled:
            g = rng.philox(spec.seed, rng.DOMAIN_HISTOGRAM_JITTER, j)
            u = g.uniform(-0.5, 0.5, n)
        else:
            u = 0.0
        pct = (num + u) * 100.0 / den
        counts += np.bincount(bin_index(pct, spec.bin_width, n_bins),
                              minlength=n_bins)
    return Histogram(spec, counts, n, tally, draws)


def find_peaks(hist: Histogram, window: int = 11,
               min_prominence: float = 1.0) -> List[Peak]:
    """Bins whose normalized height exceeds the local median by at least
    min_prominence, sorted by prominence descending.

    The median baseline is robust to neighbouring peaks at adjacent
    integers, and makes the peak set invariant under a constant offset.
    """
    if window < 3 or window % 2 == 0:
        raise ValueError(f"window must be odd and >= 3, got {window}")
    heights = hist.normalized
    if window > heights.shape[0]:
        raise ValueError(
            f"window {window} exceeds bin count {heights.shape[0]}")
    half = window // 2
    padded = np.pad(heights, half, mode="edge")
    windows = np.lib.stride_tricks.sliding_window_view(padded, window)
    baseline = np.median(windows, axis=1)
    prominence = heights - baseline
    centers = hist.bin_centers()
    peaks = []
    for i in np.nonzero(prominence >= min_prominence)[0]:
        c = float(centers[i])
        peaks.append(Peak(
            bin_center=c,
            height=float(heights[i]),
            baseline=float(baseline[i]),
            prominence=float(prominence[i]),
            is_integer_centered=abs(c - round(c)) < 1e-9,
        ))
    peaks.sort(key=lambda p: (-p.prominence, p.bin_center))
    return peaks


def _format_center(center: float, bin_width: float) -> str:
    decimals = 0
    w = bin_width
    while abs(w - round(w)) > 1e-9 and decimals < 12:
        w *= 10
        decimals += 1
    return f"{center:.{decimals}f}"


def _format_count(x: float) -> str:
    if x == int(x):
        return str(int(x))
    return repr(x)


def emit_histogram_csv(hist: Histogram, path) -> None:
    """CSV rows `bin_center,count_normalized` for every non-empty bin."""
    centers = hist.bin_centers()
    normalized = hist.normalized
    lines = ["bin_center,count_normalized"]
    for i in np.nonzero(hist.counts)[0]:
        lines.append(f"{_format_center(float(centers[i]), hist.spec.bin_width)},"
                     f"{_format_count(float(normalized[i]))}")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def emit_histogram_svg(hist: Histogram, path, annotate_peaks: int = 5) -> None:
    """Self-contained SVG line chart with integer gridlines and peak labels."""
    width, height = 1000.0, 420.0
    ml, mr, mt, mb = 60.0, 20.0, 30.0, 45.0
    pw, ph = width - ml - mr, height - mt - mb
    normalized = hist.normalized
    centers = hist.bin_centers()
    ymax = float(normalized.max()) if hist.included_count else 1.0
    if ymax <= 0:
        ymax = 1.0
    ymax *= 1.08

    def x(pct):
        return ml + pct / 100.0 * pw

    def y(v):
        return mt + ph - v / ymax * ph

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width:g}" '
        f'height="{height:g}" viewBox="0 0 {width:g} {height:g}">',
        f'<rect x="0" y="0" width="{width:g}" height="{height:g}" fill="white"/>',
    ]
    # gridlines at every integer percent, heavier every 10
    for k in range(0, 101):
        xx = x(k)
        major = k % 10 == 0
        op = "0.35" if major else "0.12"
        parts.append(f'<line x1="{xx:.2f}" y1="{mt:g}" x2="{xx:.2f}" '
                     f'y2="{mt + ph:g}" stroke="#999" stroke-width="1" '
                     f'opacity="{op}"/>')
        if major:
            parts.append(f'<text x="{xx:.2f}" y="{height - 22:.2f}" '
                         f'font-size="12" text-anchor="middle" '
                         f'fill="#333">{k}</text>')
    # axes
    parts.append(f'<line x1="{ml:g}" y1="{mt + ph:g}" x2="{ml + pw:g}" '
                 f'y2="{mt + ph:g}" stroke="#000" stroke-width="1"/>')
    parts.append(f'<line x1="{ml:g}" y1="{mt:g}" x2="{ml:g}" '
                 f'y2="{mt + ph:g}" stroke="#000" stroke-width="1"/>')
    for frac in (0.0, 0.5, 1.0):
        v = ymax * frac
        parts.append(f'<text x="{ml - 8:.2f}" y="{y(v) + 4:.2f}" '
                     f'font-size="12" text-anchor="end" '
                     f'fill="#333">{v:.4g}</text>')
    parts.append(f'<text x="{ml + pw / 2:.2f}" y="{height - 6:.2f}" '
                 f'font-size="13" text-anchor="middle" fill="#000">'
                 f'{hist.spec.metric.value} (%)</text>')
    parts.append(f'<text x="{ml:.2f}" y="{mt - 10:.2f}" font-size="13" '
                 f'fill="#000">stations per {hist.spec.bin_width:g}% bin '
                 f'(normalized over {hist.draws} jitter draws)</text>')

    if hist.included_count:
        pts = " ".join(f"{x(c):.2f},{y(v):.2f}"
                       for c, v in zip(centers, normalized))
        parts.append(f'<polyline points="{pts}" fill="none" stroke="#1f6fb2" '
                     f'stroke-width="1"/>')
        try:
            peaks = find_peaks(hist)[:annotate_peaks]
        except ValueError:
            peaks = []
        for p in peaks:
            px, py = x(p.bin_center), y(p.height)
            parts.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="3" '
                         f'fill="none" stroke="#c0392b" stroke-width="1.5"/>')
            parts.append(f'<text x="{px:.2f}" y="{py - 8:.2f}" font-size="11" '
                         f'text-anchor="middle" fill="#c0392b">'
                         f'{p.bin_center:g}%</text>')
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(parts) + "\n")


def emit_histogram(hist: Histogram, format: str, path) -> None:
    if format == "csv":
        emit_histogram_csv(hist, path)
    elif format == "svg":
        emit_histogram_svg(hist, path)
    else:
        raise ValueError(f"unknown format {format!r}")
