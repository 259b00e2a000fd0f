"""
Histogram and peak detection tour
=================================

Build jittered percentage histograms from a synthetic election, with and
without falsification, and let the peak finder pick out the integer comb.

Run: python3 demos/histogram_tour.py
"""

from votepeaks import (FraudSpec, HistogramSpec, JitterSpec, MetricKind,
                       SynthSpec, build_histogram, find_peaks,
                       generate_honest, inject_fraud)

honest = generate_honest(SynthSpec(station_count=20000, seed=21))
rigged, truth = inject_fraud(
    honest, FraudSpec(fraction=0.08, target_metric="turnout", seed=22))

spec = HistogramSpec(metric=MetricKind.TURNOUT, bin_width=0.1, seed=23)

for name, ds in [("honest", honest), ("rigged", rigged)]:
    hist = build_histogram(ds, spec)
    peaks = find_peaks(hist)
    integer_peaks = [p for p in peaks if p.is_integer_centered]
    print("%s: %d peaks, %d integer-centered" %
          (name, len(peaks), len(integer_peaks)))
    for p in peaks[:6]:
        tag = "integer" if p.is_integer_centered else "       "
        print("  %6.1f%%  height %7.2f  prominence %6.2f  %s" %
              (p.bin_center, p.height, p.prominence, tag))
    print()

# Without jitter the comb appears even in honest data: small stations hit
# integer percentages by arithmetic alone. Jitter removes that artifact,
# which is the whole point of adding it.
plain = HistogramSpec(metric=MetricKind.TURNOUT, bin_width=0.1, seed=23,
                      jitter=JitterSpec(enabled=False))
hist = build_histogram(honest, plain)
integer_peaks = [p for p in find_peaks(hist) if p.is_integer_centered]
print("honest, jitter off: %d integer-centered peaks (all artifact)"
      % len(integer_peaks))
