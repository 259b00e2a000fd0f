"""Statistical fingerprints of election fraud in polling-station results.

The toolkit reproduces three analyses over per-station counts (registered
voters, ballots cast, leader votes):

* jittered 0.1%-bin histograms of turnout and leader-result percentages,
  where fraud shows up as sharp peaks at whole percents;
* the integer-anomaly statistic: observed integer-percentage stations versus
  a per-station binomial Monte Carlo null, with excess, percentile bands and
  empirical p-values;
* regional attribution of histogram peaks and detection of round
  leader-share products;

plus a synthetic-election generator with seeded fraud injection for
validating the detector against known ground truth.
"""

__version__ = "0.1.0"

from .anomaly import (AnomalyConfig, AnomalyReport, MetricAnomaly,
                      count_integer_stations, run_anomaly, run_series,
                      simulate_station)
from .dataset import (ElectionDataset, FilterSpec, StationRecord,
                      apply_filter, emit, from_records, ingest)
from .errors import (EmptyDatasetError, ForensicsError, UndefinedMetricError,
                     ValidationError)
from .histogram import (Histogram, HistogramSpec, Peak, build_histogram,
                        emit_histogram, find_peaks)
from .metrics import (IntegerBand, JitterSpec, MetricKind, integer_hit,
                      is_integer_hit, percent, station_percent,
                      target_ballot_count)
from .regional import (PeakAttribution, RoundProductHit, attribute_bin,
                       round_product_scan)
from .rng import Substream
from .synth import (FraudSpec, GroundTruth, SynthSpec, generate_honest,
                    inject_fraud)

__all__ = [
    "AnomalyConfig", "AnomalyReport", "MetricAnomaly", "ElectionDataset",
    "EmptyDatasetError", "FilterSpec", "ForensicsError", "FraudSpec",
    "GroundTruth", "Histogram", "HistogramSpec", "IntegerBand", "JitterSpec",
    "MetricKind", "Peak", "PeakAttribution", "RoundProductHit",
    "StationRecord", "Substream", "SynthSpec", "UndefinedMetricError",
    "ValidationError", "apply_filter", "attribute_bin", "build_histogram",
    "count_integer_stations", "emit", "emit_histogram", "find_peaks",
    "from_records", "generate_honest", "ingest", "inject_fraud",
    "integer_hit", "is_integer_hit", "percent", "round_product_scan",
    "run_anomaly", "run_series", "simulate_station", "station_percent",
    "target_ballot_count",
]
