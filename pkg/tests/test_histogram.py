import xml.etree.ElementTree as ET

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from votepeaks.dataset import FilterSpec, StationRecord, from_records
from votepeaks.histogram import (Histogram, HistogramSpec, bin_index,
                                 build_histogram, emit_histogram, find_peaks)
from votepeaks.metrics import JitterSpec, MetricKind, target_ballot_count


def station(i, registered, ballots, leader=0, region="R"):
    return StationRecord(region, "T", f"ps-{i:05d}", registered, ballots, leader)


def spec(**kw):
    kw.setdefault("metric", MetricKind.TURNOUT)
    return HistogramSpec(**kw)


def naive_bin(value, bin_width, n_bins):
    """Oracle: scan bins; half-open [c - w/2, c + w/2), boundary to upper."""
    for k in range(n_bins):
        c = k * bin_width
        if c - bin_width / 2 <= value < c + bin_width / 2:
            return k
    return 0 if value < 0 else n_bins - 1


class TestBinIndex:
    def test_centers_and_boundaries(self):
        assert bin_index(np.array([50.0]), 0.1, 1001)[0] == 500
        # exact boundary goes to the upper bin (0.5-wide bins make the
        # boundary 50.25 exactly representable)
        assert bin_index(np.array([50.25]), 0.5, 201)[0] == 101
        assert bin_index(np.array([50.0499]), 0.1, 1001)[0] == 500
        assert bin_index(np.array([0.0]), 0.1, 1001)[0] == 0
        assert bin_index(np.array([100.0]), 0.1, 1001)[0] == 1000

    def test_clamping(self):
        assert bin_index(np.array([100.04]), 0.1, 1001)[0] == 1000
        assert bin_index(np.array([-0.3]), 0.1, 1001)[0] == 0

    def test_matches_naive_placement(self):
        rng = np.random.default_rng(7)
        values = rng.uniform(-0.5, 100.5, 100_000)
        got = bin_index(values, 0.1, 1001)
        centers = np.arange(1001) * 0.1
        lo = np.searchsorted(centers - 0.05, values, side="right") - 1
        expect = np.clip(lo, 0, 1000)
        assert np.array_equal(got, expect)
        # spot-check the vectorized oracle against the literal scan
        for v in values[:200]:
            assert naive_bin(float(v), 0.1, 1001) == got[list(values).index(v)]


class TestBuildHistogram:
    def test_single_station_no_jitter(self):
        ds = from_records("x", [station(1, 200, 100)])
        hist = build_histogram(ds, spec(jitter=JitterSpec(enabled=False)))
        assert hist.included_count == 1
        nz = np.nonzero(hist.counts)[0]
        assert list(nz) == [500]
        assert hist.normalized[500] == 1.0

    def test_full_turnout_station_excluded(self):
        ds = from_records("x", [station(1, 500, 500)])
        hist = build_histogram(ds, spec())
        assert hist.included_count == 0
        assert hist.exclusions.full_turnout == 1
        assert hist.counts.sum() == 0

    def test_jitter_locality_on_cluster(self):
        # 1000 copies of 643/1000: jitter displaces by at most 0.05,
        # so at least 90% of mass stays in the 64.3 bin (boundary draws
        # can spill into neighbours).
        ds = from_records("x", [station(i, 1000, 643) for i in range(1000)])
        hist = build_histogram(ds, spec(jitter=JitterSpec(draws=20), seed=5))
        idx = int(round(64.3 / 0.1))
        assert hist.normalized[idx] >= 0.9 * hist.included_count
        nz = np.nonzero(hist.counts)[0]
        assert set(nz) <= {idx - 1, idx, idx + 1}

    def test_mass_conservation(self):
        ds = from_records("x", [station(i, 1000, 300 + i) for i in range(50)])
        hist = build_histogram(ds, spec(jitter=JitterSpec(draws=7), seed=3))
        assert hist.counts.sum() == hist.included_count * hist.draws
        assert hist.normalized.sum() == pytest.approx(hist.included_count)

    def test_determinism(self):
        ds = from_records("x", [station(i, 997, 500 + i) for i in range(100)])
        s = spec(jitter=JitterSpec(draws=10), seed=11)
        a = build_histogram(ds, s)
        b = build_histogram(ds, s)
        assert np.array_equal(a.counts, b.counts)
        c = build_histogram(ds, spec(jitter=JitterSpec(draws=10), seed=12))
        assert not np.array_equal(a.counts, c.counts)

    @given(st.lists(st.tuples(st.integers(1, 2000), st.floats(0, 1)),
                    min_size=1, max_size=30),
           st.integers(1, 5), st.integers(0, 2**32))
    @settings(max_examples=30, deadline=None)
    def test_mass_conservation_property(self, stations, draws, seed):
        records = [station(i, n, int(n * f)) for i, (n, f) in enumerate(stations)]
        ds = from_records("x", records)
        s = spec(jitter=JitterSpec(draws=draws), seed=seed,
                 filter=FilterSpec(exclude_full_turnout=False))
        hist = build_histogram(ds, s)
        assert hist.counts.sum() == hist.included_count * hist.draws
        assert hist.included_count + hist.exclusions.total == len(ds)

    def test_bad_bin_width_rejected(self):
        with pytest.raises(ValueError):
            spec(bin_width=0.3)


class TestFindPeaks:
    def flat(self, value=5.0):
        s = spec(jitter=JitterSpec(enabled=False))
        counts = np.full(s.n_bins, value)
        return Histogram(s, counts, int(counts.sum()), None, 1)

    def test_flat_histogram_no_peaks(self):
        assert find_peaks(self.flat()) == []

    def test_integer_peak_from_forced_turnout(self):
        # 5% of stations forced to exactly 85% turnout via the forger's
        # arithmetic; large denominators keep them inside the 85.0 bin.
        records = []
        for i in range(950):
            records.append(station(i, 2000, 1100 + i % 700))
        for i in range(950, 1000):
            records.append(station(i, 2000, target_ballot_count(2000, 85)))
        ds = from_records("x", records)
        hist = build_histogram(ds, spec(jitter=JitterSpec(enabled=False)))
        peaks = find_peaks(hist, min_prominence=10.0)
        assert peaks
        assert peaks[0].bin_center == pytest.approx(85.0)
        assert peaks[0].is_integer_centered

    def test_noninteger_peak_cluster(self):
        records = [station(i, 1000, 643) for i in range(50)]
        records += [station(1000 + i, 997, 300 + i) for i in range(300)]
        ds = from_records("x", records)
        hist = build_histogram(ds, spec(jitter=JitterSpec(enabled=False)))
        peaks = find_peaks(hist, min_prominence=10.0)
        assert peaks[0].bin_center == pytest.approx(64.3)
        assert not peaks[0].is_integer_centered

    def test_constant_offset_invariance(self):
        s = spec(jitter=JitterSpec(enabled=False))
        base = np.zeros(s.n_bins)
        base[500] = 40
        base[643] = 25
        h1 = Histogram(s, base, 65, None, 1)
        h2 = Histogram(s, base + 13, 65, None, 1)
        p1 = find_peaks(h1, min_prominence=5.0)
        p2 = find_peaks(h2, min_prominence=5.0)
        assert [(p.bin_center, p.prominence) for p in p1] == \
            [(p.bin_center, p.prominence) for p in p2]

    def test_window_validation(self):
        with pytest.raises(ValueError):
            find_peaks(self.flat(), window=4)
        with pytest.raises(ValueError):
            find_peaks(self.flat(), window=2001)


class TestEmit:
    def test_csv_single_bin(self, tmp_path):
        ds = from_records("x", [station(i, 200, 100) for i in range(7)])
        hist = build_histogram(ds, spec(jitter=JitterSpec(enabled=False)))
        out = tmp_path / "h.csv"
        emit_histogram(hist, "csv", out)
        text = out.read_text()
        assert text.splitlines()[0] == "bin_center,count_normalized"
        assert "50.0,7" in text

    def test_csv_empty_histogram(self, tmp_path):
        ds = from_records("x", [])
        hist = build_histogram(ds, spec())
        out = tmp_path / "h.csv"
        emit_histogram(hist, "csv", out)
        assert out.read_text() == "bin_center,count_normalized\n"

    def test_svg_structure(self, tmp_path):
        ds = from_records("x", [station(i, 1000, 300 + i) for i in range(200)])
        hist = build_histogram(ds, spec(jitter=JitterSpec(draws=3), seed=1))
        out = tmp_path / "h.svg"
        emit_histogram(hist, "svg", out)
        text = out.read_text()
        assert text.startswith("<svg")
        root = ET.fromstring(text)
        assert root.tag.endswith("svg")
        assert len(root.findall(".//{http://www.w3.org/2000/svg}polyline")) == 1

    def test_unknown_format(self, tmp_path):
        ds = from_records("x", [])
        hist = build_histogram(ds, spec())
        with pytest.raises(ValueError):
            emit_histogram(hist, "png", tmp_path / "h.png")
