import io

import pytest
from hypothesis import given
from hypothesis import strategies as st

from votepeaks.dataset import (CSV_HEADER, ElectionDataset, FilterSpec,
                               StationRecord, apply_filter, emit,
                               from_records, ingest)
from votepeaks.errors import ValidationError
from votepeaks.metrics import MetricKind

HEADER = ",".join(CSV_HEADER)


def write(tmp_path, text, name="data.csv"):
    path = tmp_path / name
    path.write_text(text, encoding="utf-8")
    return path


def station(i, registered=1000, ballots=500, leader=300, region="R",
            territory="T"):
    return StationRecord(region, territory, f"ps-{i:03d}", registered,
                         ballots, leader)


class TestIngest:
    def test_saratov_example_row(self, tmp_path):
        path = write(tmp_path, HEADER + "\nSaratov,TIK-1,PS-001,1755,1492,900\n")
        ds = ingest(path, "2018-presidential")
        assert len(ds) == 1
        r = ds.records[0]
        assert (r.registered, r.ballots, r.leader_votes) == (1755, 1492, 900)
        assert r.region == "Saratov"

    def test_empty_file_valid_header(self, tmp_path):
        ds = ingest(write(tmp_path, HEADER + "\n"), "x")
        assert len(ds) == 0

    def test_ballots_exceed_registered_rejected(self, tmp_path):
        path = write(tmp_path, HEADER + "\nR,T,PS-9,5,10,2\n")
        with pytest.raises(ValidationError, match="PS-9"):
            ingest(path, "x")

    def test_leader_exceeds_ballots_rejected(self, tmp_path):
        path = write(tmp_path, HEADER + "\nR,T,PS-1,100,50,60\n")
        with pytest.raises(ValidationError, match="leader_votes"):
            ingest(path, "x")

    def test_malformed_row_names_row_and_field(self, tmp_path):
        path = write(tmp_path, HEADER + "\nR,T,PS-1,100,50,30\nR,T,PS-2,abc,5,1\n")
        with pytest.raises(ValidationError, match="row 3.*registered"):
            ingest(path, "x")

    def test_missing_field_rejected(self, tmp_path):
        path = write(tmp_path, HEADER + "\nR,T,PS-1,100,50\n")
        with pytest.raises(ValidationError, match="row 2"):
            ingest(path, "x")

    def test_duplicate_key_rejected(self, tmp_path):
        rows = HEADER + "\nR,T,PS-1,100,50,30\nR,T,PS-1,200,10,5\n"
        with pytest.raises(ValidationError, match="duplicate"):
            ingest(write(tmp_path, rows), "x")

    def test_bad_header_rejected(self, tmp_path):
        with pytest.raises(ValidationError, match="header"):
            ingest(write(tmp_path, "a,b,c\n"), "x")

    def test_lenient_skips_and_reports(self, tmp_path):
        rows = HEADER + "\nR,T,PS-1,100,50,30\nR,T,PS-2,5,10,2\nR,T,PS-3,80,40,20\n"
        diag = io.StringIO()
        ds = ingest(write(tmp_path, rows), "x", lenient=True, diagnostics=diag)
        assert [r.station_id for r in ds.records] == ["PS-1", "PS-3"]
        assert "skipped row 3" in diag.getvalue()

    def test_order_preserved_and_deterministic(self, tmp_path):
        rows = HEADER + "\n" + "\n".join(
            f"R,T,PS-{i},100,{i},{i // 2}" for i in range(20)) + "\n"
        path = write(tmp_path, rows)
        a = ingest(path, "x")
        b = ingest(path, "x")
        assert a.records == b.records
        assert a.source_digest == b.source_digest
        assert [r.station_id for r in a.records] == [f"PS-{i}" for i in range(20)]


class TestRoundTrip:
    def test_emit_ingest_round_trip(self, tmp_path):
        ds = from_records("x", [station(i, 1000, 400 + i, 200) for i in range(10)])
        out = tmp_path / "out.csv"
        emit(ds, out)
        back = ingest(out, "x")
        assert back.records == ds.records
        assert back.source_digest == ds.source_digest

    def test_from_records_validates(self):
        with pytest.raises(ValidationError):
            from_records("x", [station(1), station(1)])


class TestApplyFilter:
    def test_full_turnout_excluded(self):
        ds = from_records("x", [station(1, 500, 500, 100)])
        included, tally = apply_filter(ds, FilterSpec(exclude_full_turnout=True),
                                       MetricKind.TURNOUT)
        assert included == []
        assert tally.full_turnout == 1

    def test_zero_ballots_excluded_for_leader(self):
        ds = from_records("x", [station(1, 500, 0, 0)])
        included, tally = apply_filter(ds, FilterSpec(), MetricKind.LEADER_RESULT)
        assert included == []
        assert tally.zero_ballots == 1
        # but kept for turnout
        included, tally = apply_filter(ds, FilterSpec(), MetricKind.TURNOUT)
        assert len(included) == 1

    def test_constructed_ten_station_tally(self):
        records = [
            station(0, 0, 0, 0),          # zero registered
            station(1, 5, 3, 1),          # below min_registered
            station(2, 500, 500, 100),    # full turnout
            station(3, 500, 0, 0),        # zero ballots (leader metric)
        ] + [station(i, 1000, 600, 300) for i in range(4, 10)]
        ds = from_records("x", records)
        spec = FilterSpec(min_registered=10, exclude_full_turnout=True)
        included, tally = apply_filter(ds, spec, MetricKind.LEADER_RESULT)
        assert len(included) == 6
        assert tally.total == 4
        assert tally.as_dict() == {"zero_registered": 1,
                                   "below_min_registered": 1,
                                   "full_turnout": 1,
                                   "zero_ballots": 1}

    @given(st.lists(st.tuples(st.integers(0, 50), st.integers(0, 50),
                              st.integers(0, 50)), max_size=40),
           st.integers(0, 20), st.booleans(),
           st.sampled_from(list(MetricKind)))
    def test_partition_property(self, triples, min_reg, excl_full, metric):
        records = []
        for i, (a, b, c) in enumerate(triples):
            n = max(a, b, c)
            ballots = max(b, c) if max(b, c) <= n else n
            leader = min(c, ballots)
            records.append(station(i, n, ballots, leader))
        ds = from_records("x", records)
        spec = FilterSpec(min_registered=min_reg,
                          exclude_full_turnout=excl_full)
        included, tally = apply_filter(ds, spec, metric)
        assert len(included) + tally.total == len(ds)


class TestFilterSpec:
    def test_negative_min_registered_rejected(self):
        with pytest.raises(ValueError):
            FilterSpec(min_registered=-1)

    def test_leader_exclusion_not_waivable(self):
        with pytest.raises(ValueError):
            FilterSpec(require_nonzero_ballots_for_leader=False)
