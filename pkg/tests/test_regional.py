import pytest

from votepeaks.dataset import StationRecord, from_records
from votepeaks.metrics import MetricKind, station_percent
from votepeaks.regional import attribute_bin, round_product_scan
from votepeaks.synth import SynthSpec, generate_honest


def station(i, registered, ballots, leader, region="R", territory="T"):
    return StationRecord(region, territory, f"ps-{i:05d}", registered,
                         ballots, leader)


def saratov_like_cluster(count=50, offset=0):
    """Stations at exactly 64.3% turnout, 62.2% leader result, 40.0% share.

    622/1000 of 643/1000 is approximately 400/1000; using leader 400 keeps
    the share exactly on the round value.
    """
    return [station(offset + i, 1000, 643, 400, region="Saratov",
                    territory="Saratov-city") for i in range(count)]


def background(count=100, offset=10_000):
    return [station(offset + i, 997, 300 + i % 400, (300 + i % 400) // 3,
                    region=f"bg-{i % 7}", territory=f"bg-{i % 7}-t")
            for i in range(count)]


class TestAttributeBin:
    def test_sole_contributor(self):
        ds = from_records("x", saratov_like_cluster() + background())
        att = attribute_bin(ds, MetricKind.TURNOUT, 64.3, 0.05)
        assert att.total_in_bin == 50
        assert att.per_group[0] == ("Saratov", 50)
        assert att.top_group_share == 1.0

    def test_empty_bin(self):
        ds = from_records("x", background())
        att = attribute_bin(ds, MetricKind.TURNOUT, 99.9, 0.05)
        assert att.total_in_bin == 0
        assert att.per_group == ()
        assert att.top_group_share == 0.0

    def test_two_region_shares(self):
        records = [station(i, 1000, 500, 250, region="A") for i in range(30)]
        records += [station(100 + i, 1000, 500, 250, region="B")
                    for i in range(10)]
        ds = from_records("x", records)
        att = attribute_bin(ds, MetricKind.TURNOUT, 50.0, 0.05)
        assert att.total_in_bin == 40
        assert att.per_group == (("A", 30), ("B", 10))
        assert att.top_group_share == pytest.approx(0.75)

    def test_partition_across_groups(self):
        ds = from_records("x", saratov_like_cluster() + background())
        att = attribute_bin(ds, MetricKind.TURNOUT, 35.0, 3.0)
        assert sum(c for _, c in att.per_group) == att.total_in_bin

    def test_group_by_territory(self):
        ds = from_records("x", saratov_like_cluster())
        att = attribute_bin(ds, MetricKind.TURNOUT, 64.3, 0.05,
                            group_by="territory")
        assert att.per_group[0] == ("Saratov-city", 50)

    def test_validation(self):
        ds = from_records("x", [])
        with pytest.raises(ValueError):
            attribute_bin(ds, MetricKind.TURNOUT, 101.0, 0.05)
        with pytest.raises(ValueError):
            attribute_bin(ds, MetricKind.TURNOUT, 50.0, 0.0)
        with pytest.raises(ValueError):
            attribute_bin(ds, MetricKind.TURNOUT, 50.0, 0.05, group_by="city")


class TestRoundProductScan:
    def test_saratov_arithmetic_hit(self):
        ds = from_records("x", saratov_like_cluster() + background())
        hits = round_product_scan(ds)
        assert len(hits) == 1
        h = hits[0]
        assert h.group == "Saratov"
        assert h.station_count == 50
        assert h.target == pytest.approx(40.0)
        assert h.leader_share == pytest.approx(40.0)
        assert h.mean_turnout == pytest.approx(64.3)
        assert h.distance_to_target <= 0.05

    def test_share_is_exact_product(self):
        ds = from_records("x", saratov_like_cluster())
        for r in ds.records:
            t = station_percent(r, MetricKind.TURNOUT)
            l = station_percent(r, MetricKind.LEADER_RESULT)
            s = station_percent(r, MetricKind.LEADER_SHARE)
            assert abs(s - t * l / 100.0) <= 1e-9

    def test_below_min_cluster_no_hit(self):
        ds = from_records("x", saratov_like_cluster(19))
        assert round_product_scan(ds, min_cluster=20) == []

    def test_integer_turnout_cluster_not_reported(self):
        # share on a round value, but turnout itself integer-centered
        records = [station(i, 1000, 650, 400, region="Q") for i in range(50)]
        ds = from_records("x", records)
        assert round_product_scan(ds) == []

    def test_order_invariance(self):
        records = saratov_like_cluster() + background()
        a = round_product_scan(from_records("x", records))
        b = round_product_scan(from_records("x", list(reversed(records))))
        assert a == b

    def test_honest_synthetic_usually_clean(self):
        clean = 0
        for seed in range(10):
            ds = generate_honest(SynthSpec(station_count=2000, seed=seed))
            clean += not round_product_scan(ds)
        assert clean >= 9

    def test_validation(self):
        ds = from_records("x", [])
        with pytest.raises(ValueError):
            round_product_scan(ds, round_step=0.0)
