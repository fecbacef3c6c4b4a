import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from concest.errors import DimensionError, DomainError
from concest.geometry import (Ball, DistanceCache, Metric, Region, ball_members,
                              distance, distances_to, empirical_measure,
                              expansion_member_mask, expansion_members,
                              kth_neighbor_radius, region_member_mask)


class TestDistance:
    def test_zero(self):
        assert distance(Metric.L2, [1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_1d_both_metrics(self):
        for metric in Metric:
            assert distance(metric, [0.0], [3.0]) == 3.0

    def test_3_4_5_triangle(self):
        assert distance(Metric.L2, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(5.0)
        assert distance(Metric.LINF, [0.0, 0.0], [3.0, 4.0]) == pytest.approx(4.0)

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionError):
            distance(Metric.L2, [0.0], [0.0, 1.0])

    @settings(max_examples=200, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1), st.sampled_from(list(Metric)))
    def test_metric_axioms(self, seed, metric):
        x, y, z = np.random.default_rng(seed).normal(size=(3, 4))
        dxy = distance(metric, x, y)
        assert dxy >= 0
        assert dxy == pytest.approx(distance(metric, y, x))
        assert dxy <= distance(metric, x, z) + distance(metric, z, y) + 1e-9


class TestKthNeighborRadius:
    coords = np.array([[0.0], [1.0], [3.0]], dtype=np.float32)
    active = np.array([0, 1, 2])

    def test_self_is_first(self):
        assert kth_neighbor_radius(self.coords, self.active, 0, 1, Metric.L2) == 0.0

    def test_order_statistics(self):
        assert kth_neighbor_radius(self.coords, self.active, 0, 2, Metric.L2) == 1.0
        assert kth_neighbor_radius(self.coords, self.active, 0, 3, Metric.L2) == 3.0

    def test_k_out_of_range(self):
        with pytest.raises(DomainError):
            kth_neighbor_radius(self.coords, self.active, 0, 4, Metric.L2)

    def test_monotone_in_k(self, rng):
        coords = rng.normal(size=(40, 3)).astype(np.float32)
        active = np.sort(rng.permutation(40)[:25])
        u = int(active[0])
        radii = [kth_neighbor_radius(coords, active, u, k, Metric.LINF)
                 for k in range(1, 26)]
        assert all(a <= b for a, b in zip(radii, radii[1:]))

    def test_matches_full_sort_oracle(self, rng):
        for _ in range(20):
            coords = rng.normal(size=(50, 4)).astype(np.float32)
            active = np.sort(rng.permutation(50)[: int(rng.integers(5, 51))])
            u = int(rng.choice(active))
            k = int(rng.integers(1, len(active) + 1))
            for metric in Metric:
                got = kth_neighbor_radius(coords, active, u, k, metric)
                # independent oracle: sort every pairwise distance
                all_d = sorted(distances_to(coords, coords[u], metric)[active])
                assert got == all_d[k - 1]


class TestBallMembers:
    def test_exactly_k_with_distinct_distances(self, rng):
        coords = rng.normal(size=(30, 2)).astype(np.float32)
        active = np.arange(30)
        r = kth_neighbor_radius(coords, active, 4, 7, Metric.L2)
        members = ball_members(coords, active, coords[4], r, Metric.L2)
        assert len(members) == 7

    def test_radius_zero(self):
        coords = np.array([[0.0], [0.0], [1.0]], dtype=np.float32)
        members = ball_members(coords, np.arange(3), coords[0], 0.0, Metric.L2)
        assert members.tolist() == [0, 1]

    def test_boundary_duplicates_included(self):
        coords = np.array([[0.0], [2.0], [2.0], [5.0]], dtype=np.float32)
        members = ball_members(coords, np.arange(4), coords[0], 2.0, Metric.L2)
        assert members.tolist() == [0, 1, 2]

    def test_brute_force_oracle(self, rng):
        for _ in range(20):
            coords = rng.normal(size=(40, 3)).astype(np.float32)
            active = np.sort(rng.permutation(40)[:30])
            center = coords[int(rng.integers(0, 40))]
            radius = float(rng.uniform(0, 3))
            for metric in Metric:
                got = set(ball_members(coords, active, center, radius, metric).tolist())
                want = {int(i) for i in active
                        if distances_to(coords, center, metric)[i] <= radius}
                assert got == want


class TestRegionExpansion:
    def _region(self, coords, indices, radii, metric=Metric.L2):
        balls = [Ball(i, coords[i], r) for i, r in zip(indices, radii)]
        return Region(metric, balls)

    def test_epsilon_zero_equals_region(self, rng):
        coords = rng.normal(size=(50, 2)).astype(np.float32)
        region = self._region(coords, [0, 7], [0.5, 1.0])
        assert np.array_equal(region_member_mask(region, coords),
                              expansion_member_mask(region, coords, 0.0))

    def test_1d_expansion(self):
        coords = np.array([[1.5]], dtype=np.float32)
        region = Region(Metric.L2, [Ball(0, np.array([0.0], dtype=np.float32), 1.0)])
        assert expansion_members(region, coords, 0.5).tolist() == [0]
        assert expansion_members(region, coords, 0.4).tolist() == []

    @settings(max_examples=50, deadline=None)
    @given(st.integers(0, 2 ** 32 - 1),
           st.floats(0, 2), st.floats(0, 2),
           st.sampled_from(list(Metric)))
    def test_monotone_in_epsilon(self, seed, e1, e2, metric):
        e1, e2 = sorted((e1, e2))
        r = np.random.default_rng(seed)
        coords = r.normal(size=(30, 3)).astype(np.float32)
        region = self._region(coords, [0, 5, 9], r.uniform(0, 1, 3), metric)
        m1 = expansion_member_mask(region, coords, e1)
        m2 = expansion_member_mask(region, coords, e2)
        assert np.all(m2[m1])  # members(e1) subset of members(e2)

    def test_json_round_trip(self, rng):
        coords = rng.normal(size=(10, 2)).astype(np.float32)
        region = self._region(coords, [2, 5], [0.25, 0.75], Metric.LINF)
        obj = region.to_json()
        assert obj["metric"] == "linf"
        back = Region.from_json(obj, coords)
        assert [(b.center_index, b.radius) for b in back.balls] == \
               [(b.center_index, b.radius) for b in region.balls]
        assert np.array_equal(region_member_mask(back, coords),
                              region_member_mask(region, coords))


class TestEmpiricalMeasure:
    @pytest.mark.parametrize("count,m,expected", [(0, 100, 0.0), (100, 100, 1.0), (5, 50, 0.1)])
    def test_values(self, count, m, expected):
        assert empirical_measure(count, m) == expected

    def test_out_of_range(self):
        with pytest.raises(DomainError):
            empirical_measure(5, 4)


class TestDistanceCache:
    def test_cached_and_uncached_rows_identical(self, rng):
        coords = rng.normal(size=(60, 4)).astype(np.float32)
        for metric in Metric:
            cached = DistanceCache(coords, metric, mem_cap_mb=1024)
            uncached = DistanceCache(coords, metric, mem_cap_mb=0.001)
            assert cached.matrix is not None
            assert uncached.matrix is None
            for i in (0, 13, 59):
                assert np.array_equal(cached.row(i), uncached.row(i))

    def test_self_distance_zero(self, rng):
        coords = rng.normal(size=(20, 3)).astype(np.float32)
        cache = DistanceCache(coords, Metric.L2)
        assert np.all(np.diag(cache.matrix) == 0.0)
