import math

import numpy as np
import pytest

from fairscore import (
    Hyperplane,
    RegionOfInterest,
    RngStream,
    all_ordering_exchanges,
    new_arrangement,
)
from fairscore.errors import DimensionMismatch, RegionNotMaterialized

from .conftest import make_synthetic


def arc_index_of(phi: float, edges: list[float]) -> int:
    for i, (a, b) in enumerate(zip(edges[:-1], edges[1:])):
        if a <= phi < b:
            return i
    return len(edges) - 2


class TestConstruction:
    def test_fresh_arrangement_single_region(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        arr = new_arrangement(roi, 1000, RngStream(0))
        [(region, volume)] = arr.regions()
        assert (region.first, region.last) == (0, 999)
        assert region.signature == ()
        assert volume == 1.0

    def test_single_sample(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        arr = new_arrangement(roi, 1, RngStream(1))
        h = Hyperplane(coeffs=[1.0, -1.0])
        assert arr.insert(h) == 0
        assert arr.region_count == 1

    def test_samples_inside_region_and_unit_norm(self):
        roi = RegionOfInterest(rho=[0.4, 0.9], theta=math.pi / 6)
        arr = new_arrangement(roi, 2000, RngStream(2))
        pts = arr.samples
        assert np.abs(np.linalg.norm(pts, axis=1) - 1).max() < 1e-12
        gaps = np.arccos(np.clip(pts @ roi.center, -1, 1))
        assert gaps.max() <= roi.theta + roi.theta / 10_000

    def test_deterministic_per_seed(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        a = new_arrangement(roi, 500, RngStream(3)).samples
        b = new_arrangement(roi, 500, RngStream(3)).samples
        assert np.array_equal(a, b)


class TestInsertion:
    def test_center_crossing_plane_splits_once(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        arr = new_arrangement(roi, 5000, RngStream(0))
        # the diagonal passes through the cap center
        assert arr.insert(Hyperplane(coeffs=[1.0, -1.0])) == 1
        assert arr.region_count == 2

    def test_non_crossing_plane_splits_nothing(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 16)
        arr = new_arrangement(roi, 2000, RngStream(1))
        # every cap direction has positive coordinates, so x1 >= 0 everywhere
        assert arr.insert(Hyperplane(coeffs=[1.0, 0.0])) == 0
        [(region, volume)] = arr.regions()
        assert region.signature == (1,)
        assert volume == 1.0

    def test_symmetric_split_volumes(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        s = 20_000
        arr = new_arrangement(roi, s, RngStream(2))
        arr.insert(Hyperplane(coeffs=[1.0, -1.0]))
        volumes = sorted(v for _, v in arr.regions())
        assert abs(volumes[0] - 0.5) <= 3 * math.sqrt(0.25 / s)
        assert sum(volumes) == 1.0

    def test_volume_estimates_always_sum_to_one(self):
        roi = RegionOfInterest.around([1.0, 1.0, 1.0], math.pi / 6)
        arr = new_arrangement(roi, 3000, RngStream(3))
        rng = np.random.default_rng(4)
        for _ in range(12):
            arr.insert(Hyperplane(coeffs=rng.normal(size=3)))
        assert sum(v for _, v in arr.regions()) == pytest.approx(1.0, abs=1e-15)

    def test_contiguity_after_many_insertions(self):
        roi = RegionOfInterest.around([1.0, 1.0, 1.0, 1.0], math.pi / 5)
        arr = new_arrangement(roi, 4000, RngStream(5))
        rng = np.random.default_rng(6)
        for _ in range(15):
            arr.insert(Hyperplane(coeffs=rng.normal(size=4)))
        regions = arr.regions()
        spans = sorted((r.first, r.last) for r, _ in regions)
        assert spans[0][0] == 0
        assert spans[-1][1] == 3999
        for (_, last), (nxt, _) in zip(spans[:-1], spans[1:]):
            assert nxt == last + 1
        assert all(r.last >= r.first for r, _ in regions)

    def test_sign_consistency_with_brute_force(self):
        roi = RegionOfInterest.around([1.0, 0.5, 1.5], math.pi / 5)
        arr = new_arrangement(roi, 2000, RngStream(7))
        rng = np.random.default_rng(8)
        planes = [Hyperplane(coeffs=rng.normal(size=3)) for _ in range(8)]
        for h in planes:
            arr.insert(h)
        pts = arr.samples
        for region, _ in arr.regions():
            block = pts[region.first : region.last + 1]
            for j, h in enumerate(planes):
                signs = np.where(block @ h.coeffs >= 0, 1, -1)
                assert (signs == region.signature[j]).all()

    def test_region_count_never_exceeds_samples(self):
        roi = RegionOfInterest.around(np.ones(6), math.pi / 6)
        arr = new_arrangement(roi, 50, RngStream(9))
        rng = np.random.default_rng(10)
        for _ in range(40):
            arr.insert(Hyperplane(coeffs=rng.normal(size=6)))
        assert arr.region_count <= 50

    def test_dimension_mismatch(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        arr = new_arrangement(roi, 100, RngStream(11))
        with pytest.raises(DimensionMismatch):
            arr.insert(Hyperplane(coeffs=[1.0, 0.0, 0.0]))

    def test_affine_offset_rejected(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 4)
        arr = new_arrangement(roi, 100, RngStream(12))
        with pytest.raises(ValueError):
            arr.insert(Hyperplane(coeffs=[1.0, 1.0], offset=1.0))


class TestAgainstExactSweep:
    def test_matches_arc_partition(self):
        # regions of the sampled arrangement must be exactly the arcs of the
        # exact 2-D arrangement that captured at least one sample
        data = make_synthetic(8, 2, seed=13)
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 2)
        s = 20_000
        arr = new_arrangement(roi, s, RngStream(14))
        planes = all_ordering_exchanges(data)[:10]
        for h in planes:
            arr.insert(h)

        center = math.pi / 4
        # oracle: crossing angles of exactly the inserted planes
        crossing = set()
        for h in planes:
            base = math.atan2(-h.coeffs[1], h.coeffs[0])
            for k in (-2, -1, 0, 1, 2):
                cand = base + k * math.pi
                if center - roi.theta < cand < center + roi.theta:
                    crossing.add(cand)
        edges = [center - roi.theta] + sorted(crossing) + [center + roi.theta]
        pts = arr.samples
        phis = np.arctan2(pts[:, 0], pts[:, 1])
        arcs_of_samples = {}
        for idx, phi in enumerate(phis):
            arcs_of_samples.setdefault(arc_index_of(float(phi), edges), set()).add(idx)

        regions = arr.regions()
        assert len(regions) == len(arcs_of_samples)
        region_sets = {
            frozenset(range(r.first, r.last + 1)) for r, _ in regions
        }
        oracle_sets = {frozenset(v) for v in arcs_of_samples.values()}
        assert region_sets == oracle_sets

    def test_detection_guarantee(self):
        # a region holding a 1% volume share must materialize with 2000
        # samples: miss probability (1 - 0.01)^2000 ~ 2e-9 per seed
        theta = math.pi / 4
        roi = RegionOfInterest.around([1.0, 1.0], theta)
        center = math.pi / 4
        width = 0.01 * 2 * theta
        lo = center - width / 2
        hi = center + width / 2
        planes = [
            Hyperplane(coeffs=[math.cos(lo), -math.sin(lo)]),
            Hyperplane(coeffs=[math.cos(hi), -math.sin(hi)]),
        ]
        misses = 0
        for seed in range(50):
            arr = new_arrangement(roi, 2000, RngStream(seed))
            for h in planes:
                arr.insert(h)
            # the wedge between the two lines has signature (-1, +1) or
            # (+1, -1) depending on orientation; probe with its midpoint
            mid = np.array([math.sin(center), math.cos(center)])
            try:
                arr.region_of(mid)
            except RegionNotMaterialized:
                misses += 1
        assert misses == 0


class TestRegionLookup:
    def test_every_sample_finds_its_own_region(self):
        roi = RegionOfInterest.around([1.0, 1.0, 1.0], math.pi / 6)
        arr = new_arrangement(roi, 500, RngStream(15))
        rng = np.random.default_rng(16)
        for _ in range(6):
            arr.insert(Hyperplane(coeffs=rng.normal(size=3)))
        pts = arr.samples
        for idx in range(0, 500, 37):
            region = arr.region_of(pts[idx])
            assert region.first <= idx <= region.last

    def test_center_after_non_crossing_insert(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 16)
        arr = new_arrangement(roi, 300, RngStream(17))
        arr.insert(Hyperplane(coeffs=[1.0, 0.0]))
        region = arr.region_of(roi.center)
        assert (region.first, region.last) == (0, 299)

    def test_unmaterialized_region(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 16)
        arr = new_arrangement(roi, 50, RngStream(18))
        arr.insert(Hyperplane(coeffs=[1.0, -1.0]))
        arr.insert(Hyperplane(coeffs=[0.0, 1.0]))
        # every cap sample has positive x2, so no region carries the
        # signature with a negative second entry
        with pytest.raises(RegionNotMaterialized):
            arr.region_of(np.array([0.0, -1.0]))

    def test_signature_matches_brute_force_lookup(self):
        roi = RegionOfInterest.around([1.0, 1.0], math.pi / 3)
        arr = new_arrangement(roi, 4000, RngStream(19))
        rng = np.random.default_rng(20)
        planes = [Hyperplane(coeffs=rng.normal(size=2)) for _ in range(5)]
        for h in planes:
            arr.insert(h)
        probe_rng = RngStream(21)
        from fairscore import sample_cap_batch

        probes = sample_cap_batch(roi, None, probe_rng, 100)
        for w in probes:
            expected = tuple(1 if float(h.coeffs @ w) >= 0 else -1 for h in planes)
            assert arr.region_of(w).signature == expected
