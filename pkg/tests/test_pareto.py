import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from eegselect.pareto import (
    GridConfig,
    ParetoArchive,
    ScoredSolution,
    archive_insert,
    crowding_distance,
    dominates,
    nd_sort,
)
from oracles import brute_fronts


def solutions(objs):
    return [ScoredSolution(mask=np.zeros(2, dtype=bool), obj=np.array(o, float)) for o in objs]


class TestDominates:
    def test_strictly_better_one_component(self):
        assert dominates((-2, -5), (-1, -5))

    def test_equal_never_dominates(self):
        assert not dominates((-2, -5), (-2, -5))

    def test_incomparable(self):
        assert not dominates((-3, -1), (-1, -3))
        assert not dominates((-1, -3), (-3, -1))

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            dominates((-1.0,), (-1.0, -2.0))


class TestNdSort:
    def test_singleton(self):
        pop = solutions([(-1, -1)])
        assert nd_sort(pop) == [[0]]
        assert pop[0].rank == 0

    def test_two_tiers(self):
        pop = solutions([(-2, -2), (-1, -1)])
        assert nd_sort(pop) == [[0], [1]]
        assert [s.rank for s in pop] == [0, 1]

    def test_ties_share_front(self):
        pop = solutions([(-1, -1), (-1, -1), (0, 0)])
        fronts = nd_sort(pop)
        assert sorted(fronts[0]) == [0, 1]

    def test_matches_brute_force_partition(self):
        rng = np.random.default_rng(123)
        for _ in range(30):
            objs = rng.normal(size=(rng.integers(1, 51), 2))
            pop = solutions(objs)
            fronts = nd_sort(pop)
            expected = brute_fronts(objs)
            assert [sorted(f) for f in fronts] == [sorted(f) for f in expected]

    def test_rank_consistency(self):
        rng = np.random.default_rng(5)
        objs = rng.normal(size=(40, 2))
        pop = solutions(objs)
        nd_sort(pop)
        for a in pop:
            for b in pop:
                if dominates(a.obj, b.obj):
                    assert a.rank < b.rank

    def test_union_covers_population(self):
        rng = np.random.default_rng(9)
        pop = solutions(rng.normal(size=(25, 2)))
        fronts = nd_sort(pop)
        assert sorted(i for f in fronts for i in f) == list(range(25))

    def test_empty_population(self):
        with pytest.raises(ValueError):
            nd_sort([])


class TestCrowdingDistance:
    def test_pair_both_infinite(self):
        front = solutions([(-1, 0), (0, -1)])
        crowding_distance(front)
        assert front[0].crowding == np.inf
        assert front[1].crowding == np.inf

    def test_hand_computed_interior(self):
        front = solutions([(0, -2), (-1, -1), (-2, 0)])
        crowding_distance(front)
        assert front[1].crowding == pytest.approx(2.0)

    def test_singleton_infinite(self):
        front = solutions([(-1, -1)])
        crowding_distance(front)
        assert front[0].crowding == np.inf

    def test_duplicates_are_zero_gap_neighbours(self):
        front = solutions([(0, -2), (-1, -1), (-1, -1), (-2, 0)])
        crowding_distance(front)
        dup = [s.crowding for s in front[1:3]]
        assert all(np.isfinite(c) for c in dup)

    @given(
        shift=st.floats(-100, 100, allow_nan=False),
        scale=st.floats(0.01, 100.0),
        seed=st.integers(0, 100),
    )
    @settings(max_examples=50, deadline=None)
    def test_affine_invariance_per_objective(self, shift, scale, seed):
        rng = np.random.default_rng(seed)
        objs = rng.normal(size=(6, 2))
        front = solutions(objs)
        crowding_distance(front)
        moved = solutions(objs * [scale, 1.0] + [shift, 0.0])
        crowding_distance(moved)
        for a, b in zip(front, moved):
            if np.isinf(a.crowding):
                assert np.isinf(b.crowding)
            else:
                assert b.crowding == pytest.approx(a.crowding, rel=1e-9, abs=1e-9)

    def test_zero_range_contributes_nothing(self):
        front = solutions([(-1, -3), (-1, -2), (-1, -1)])
        crowding_distance(front)
        assert front[1].crowding == pytest.approx(1.0)  # only objective 2 counts


def scored(obj, n=4, bits=None):
    mask = np.zeros(n, dtype=bool)
    mask[bits if bits is not None else [0]] = True
    return ScoredSolution(mask=mask, obj=np.array(obj, float))


class TestArchiveInsert:
    GRID = GridConfig(divisions=10)

    def test_dominated_insert_is_rejected(self):
        rng = np.random.default_rng(0)
        arch = ParetoArchive(capacity=5)
        archive_insert(arch, scored((-2, -2)), self.GRID, rng)
        assert not archive_insert(arch, scored((-1, -1), bits=[1]), self.GRID, rng)
        assert len(arch.members) == 1

    def test_insert_removes_dominated_members(self):
        rng = np.random.default_rng(0)
        arch = ParetoArchive(capacity=10)
        for i, o in enumerate([(-1, -1), (-1.5, -0.5), (-0.5, -1.5)]):
            archive_insert(arch, scored(o, bits=[i]), self.GRID, rng)
        assert archive_insert(arch, scored((-2, -2), bits=[3]), self.GRID, rng)
        assert len(arch.members) == 1
        np.testing.assert_allclose(arch.members[0].obj, (-2, -2))

    def test_duplicate_mask_rejected(self):
        rng = np.random.default_rng(0)
        arch = ParetoArchive(capacity=5)
        archive_insert(arch, scored((-2, -2)), self.GRID, rng)
        assert not archive_insert(arch, scored((-2, -2)), self.GRID, rng)
        assert len(arch.members) == 1

    def test_capacity_stress_keeps_mutual_nondominance(self):
        rng = np.random.default_rng(77)
        arch = ParetoArchive(capacity=20)
        for i in range(300):
            # points on a noisy trade-off curve, many mutually non-dominated
            f1 = -rng.random()
            f2 = -(1.0 - f1**2) - 0.01 * rng.random()
            mask = np.zeros(16, dtype=bool)
            mask[list({i % 16, (i * 7) % 16})] = True
            archive_insert(arch, ScoredSolution(mask, np.array([f1, f2])), self.GRID, rng)
            assert len(arch.members) <= 20
        objs = arch.objectives()
        for i in range(len(objs)):
            for j in range(len(objs)):
                if i != j:
                    assert not dominates(objs[i], objs[j])

    def test_eviction_deterministic_under_seed(self):
        def run(seed):
            rng = np.random.default_rng(seed)
            arch = ParetoArchive(capacity=8)
            urng = np.random.default_rng(999)
            for i in range(100):
                f1 = -urng.random()
                f2 = -1.0 + 0.9 * -f1
                mask = np.zeros(8, dtype=bool)
                mask[i % 8] = True
                mask[(i // 8) % 8] = True
                archive_insert(arch, ScoredSolution(mask, np.array([f1, f2])), self.GRID, rng)
            return [tuple(m.obj) for m in arch.members]

        assert run(5) == run(5)
