"""Lattice domain algebra: ordering, set operations, fibers, masks."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from strategies import index_sets, point_lists, run_domains
from gdesprit.domains import (
    IndexSet,
    canonical_order,
    check_convex_fibers,
    deletion_masks,
    erode,
    fibers,
    make_box,
    make_shape,
    minkowski_sum,
)
from gdesprit.errors import (
    DecompositionError,
    DegenerateFiberError,
    DomainError,
)
from gdesprit.hankel import capacity


class TestCanonicalOrder:
    def test_small_box_order(self):
        xi = make_box((2, 2), offset=(1, 1))
        assert xi.points == ((1, 1), (2, 1), (1, 2), (2, 2))

    def test_first_coordinate_varies_fastest(self):
        xi = make_box((3, 2))
        assert xi.points == ((0, 0), (1, 0), (2, 0), (0, 1), (1, 1), (2, 1))

    def test_matches_cube_vectorization(self):
        # the canonical order of an N-cube is the index m1 + m2*N + m3*N^2
        for d in (1, 2, 3):
            n = 3
            xi = make_box((n,) * d)
            coords = np.indices((n,) * d).reshape(d, -1, order="F").T
            assert [tuple(c) for c in coords] == list(xi.points)

    @given(point_lists())
    def test_matches_reference_sort(self, dim_pts):
        d, pts = dim_pts
        assert canonical_order(pts) == oracles.canonical_sort_ref(pts)

    @given(point_lists())
    def test_construction_deduplicates_and_sorts(self, dim_pts):
        d, pts = dim_pts
        xi = IndexSet(d, tuple(pts))
        assert list(xi.points) == oracles.canonical_sort_ref(pts)
        # idempotent: rebuilding from its own points changes nothing
        assert IndexSet(d, xi.points).points == xi.points


class TestIndexSet:
    def test_requires_points(self):
        with pytest.raises(DomainError):
            IndexSet(2, ())

    def test_rejects_wrong_dimension_point(self):
        with pytest.raises(DomainError):
            IndexSet(2, ((1, 2, 3),))

    def test_rejects_fractional_coordinates(self):
        with pytest.raises(DomainError):
            IndexSet(1, ((1.5,),))

    def test_membership_and_position(self):
        xi = make_box((3, 3), offset=(1, 1))
        assert (2, 3) in xi
        assert (0, 0) not in xi
        assert (1, 2, 3) not in xi
        for i, p in enumerate(xi.points):
            assert xi.position[p] == i

    def test_as_array_read_only(self):
        xi = make_box((2, 2))
        with pytest.raises(ValueError):
            xi.as_array[0, 0] = 9

    def test_bounding_box(self):
        xi = IndexSet(2, ((-1, 4), (3, -2)))
        lo, hi = xi.bounding_box
        assert lo.tolist() == [-1, -2]
        assert hi.tolist() == [3, 4]

    @given(index_sets(), st.tuples(st.integers(-4, 4), st.integers(-4, 4), st.integers(-4, 4)))
    def test_translate_preserves_order(self, xi, shift3):
        shift = shift3[: xi.dim]
        moved = xi.translate(shift)
        expected = [tuple(c + s for c, s in zip(p, shift)) for p in xi.points]
        # translation is order-preserving: positions line up elementwise
        assert list(moved.points) == expected

    def test_one_dimensional_points_accept_bare_ints(self):
        assert IndexSet(1, (3, 1, 2)).points == ((1,), (2,), (3,))


class TestShapes:
    def test_box_with_offset(self):
        xi = make_box((2, 3), offset=(-1, 5))
        assert len(xi) == 6
        lo, hi = xi.bounding_box
        assert lo.tolist() == [-1, 5]
        assert hi.tolist() == [0, 7]

    def test_box_rejects_nonpositive_width(self):
        with pytest.raises(DomainError):
            make_box((3, 0))

    def test_triangle_membership(self):
        tri = make_shape({"kind": "triangle", "side": 3})
        expected = {(i, j) for i in range(1, 4) for j in range(1, 4) if i + j <= 4}
        assert set(tri.points) == expected

    def test_half_disc_membership(self):
        hd = make_shape({"kind": "half_disc", "radius": 3})
        expected = {
            (i, j)
            for i in range(-3, 4)
            for j in range(0, 4)
            if i * i + j * j <= 9
        }
        assert set(hd.points) == expected

    def test_mask_round_trip(self):
        pts = [(0, 2), (1, 1), (0, 2)]
        xi = make_shape({"kind": "mask", "points": pts})
        assert xi.points == ((1, 1), (0, 2))

    def test_unknown_kind_rejected(self):
        with pytest.raises(DomainError):
            make_shape({"kind": "pentagon", "side": 2})


class TestMinkowskiAndErosion:
    @given(index_sets(max_size=8), index_sets(max_size=8))
    def test_minkowski_matches_reference(self, a, b):
        if a.dim != b.dim:
            return
        got = minkowski_sum(a, b)
        assert list(got.points) == oracles.minkowski_ref(a.points, b.points)

    @given(index_sets(dim=2, max_size=6), index_sets(dim=2, max_size=6), index_sets(dim=2, max_size=6))
    def test_minkowski_commutative_associative(self, a, b, c):
        ab = minkowski_sum(a, b)
        assert ab.points == minkowski_sum(b, a).points
        assert minkowski_sum(ab, c).points == minkowski_sum(a, minkowski_sum(b, c)).points

    @given(index_sets(max_size=8))
    def test_minkowski_origin_identity(self, a):
        origin = IndexSet(a.dim, ((0,) * a.dim,))
        assert minkowski_sum(a, origin).points == a.points

    def test_dimension_mismatch(self):
        with pytest.raises(DomainError):
            minkowski_sum(make_box((2,)), make_box((2, 2)))

    @given(index_sets(dim=2, max_size=7), index_sets(dim=2, max_size=4))
    def test_erode_matches_reference(self, omega, xi):
        ref = oracles.erode_ref(omega.points, xi.points)
        if not ref:
            with pytest.raises(DecompositionError):
                erode(omega, xi)
        else:
            assert list(erode(omega, xi).points) == ref

    @given(index_sets(dim=2, max_size=6), index_sets(dim=2, max_size=5))
    def test_erosion_contains_sum_factor(self, a, b):
        # (a + b) eroded by b recovers at least a
        omega = minkowski_sum(a, b)
        back = erode(omega, b)
        assert set(a.points) <= set(back.points)

    def test_erosion_empty_raises(self):
        omega = make_box((2, 2))
        xi = make_box((5, 5))
        with pytest.raises(DecompositionError):
            erode(omega, xi)

    def test_erosion_of_box_by_box(self):
        omega = make_box((5, 5))
        xi = make_box((3, 3))
        got = erode(omega, xi)
        assert got.points == make_box((3, 3)).points


class TestFibers:
    def test_box_fiber_counts(self):
        xi = make_box((3, 2))
        along_1 = fibers(xi, 1)
        along_2 = fibers(xi, 2)
        assert len(along_1.fibers) == 2
        assert all(len(members) == 3 for _, members in along_1.fibers)
        assert len(along_2.fibers) == 3
        assert all(len(members) == 2 for _, members in along_2.fibers)

    def test_fiber_members_increase_along_dimension(self):
        xi = make_shape({"kind": "half_disc", "radius": 3})
        for p in (1, 2):
            for _, members in fibers(xi, p).fibers:
                coords = [xi.points[i][p - 1] for i in members]
                assert coords == sorted(coords)

    @given(index_sets(dim=2, max_size=10), st.integers(1, 2))
    def test_fibers_match_reference(self, xi, p):
        ref = oracles.fibers_ref(xi.points, p)
        got = {frozen: tuple(xi.points[i] for i in members) for frozen, members in fibers(xi, p).fibers}
        assert {k: tuple(v) for k, v in ref.items()} == got

    def test_invalid_dimension(self):
        with pytest.raises(DomainError):
            fibers(make_box((2, 2)), 3)


class TestConvexity:
    def test_boxes_are_convex(self):
        assert check_convex_fibers(make_box((2, 2)))
        assert check_convex_fibers(make_box((4, 3, 2)))

    def test_triangle_corner_singletons(self):
        assert not check_convex_fibers(make_shape({"kind": "triangle", "side": 4}))

    def test_half_disc_pole_singleton(self):
        assert not check_convex_fibers(make_shape({"kind": "half_disc", "radius": 3}))

    def test_gapped_fiber_rejected(self):
        xi = IndexSet(2, ((0, 0), (2, 0), (0, 1), (1, 1), (2, 1)))
        assert not check_convex_fibers(xi)

    def test_trimmed_triangle_is_convex(self):
        side = 5
        pts = [
            (i, j)
            for i in range(1, side)
            for j in range(1, side)
            if i + j <= side + 1
        ]
        assert check_convex_fibers(IndexSet(2, tuple(pts)))

    def test_trimmed_half_disc_is_convex(self):
        hd = make_shape({"kind": "half_disc", "radius": 4})
        pts = [p for p in hd.points if p not in {(0, 4), (4, 0), (-4, 0)}]
        assert check_convex_fibers(IndexSet(2, tuple(pts)))

    @given(index_sets(dim=2, max_size=10))
    def test_matches_reference(self, xi):
        ref = all(oracles.convex_fibers_ref(xi.points, p) for p in (1, 2))
        assert check_convex_fibers(xi) == ref


class TestDeletionMasks:
    def _check_shift_correspondence(self, xi, p):
        masks = deletion_masks(xi, p)
        step = tuple(1 if q == p - 1 else 0 for q in range(xi.dim))
        assert len(masks.keep_minus) == len(masks.keep_plus)
        assert list(masks.keep_minus) == sorted(masks.keep_minus)
        assert list(masks.keep_plus) == sorted(masks.keep_plus)
        for a, b in zip(masks.keep_minus, masks.keep_plus):
            shifted = tuple(c + s for c, s in zip(xi.points[a], step))
            assert shifted == xi.points[b]

    def test_box_masks(self):
        xi = make_box((3, 3))
        masks = deletion_masks(xi, 1)
        kept = [xi.points[i] for i in masks.keep_minus]
        assert kept == [(0, 0), (1, 0), (0, 1), (1, 1), (0, 2), (1, 2)]
        self._check_shift_correspondence(xi, 1)
        self._check_shift_correspondence(xi, 2)

    def test_cube_masks(self):
        xi = make_box((3, 3, 3))
        for p in (1, 2, 3):
            self._check_shift_correspondence(xi, p)
            assert len(deletion_masks(xi, p).keep_minus) == 18

    def test_trimmed_triangle_masks(self):
        side = 5
        pts = [
            (i, j)
            for i in range(1, side)
            for j in range(1, side)
            if i + j <= side + 1
        ]
        xi = IndexSet(2, tuple(pts))
        for p in (1, 2):
            self._check_shift_correspondence(xi, p)

    def test_trimmed_half_disc_masks(self):
        hd = make_shape({"kind": "half_disc", "radius": 4})
        pts = [p for p in hd.points if p not in {(0, 4), (4, 0), (-4, 0)}]
        xi = IndexSet(2, tuple(pts))
        for p in (1, 2):
            self._check_shift_correspondence(xi, p)

    @given(run_domains(1))
    def test_generated_runs_dimension_1(self, xi):
        self._check_shift_correspondence(xi, 1)

    @given(run_domains(2))
    def test_generated_runs_dimension_2(self, xi):
        self._check_shift_correspondence(xi, 2)

    def test_singleton_fiber_raises(self):
        tri = make_shape({"kind": "triangle", "side": 4})
        for p in (1, 2):
            with pytest.raises(DegenerateFiberError) as err:
                deletion_masks(tri, p)
            assert err.value.dimension == p

    def test_gapped_fiber_raises(self):
        xi = IndexSet(2, ((0, 0), (2, 0), (0, 1), (1, 1), (2, 1)))
        with pytest.raises(DegenerateFiberError):
            deletion_masks(xi, 1)

    @given(run_domains(1))
    def test_mask_size_formula(self, xi):
        # dropping one member per fiber: |keep| = |points| - #fibers
        masks = deletion_masks(xi, 1)
        n_fibers = len(fibers(xi, 1).fibers)
        assert len(masks.keep_minus) == len(xi) - n_fibers


class TestCapacity:
    def test_published_constants(self):
        assert capacity(make_box((31, 31))) == 930
        assert capacity(make_box((11, 11, 11))) == 1210
        assert capacity(make_box((11, 11))) == 110

    def test_cube_formula(self):
        for n, d in ((2, 1), (3, 2), (4, 2), (3, 3), (5, 3)):
            xi = make_box((n,) * d)
            assert capacity(xi) == (n - 1) * n ** (d - 1)

    @given(run_domains(1))
    def test_matches_reference_when_defined(self, xi):
        if check_convex_fibers(xi):
            assert capacity(xi) == oracles.capacity_ref(xi.points)

    def test_degenerate_grid_raises(self):
        with pytest.raises(DegenerateFiberError):
            capacity(make_shape({"kind": "triangle", "side": 3}))
