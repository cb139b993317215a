"""Integer-lattice domain algebra.

An :class:`IndexSet` is a finite subset of Z^d held in one canonical order:
points are compared by their reversed coordinate tuple (last coordinate
first), so the first coordinate varies fastest.  On a box of side N this is
exactly the vectorization m1 + m2*N + m3*N**2 + ..., which is what every
structured matrix in this package is built on.  Dimensions are numbered
1..d throughout the public API.
"""

from __future__ import annotations

from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import DecompositionError, DegenerateFiberError, DomainError

Point = tuple[int, ...]


def _as_point(raw, dim: int) -> Point:
    if isinstance(raw, (int, np.integer)):
        raw = (raw,)
    pt = tuple(raw)
    if len(pt) != dim:
        raise DomainError(f"point {raw!r} does not have dimension {dim}")
    out = []
    for c in pt:
        ci = int(c)
        if ci != c:
            raise DomainError(f"non-integer coordinate {c!r} in point {raw!r}")
        out.append(ci)
    return tuple(out)


def canonical_order(points: Iterable[Sequence[int]]) -> list[Point]:
    """Deduplicate and sort points with the last coordinate most significant."""
    return sorted({tuple(p) for p in points}, key=lambda p: p[::-1])


@dataclass(frozen=True)
class IndexSet:
    """Immutable finite subset of Z^d in canonical order."""

    dim: int
    points: tuple[Point, ...]

    def __post_init__(self):
        if self.dim < 1:
            raise DomainError(f"dimension must be at least 1, got {self.dim}")
        pts = [_as_point(p, self.dim) for p in self.points]
        if not pts:
            raise DomainError("an index set must contain at least one point")
        object.__setattr__(self, "points", tuple(canonical_order(pts)))

    @cached_property
    def as_array(self) -> np.ndarray:
        arr = np.asarray(self.points, dtype=np.int64).reshape(len(self.points), self.dim)
        arr.setflags(write=False)
        return arr

    @cached_property
    def position(self) -> dict[Point, int]:
        return {p: i for i, p in enumerate(self.points)}

    @cached_property
    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        lo = self.as_array.min(axis=0)
        hi = self.as_array.max(axis=0)
        lo.setflags(write=False)
        hi.setflags(write=False)
        return lo, hi

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __contains__(self, point) -> bool:
        try:
            return _as_point(point, self.dim) in self.position
        except DomainError:
            return False

    def translate(self, shift: Sequence[int]) -> "IndexSet":
        sh = _as_point(shift, self.dim)
        return IndexSet(self.dim, tuple(tuple(c + s for c, s in zip(p, sh)) for p in self.points))


@dataclass(frozen=True)
class FiberDecomposition:
    """Grouping of an index set into 1-d fibers along one dimension.

    Each fiber freezes every coordinate except dimension ``dimension_p`` and
    lists member positions (indices into the owning :class:`IndexSet`) with
    the varying coordinate strictly increasing.
    """

    dimension_p: int
    fibers: tuple[tuple[Point, tuple[int, ...]], ...]


@dataclass(frozen=True)
class DeletionMasks:
    """Row-selection masks that realize the unit shift along one dimension.

    ``keep_minus`` drops the last member of every fiber, ``keep_plus`` drops
    the first.  Both are ascending positions into the canonical order, and
    entry j of ``keep_plus`` is entry j of ``keep_minus`` translated by one
    step along dimension ``dimension_p``.
    """

    dimension_p: int
    keep_minus: tuple[int, ...]
    keep_plus: tuple[int, ...]


def make_box(widths: Sequence[int], offset: Sequence[int] | None = None) -> IndexSet:
    """Full box with the given per-dimension widths, anchored at ``offset``."""
    widths = tuple(int(w) for w in widths)
    if not widths:
        raise DomainError("a box needs at least one width")
    if any(w <= 0 for w in widths):
        raise DomainError(f"box widths must be positive, got {widths}")
    d = len(widths)
    if offset is None:
        offset = (0,) * d
    off = _as_point(offset, d)
    grids = np.indices(widths).reshape(d, -1).T + np.asarray(off)
    return IndexSet(d, tuple(map(tuple, grids.tolist())))


def make_shape(spec: Mapping) -> IndexSet:
    """Build an index set from a shape descriptor.

    Supported kinds: ``triangle`` (side), ``half_disc`` (radius) and
    ``mask`` (explicit point list).
    """
    if not isinstance(spec, Mapping):
        raise DomainError(f"shape descriptor must be a mapping, got {type(spec).__name__}")
    kind = spec.get("kind")
    if kind == "triangle":
        side = spec.get("side")
        if side is None or int(side) != side or int(side) < 1:
            raise DomainError(f"triangle needs a positive integer side, got {side!r}")
        side = int(side)
        pts = [(i, j) for j in range(1, side + 1) for i in range(1, side + 2 - j)]
        return IndexSet(2, tuple(pts))
    if kind == "half_disc":
        radius = spec.get("radius")
        if radius is None or radius < 0:
            raise DomainError(f"half_disc needs a nonnegative radius, got {radius!r}")
        r2 = float(radius) ** 2
        rmax = int(np.floor(float(radius)))
        pts = [
            (i, j)
            for j in range(0, rmax + 1)
            for i in range(-rmax, rmax + 1)
            if i * i + j * j <= r2
        ]
        if not pts:
            raise DomainError(f"half_disc of radius {radius!r} contains no lattice points")
        return IndexSet(2, tuple(pts))
    if kind == "mask":
        pts = spec.get("points")
        if not pts:
            raise DomainError("mask descriptor needs a nonempty point list")
        first = pts[0]
        d = 1 if isinstance(first, (int, np.integer)) else len(tuple(first))
        return IndexSet(d, tuple(_as_point(p, d) for p in pts))
    raise DomainError(f"unknown shape kind {kind!r}")


def minkowski_sum(a: IndexSet, b: IndexSet) -> IndexSet:
    """Pointwise sum set {x + y : x in a, y in b}."""
    if a.dim != b.dim:
        raise DomainError(f"dimension mismatch: {a.dim} vs {b.dim}")
    sums = a.as_array[:, None, :] + b.as_array[None, :, :]
    flat = sums.reshape(-1, a.dim)
    return IndexSet(a.dim, tuple(map(tuple, np.unique(flat, axis=0).tolist())))


def erode(omega: IndexSet, xi: IndexSet) -> IndexSet:
    """Largest set Y with Y + xi contained in omega.

    Raises :class:`DecompositionError` when no translate of ``xi`` fits
    inside ``omega``.
    """
    if omega.dim != xi.dim:
        raise DomainError(f"dimension mismatch: {omega.dim} vs {xi.dim}")
    members = set(omega.points)
    anchor = xi.points[0]
    candidates = {tuple(o - a for o, a in zip(w, anchor)) for w in omega.points}
    kept = [
        y
        for y in candidates
        if all(tuple(yc + xc for yc, xc in zip(y, x)) in members for x in xi.points)
    ]
    if not kept:
        raise DecompositionError(
            "erosion is empty: no translate of the structure grid fits inside the sampling domain"
        )
    return IndexSet(omega.dim, tuple(kept))


def fibers(xi: IndexSet, p: int) -> FiberDecomposition:
    """Decompose ``xi`` into fibers along dimension ``p`` (1-based)."""
    if not 1 <= p <= xi.dim:
        raise DomainError(f"dimension p must be in 1..{xi.dim}, got {p}")
    ax = p - 1
    groups: dict[Point, list[int]] = {}
    for idx, pt in enumerate(xi.points):
        frozen = pt[:ax] + pt[ax + 1 :]
        groups.setdefault(frozen, []).append(idx)
    ordered = []
    for frozen in sorted(groups, key=lambda t: t[::-1]):
        members = sorted(groups[frozen], key=lambda i: xi.points[i][ax])
        ordered.append((frozen, tuple(members)))
    return FiberDecomposition(dimension_p=p, fibers=tuple(ordered))


def check_convex_fibers(xi: IndexSet) -> bool:
    """True when every fiber in every dimension is gap-free and not a singleton."""
    for p in range(1, xi.dim + 1):
        ax = p - 1
        for _, members in fibers(xi, p).fibers:
            if len(members) < 2:
                return False
            coords = [xi.points[i][ax] for i in members]
            if any(b - a != 1 for a, b in zip(coords, coords[1:])):
                return False
    return True


def deletion_masks(xi: IndexSet, p: int) -> DeletionMasks:
    """Masks realizing the unit shift along dimension ``p``.

    Every fiber must be contiguous with at least two members; a singleton or
    gapped fiber raises :class:`DegenerateFiberError` naming the fiber.
    """
    dec = fibers(xi, p)
    ax = p - 1
    drop_last: set[int] = set()
    drop_first: set[int] = set()
    for frozen, members in dec.fibers:
        if len(members) < 2:
            raise DegenerateFiberError(
                f"fiber {frozen} along dimension {p} is a singleton; "
                "the unit shift has nowhere to go",
                fiber=frozen,
                dimension=p,
            )
        coords = [xi.points[i][ax] for i in members]
        if any(b - a != 1 for a, b in zip(coords, coords[1:])):
            raise DegenerateFiberError(
                f"fiber {frozen} along dimension {p} has gaps: coordinates {coords}",
                fiber=frozen,
                dimension=p,
            )
        drop_last.add(members[-1])
        drop_first.add(members[0])
    keep_minus = tuple(i for i in range(len(xi)) if i not in drop_last)
    keep_plus = tuple(i for i in range(len(xi)) if i not in drop_first)
    return DeletionMasks(dimension_p=p, keep_minus=keep_minus, keep_plus=keep_plus)
