"""Integer points on spheres: enumeration, counting, translated intersections.

``S_lam = {x in Z^d : |x|^2 = lam}``.  Points are stored as ``(n, d)`` int64
arrays in lexicographic order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError, ParameterError

#: Largest sphere :func:`enumerate_sphere` materialises by default.
DEFAULT_POINT_BUDGET = 10_000_000

LatticePoint = tuple


@dataclass(frozen=True, eq=False)
class Sphere:
    """All lattice points of squared norm ``lam`` in dimension ``dim``."""

    dim: int
    lam: int
    points: np.ndarray

    @property
    def count(self) -> int:
        return int(self.points.shape[0])

    def __len__(self):
        return self.count

    def __iter__(self):
        for p in self.points:
            yield tuple(int(c) for c in p)


def _check_params(d, lam):
    if int(d) != d or d < 1:
        raise ParameterError(f"dimension must be a positive integer, got {d!r}")
    if int(lam) != lam or lam < 0:
        raise ParameterError(f"lambda must be a non-negative integer, got {lam!r}")
    return int(d), int(lam)


@lru_cache(maxsize=64)
def _count_table(d: int, lam_max: int) -> np.ndarray:
    # r_k(n) for n <= lam_max built up one coordinate at a time:
    # r_k(n) = sum_c r_{k-1}(n - c^2).
    table = np.zeros(lam_max + 1, dtype=np.int64)
    table[0] = 1
    roots = math.isqrt(lam_max)
    for _ in range(d):
        nxt = table.copy()
        for c in range(1, roots + 1):
            sq = c * c
            nxt[sq:] += 2 * table[: lam_max + 1 - sq]
        table = nxt
    table.setflags(write=False)
    return table


def representation_counts(d: int, lam_max: int) -> np.ndarray:
    """``r_d(n)`` for every ``0 <= n <= lam_max`` as an int64 array."""
    d, lam_max = _check_params(d, lam_max)
    return _count_table(d, lam_max)


def representation_count(d: int, lam: int) -> int:
    """Number of ordered signed representations of ``lam`` as ``d`` squares.

    Counts ``|S_lam|`` without building the points.

    >>> representation_count(5, 2)
    40
    >>> representation_count(4, 7)
    64
    """
    d, lam = _check_params(d, lam)
    return int(_count_table(d, lam)[lam])


def _points(d, rem, memo):
    key = (d, rem)
    if key in memo:
        return memo[key]
    if d == 1:
        r = math.isqrt(rem)
        if r * r != rem:
            out = np.empty((0, 1), dtype=np.int64)
        elif r == 0:
            out = np.zeros((1, 1), dtype=np.int64)
        else:
            out = np.array([[-r], [r]], dtype=np.int64)
    else:
        r = math.isqrt(rem)
        blocks = []
        for c in range(-r, r + 1):
            tail = _points(d - 1, rem - c * c, memo)
            if len(tail):
                head = np.full((len(tail), 1), c, dtype=np.int64)
                blocks.append(np.hstack([head, tail]))
        out = np.vstack(blocks) if blocks else np.empty((0, d), dtype=np.int64)
    memo[key] = out
    return out


def enumerate_sphere(d: int, lam: int, budget: int = DEFAULT_POINT_BUDGET) -> Sphere:
    """Every ``x in Z^d`` with ``|x|^2 = lam``, once each, lexicographically.

    Raises :class:`CapacityError` if ``|S_lam|`` exceeds ``budget``.
    """
    d, lam = _check_params(d, lam)
    n = representation_count(d, lam)
    if n > budget:
        raise CapacityError(
            f"|S_{lam}| = {n} in dimension {d} exceeds the point budget {budget}; "
            "reduce lambda or d"
        )
    pts = _points(d, lam, {})
    pts = np.ascontiguousarray(pts)
    pts.setflags(write=False)
    return Sphere(d, lam, pts)


@lru_cache(maxsize=256)
def cached_sphere(d: int, lam: int) -> Sphere:
    """Memoised :func:`enumerate_sphere`; spheres are immutable."""
    return enumerate_sphere(d, lam)


def translated_points(x, sphere: Sphere, q: int = 1) -> np.ndarray:
    """The points ``x + q*y`` for ``y`` in ``sphere``."""
    x = np.asarray(x, dtype=np.int64)
    if x.shape != (sphere.dim,):
        raise ParameterError(
            f"point of dimension {x.shape} does not match sphere dimension {sphere.dim}"
        )
    return x[None, :] + int(q) * sphere.points


def translated_intersection_count(A, x, lam: int, q: int = 1, sphere: Sphere | None = None) -> int:
    """``|A ∩ (x + q*S_lam)|`` under ``A``'s boundary mode.

    In ``"periodic"`` mode coordinates are reduced modulo the box side; in
    ``"truncate"`` mode translates leaving the box are simply absent.
    """
    if q < 1:
        raise ParameterError("q must be a positive integer")
    if sphere is None:
        sphere = cached_sphere(A.dim, lam)
    if sphere.dim != A.dim:
        raise ParameterError(f"set dimension {A.dim} does not match sphere dimension {sphere.dim}")
    if len(np.asarray(x)) != A.dim:
        raise ParameterError(f"point {tuple(x)} does not have dimension {A.dim}")
    if sphere.lam != lam:
        raise ParameterError("sphere radius does not match lambda")
    pts = translated_points(x, sphere, q)
    idx = pts - np.asarray(A.anchor, dtype=np.int64) - 1
    if A.boundary_mode == "periodic":
        idx %= A.side
    else:
        inside = np.all((idx >= 0) & (idx < A.side), axis=1)
        idx = idx[inside]
    mask = A.mask()
    return int(np.count_nonzero(mask[tuple(idx.T)]))
