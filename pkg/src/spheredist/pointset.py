"""Finite subsets of a box ``B_N = anchor + {1, ..., N}^d``.

Text format (one set per file)::

    d N anchor_1 ... anchor_d mode
    x_1 ... x_d
    ...

``mode`` is ``periodic`` (the box is read as the torus Z_N^d) or
``truncate`` (the box sits inside Z^d).  Points must lie in the box and may
not repeat.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, ParseError

BOUNDARY_MODES = ("periodic", "truncate")


def _lexsort_rows(pts):
    if len(pts) == 0:
        return pts
    order = np.lexsort(pts.T[::-1])
    return pts[order]


@dataclass(frozen=True, eq=False)
class PointSet:
    dim: int
    side: int
    anchor: tuple
    elements: np.ndarray
    boundary_mode: str = "periodic"
    _mask: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ParameterError("dimension must be >= 1")
        if self.side < 1:
            raise ParameterError("box side must be >= 1")
        if len(self.anchor) != self.dim:
            raise ParameterError("anchor length must equal the dimension")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ParameterError(f"boundary mode must be one of {BOUNDARY_MODES}")

    @classmethod
    def from_mask(cls, mask, anchor=None, boundary_mode="periodic"):
        """Build from a boolean array indexed by ``x - anchor - 1``."""
        mask = np.asarray(mask, dtype=bool)
        d = mask.ndim
        side = mask.shape[0]
        if any(s != side for s in mask.shape):
            raise ParameterError("mask must be a hypercube")
        anchor = tuple(int(a) for a in (anchor if anchor is not None else (0,) * d))
        # argwhere walks C order, which is lexicographic.
        pts = np.argwhere(mask).astype(np.int64) + np.asarray(anchor, dtype=np.int64) + 1
        pts.setflags(write=False)
        mask = mask.copy()
        mask.setflags(write=False)
        return cls(d, side, anchor, pts, boundary_mode, mask)

    @classmethod
    def from_points(cls, points, dim, side, anchor=None, boundary_mode="periodic"):
        """Validate, sort and wrap explicit points."""
        anchor = tuple(int(a) for a in (anchor if anchor is not None else (0,) * dim))
        pts = np.asarray(points, dtype=np.int64).reshape(-1, dim)
        lo = np.asarray(anchor) + 1
        bad = np.any((pts < lo) | (pts > lo + side - 1), axis=1)
        if bad.any():
            raise ParameterError(f"point {tuple(pts[bad][0])} lies outside the box")
        pts = _lexsort_rows(pts)
        if len(pts) > 1 and np.any(np.all(pts[1:] == pts[:-1], axis=1)):
            raise ParameterError("duplicate points")
        pts.setflags(write=False)
        return cls(dim, side, anchor, pts, boundary_mode)

    @classmethod
    def full(cls, dim, side, anchor=None, boundary_mode="periodic"):
        return cls.from_mask(np.ones((side,) * dim, dtype=bool), anchor, boundary_mode)

    @classmethod
    def empty(cls, dim, side, anchor=None, boundary_mode="periodic"):
        return cls.from_mask(np.zeros((side,) * dim, dtype=bool), anchor, boundary_mode)

    def __len__(self):
        return int(self.elements.shape[0])

    def mask(self) -> np.ndarray:
        """Boolean indicator on the box, indexed by ``x - anchor - 1``."""
        if self._mask is None:
            m = np.zeros((self.side,) * self.dim, dtype=bool)
            if len(self):
                m[tuple(self.indices().T)] = True
            m.setflags(write=False)
            object.__setattr__(self, "_mask", m)
        return self._mask

    def indices(self) -> np.ndarray:
        """Element coordinates relative to the box corner (0-based)."""
        return self.elements - np.asarray(self.anchor, dtype=np.int64) - 1

    @property
    def density(self) -> float:
        return len(self) / float(self.side) ** self.dim

    def with_mode(self, boundary_mode):
        return PointSet(self.dim, self.side, self.anchor, self.elements, boundary_mode, self._mask)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return (
            self.dim == other.dim
            and self.side == other.side
            and self.anchor == other.anchor
            and self.boundary_mode == other.boundary_mode
            and np.array_equal(self.elements, other.elements)
        )

    __hash__ = None


def format_pointset(A: PointSet) -> str:
    head = " ".join(str(v) for v in (A.dim, A.side, *A.anchor, A.boundary_mode))
    lines = [head]
    lines.extend(" ".join(str(int(c)) for c in p) for p in A.elements)
    return "\n".join(lines) + "\n"


def write_pointset(A: PointSet, path) -> None:
    with open(path, "w") as fh:
        fh.write(format_pointset(A))


def parse_pointset(text: str) -> PointSet:
    """Strict parser for the point-set text format.

    Errors carry the 1-based line number of the first offending line.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("missing header 'd N anchor_1 ... anchor_d mode'", 1)
    head = lines[0].split()
    try:
        d = int(head[0])
        side = int(head[1])
    except (IndexError, ValueError):
        raise ParseError("header must start with integers d and N", 1) from None
    if d < 1 or side < 1:
        raise ParseError("d and N must be positive", 1)
    if len(head) != d + 3:
        raise ParseError(f"header needs {d + 3} fields (d, N, {d} anchor coordinates, mode), got {len(head)}", 1)
    try:
        anchor = tuple(int(t) for t in head[2 : 2 + d])
    except ValueError:
        raise ParseError("anchor coordinates must be integers", 1) from None
    mode = head[-1]
    if mode not in BOUNDARY_MODES:
        raise ParseError(f"mode must be one of {BOUNDARY_MODES}, got {mode!r}", 1)

    lo = np.asarray(anchor) + 1
    hi = lo + side - 1
    seen = {}
    pts = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        toks = line.split()
        if len(toks) != d:
            raise ParseError(f"expected {d} coordinates, got {len(toks)}", lineno)
        try:
            p = tuple(int(t) for t in toks)
        except ValueError:
            raise ParseError(f"non-integer coordinate in {line.strip()!r}", lineno) from None
        if any(c < a or c > b for c, a, b in zip(p, lo, hi)):
            raise ParseError(f"point {p} lies outside the box", lineno)
        if p in seen:
            raise ParseError(f"duplicate point {p} (first on line {seen[p]})", lineno)
        seen[p] = lineno
        pts.append(p)
    return PointSet.from_points(np.array(pts, dtype=np.int64).reshape(-1, d), d, side, anchor, mode)


def read_pointset(path) -> PointSet:
    with open(path) as fh:
        return parse_pointset(fh.read())
