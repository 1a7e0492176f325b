"""Fourier analysis on the finite group Z_M^d.

Normalisation: the forward transform is unnormalised,
``F[k] = sum_x f[x] exp(-2 pi i x.k / M)``, and the inverse carries
``M**-d``.  Frequency integrals over the torus become ``M**-d * sum_k``, so
``<f, g> = M**-d <F, G>`` holds exactly.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PaddingError, ParameterError, ParseError
from .lattice_sphere import Sphere, cached_sphere, representation_count
from .pointset import BOUNDARY_MODES, PointSet


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Values on ``Z_M^d``, row-major, index ``x`` meaning ``x mod M``.

    In ``truncate`` mode the function lives on the sub-box ``[0, box_side)^d``
    and the rest of the grid is zero padding.
    """

    values: np.ndarray
    boundary_mode: str = "periodic"
    box_side: int | None = None

    def __post_init__(self):
        v = self.values
        if v.ndim < 1 or any(s != v.shape[0] for s in v.shape):
            raise ParameterError(f"grid values must be a hypercube array, got shape {v.shape}")
        if self.boundary_mode not in BOUNDARY_MODES:
            raise ParameterError(f"boundary mode must be one of {BOUNDARY_MODES}")
        if self.boundary_mode == "truncate":
            if self.box_side is None or not 1 <= self.box_side <= v.shape[0]:
                raise ParameterError("truncate mode needs 1 <= box_side <= M")

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def side(self) -> int:
        return self.values.shape[0]

    def padding(self) -> int:
        """Free cells between the box and its periodic image (``M - N``)."""
        if self.boundary_mode == "periodic":
            return 0
        return self.side - self.box_side

    def require_padding(self, reach: int) -> None:
        """Raise :class:`PaddingError` unless ``M >= N + 2*reach``."""
        if self.boundary_mode == "truncate" and self.side < self.box_side + 2 * reach:
            raise PaddingError(
                f"grid side {self.side} < box side {self.box_side} + 2*{reach}; "
                "translated spheres would wrap"
            )

    def box_mask(self) -> np.ndarray:
        """Indicator of the box ``B_N`` on the grid (the whole grid when periodic)."""
        if self.boundary_mode == "periodic":
            return np.ones(self.values.shape, dtype=bool)
        m = np.zeros(self.values.shape, dtype=bool)
        m[(slice(0, self.box_side),) * self.dim] = True
        return m

    def like(self, values) -> "GridFunction":
        return GridFunction(values, self.boundary_mode, self.box_side)


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Transform values at the frequencies ``k / M``."""

    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.ndim

    @property
    def side(self) -> int:
        return self.values.shape[0]


def grid_from_pointset(A: PointSet, side: int | None = None) -> GridFunction:
    """Indicator ``1_A`` as a grid function.

    Periodic sets live on ``Z_N^d``.  Truncated sets are placed at the
    corner of a grid of side ``side`` (default ``N``; pass a larger side to
    get zero padding).
    """
    mask = A.mask()
    if A.boundary_mode == "periodic":
        if side not in (None, A.side):
            raise ParameterError("a periodic set lives on the torus of its own side")
        return GridFunction(mask.astype(float), "periodic")
    side = A.side if side is None else int(side)
    if side < A.side:
        raise ParameterError("grid side smaller than the box")
    v = np.zeros((side,) * A.dim)
    v[(slice(0, A.side),) * A.dim] = mask
    return GridFunction(v, "truncate", A.side)


def dft(f: GridFunction) -> Spectrum:
    return Spectrum(np.fft.fftn(f.values))


def idft(F: Spectrum, boundary_mode: str = "periodic", box_side: int | None = None) -> GridFunction:
    return GridFunction(np.fft.ifftn(F.values), boundary_mode, box_side)


def inner(f: GridFunction, g: GridFunction) -> complex:
    """``<f, g> = sum_x f(x) conj(g(x))``."""
    return complex(np.vdot(g.values, f.values))


def parseval_check(f: GridFunction, g: GridFunction) -> float:
    """``|<f,g> - M^-d <F,G>|``; both sides computed independently."""
    if f.values.shape != g.values.shape:
        raise ParameterError(f"shape mismatch {f.values.shape} vs {g.values.shape}")
    space = np.vdot(g.values, f.values)
    F, G = np.fft.fftn(f.values), np.fft.fftn(g.values)
    freq = np.vdot(G, F) / f.values.size
    return float(abs(space - freq))


def dft_direct(values: np.ndarray) -> np.ndarray:
    """O(M^2d) transform by the defining sum; reference for small grids."""
    values = np.asarray(values, dtype=complex)
    d, M = values.ndim, values.shape[0]
    coords = np.indices(values.shape).reshape(d, -1)
    phase = np.exp(-2j * np.pi * (coords.T @ coords) / M)
    return (phase @ values.reshape(-1)).reshape(values.shape)


def sigma_hat(sphere: Sphere, xi) -> np.ndarray | complex:
    """``|S|^-1 sum_{x in S} exp(-2 pi i x.xi)`` at one or many ``xi``.

    ``xi`` has shape ``(d,)`` or ``(n, d)``.
    """
    if sphere.count == 0:
        raise ParameterError(f"S_{sphere.lam} is empty in dimension {sphere.dim}")
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xi = np.atleast_2d(xi)
    if xi.shape[1] != sphere.dim:
        raise ParameterError("frequency dimension does not match the sphere")
    pts = sphere.points.astype(float)
    out = np.empty(len(xi), dtype=complex)
    step = max(1, 4_000_000 // max(1, sphere.count))
    for i in range(0, len(xi), step):
        phase = pts @ xi[i : i + step].T
        out[i : i + step] = np.exp(-2j * np.pi * phase).mean(axis=0)
    return complex(out[0]) if single else out


def sphere_kernel(d: int, lam: int, M: int, q: int = 1) -> np.ndarray:
    """Normalised counting measure of ``q*S_lam`` wrapped onto ``Z_M^d``."""
    sphere = cached_sphere(d, lam)
    if sphere.count == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {d}")
    k = np.zeros((M,) * d)
    idx = (q * sphere.points) % M
    np.add.at(k, tuple(idx.T), 1.0 / sphere.count)
    return k


def sigma_hat_grid(d: int, lam: int, M: int, q: int = 1) -> np.ndarray:
    """``sigma_hat`` of ``q*S_lam`` at every grid frequency ``k/M`` (via the DFT)."""
    return np.fft.fftn(sphere_kernel(d, lam, M, q))


def sigma_hat_generating(d: int, lam: int, xi) -> np.ndarray:
    """``sigma_hat`` via the product of one-dimensional theta polynomials.

    ``sum_{|x|^2 = lam} prod_j e(-x_j xi_j)`` is the ``t^lam`` coefficient of
    ``prod_j (1 + sum_{c>=1} 2 cos(2 pi c xi_j) t^(c^2))``; real because the
    sphere is symmetric.  Costs ``O(d lam sqrt(lam))`` per frequency instead
    of ``O(d |S_lam|)``.
    """
    n = representation_count(d, lam)
    if n == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {d}")
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    if xi.shape[1] != d:
        raise ParameterError("frequency dimension does not match d")
    roots = math.isqrt(lam)
    cs = np.arange(1, roots + 1)
    out = np.empty(len(xi))
    step = max(1, 2_000_000 // (lam + 1))
    for i in range(0, len(xi), step):
        block = xi[i : i + step]
        weights = 2.0 * np.cos(2.0 * np.pi * block[:, :, None] * cs[None, None, :])
        poly = np.zeros((len(block), lam + 1))
        poly[:, 0] = 1.0
        for c, sq in zip(cs, cs * cs):
            poly[:, sq] = weights[:, 0, c - 1]
        for j in range(1, d - 1):
            nxt = poly.copy()
            for c, sq in zip(cs, cs * cs):
                nxt[:, sq:] += weights[:, j, c - 1, None] * poly[:, : lam + 1 - sq]
            poly = nxt
        if d == 1:
            coeff = poly[:, lam]
        else:
            # Only the t^lam coefficient of the final product is needed.
            coeff = poly[:, lam].copy()
            for c, sq in zip(cs, cs * cs):
                coeff += weights[:, d - 1, c - 1] * poly[:, lam - sq]
        out[i : i + step] = coeff / n
    return out


def dump_grid(f: GridFunction) -> str:
    """Text dump: header ``d M mode`` then ``M**d`` lines ``re im`` (row-major).

    Truncate-mode grids append the box side to the header (``d M truncate N``).
    """
    head = f"{f.dim} {f.side} {f.boundary_mode}"
    if f.boundary_mode == "truncate":
        head += f" {f.box_side}"
    v = np.asarray(f.values, dtype=complex).reshape(-1)
    body = "\n".join(f"{float(z.real)!r} {float(z.imag)!r}" for z in v)
    return head + "\n" + body + "\n"


def load_grid(text: str) -> GridFunction:
    lines = text.splitlines()
    if not lines:
        raise ParseError("empty grid file", 1)
    head = lines[0].split()
    try:
        d, M, mode = int(head[0]), int(head[1]), head[2]
    except (IndexError, ValueError):
        raise ParseError("header must be 'd M mode'", 1) from None
    if mode not in BOUNDARY_MODES:
        raise ParseError(f"unknown mode {mode!r}", 1)
    box = None
    if mode == "truncate":
        if len(head) != 4:
            raise ParseError("truncate header needs the box side: 'd M truncate N'", 1)
        box = int(head[3])
    elif len(head) != 3:
        raise ParseError("periodic header is 'd M periodic'", 1)
    body = [ln for ln in lines[1:]]
    if len(body) != M**d:
        raise ParseError(f"expected {M ** d} value lines, got {len(body)}")
    vals = np.empty(M**d, dtype=complex)
    for i, ln in enumerate(body):
        try:
            re, im = ln.split()
            vals[i] = complex(float(re), float(im))
        except ValueError:
            raise ParseError(f"bad complex pair {ln!r}", i + 2) from None
    return GridFunction(vals.reshape((M,) * d), mode, box)
