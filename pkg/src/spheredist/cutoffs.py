"""Smooth arithmetic cutoffs ``psi_{q,L}`` and box kernels ``chi_{q,L}``.

The radial profile is built from the bump ``b(y) = exp(-1/(1 - 4|y|^2))``
supported in ``|y| < 1/2``:

* ``psi_tilde = (b * b) / ||b||_2^2`` -- equals 1 at the origin, lies in
  ``[0, 1]`` and vanishes for ``|xi| >= 1``;
* ``psi = check(b)^2 / ||b||_2^2`` -- its inverse transform, non-negative.

Then ``psi_{q,L}(x) = (q/L)^d psi(x/L)`` on ``(qZ)^d`` and, by Poisson
summation, ``psi_hat_{q,L}(xi) = sum_l psi_tilde(L (xi - l/q))``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import CubicSpline
from scipy.special import gamma, j0, j1, jv, spherical_jn

from .errors import CapacityError, ParameterError
from .lattice_sphere import representation_counts

#: ``psi`` is treated as zero beyond this radius; ``psi(20) ~ 5e-14`` in d=5.
SPACE_RADIUS = 48.0
_SPACE_STEP = 1.0 / 200
_LENS_NODES = 96
_HANKEL_NODES = 800
#: Largest lattice sum (in radial shells or grid cells) attempted.
MAX_TERMS = 30_000_000


def bump(r):
    r = np.asarray(r, dtype=float)
    out = np.zeros_like(r)
    inside = r < 0.5
    out[inside] = np.exp(-1.0 / (1.0 - 4.0 * r[inside] ** 2))
    return out


def smooth_step(t):
    """C-infinity step: 0 for ``t <= 0``, 1 for ``t >= 1``."""
    t = np.asarray(t, dtype=float)

    def s(u):
        out = np.zeros_like(u)
        pos = u > 0
        out[pos] = np.exp(-1.0 / u[pos])
        return out

    a, b = s(t), s(1.0 - t)
    return a / (a + b)


def sphere_area(d: int) -> float:
    """Surface area of the unit sphere in R^d (``2`` for d = 1)."""
    return 2.0 * math.pi ** (d / 2) / gamma(d / 2)


def _self_convolution(rho, d):
    # (b*b)(rho e_1) without the constant area factor of the transverse
    # sphere; it cancels against the same integral at rho = 0.
    rho = np.atleast_1d(np.asarray(rho, dtype=float))
    x, w = leggauss(_LENS_NODES)
    r = rho[:, None]
    lo, hi = r - 0.5, np.full_like(r, 0.5)
    t = (lo + hi) / 2 + (hi - lo) / 2 * x[None, :]
    wt = (hi - lo) / 2 * w[None, :]
    if d == 1:
        f = bump(np.abs(t)) * bump(np.abs(t - r))
        return np.sum(wt * f, axis=1)
    t = t[:, :, None]
    wt = wt[:, :, None]
    smax = np.sqrt(np.clip(0.25 - np.maximum(t**2, (t - r[:, :, None]) ** 2), 0.0, None))
    s = smax / 2 * (x[None, None, :] + 1)
    ws = smax / 2 * w[None, None, :]
    f = bump(np.sqrt(t**2 + s**2)) * bump(np.sqrt((t - r[:, :, None]) ** 2 + s**2)) * s ** (d - 2)
    return np.sum(wt * ws * f, axis=(1, 2))


@lru_cache(maxsize=16)
def _psi_tilde_spline(d: int, resolution: int):
    rho = np.linspace(0.0, 1.0, resolution)
    vals = np.empty(resolution)
    for i in range(0, resolution, 256):
        vals[i : i + 256] = _self_convolution(rho[i : i + 256], d)
    vals /= vals[0]
    vals[-1] = 0.0
    return CubicSpline(rho, vals)


def psi_tilde(rho, d: int, resolution: int = 2049):
    """Radial profile ``psi_tilde(|xi|)``; zero for ``|xi| >= 1``."""
    rho = np.abs(np.asarray(rho, dtype=float))
    out = np.zeros_like(rho)
    inside = rho < 1.0
    if inside.any():
        out[inside] = np.clip(_psi_tilde_spline(d, resolution)(rho[inside]), 0.0, 1.0)
    return out


def _bessel_j(d, z):
    """``J_{d/2-1}(z)``; closed forms for the orders that occur in practice."""
    if d == 1:
        return np.sqrt(2.0 / (np.pi * z)) * np.cos(z)
    if d % 2 == 1:
        return np.sqrt(2.0 * z / np.pi) * spherical_jn((d - 3) // 2, z)
    if d == 2:
        return j0(z)
    if d == 4:
        return j1(z)
    return jv(d / 2 - 1, z)


@lru_cache(maxsize=16)
def _psi_space_spline(d: int):
    x, w = leggauss(_HANKEL_NODES)
    s = 0.25 * (x + 1.0)
    ws = 0.25 * w
    bs = bump(s)
    area = sphere_area(d)
    norm2 = area * np.sum(ws * bs**2 * s ** (d - 1))
    r = np.arange(0.0, SPACE_RADIUS + _SPACE_STEP, _SPACE_STEP)
    check = np.empty_like(r)
    check[0] = area * np.sum(ws * bs * s ** (d - 1))
    for i in range(1, len(r), 512):
        rr = r[i : i + 512, None]
        check[i : i + 512] = (
            2 * math.pi * rr[:, 0] ** (1 - d / 2)
            * np.sum(ws * bs * _bessel_j(d, 2 * math.pi * rr * s) * s ** (d / 2), axis=1)
        )
    return CubicSpline(r, check**2 / norm2), norm2


def psi_space(r, d: int):
    """Radial profile of ``psi`` on R^d (inverse transform of ``psi_tilde``)."""
    r = np.abs(np.asarray(r, dtype=float))
    out = np.zeros_like(r)
    inside = r <= SPACE_RADIUS
    if inside.any():
        spline, _ = _psi_space_spline(d)
        out[inside] = np.clip(spline(r[inside]), 0.0, None)
    return out


def _poisson_sum(xi, q, L, d, resolution, nearest_only=False):
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    base = np.rint(xi * q)
    offsets = [0] if (nearest_only or L >= 2 * q) else [-1, 0, 1]
    total = np.zeros(len(xi))
    for combo in itertools.product(offsets, repeat=d):
        centre = (base + np.asarray(combo)) / q
        dist = np.sqrt(np.sum((xi - centre) ** 2, axis=1))
        total += psi_tilde(L * dist, d, resolution)
    return total


@dataclass(frozen=True)
class CutoffProfile:
    """``psi_{q,L}`` in dimension ``dim``."""

    q: int
    L: float
    dim: int
    resolution: int = 2049

    @property
    def normalization(self) -> float:
        return (self.q / self.L) ** self.dim

    def psi_tilde(self, rho):
        return psi_tilde(rho, self.dim, self.resolution)

    def value(self, x):
        """``psi_{q,L}(x)`` at integer points ``x`` (shape ``(d,)`` or ``(n, d)``)."""
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        on_lattice = np.all(x % self.q == 0, axis=1)
        r = np.sqrt(np.sum(x.astype(float) ** 2, axis=1)) / self.L
        return np.where(on_lattice, self.normalization * psi_space(r, self.dim), 0.0)

    def fourier(self, xi):
        return cutoff_fourier(self, xi)

    def _shells(self):
        n_max = int((SPACE_RADIUS * self.L / self.q) ** 2)
        if n_max > MAX_TERMS:
            raise CapacityError(f"lattice sum over {n_max} shells exceeds the budget")
        counts = representation_counts(self.dim, n_max).astype(float)
        n = np.arange(n_max + 1)
        vals = self.normalization * psi_space(self.q * np.sqrt(n) / self.L, self.dim)
        return n, counts * vals

    def lattice_mass(self) -> float:
        """``sum_x psi_{q,L}(x)``, summed shell by shell over ``(qZ)^d``."""
        _, terms = self._shells()
        return math.fsum(terms[::-1])

    def tail_mass(self, radius: float) -> float:
        """``sum_{|x| >= radius} psi_{q,L}(x)``."""
        n, terms = self._shells()
        keep = self.q * self.q * n >= radius * radius
        return math.fsum(terms[keep][::-1])


def build_cutoff(q: int, L: float, d: int, resolution: int = 2049) -> CutoffProfile:
    """Cutoff ``psi_{q,L}``; requires ``1 <= q <= L``.

    ``resolution`` is the number of radial samples used to tabulate
    ``psi_tilde`` (cubic-spline interpolated; about 3e-12 accurate at 2049).
    """
    if int(q) != q or q < 1:
        raise ParameterError(f"q must be a positive integer, got {q!r}")
    if L < q:
        raise ParameterError(f"cutoff needs q <= L, got q={q}, L={L}")
    if d < 1:
        raise ParameterError("dimension must be >= 1")
    return CutoffProfile(int(q), float(L), int(d), int(resolution))


def cutoff_fourier(profile: CutoffProfile, xi):
    """``psi_hat_{q,L}(xi) = sum_l psi_tilde(L (xi - l/q))``.

    Only centres within ``1/L`` of ``xi`` contribute; when ``L >= 2q`` that is
    the nearest one alone.  Returns a float for a single ``xi``.
    """
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    if np.atleast_2d(xi).shape[1] != profile.dim:
        raise ParameterError("frequency dimension does not match the cutoff")
    out = _poisson_sum(xi, profile.q, profile.L, profile.dim, profile.resolution)
    return float(out[0]) if single else out


def cutoff_fourier_spatial(profile: CutoffProfile, xi, radius: float | None = None):
    """``psi_hat_{q,L}(xi)`` by direct summation over ``(qZ)^d`` in a ball.

    Independent of the Poisson formula; cost grows like ``(radius/q)^d``.
    """
    if radius is None:
        radius = 24.0 * profile.L
    m = int(radius // profile.q)
    d = profile.dim
    if (2 * m + 1) ** d > MAX_TERMS:
        raise CapacityError("spatial sum too large; lower the radius or use a smaller d")
    axis = np.arange(-m, m + 1) * profile.q
    grids = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([g.reshape(-1) for g in grids], axis=1)
    w = profile.value(pts)
    keep = w != 0
    pts, w = pts[keep].astype(float), w[keep]
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    return np.array([np.sum(w * np.cos(2 * np.pi * pts @ z)) for z in xi])


def arc_multiplier_grid(q: int, L: float, d: int, M: int, resolution: int = 2049):
    """``psi_hat_{q,L}(k/M)`` on the whole frequency grid.

    Returns ``(values, exact)``.  For ``L >= q`` the values are the exact
    Poisson sum (``exact=True``).  For ``L < q`` the cutoff is outside its
    defining range; the nearest-centre bump ``psi_tilde(L * dist(xi,
    q^-1 Z^d))`` is used instead and ``exact=False``.
    """
    nearest_only = L < q
    axis = np.arange(M) / M
    base = np.rint(axis * q)
    if nearest_only or L >= 2 * q:
        offsets = [0]
    else:
        offsets = [o for o in (-1, 0, 1) if np.min(np.abs(axis - (base + o) / q)) <= 1.0 / L]
    sq = {o: (axis - (base + o) / q) ** 2 for o in offsets}
    out = np.zeros((M,) * d)
    for combo in itertools.product(offsets, repeat=d):
        dist2 = np.zeros((M,) * d)
        for j, o in enumerate(combo):
            shape = [1] * d
            shape[j] = M
            dist2 = dist2 + sq[o].reshape(shape)
        near = dist2 < 1.0 / (L * L)
        if near.any():
            out[near] += psi_tilde(L * np.sqrt(dist2[near]), d, resolution)
    return out, not nearest_only


@dataclass(frozen=True)
class ChiKernel:
    """``chi_{q,L}``: weight ``(q/L)^d`` on ``(qZ)^d ∩ [-L/2, L/2]^d``."""

    q: int
    L: float
    dim: int

    @property
    def half_width(self) -> int:
        return int(math.floor(self.L / (2 * self.q) + 1e-12))

    @property
    def weight(self) -> float:
        return (self.q / self.L) ** self.dim

    @property
    def mass(self) -> float:
        return (2 * self.half_width + 1) ** self.dim * self.weight

    def offsets(self) -> np.ndarray:
        k = self.half_width
        axis = np.arange(-k, k + 1) * self.q
        grids = np.meshgrid(*([axis] * self.dim), indexing="ij")
        return np.stack([g.reshape(-1) for g in grids], axis=1)

    def value(self, x):
        x = np.atleast_2d(np.asarray(x, dtype=np.int64))
        inside = np.all((x % self.q == 0) & (np.abs(x) <= self.L / 2 + 1e-12), axis=1)
        return np.where(inside, self.weight, 0.0)

    def to_grid(self, M: int) -> np.ndarray:
        """The kernel wrapped onto ``Z_M^d``."""
        g = np.zeros((M,) * self.dim)
        np.add.at(g, tuple((self.offsets() % M).T), self.weight)
        return g


def chi_builder(q: int, L: float, d: int) -> ChiKernel:
    if int(q) != q or q < 1:
        raise ParameterError(f"q must be a positive integer, got {q!r}")
    if L < q:
        raise ParameterError(f"chi needs q <= L, got q={q}, L={L}")
    return ChiKernel(int(q), float(L), int(d))


@dataclass(frozen=True)
class L1Comparison:
    distance: float
    #: ``distance * L1 / L``; the comparison is ``distance <= constant * L / L1``.
    constant: float
    radius: float

    def __float__(self):
        return self.distance


def _box_sum(a, k, axis):
    if k == 0:
        return a
    pad = [(0, 0)] * a.ndim
    pad[axis] = (k + 1, k)
    c = np.cumsum(np.pad(a, pad), axis=axis)
    n = a.shape[axis]
    hi = np.take(c, np.arange(2 * k + 1, 2 * k + 1 + n), axis=axis)
    lo = np.take(c, np.arange(0, n), axis=axis)
    return hi - lo


def cutoff_l1_comparison(q: int, L: float, L1: float, d: int, radius: float = 12.0) -> L1Comparison:
    """``|| chi_{q,L} * psi_{q,L1} - psi_{q,L1} ||_1`` on ``Z^d``.

    Summed over ``(qZ)^d`` inside the cube of half-width ``radius * L1`` (plus
    the kernel width); ``psi`` is below 1e-10 beyond ``12``.

    ``chi_{q,L}`` has mass ``((2 floor(L/2q) + 1) q / L)^d``, which is 1 only
    when ``L/q`` is an odd integer.  Otherwise the distance tends to
    ``|mass - 1|`` rather than 0 as ``L1`` grows.
    """
    if not q <= L <= L1:
        raise ParameterError(f"need q <= L <= L1, got q={q}, L={L}, L1={L1}")
    chi = chi_builder(q, L, d)
    psi = build_cutoff(q, L1, d)
    k = chi.half_width
    m = int(math.ceil(radius * L1 / q)) + k
    if (2 * m + 1) ** d > MAX_TERMS:
        raise CapacityError(f"grid of {(2 * m + 1) ** d} cells exceeds the budget; use smaller d or L1")
    axis = np.arange(-m, m + 1, dtype=float) * q
    r2 = np.zeros((2 * m + 1,) * d)
    for j in range(d):
        shape = [1] * d
        shape[j] = -1
        r2 = r2 + (axis**2).reshape(shape)
    vals = psi.normalization * psi_space(np.sqrt(r2) / L1, d)
    smoothed = vals
    for j in range(d):
        smoothed = _box_sum(smoothed, k, j)
    smoothed = smoothed * chi.weight
    dist = float(np.sum(np.abs(smoothed - vals)))
    return L1Comparison(dist, dist * L1 / L, radius * L1)
