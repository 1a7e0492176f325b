"""Spherical averages, the discrete spherical maximal function and its mollified form."""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .arithmetic import q_eta
from .cutoffs import arc_multiplier_grid
from .errors import ParameterError
from .lattice_sphere import cached_sphere, representation_count
from .spectral import GridFunction, sigma_hat_grid, sphere_kernel

#: Above this many (sphere point x grid cell) operations the spectral route is used.
DIRECT_WORK_LIMIT = 20_000_000

METHODS = ("auto", "direct", "spectral")


def _prepare(f: GridFunction, lam: int, q: int):
    if q < 1:
        raise ParameterError("q must be a positive integer")
    n = representation_count(f.dim, lam)
    if n == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {f.dim}")
    if f.boundary_mode == "periodic":
        if f.side % q:
            raise ParameterError(f"periodic averages at scale q={q} need q | M (M={f.side})")
    else:
        f.require_padding(q * math.isqrt(lam))
    return n


def _direct(f: GridFunction, lam: int, q: int) -> np.ndarray:
    sphere = cached_sphere(f.dim, lam)
    axes = tuple(range(f.dim))
    acc = np.zeros_like(f.values, dtype=np.result_type(f.values, float))
    # np.roll(v, s)[x] = v[x - s], so each roll adds f(x - q*y).
    for y in sphere.points:
        acc += np.roll(f.values, tuple(int(q * c) for c in y), axis=axes)
    return acc / sphere.count


@lru_cache(maxsize=64)
def _sigma_half_grid(d: int, lam: int, M: int, q: int) -> np.ndarray:
    # sigma_hat is real (the sphere is symmetric), so the half spectrum suffices.
    v = sfft.rfftn(sphere_kernel(d, lam, M, q)).real
    v.setflags(write=False)
    return v


def _spectral(f: GridFunction, lam: int, q: int, F=None) -> np.ndarray:
    if np.iscomplexobj(f.values):
        return np.fft.ifftn(np.fft.fftn(f.values) * sigma_hat_grid(f.dim, lam, f.side, q))
    if F is None:
        F = sfft.rfftn(f.values)
    axes = tuple(range(f.dim))
    return sfft.irfftn(F * _sigma_half_grid(f.dim, lam, f.side, q), s=f.values.shape, axes=axes)


def _truncate(f: GridFunction, values):
    # Outside the box the result is not part of A_lam f restricted to B_N.
    if f.boundary_mode == "truncate":
        values = np.where(f.box_mask(), values, 0)
    return values


def spherical_average(f: GridFunction, lam: int, q: int = 1, method: str = "auto") -> GridFunction:
    """``A_lam f(x) = |S_lam|^-1 sum_{y in S_lam} f(x - q y)``.

    ``method="direct"`` sums shifted copies of ``f``; ``"spectral"``
    multiplies by ``sigma_hat`` on the grid.  ``"auto"`` picks the direct
    route while ``|S_lam| * M^d`` stays below :data:`DIRECT_WORK_LIMIT`.
    In truncate mode the grid must leave room for the sphere
    (:meth:`GridFunction.require_padding`), and the output is restricted to
    the box.
    """
    if method not in METHODS:
        raise ParameterError(f"method must be one of {METHODS}")
    n = _prepare(f, lam, q)
    if method == "auto":
        method = "direct" if n * f.values.size <= DIRECT_WORK_LIMIT else "spectral"
    values = _direct(f, lam, q) if method == "direct" else _spectral(f, lam, q)
    return f.like(_truncate(f, values))


def _lambda_range(d, lam0, lam1):
    if lam0 < 0 or lam1 < lam0:
        raise ParameterError(f"need 0 <= lambda0 <= lambda1, got [{lam0}, {lam1}]")
    lams = [lam for lam in range(lam0, lam1 + 1) if representation_count(d, lam) > 0]
    if not lams:
        raise ParameterError(f"every sphere in [{lam0}, {lam1}] is empty in dimension {d}")
    return lams


def maximal_average(
    f: GridFunction, lam0: int, lam1: int, q: int = 1, method: str = "auto", threads: int = 1
) -> GridFunction:
    """``A_* f(x) = max_{lam0 <= lam <= lam1} |A_lam f(x)|`` over integer ``lam``.

    Radii with an empty sphere are skipped (possible only for ``d <= 3``).
    """
    lams = _lambda_range(f.dim, lam0, lam1)
    for lam in lams:
        _prepare(f, lam, q)

    F = None
    if method == "spectral" or (
        method == "auto" and max(representation_count(f.dim, lam) for lam in lams) * f.values.size > DIRECT_WORK_LIMIT
    ):
        method = "spectral"
        if not np.iscomplexobj(f.values):
            F = sfft.rfftn(f.values)

    def one(lam):
        if method == "spectral":
            return np.abs(_truncate(f, _spectral(f, lam, q, F)))
        return np.abs(spherical_average(f, lam, q, method).values)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = pool.map(one, lams)
            out = np.zeros(f.values.shape)
            for p in parts:
                np.maximum(out, p, out=out)
    else:
        out = np.zeros(f.values.shape)
        for lam in lams:
            np.maximum(out, one(lam), out=out)
    return f.like(out)


@dataclass
class MollifiedInfo:
    q: int
    L2: float
    exact_cutoff: bool
    in_regime: bool


def mollified_residue(f: GridFunction, eta: float, lam0: int, C: float = 1.0, q: int | None = None, strict: bool = True):
    """``f - f * psi_{q_eta, L2}`` with ``L2 = eta * sqrt(lam0)``.

    The convolution is carried out on the torus ``Z_M^d`` as multiplication
    by ``psi_hat_{q,L2}(k/M)``.  When ``L2 < q`` the cutoff is outside its
    range: ``strict`` raises, otherwise the nearest-centre bump is used and
    ``MollifiedInfo.exact_cutoff`` is False.
    """
    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")
    if lam0 < 1:
        raise ParameterError("lambda0 must be >= 1")
    qq = q_eta(eta, C) if q is None else int(q)
    L2 = eta * math.sqrt(lam0)
    in_regime = L2 >= qq
    if strict and not in_regime:
        raise ParameterError(
            f"L2 = eta*sqrt(lambda0) = {L2:g} < q_eta = {qq}; the cutoff psi_(q,L2) is degenerate "
            "(pass strict=False to use the nearest-centre approximation)"
        )
    mult, exact = arc_multiplier_grid(qq, L2, f.dim, f.side)
    F = np.fft.fftn(f.values)
    res = np.fft.ifftn(F * (1.0 - mult))
    if not np.iscomplexobj(f.values):
        res = res.real
    return f.like(res), MollifiedInfo(qq, L2, exact, in_regime)


def mollified_maximal(
    f: GridFunction,
    eta: float,
    lam0: int,
    lam1: int,
    C: float = 1.0,
    q: int | None = None,
    strict: bool = True,
    method: str = "auto",
    threads: int = 1,
    return_info: bool = False,
):
    """``A_{*,eta} f = A_*(f - f * psi_{q_eta, L2})`` over ``[lam0, lam1]``."""
    res, info = mollified_residue(f, eta, lam0, C, q, strict)
    out = maximal_average(res, lam0, lam1, 1, method, threads)
    return (out, info) if return_info else out


def l2_norm(f: GridFunction) -> float:
    return float(np.linalg.norm(np.asarray(f.values).reshape(-1)))


def l2_ratio(output: GridFunction, f: GridFunction) -> float:
    """``||output||_2 / ||f||_2``."""
    nf = l2_norm(f)
    if nf == 0:
        raise ParameterError("l2_ratio needs a non-zero input")
    return l2_norm(output) / nf


def decay_exponent(etas, values) -> float | None:
    """Least-squares slope of ``log value`` against ``log eta``.

    Zero values carry no slope information and are dropped; with fewer than
    two positive values the exponent is undefined and ``None`` is returned.
    """
    pts = [(math.log(e), math.log(v)) for e, v in zip(etas, values) if v > 0]
    if len(pts) < 2 or len({x for x, _ in pts}) < 2:
        return None
    x, y = np.array(pts).T
    return float(np.polyfit(x, y, 1)[0])
