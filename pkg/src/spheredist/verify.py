"""Counting identity, unpinned and pinned ratio searches, and the two dichotomy reports.

Sets live on a grid: periodic sets on ``Z_N^d``; truncated sets at the
corner of a zero-padded grid large enough that no translated sphere wraps.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .arithmetic import ArcSystem, q_eta
from .averaging import maximal_average, spherical_average
from .cutoffs import arc_multiplier_grid
from .errors import ParameterError
from .lattice_sphere import cached_sphere, representation_count, translated_intersection_count
from .pointset import PointSet
from .spectral import GridFunction, grid_from_pointset, sigma_hat_grid

IDENTITY_RTOL = 1e-8
DIRECT_COUNT_LIMIT = 20_000_000


def _jsonable(v):
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, np.ndarray):
        return [_jsonable(x) for x in v.tolist()]
    if isinstance(v, np.integer):
        return int(v)
    if isinstance(v, np.floating):
        return float(v)
    if isinstance(v, np.bool_):
        return bool(v)
    if isinstance(v, float) and not math.isfinite(v):
        return str(v)
    return v


def _grid(A: PointSet, reach: int, side: int | None = None) -> GridFunction:
    if A.boundary_mode == "periodic":
        return grid_from_pointset(A)
    g = grid_from_pointset(A, side if side is not None else A.side + 2 * reach)
    g.require_padding(reach)
    return g


def _neighbour_counts(values: np.ndarray, lam: int, q: int = 1, method: str = "auto") -> np.ndarray:
    """``counts[x] = sum_{y in S_lam} g(x + q y)`` for an integer grid function ``g``."""
    d = values.ndim
    n = representation_count(d, lam)
    if n == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {d}")
    if method == "auto":
        method = "direct" if n * values.size <= DIRECT_COUNT_LIMIT else "spectral"
    if method == "direct":
        acc = np.zeros(values.shape, dtype=np.int64)
        g = values.astype(np.int64)
        for y in cached_sphere(d, lam).points:
            acc += np.roll(g, tuple(int(-q * c) for c in y), axis=tuple(range(d)))
        return acc
    # The sphere is symmetric, so correlation and convolution agree.
    kern = sigma_hat_grid(d, lam, values.shape[0], q) * n
    return np.rint(np.fft.ifftn(np.fft.fftn(values.astype(float)) * kern).real).astype(np.int64)


# -- counting identity --------------------------------------------------------

@dataclass
class IdentityResult:
    lam: int
    lhs: float
    rhs: float
    residual: float
    tolerance: float
    ok: bool
    grid_side: int
    method: str

    def to_dict(self):
        return _jsonable(asdict(self))


def count_identity_check(A: PointSet, lam: int, side: int | None = None, method: str = "shift") -> IdentityResult:
    """``sum_{x in A} |A ∩ (x + S_lam)| / |S_lam|`` against ``M^-d sum_k |1_A^(k)|^2 sigma_hat(k/M)``.

    The left side is an integer pair count: ``method="shift"`` counts
    coincidences of ``1_A`` with its shifts, ``"pointwise"`` calls
    :func:`translated_intersection_count` for every ``x in A``.  The right
    side is computed from the DFT.
    """
    n = representation_count(A.dim, lam)
    if n == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {A.dim}")
    g = _grid(A, math.isqrt(lam), side)
    if method == "pointwise":
        sphere = cached_sphere(A.dim, lam)
        pairs = sum(translated_intersection_count(A, x, lam, 1, sphere) for x in A.elements)
    elif method == "shift":
        m = g.values.astype(bool)
        axes = tuple(range(A.dim))
        pairs = 0
        for y in cached_sphere(A.dim, lam).points:
            pairs += int(np.count_nonzero(m & np.roll(m, tuple(int(-c) for c in y), axis=axes)))
    else:
        raise ParameterError("method must be 'shift' or 'pointwise'")
    lhs = pairs / n
    F = np.fft.fftn(g.values)
    rhs = float(np.sum((F.real**2 + F.imag**2) * sigma_hat_grid(A.dim, lam, g.side).real)) / g.values.size
    residual = abs(lhs - rhs)
    tol = IDENTITY_RTOL * max(1.0, lhs)
    return IdentityResult(lam, lhs, rhs, residual, tol, residual <= tol, g.side, method)


# -- branch (i) ---------------------------------------------------------------

@dataclass
class UnpinnedResult:
    lam: int
    q: int
    epsilon: float
    delta: float
    threshold: float
    best_x: tuple
    best_ratio: float
    holds: bool

    def to_dict(self):
        return _jsonable(asdict(self))


def _ratios(A: PointSet, lam: int, q: int, side=None) -> np.ndarray:
    """``|A ∩ (x + q S_lam)| / |S_lam|`` for every ``x`` in the box (box-indexed)."""
    if q < 1:
        raise ParameterError("q must be positive")
    g = _grid(A, q * math.isqrt(lam), side)
    counts = _neighbour_counts(g.values, lam, q)
    counts = counts[(slice(0, A.side),) * A.dim]
    return counts / representation_count(A.dim, lam)


def _point(A, idx):
    return tuple(int(a) + 1 + int(i) for a, i in zip(A.anchor, idx))


def unpinned_check(A: PointSet, lam: int, epsilon: float, q: int = 1, side=None) -> UnpinnedResult:
    """Best ``x in A`` for ``|A ∩ (x + q S_lam)| / |S_lam|``; holds iff it exceeds ``|A|/N^d - epsilon``.

    Ties go to the lexicographically smallest ``x``.
    """
    if len(A) == 0:
        raise ParameterError("A is empty")
    ratios = _ratios(A, lam, q, side)
    masked = np.where(A.mask(), ratios, -1.0)
    idx = np.unravel_index(int(np.argmax(masked)), masked.shape)
    best = float(masked[idx])
    delta = A.density
    return UnpinnedResult(lam, q, epsilon, delta, delta - epsilon, _point(A, idx), best, best > delta - epsilon)


@dataclass
class PinnedResult:
    lam0: int
    lam1: int
    q: int
    epsilon: float
    delta: float
    threshold: float
    lambdas: list
    pinned_x: tuple | None
    ratios: dict
    holds: bool
    best_min_x: tuple = ()
    best_min_ratio: float = 0.0

    def to_dict(self):
        return _jsonable(asdict(self))


def pinned_check(A: PointSet, lam0: int, lam1: int, epsilon: float, q: int = 1, side=None) -> PinnedResult:
    """First ``x in A`` (lexicographic) whose ratio exceeds ``delta - epsilon`` for every ``lam`` in range.

    Radii with an empty sphere are skipped.  ``ratios`` is the per-``lam``
    table at the witness, or at the point maximising the worst ratio when
    there is no witness.
    """
    if len(A) == 0:
        raise ParameterError("A is empty")
    if lam1 < lam0 or lam0 < 0:
        raise ParameterError(f"need 0 <= lambda0 <= lambda1, got [{lam0}, {lam1}]")
    lams = [lam for lam in range(lam0, lam1 + 1) if representation_count(A.dim, lam) > 0]
    if not lams:
        raise ParameterError("every sphere in the range is empty")
    delta = A.density
    thr = delta - epsilon
    table = np.stack([_ratios(A, lam, q, side) for lam in lams])
    worst = np.where(A.mask(), table.min(axis=0), -1.0)
    idx = np.unravel_index(int(np.argmax(worst)), worst.shape)
    best_min = float(worst[idx])
    ok = A.mask() & np.all(table > thr, axis=0)
    if ok.any():
        w = np.unravel_index(int(np.argmax(ok)), ok.shape)
        witness = _point(A, w)
    else:
        w, witness = idx, None
    ratios = {int(lam): float(table[i][w]) for i, lam in enumerate(lams)}
    return PinnedResult(
        lam0, lam1, q, epsilon, delta, thr, lams, witness, ratios, witness is not None, _point(A, idx), best_min
    )


# -- branch (ii) and the decomposition ----------------------------------------

def grid_frequencies(d: int, M: int) -> np.ndarray:
    return np.indices((M,) * d).reshape(d, -1).T / M


def annulus_grid_mask(d: int, M: int, eta: float, q: int, lam0: int, lam1: int | None = None) -> np.ndarray:
    """Membership of every ``k/M`` in ``Omega_lam`` (or ``Omega_{lam0, lam1}``)."""
    kind = "annulus_single" if lam1 is None else "annulus_pair"
    return ArcSystem(kind, q, eta=eta, lam=lam0, lam1=lam1).grid_mask(d, M)


def fourier_mass(values: np.ndarray, mask: np.ndarray, size: int) -> float:
    """``(1/|A|) M^-d sum_{k in mask} |f^(k)|^2`` with ``|A| = size``."""
    F = np.fft.fftn(values)
    power = F.real**2 + F.imag**2
    return float(power[mask].sum() / values.size / size)


@dataclass
class DichotomyReport:
    kind: str
    lam0: int
    lam1: int
    epsilon: float
    eta: float
    C_qeta: float
    C_E: float
    K: float
    q_eta: int
    grid_side: int
    delta: float
    branch_i: dict
    branch_ii: dict
    decomposition: dict
    flags: dict = field(default_factory=dict)

    def to_dict(self):
        return _jsonable(asdict(self))


def _smooth(values, q, L):
    mult, exact = arc_multiplier_grid(q, L, values.ndim, values.shape[0])
    return np.fft.ifftn(np.fft.fftn(values) * mult).real, exact


def _decomposition(g: GridFunction, delta, lam0, lam1, eta, q, C_E, L1, L2, pinned, method="auto"):
    f = g.values
    f1, exact1 = _smooth(f, q, L1)
    f2, exact2 = _smooth(f, q, L2)
    box = g.box_mask().astype(float)
    if pinned:
        op = lambda h: maximal_average(g.like(h), lam0, lam1, 1, method).values
    else:
        op = lambda h: spherical_average(g.like(h), lam0, 1, method).values
    resid = op(f - f2)
    E = int(np.count_nonzero(g.box_mask() & (f1 <= delta - C_E * eta)))
    return {
        "L1": L1,
        "L2": L2,
        "main_term": float(np.sum(f * op(f1))),
        "error_term": float(np.sum(f * resid)),
        "error_norm": float(np.linalg.norm(resid)),
        "complement_term": float(np.sum(f * op(box - f1))),
        "exceptional_set_size": E,
        "cutoff_L1_exact": exact1,
        "cutoff_L2_exact": exact2,
    }


def _check_common(A, epsilon, eta):
    if len(A) == 0:
        raise ParameterError("A is empty")
    if epsilon <= 0:
        raise ParameterError("epsilon must be positive")
    if not 0 < eta < 1:
        raise ParameterError("eta must lie in (0, 1)")


def dichotomy_report(
    A: PointSet,
    lam: int,
    epsilon: float,
    eta: float,
    C: float = 1.0,
    K: float = 1.0,
    C_E: float = 1.0,
    q: int | None = None,
    L: float | None = None,
    side: int | None = None,
) -> DichotomyReport:
    """Both branches of the single-radius dichotomy, side by side.

    Branch (i) is :func:`unpinned_check`.  Branch (ii) is the normalised
    Fourier mass of ``1_A`` on ``Omega_lam``; it holds when the mass is at
    least ``K * epsilon``.  The decomposition uses ``L1 = eta^-1/2 lam^1/2``
    and ``L2 = eta lam^1/2``.  Parameters outside the asymptotic window are
    flagged, never refused.  ``q`` overrides ``q_eta(eta, C)``; ``L`` is the
    uniformity scale for the lower window (default ``q_eta``).
    """
    _check_common(A, epsilon, eta)
    if lam < 1:
        raise ParameterError("lambda must be >= 1")
    qq = q_eta(eta, C) if q is None else int(q)
    g = _grid(A, math.isqrt(lam), side)
    b1 = unpinned_check(A, lam, epsilon, 1, g.side if A.boundary_mode == "truncate" else None)
    mask = annulus_grid_mask(A.dim, g.side, eta, qq, lam)
    mass = fourier_mass(g.values, mask, len(A))
    total = fourier_mass(g.values, np.ones(mask.shape, dtype=bool), len(A))
    L1, L2 = eta**-0.5 * math.sqrt(lam), eta * math.sqrt(lam)
    dec = _decomposition(g, A.density, lam, lam, eta, qq, C_E, L1, L2, pinned=False)
    Lw = qq if L is None else L
    return DichotomyReport(
        kind="single",
        lam0=lam,
        lam1=lam,
        epsilon=epsilon,
        eta=eta,
        C_qeta=C,
        C_E=C_E,
        K=K,
        q_eta=qq,
        grid_side=g.side,
        delta=A.density,
        branch_i=b1.to_dict(),
        branch_ii={
            "fourier_mass": mass,
            "threshold_form": "K*epsilon",
            "threshold": K * epsilon,
            "holds": mass >= K * epsilon,
            "total_mass": total,
            "grid_points_in_annulus": int(mask.sum()),
        },
        decomposition=dec,
        flags={
            "window_lower": lam >= eta**-4 * Lw**2,
            "window_upper": lam <= eta**11 * A.side**2,
            "cutoffs_in_range": L2 >= qq,
        },
    )


def dichotomy_report_pinned(
    A: PointSet,
    lam0: int,
    lam1: int,
    epsilon: float,
    eta: float,
    C: float = 1.0,
    K: float = 1.0,
    C_E: float = 1.0,
    q: int | None = None,
    L: float | None = None,
    side: int | None = None,
) -> DichotomyReport:
    """Pinned dichotomy over ``[lam0, lam1]``.

    Branch (i) is :func:`pinned_check`; branch (ii) is the mass on
    ``Omega_{lam0, lam1}`` against ``K * epsilon^2``.  The decomposition uses
    ``L1 = eta^-1/2 lam1^1/2`` and ``L2 = eta lam0^1/2`` with the maximal
    operator, so ``error_term`` is ``<f, A_{*,eta} f>`` and
    ``complement_term`` is ``<f, A_*(1_B - f1)>``.
    """
    _check_common(A, epsilon, eta)
    if lam0 < 1 or lam1 < lam0:
        raise ParameterError(f"need 1 <= lambda0 <= lambda1, got [{lam0}, {lam1}]")
    qq = q_eta(eta, C) if q is None else int(q)
    g = _grid(A, math.isqrt(lam1), side)
    b1 = pinned_check(A, lam0, lam1, epsilon, 1, g.side if A.boundary_mode == "truncate" else None)
    mask = annulus_grid_mask(A.dim, g.side, eta, qq, lam0, lam1)
    mass = fourier_mass(g.values, mask, len(A))
    total = fourier_mass(g.values, np.ones(mask.shape, dtype=bool), len(A))
    L1, L2 = eta**-0.5 * math.sqrt(lam1), eta * math.sqrt(lam0)
    dec = _decomposition(g, A.density, lam0, lam1, eta, qq, C_E, L1, L2, pinned=True)
    Lw = qq if L is None else L
    return DichotomyReport(
        kind="pinned",
        lam0=lam0,
        lam1=lam1,
        epsilon=epsilon,
        eta=eta,
        C_qeta=C,
        C_E=C_E,
        K=K,
        q_eta=qq,
        grid_side=g.side,
        delta=A.density,
        branch_i=b1.to_dict(),
        branch_ii={
            "fourier_mass": mass,
            "threshold_form": "K*epsilon^2",
            "threshold": K * epsilon**2,
            "holds": mass >= K * epsilon**2,
            "total_mass": total,
            "grid_points_in_annulus": int(mask.sum()),
        },
        decomposition=dec,
        flags={
            "window_lower": lam0 >= eta**-4 * Lw**2,
            "window_upper": lam1 <= eta**11 * A.side**2,
            "cutoffs_in_range": L2 >= qq,
        },
    )


def ladder_disjointness(d: int, M: int, eta: float, q: int, lams) -> tuple[bool, list[np.ndarray]]:
    """Grid masks of ``Omega_lam`` for each ``lam`` and whether they are pairwise disjoint."""
    masks = [annulus_grid_mask(d, M, eta, q, lam) for lam in lams]
    overlap = np.zeros((M,) * d, dtype=np.int64)
    for m in masks:
        overlap += m
    return bool(overlap.max(initial=0) <= 1), masks
