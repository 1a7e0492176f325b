"""Arithmetic structure: ``q_eta``, major arcs, annuli, Gauss sums, multipliers.

Frequencies live on the torus ``[0, 1)^d``; distances to ``(q^-1 Z)^d`` are
taken coordinate-wise to the nearest multiple of ``1/q`` and then in the
Euclidean norm, which makes every set here 1-periodic automatically.

All arc and annulus sets are closed.  Comparisons carry a relative slack of
``BOUNDARY_RTOL`` so that points exactly on a boundary (``0.26`` against
``1/4 + 1/100``, say) are not lost to binary rounding.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field
from fractions import Fraction

import numpy as np
from scipy.special import gamma

from .cutoffs import _bessel_j, smooth_step
from .errors import CapacityError, ParameterError
from .lattice_sphere import representation_count
from .spectral import sigma_hat_generating

BOUNDARY_RTOL = 1e-12


def arc_threshold(eta: float, C: float = 1.0) -> int:
    """``floor(C / eta^2)``, computed exactly for decimal inputs."""
    if eta <= 0 or C <= 0:
        raise ParameterError("eta and C must be positive")
    # Fraction(str(x)) reads 0.1 as 1/10 rather than its binary neighbour.
    t = Fraction(str(C)) / Fraction(str(eta)) ** 2
    return math.floor(t)


def q_eta(eta: float, C: float = 1.0) -> int:
    """``lcm{1 <= q <= C eta^-2}`` as an exact Python integer.

    >>> q_eta(0.5)
    12
    """
    n = arc_threshold(eta, C)
    if n < 1:
        raise ParameterError(f"C * eta^-2 = {C / eta ** 2:g} < 1; q_eta is undefined")
    return math.lcm(*range(1, n + 1))


def divisors(n: int) -> list[int]:
    small = [k for k in range(1, math.isqrt(n) + 1) if n % k == 0]
    return sorted(set(small + [n // k for k in small]))


def nearest_residual(xi, q: int) -> np.ndarray:
    """``xi - l/q`` for the nearest ``l/q``, coordinate-wise."""
    xi = np.asarray(xi, dtype=float)
    return xi - np.rint(xi * q) / q


def arc_distance(xi, q: int) -> np.ndarray:
    """Euclidean distance from ``xi`` to ``(q^-1 Z)^d`` (last axis = coordinates)."""
    r = nearest_residual(xi, q)
    return np.sqrt(np.sum(r * r, axis=-1))


def in_major_arcs(xi, q: int, L: float):
    """``xi`` within ``1/L`` of ``(q^-1 Z)^d`` (closed ball)."""
    if q < 1 or L <= 0:
        raise ParameterError("need q >= 1 and L > 0")
    out = arc_distance(xi, q) * L <= 1.0 + BOUNDARY_RTOL
    return bool(out) if np.ndim(out) == 0 else out


def annulus_bounds(eta: float, lam: float, lam1: float | None = None) -> tuple[float, float]:
    """Squared-distance interval of ``Omega_lam`` or ``Omega_{lam, lam1}``."""
    lam0 = lam
    lam1 = lam if lam1 is None else lam1
    if lam0 <= 0 or lam1 < lam0:
        raise ParameterError(f"need 0 < lambda0 <= lambda1, got {lam0}, {lam1}")
    return eta * eta / lam1, 1.0 / (eta * eta * lam0)


def in_annulus(xi, eta: float, q_val: int, lam: float, lam1: float | None = None):
    """Squared distance to the nearest point of ``(q^-1 Z)^d`` in ``[eta^2/lam1, eta^-2/lam0]``.

    With ``lam1`` omitted this is the single-scale set ``Omega_lam``.  The
    nearest-centre band is the difference of two unions of balls,
    ``M_{q, L2} \\ M_{q, L'}``, which is how the set arises from the cutoffs.
    """
    lo, hi = annulus_bounds(eta, lam, lam1)
    r = nearest_residual(xi, q_val)
    d2 = np.sum(r * r, axis=-1)
    out = (d2 >= lo * (1 - BOUNDARY_RTOL)) & (d2 <= hi * (1 + BOUNDARY_RTOL))
    return bool(out) if np.ndim(out) == 0 else out


@dataclass(frozen=True)
class ArcSystem:
    """A major-arc or annulus family with a membership predicate.

    ``kind`` is ``"major_arc"`` (uses ``q``, ``L``), ``"annulus_single"``
    (``q``, ``eta``, ``lam``) or ``"annulus_pair"`` (``q``, ``eta``, ``lam``,
    ``lam1``).
    """

    kind: str
    q: int
    L: float | None = None
    eta: float | None = None
    lam: float | None = None
    lam1: float | None = None

    def __post_init__(self):
        if self.kind == "major_arc":
            if self.L is None:
                raise ParameterError("major arcs need L")
        elif self.kind in ("annulus_single", "annulus_pair"):
            if self.eta is None or self.lam is None:
                raise ParameterError("annuli need eta and lambda")
            if self.kind == "annulus_pair" and self.lam1 is None:
                raise ParameterError("paired annulus needs lambda1")
            lo, hi = annulus_bounds(self.eta, self.lam, self.lam1)
            if not lo < hi:
                raise ParameterError("inner radius must be below the outer radius")
        else:
            raise ParameterError(f"unknown arc system kind {self.kind!r}")

    def contains(self, xi):
        if self.kind == "major_arc":
            return in_major_arcs(xi, self.q, self.L)
        lam1 = self.lam1 if self.kind == "annulus_pair" else None
        return in_annulus(xi, self.eta, self.q, self.lam, lam1)

    def grid_mask(self, d: int, M: int) -> np.ndarray:
        """Membership of every grid frequency ``k/M``."""
        k = np.indices((M,) * d).reshape(d, -1).T / M
        return np.asarray(self.contains(k)).reshape((M,) * d)


# -- Gauss sums ---------------------------------------------------------------

def _check_coprime(a, q):
    if q < 1:
        raise ParameterError("q must be positive")
    if math.gcd(a, q) != 1:
        raise ParameterError(f"gcd({a}, {q}) != 1")


def gauss_sum_1d(a: int, q: int, ell: int) -> complex:
    """``q^-1 sum_{r mod q} e((a r^2 + ell r) / q)``."""
    r = np.arange(q)
    return complex(np.exp(2j * np.pi * ((a * r * r + ell * r) % q) / q).mean())


def gauss_sum(a: int, q: int, ell) -> complex:
    """Normalised Gauss sum ``G(a/q, ell) = q^-d sum_r e((a|r|^2 + ell.r)/q)``.

    The sum over ``(Z/qZ)^d`` splits into a product of one-dimensional sums,
    one per coordinate of ``ell``.
    """
    _check_coprime(a, q)
    ell = np.atleast_1d(np.asarray(ell, dtype=np.int64))
    out = 1.0 + 0j
    for li in ell:
        out *= gauss_sum_1d(a, q, int(li))
    return out


@dataclass(frozen=True)
class GaussSumParams:
    a: int
    q: int
    ell: tuple

    def __post_init__(self):
        _check_coprime(self.a, self.q)

    @property
    def dim(self) -> int:
        return len(self.ell)

    def value(self) -> complex:
        return gauss_sum(self.a, self.q, self.ell)


# -- continuous sphere and the approximating multipliers ----------------------

def continuous_sphere_ft(r, d: int):
    """Fourier transform of normalised surface measure on ``S^{d-1}`` at ``|xi| = r``.

    ``Gamma(d/2) (pi r)^(1 - d/2) J_{d/2-1}(2 pi r)``; equals 1 at ``r = 0``.
    """
    if d < 2:
        raise ParameterError("continuous sphere transform needs d >= 2")
    r = np.abs(np.asarray(r, dtype=float))
    out = np.ones_like(r)
    nz = r > 0
    z = 2 * np.pi * r[nz]
    out[nz] = gamma(d / 2) * (np.pi * r[nz]) ** (1 - d / 2) * _bessel_j(d, z)
    return float(out) if out.ndim == 0 else out


def phi_cutoff(xi):
    """Radial smooth cutoff: 1 on ``|xi| <= 1/8``, 0 on ``|xi| >= 1/4``."""
    rho = np.sqrt(np.sum(np.asarray(xi, dtype=float) ** 2, axis=-1))
    return smooth_step(8.0 * (0.25 - rho))


def _phi_wide(xi):
    # phi(xi/2): equal to 1 on the support of phi, so phi_wide * phi = phi.
    return phi_cutoff(np.asarray(xi, dtype=float) / 2.0)


def _gauss_table(a, q):
    return np.array([gauss_sum_1d(a, q, l) for l in range(q)])


def multiplier_m(a: int, q: int, lam: float, xi):
    """``m^{a/q}_lam(xi) = sum_l G(a/q, l) phi(q(xi - l/q)) sigma_tilde(lam (xi - l/q))``.

    ``lam`` is the *radius* (the square root of the squared radius used by
    the spheres ``S_lam``).  The ``phi`` bumps around different ``l/q`` are
    disjoint, so at most one term is non-zero; all centres within one
    lattice step are still summed explicitly.
    """
    _check_coprime(a, q)
    xi = np.asarray(xi, dtype=float)
    single = xi.ndim == 1
    xi = np.atleast_2d(xi)
    d = xi.shape[1]
    table = _gauss_table(a, q)
    base = np.rint(xi * q).astype(np.int64)
    total = np.zeros(len(xi), dtype=complex)
    for combo in np.array(np.meshgrid(*([np.arange(-1, 2)] * d), indexing="ij")).reshape(d, -1).T:
        ell = base + combo
        r = xi - ell / q
        w = phi_cutoff(q * r)
        live = w > 0
        if not live.any():
            continue
        G = np.prod(table[ell[live] % q], axis=1)
        rho = lam * np.sqrt(np.sum(r[live] ** 2, axis=1))
        total[live] += G * w[live] * continuous_sphere_ft(rho, d)
    return complex(total[0]) if single else total


def multiplier_g(a: int, q: int, xi):
    """Arithmetic factor ``g^{a/q}(xi) = sum_l G(a/q, l) phi_wide(q(xi - l/q))``."""
    _check_coprime(a, q)
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    ell = np.rint(xi * q).astype(np.int64)
    G = np.prod(_gauss_table(a, q)[ell % q], axis=1)
    return G * _phi_wide(q * (xi - ell / q))


def multiplier_n(q: int, lam: float, xi):
    """Analytic factor ``n^q_lam(xi) = sum_l phi(q(xi - l/q)) sigma_tilde(lam (xi - l/q))``."""
    xi = np.atleast_2d(np.asarray(xi, dtype=float))
    d = xi.shape[1]
    r = nearest_residual(xi, q)
    return phi_cutoff(q * r) * continuous_sphere_ft(lam * np.sqrt(np.sum(r * r, axis=1)), d)


# -- empirical check of the minor-arc exponential sum bound --------------------

SAMPLE_CHUNK = 1024
#: Rejection sampling gives up after this many draws per accepted sample.
MAX_REJECTION_FACTOR = 10_000


@dataclass
class KeyUReport:
    d: int
    lam: int
    eta: float
    C_qeta: float
    C_keyu: float
    q_threshold: int
    q_eta: int
    q_cap: int | None
    arc_denominators: list
    excluded_denominators: list
    arc_radius: float
    inside_arcs: bool
    n_samples: int
    seed: int
    max_abs: float
    argmax_xi: list
    sphere_size: int
    degenerate: bool
    lambda_in_regime: bool
    rejected: int = 0
    bound_eta_holds: bool = field(default=False)

    def to_dict(self):
        out = asdict(self)
        out["lambda"] = out.pop("lam")
        return out


def _arc_family(eta, C, q_max):
    threshold = arc_threshold(eta, C)
    if threshold < 1:
        raise ParameterError("C * eta^-2 < 1")
    full = math.lcm(*range(1, threshold + 1))
    divs = divisors(full)
    kept = [q for q in divs if q_max is None or q <= q_max]
    # Only maximal elements matter: (q^-1 Z)^d contains (p^-1 Z)^d when p | q.
    maximal = [q for q in kept if not any(o != q and o % q == 0 for o in kept)]
    excluded = [q for q in divs if q not in kept]
    return threshold, full, kept, maximal, excluded


def _outside_arcs(xi, moduli, L):
    inside = np.zeros(len(xi), dtype=bool)
    for q in moduli:
        inside |= arc_distance(xi, q) * L <= 1.0 + BOUNDARY_RTOL
    return ~inside


def _sample_chunk(seed_seq, size, d, moduli, L, inside_arcs):
    rng = np.random.default_rng(seed_seq)
    if inside_arcs:
        # Uniform in the closed ball of radius 1/L about the zero frequency.
        g = rng.standard_normal((size, d))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        rad = rng.random(size) ** (1.0 / d) / L
        return np.mod(g * rad[:, None], 1.0), 0
    got, rejected = [], 0
    need = size
    while need > 0:
        batch = rng.random((max(2 * need, 64), d))
        keep = batch[_outside_arcs(batch, moduli, L)]
        rejected += len(batch) - len(keep)
        if rejected > MAX_REJECTION_FACTOR * size:
            raise CapacityError(
                "the major arcs cover almost all of the torus; "
                "raise lambda or eta, or lower the q cap"
            )
        got.append(keep[:need])
        need -= len(got[-1])
    return np.vstack(got), rejected


def _chunk_max(args):
    seed_seq, size, d, lam, moduli, L, inside_arcs = args
    xi, rejected = _sample_chunk(seed_seq, size, d, moduli, L, inside_arcs)
    vals = np.abs(sigma_hat_generating(d, lam, xi))
    i = int(np.argmax(vals))
    return float(vals[i]), xi[i], rejected


def verify_keyu(
    d: int,
    eta: float,
    lam: int,
    q_max: int | None = None,
    n_samples: int = 10_000,
    seed: int = 0,
    C_qeta: float = 1.0,
    C_keyu: float = 1.0,
    inside_arcs: bool = False,
    threads: int = 1,
) -> KeyUReport:
    """Largest sampled ``|sigma_hat_lam(xi)|`` for ``xi`` off the major arcs.

    The arcs are ``(q^-1 Z)^d + {|xi|^2 <= 1/(eta lam)}`` for every divisor
    ``q`` of ``q_eta`` not exceeding ``q_max`` (all divisors when ``q_max`` is
    None, which is the full ``(q_eta^-1 Z)^d``).  Samples are drawn uniformly
    from the complement by rejection, in fixed chunks of ``SAMPLE_CHUNK``
    with one child seed each, so the result depends on ``seed`` only and not
    on ``threads``.  ``inside_arcs=True`` instead samples the ball around the
    zero frequency.
    """
    if representation_count(d, lam) == 0:
        raise ParameterError(f"S_{lam} is empty in dimension {d}")
    if n_samples < 1:
        raise ParameterError("n_samples must be positive")
    threshold, full, kept, maximal, excluded = _arc_family(eta, C_qeta, q_max)
    L = math.sqrt(eta * lam) if lam > 0 else math.inf
    if not inside_arcs:
        # (q^-1 Z)^d has covering radius sqrt(d) / (2q); a larger ball leaves nothing outside.
        if not math.isfinite(L) or 1.0 / L >= math.sqrt(d) / (2 * max(maximal)):
            raise ParameterError(
                f"arc radius {1.0 / L if L else math.inf:g} covers the torus; nothing lies off the arcs"
            )
    sizes = [SAMPLE_CHUNK] * (n_samples // SAMPLE_CHUNK)
    if n_samples % SAMPLE_CHUNK:
        sizes.append(n_samples % SAMPLE_CHUNK)
    children = np.random.SeedSequence(seed).spawn(len(sizes))
    jobs = [(c, s, d, lam, maximal, L, inside_arcs) for c, s in zip(children, sizes)]
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(_chunk_max, jobs))
    else:
        results = [_chunk_max(j) for j in jobs]
    best = max(range(len(results)), key=lambda i: (results[i][0], -i))
    max_abs, arg, _ = results[best]
    count = representation_count(d, lam)
    return KeyUReport(
        d=d,
        lam=lam,
        eta=eta,
        C_qeta=C_qeta,
        C_keyu=C_keyu,
        q_threshold=threshold,
        q_eta=full,
        q_cap=q_max,
        arc_denominators=kept,
        excluded_denominators=excluded,
        arc_radius=1.0 / L if L > 0 else math.inf,
        inside_arcs=inside_arcs,
        n_samples=n_samples,
        seed=seed,
        max_abs=max_abs,
        argmax_xi=[float(v) for v in arg],
        sphere_size=count,
        degenerate=count <= 1,
        lambda_in_regime=lam >= C_keyu * eta**-4,
        rejected=int(sum(r[2] for r in results)),
        bound_eta_holds=max_abs <= eta,
    )
