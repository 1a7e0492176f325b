"""Box densities, residue-class uniformity, the density increment and set generators.

Residue classes are indexed by ``s in {1, ..., q}^d`` relative to the box
anchor: the point ``p`` belongs to class ``s`` when ``p - anchor ≡ s (mod q)``
coordinate-wise, so the box corner ``anchor + (1, ..., 1)`` is in class
``(1, ..., 1)``.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

import numpy as np

from .arithmetic import q_eta
from .errors import ParameterError
from .pointset import PointSet


def box_density(A: PointSet) -> float:
    """``|A| / N^d``."""
    return A.density


def residue_counts(mask: np.ndarray, q: int) -> np.ndarray:
    """``counts[s - 1] = |A ∩ (s + (qZ)^d)|`` for a box mask whose side ``q`` divides."""
    d, N = mask.ndim, mask.shape[0]
    if N % q:
        raise ParameterError(f"q = {q} does not divide the box side {N}")
    shape = []
    for _ in range(d):
        shape += [N // q, q]
    blocks = mask.reshape(shape)
    return blocks.sum(axis=tuple(range(0, 2 * d, 2)), dtype=np.int64)


def _argmax_lex(a: np.ndarray):
    # np.argmax returns the first maximum in C order, i.e. the lexicographically smallest index.
    return np.unravel_index(int(np.argmax(a)), a.shape)


@dataclass
class UniformityReport:
    eta: float
    q_eta_val: int
    variant: str
    global_density: float
    threshold: float
    worst_residue: tuple | None
    worst_ratio: float
    passed: bool
    L: int | None = None
    worst_subcube: tuple | None = None
    subcube_table: list = field(default_factory=list)

    def to_dict(self):
        return {
            "eta": self.eta,
            "q_eta": self.q_eta_val,
            "variant": self.variant,
            "global_density": self.global_density,
            "threshold": self.threshold,
            "worst_residue": None if self.worst_residue is None else list(self.worst_residue),
            "worst_ratio": self.worst_ratio,
            "passed": self.passed,
            "L": self.L,
            "worst_subcube": None if self.worst_subcube is None else list(self.worst_subcube),
            "subcube_table": self.subcube_table,
        }


def _resolve_q(eta, C, q):
    if q is not None:
        if q < 1:
            raise ParameterError("q must be positive")
        return int(q)
    return q_eta(eta, C)


def uniformity_test(
    A: PointSet, eta: float, C: float = 1.0, variant: str = "global", L: int | None = None, q: int | None = None
) -> UniformityReport:
    """Check that no residue class mod ``q_eta`` is denser than ``(1 + eta^2)`` times ``|A|/N^d``.

    ``variant="global"`` compares ``|A ∩ class| / (N/q)^d``.
    ``variant="subcube"`` partitions the box into cubes of side ``L`` and
    compares ``|A ∩ cube ∩ class| / (L/q)^d``; it needs ``q | L | N``.
    Passing ``q`` overrides ``q_eta(eta, C)``.
    """
    if eta <= 0:
        raise ParameterError("eta must be positive")
    qq = _resolve_q(eta, C, q)
    N, d = A.side, A.dim
    delta = A.density
    threshold = 1.0 + eta * eta
    mask = A.mask()
    if variant == "global":
        if N % qq:
            raise ParameterError(f"divisibility q_eta | N fails: q_eta = {qq}, N = {N}")
        counts = residue_counts(mask, qq)
        if delta == 0:
            return UniformityReport(eta, qq, variant, 0.0, threshold, None, 0.0, True)
        rel = counts / (N // qq) ** d
        s = _argmax_lex(rel)
        ratio = float(rel[s] / delta)
        return UniformityReport(
            eta, qq, variant, delta, threshold, tuple(int(i) + 1 for i in s), ratio, ratio <= threshold
        )
    if variant != "subcube":
        raise ParameterError(f"variant must be 'global' or 'subcube', got {variant!r}")
    if L is None:
        raise ParameterError("the subcube variant needs L")
    if L % qq or N % L:
        raise ParameterError(f"divisibility chain q_eta | L | N fails: q_eta = {qq}, L = {L}, N = {N}")
    n_cubes = N // L
    table = []
    worst = (-1.0, None, None)
    for cube in np.ndindex(*(n_cubes,) * d):
        sl = tuple(slice(c * L, (c + 1) * L) for c in cube)
        counts = residue_counts(mask[sl], qq)
        rel = counts / (L // qq) ** d
        s = _argmax_lex(rel)
        ratio = float(rel[s] / delta) if delta > 0 else 0.0
        s1 = tuple(int(i) + 1 for i in s)
        table.append({"subcube": list(cube), "worst_residue": list(s1), "ratio": ratio})
        if ratio > worst[0]:
            worst = (ratio, s1, tuple(int(c) for c in cube))
    ratio, s1, cube = worst
    if delta == 0:
        s1 = cube = None
    return UniformityReport(eta, qq, variant, delta, threshold, s1, ratio, ratio <= threshold, L, cube, table)


# -- density increment --------------------------------------------------------

@dataclass
class IncrementStep:
    set: PointSet
    residue: tuple | None
    density: float


@dataclass
class IncrementTrace:
    steps: list
    status: str
    q: int
    eta: float

    @property
    def densities(self):
        return [s.density for s in self.steps]

    def __len__(self):
        return len(self.steps)


def restrict_to_class(A: PointSet, s, q: int) -> PointSet:
    """``{x : s + q x ∈ A}`` relative to the box, on ``{1, ..., N/q}^d``.

    A point ``p`` of class ``s`` maps to ``(p - anchor - s)/q + 1``.
    """
    if A.side % q:
        raise ParameterError(f"q = {q} does not divide the box side {A.side}")
    sl = tuple(slice(si - 1, None, q) for si in s)
    return PointSet.from_mask(A.mask()[sl], None, A.boundary_mode)


def increment_step_bound(delta: float, eta: float) -> float:
    """``log(1/delta) / log(1 + eta^2)``: the most increments a set of density ``delta`` admits."""
    if delta <= 0:
        return math.inf
    return math.log(1.0 / delta) / math.log1p(eta * eta)


def density_increment(
    A: PointSet, eta: float, C: float = 1.0, max_steps: int = 64, q: int | None = None
) -> IncrementTrace:
    """Pass to the densest residue class until the set is ``eta``-uniform.

    The trace starts with ``A`` itself.  ``status`` is ``"uniform"`` when the
    last set passes :func:`uniformity_test`, ``"box exhausted"`` when
    ``q_eta`` no longer divides the side, ``"budget exhausted"`` after
    ``max_steps`` increments.
    """
    if max_steps < 0:
        raise ParameterError("max_steps must be >= 0")
    qq = _resolve_q(eta, C, q)
    steps = [IncrementStep(A, None, A.density)]
    cur = A
    while True:
        # Full and empty sets are trivially uniform whatever the box side.
        if len(cur) == 0 or len(cur) == cur.side**cur.dim:
            return IncrementTrace(steps, "uniform", qq, eta)
        if cur.side % qq:
            return IncrementTrace(steps, "box exhausted", qq, eta)
        rep = uniformity_test(cur, eta, q=qq)
        if rep.passed:
            return IncrementTrace(steps, "uniform", qq, eta)
        if len(steps) - 1 >= max_steps:
            return IncrementTrace(steps, "budget exhausted", qq, eta)
        cur = restrict_to_class(cur, rep.worst_residue, qq)
        steps.append(IncrementStep(cur, rep.worst_residue, cur.density))


def subbox_density_ladder(A: PointSet, sides) -> list[tuple[int, float]]:
    """Largest density of ``A`` in any axis-parallel sub-box of each side.

    A finite lower bound for the upper Banach density; the limsup is not
    attempted.
    """
    m = A.mask().astype(np.int64)
    d = m.ndim
    S = m
    for ax in range(d):
        S = np.cumsum(S, axis=ax)
    S = np.pad(S, [(1, 0)] * d)
    out = []
    for n in sides:
        if not 1 <= n <= A.side:
            raise ParameterError(f"sub-box side {n} outside [1, {A.side}]")
        # Inclusion-exclusion over the 2^d corners of every window.
        tot = np.zeros((A.side - n + 1,) * d, dtype=np.int64)
        for corner in np.ndindex(*(2,) * d):
            sl = tuple(slice(n, None) if c else slice(0, A.side - n + 1) for c in corner)
            sign = (-1) ** (d - sum(corner))
            tot += sign * S[sl]
        out.append((int(n), float(tot.max()) / n**d))
    return out


# -- generators ---------------------------------------------------------------

def _bernoulli(d, N, p, seed):
    if not 0 <= p <= 1:
        raise ParameterError(f"bernoulli p must lie in [0, 1], got {p}")
    rng = np.random.default_rng(seed)
    return rng.random((N,) * d) < p


def _congruence(d, N, anchor, r, shift):
    if r < 1:
        raise ParameterError(f"congruence modulus must be positive, got {r}")
    ok = None
    for ax in range(d):
        coords = anchor[ax] + 1 + np.arange(N)
        line = (coords - shift) % r == 0
        shape = [1] * d
        shape[ax] = N
        line = line.reshape(shape)
        ok = line if ok is None else ok & line
    return np.broadcast_to(ok, (N,) * d).copy()


def _split_top(text, sep=";"):
    parts, depth, cur = [], 0, []
    for ch in text:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch == sep and depth == 0:
            parts.append("".join(cur))
            cur = []
        else:
            cur.append(ch)
    parts.append("".join(cur))
    return [p.strip() for p in parts]


def _parse_kv(body):
    out = {}
    if not body.strip():
        return out
    for item in body.split(","):
        if "=" not in item:
            raise ParameterError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _num(kv, key, cast, default=None):
    if key not in kv:
        if default is None:
            raise ParameterError(f"missing parameter {key!r}")
        return default
    try:
        return cast(kv[key])
    except ValueError:
        raise ParameterError(f"bad value for {key!r}: {kv[key]!r}") from None


def _build_mask(spec, d, N, anchor):
    spec = spec.strip()
    m = re.fullmatch(r"(union|complement|intersection)\((.*)\)", spec, flags=re.S)
    if m:
        kind, inner = m.groups()
        parts = _split_top(inner)
        masks = [_build_mask(p, d, N, anchor) for p in parts if p]
        if kind == "complement":
            if len(masks) != 1:
                raise ParameterError("complement takes exactly one argument")
            return ~masks[0]
        if not masks:
            raise ParameterError(f"{kind} needs at least one argument")
        out = masks[0].copy()
        for mk in masks[1:]:
            out = out | mk if kind == "union" else out & mk
        return out
    name, _, body = spec.partition(":")
    kv = _parse_kv(body)
    name = name.strip()
    if name == "bernoulli":
        return _bernoulli(d, N, _num(kv, "p", float), _num(kv, "seed", int, 0))
    if name == "congruence":
        return _congruence(d, N, anchor, _num(kv, "r", int), _num(kv, "shift", int, 0))
    if name == "full":
        return np.ones((N,) * d, dtype=bool)
    if name == "empty":
        return np.zeros((N,) * d, dtype=bool)
    raise ParameterError(f"unknown generator {name!r}")


def generate_set(spec: str, d: int, N: int, anchor=None, boundary_mode: str = "periodic") -> PointSet:
    """Build a set from a generator spec.

    Grammar::

        bernoulli:p=0.3,seed=7       each point kept independently with probability p
        congruence:r=2,shift=0       (shift + rZ)^d ∩ box
        full | empty
        union(spec;spec;...)  intersection(spec;...)  complement(spec)

    Deterministic for a fixed seed.
    """
    if d < 1 or N < 1:
        raise ParameterError("d and N must be positive")
    anchor = tuple(int(a) for a in (anchor if anchor is not None else (0,) * d))
    if len(anchor) != d:
        raise ParameterError("anchor length must equal d")
    return PointSet.from_mask(_build_mask(spec, d, N, anchor), anchor, boundary_mode)
