import json

import numpy as np
import pytest

from oracles import brute_sphere, nearest_centre_dist2, pair_count
from spheredist.density import generate_set
from spheredist.errors import PaddingError, ParameterError
from spheredist.pointset import PointSet
from spheredist.verify import (
    annulus_grid_mask,
    count_identity_check,
    dichotomy_report,
    dichotomy_report_pinned,
    ladder_disjointness,
    pinned_check,
    unpinned_check,
)


def test_identity_trivial_sets():
    e = count_identity_check(PointSet.empty(5, 4), 2)
    assert e.lhs == 0 and abs(e.rhs) < 1e-9 and e.ok
    f = count_identity_check(PointSet.full(5, 4), 3)
    assert f.lhs == pytest.approx(4**5) and f.rhs == pytest.approx(4**5) and f.ok


def test_identity_against_set_lookup():
    A = generate_set("bernoulli:p=0.3,seed=4", 3, 6)
    for lam in (1, 2, 3, 5):
        r = count_identity_check(A, lam)
        idx = [tuple(int(c) for c in p) for p in A.indices()]
        assert r.lhs * len(brute_sphere(3, lam)) == pair_count(idx, lam, side=6)
        assert r.ok
        assert count_identity_check(A, lam, method="pointwise").lhs == r.lhs


def test_identity_bernoulli_5d():
    A = generate_set("bernoulli:p=0.3,seed=0", 5, 8)
    assert count_identity_check(A, 2).residual <= 1e-8


def test_identity_truncate():
    A = generate_set("bernoulli:p=0.4,seed=2", 2, 7, anchor=(3, -4), boundary_mode="truncate")
    for lam in (1, 5, 8):
        r = count_identity_check(A, lam)
        assert r.ok and r.grid_side == 7 + 2 * int(np.sqrt(lam))
        idx = [tuple(int(c) for c in p) for p in A.indices()]
        assert r.lhs * len(brute_sphere(2, lam)) == pair_count(idx, lam)
    with pytest.raises(PaddingError):
        count_identity_check(A, 9, side=8)


def test_unpinned_examples():
    full = unpinned_check(PointSet.full(3, 6), 2, 0.01)
    assert full.best_ratio == 1.0 and full.holds and full.best_x == (1, 1, 1)
    C2 = generate_set("congruence:r=2", 5, 8)
    for lam in (1, 3, 4):
        assert unpinned_check(C2, lam, 0.1, q=2).best_ratio == 1.0
    for lam in (1, 3, 5):
        assert unpinned_check(C2, lam, 0.1, q=1).best_ratio == 0.0
    with pytest.raises(ParameterError):
        unpinned_check(PointSet.empty(2, 4), 1, 0.1)


def test_unpinned_recount_and_monotone():
    A = generate_set("bernoulli:p=0.35,seed=8", 3, 6)
    res = unpinned_check(A, 3, 0.05)
    members = {tuple(p) for p in A.elements}
    sphere = brute_sphere(3, 3)
    lo = np.array(A.anchor) + 1

    def ratio(x):
        hits = sum(tuple(int(c) for c in (np.array(x) + y - lo) % 6 + lo) in members for y in np.array(sphere))
        return hits / len(sphere)

    ratios = [ratio(x) for x in A.elements]
    assert res.best_ratio == max(ratios)
    assert res.best_x == tuple(int(c) for c in A.elements[int(np.argmax(ratios))])
    flags = [unpinned_check(A, 3, eps).holds for eps in (0.0, 0.05, 0.1, 0.2, 0.4)]
    assert flags == sorted(flags)


def test_pinned():
    C2 = generate_set("congruence:r=2", 5, 8)
    p = pinned_check(C2, 1, 5, 0.1, q=2)
    assert p.holds and p.pinned_x == (2,) * 5
    assert all(v == 1.0 for v in p.ratios.values())
    full = pinned_check(PointSet.full(2, 5), 1, 4, 0.1)
    assert full.pinned_x == (1, 1)
    A = generate_set("bernoulli:p=0.5,seed=3", 3, 6)
    for lam in (2, 3):
        assert pinned_check(A, lam, lam, 0.05).holds == unpinned_check(A, lam, 0.05).holds
    w = pinned_check(A, 1, 3, 0.3)
    if w.holds:
        for lam, v in w.ratios.items():
            assert v > w.threshold
            assert v == unpinned_ratio_at(A, lam, w.pinned_x)


def unpinned_ratio_at(A, lam, x):
    members = {tuple(p) for p in A.elements}
    lo = np.array(A.anchor) + 1
    sphere = np.array(brute_sphere(A.dim, lam))
    hits = sum(tuple(int(c) for c in (np.array(x) + y - lo) % A.side + lo) in members for y in sphere)
    return hits / len(sphere)


def test_dichotomy_full_torus():
    rep = dichotomy_report(PointSet.full(3, 8), 2, 0.1, 0.5)
    assert rep.branch_ii["fourier_mass"] == pytest.approx(0.0, abs=1e-12)
    assert rep.branch_i["holds"]
    assert rep.branch_ii["total_mass"] == pytest.approx(1.0)
    pinned = dichotomy_report_pinned(PointSet.full(3, 8), 2, 4, 0.1, 0.5)
    assert pinned.branch_ii["fourier_mass"] == pytest.approx(0.0, abs=1e-12) and pinned.branch_i["holds"]


@pytest.mark.parametrize("q", [None, 1, 3])
def test_dichotomy_mass_recount(q):
    A = generate_set("bernoulli:p=0.4,seed=5", 5, 16)
    rep = dichotomy_report(A, 3, 0.1, 0.3, q=q)
    qq = rep.q_eta
    F = np.fft.fftn(A.mask().astype(float))
    # The squared distance splits over coordinates, so scan each k/16 once.
    table = np.array([nearest_centre_dist2(np.array([k / 16]), qq) for k in range(16)])
    d2 = sum(np.ix_(*[table] * 5))
    lo, hi = 0.3**2 / 3, 1 / (0.3**2 * 3)
    want = float(np.sum(np.abs(F[(lo <= d2) & (d2 <= hi)]) ** 2))
    want /= 16**5 * len(A)
    assert rep.branch_ii["fourier_mass"] == pytest.approx(want, abs=1e-10)
    assert rep.branch_ii["total_mass"] == pytest.approx(1.0, abs=1e-12)
    assert rep.branch_ii["holds"] == (rep.branch_ii["fourier_mass"] >= 0.1)


def test_dichotomy_pinned_agrees_on_single_radius():
    A = generate_set("bernoulli:p=0.4,seed=6", 3, 12)
    a = dichotomy_report(A, 9, 0.1, 0.5, q=2).to_dict()
    b = dichotomy_report_pinned(A, 9, 9, 0.1, 0.5, q=2).to_dict()
    assert a["branch_ii"]["fourier_mass"] == b["branch_ii"]["fourier_mass"]
    assert a["branch_i"]["holds"] == b["branch_i"]["holds"]
    assert a["branch_i"]["best_ratio"] == b["branch_i"]["best_min_ratio"]
    for key in ("main_term", "error_norm", "complement_term", "exceptional_set_size", "L1", "L2"):
        assert a["decomposition"][key] == pytest.approx(b["decomposition"][key], abs=1e-9)
    json.dumps(a)


def test_dichotomy_pinned_window_monotone():
    A = generate_set("bernoulli:p=0.3,seed=7", 3, 12)
    masses = [dichotomy_report_pinned(A, 4, l1, 0.1, 0.5, q=2).branch_ii["fourier_mass"] for l1 in (4, 8, 16, 40)]
    assert masses == sorted(masses)
    small = annulus_grid_mask(3, 12, 0.5, 2, 4, 8)
    large = annulus_grid_mask(3, 12, 0.5, 2, 4, 40)
    assert np.all(large[small])


def test_dichotomy_decomposition_consistency():
    A = generate_set("bernoulli:p=0.5,seed=1", 2, 16)
    rep = dichotomy_report(A, 16, 0.1, 0.5, q=1)
    dec = rep.decomposition
    # <f, A f1> + <f, A(1 - f1)> = <f, A 1> = |A| on the torus.
    assert dec["main_term"] + dec["complement_term"] == pytest.approx(len(A))
    assert dec["cutoff_L2_exact"] and rep.flags["cutoffs_in_range"]


def test_ladder_disjoint():
    ok, masks = ladder_disjointness(3, 16, 0.5, 2, [1, 17, 289])
    # At lam = 1 the inner radius 1/2 exceeds every nearest-centre distance (at most sqrt(3)/4).
    assert ok and [bool(m.any()) for m in masks] == [False, True, True]
    bad, _ = ladder_disjointness(3, 16, 0.5, 2, [17, 34])
    assert not bad
