import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from spheredist.density import (
    box_density,
    density_increment,
    generate_set,
    increment_step_bound,
    residue_counts,
    restrict_to_class,
    subbox_density_ladder,
    uniformity_test,
)
from spheredist.errors import ParameterError
from spheredist.pointset import PointSet


def _recount_classes(A, q):
    """Class counts by walking the element list."""
    counts = {}
    for p in A.elements:
        s = tuple(int((c - a - 1) % q) + 1 for c, a in zip(p, A.anchor))
        counts[s] = counts.get(s, 0) + 1
    return counts


def test_box_density_examples():
    assert box_density(PointSet.full(3, 4)) == 1.0
    assert box_density(PointSet.empty(3, 4)) == 0.0
    assert box_density(generate_set("congruence:r=2", 5, 6)) == 2**-5


def test_generators():
    assert generate_set("bernoulli:p=1,seed=3", 2, 5) == PointSet.full(2, 5)
    A = generate_set("congruence:r=2,shift=0", 1, 4)
    assert [int(p[0]) for p in A.elements] == [2, 4]
    a = generate_set("bernoulli:p=0.5,seed=11", 3, 6)
    assert a == generate_set("bernoulli:p=0.5,seed=11", 3, 6)
    assert a != generate_set("bernoulli:p=0.5,seed=12", 3, 6)
    u = generate_set("union(congruence:r=2;congruence:r=3)", 1, 12)
    assert [int(p[0]) for p in u.elements] == [2, 3, 4, 6, 8, 9, 10, 12]
    c = generate_set("complement(congruence:r=2,shift=1)", 1, 6)
    assert [int(p[0]) for p in c.elements] == [2, 4, 6]
    i = generate_set("intersection(congruence:r=2;congruence:r=3)", 1, 12)
    assert [int(p[0]) for p in i.elements] == [6, 12]
    shifted = generate_set("congruence:r=3,shift=1", 2, 6, anchor=(1, 1))
    assert all((c - 1) % 3 == 0 for p in shifted.elements for c in p)


@pytest.mark.parametrize("spec", ["bernoulli:p=2", "congruence:r=0", "nope:x=1", "complement(full;full)", "bernoulli:q"])
def test_generator_errors(spec):
    with pytest.raises(ParameterError):
        generate_set(spec, 2, 4)


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.sampled_from([1, 2, 3, 4, 6]), st.integers(0, 10_000), st.integers(-5, 5))
def test_classes_partition(d, q, seed, shift):
    A = generate_set(f"bernoulli:p=0.4,seed={seed}", d, 12, anchor=(shift,) * d)
    counts = residue_counts(A.mask(), q)
    assert counts.sum() == len(A)
    recount = _recount_classes(A, q)
    for s, n in recount.items():
        assert counts[tuple(c - 1 for c in s)] == n


def test_uniformity_full_and_trivial_modulus():
    assert uniformity_test(PointSet.full(2, 12), 0.5).passed
    A = generate_set("bernoulli:p=0.2,seed=5", 3, 7)
    assert uniformity_test(A, 1.0).passed and uniformity_test(A, 1.0).q_eta_val == 1


def test_uniformity_congruence():
    A = generate_set("congruence:r=2", 5, 12)
    rep = uniformity_test(A, 0.5)
    assert rep.q_eta_val == 12
    assert rep.worst_ratio == pytest.approx(32.0)
    assert rep.worst_residue == (2,) * 5 and not rep.passed


def test_uniformity_bernoulli_recount():
    A = generate_set("bernoulli:p=0.5,seed=3", 2, 60)
    rep = uniformity_test(A, 0.5)
    recount = _recount_classes(A, 12)
    best = max(recount.values())
    assert rep.worst_ratio == pytest.approx(best / 25 / A.density)
    first = min(s for s, n in recount.items() if n == best)
    assert rep.worst_residue == first
    # Classes of 25 points fluctuate by about 20%, so a box this small does not pass.
    assert not rep.passed
    big = generate_set("bernoulli:p=0.5,seed=3", 2, 1200)
    assert uniformity_test(big, 0.5).passed


def test_subcube_variant():
    A = generate_set("bernoulli:p=0.5,seed=9", 2, 48)
    rep = uniformity_test(A, 0.5, variant="subcube", L=24)
    assert len(rep.subcube_table) == 4
    worst = max(rep.subcube_table, key=lambda r: r["ratio"])
    assert rep.worst_ratio == worst["ratio"]
    cube = rep.worst_subcube
    sub = PointSet.from_mask(A.mask()[cube[0] * 24 : cube[0] * 24 + 24, cube[1] * 24 : cube[1] * 24 + 24])
    rec = _recount_classes(sub, 12)
    assert rep.worst_ratio == pytest.approx(max(rec.values()) / 4 / A.density)
    with pytest.raises(ParameterError, match="q_eta \\| L \\| N"):
        uniformity_test(A, 0.5, variant="subcube", L=18)
    with pytest.raises(ParameterError, match="q_eta \\| N"):
        uniformity_test(generate_set("full", 2, 10), 0.5)


def test_increment_uniform_input():
    t = density_increment(PointSet.full(2, 12), 0.5)
    assert len(t) == 1 and t.status == "uniform"


@pytest.mark.parametrize("r", [2, 3])
def test_increment_congruence_one_step(r):
    A = generate_set(f"congruence:r={r}", 3, 24)
    t = density_increment(A, 0.5)
    assert t.status == "uniform" and len(t) == 2
    assert t.densities == [r**-3, 1.0]


def test_increment_geometry():
    A = generate_set("congruence:r=2,shift=1", 2, 8)
    B = restrict_to_class(A, (1, 1), 2)
    assert B == PointSet.full(2, 4)
    with pytest.raises(ParameterError):
        restrict_to_class(A, (1, 1), 3)


def test_increment_budget_and_box():
    A = generate_set("union(congruence:r=4;bernoulli:p=0.02,seed=1)", 2, 16)
    t = density_increment(A, 0.5, q=2, max_steps=0)
    assert t.status == "budget exhausted" and len(t) == 1
    t = density_increment(generate_set("bernoulli:p=0.3,seed=2", 2, 10), 0.5)
    assert t.status == "box exhausted"


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.sampled_from([0.05, 0.1, 0.3]), st.sampled_from([2, 3, 4]))
def test_increment_invariants(seed, p, q):
    A = generate_set(f"union(bernoulli:p={p},seed={seed};congruence:r={q})", 2, q**3)
    if len(A) == 0:
        return
    eta = 0.5
    t = density_increment(A, eta, q=q)
    dens = t.densities
    assert all(b > a * (1 + eta**2) for a, b in zip(dens, dens[1:]))
    assert all(x <= 1 for x in dens)
    assert len(t) - 1 <= increment_step_bound(dens[0], eta) + 1e-9


def test_step_bound():
    assert increment_step_bound(1.0, 0.5) == 0
    assert increment_step_bound(0.0, 0.5) == math.inf


def test_subbox_ladder():
    m = np.zeros((6, 6), dtype=bool)
    m[1:3, 2:4] = True
    A = PointSet.from_mask(m)
    assert subbox_density_ladder(A, [1, 2, 3, 6]) == [(1, 1.0), (2, 1.0), (3, 4 / 9), (6, 4 / 36)]
