import numpy as np
import pytest

from spheredist.errors import PaddingError, ParameterError, ParseError
from spheredist.lattice_sphere import enumerate_sphere
from spheredist.pointset import PointSet
from spheredist.spectral import (
    GridFunction,
    Spectrum,
    dft,
    dft_direct,
    dump_grid,
    grid_from_pointset,
    idft,
    load_grid,
    parseval_check,
    sigma_hat,
    sigma_hat_generating,
    sigma_hat_grid,
    sphere_kernel,
)


def test_delta_and_constant():
    delta = np.zeros((4, 4, 4))
    delta[0, 0, 0] = 1
    assert np.allclose(dft(GridFunction(delta)).values, 1)
    F = dft(GridFunction(np.ones((4, 4, 4)))).values
    expected = np.zeros((4, 4, 4))
    expected[0, 0, 0] = 64
    assert np.allclose(F, expected)


@pytest.mark.parametrize("shape", [(7,), (5, 5), (4, 4, 4)])
def test_fft_matches_defining_sum(shape):
    rng = np.random.default_rng(0)
    v = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    assert np.allclose(dft(GridFunction(v)).values, dft_direct(v), atol=1e-10)


def test_round_trip():
    rng = np.random.default_rng(1)
    v = rng.standard_normal((8, 8, 8))
    back = idft(dft(GridFunction(v))).values
    assert np.max(np.abs(back - v)) <= 1e-12 * np.max(np.abs(v))


def test_parseval_examples():
    delta = np.zeros((16, 16))
    delta[0, 0] = 1
    assert parseval_check(GridFunction(delta), GridFunction(delta)) <= 1e-15
    assert parseval_check(GridFunction(np.ones((16, 16))), GridFunction(delta)) <= 1e-12
    rng = np.random.default_rng(2)
    f, g = rng.standard_normal((2, 16, 16))
    bound = 1e-10 * np.linalg.norm(f) * np.linalg.norm(g)
    assert parseval_check(GridFunction(f), GridFunction(g)) <= bound
    with pytest.raises(ParameterError):
        parseval_check(GridFunction(f), GridFunction(np.ones((8, 8))))


def test_sigma_hat_examples():
    s = enumerate_sphere(5, 1)
    assert sigma_hat(s, np.zeros(5)) == pytest.approx(1.0)
    assert sigma_hat(s, np.array([0.5, 0, 0, 0, 0])).real == pytest.approx(0.6, abs=1e-14)
    for lam in range(0, 12):
        val = sigma_hat(enumerate_sphere(5, lam), np.full(5, 0.5))
        assert abs(val - (-1) ** lam) <= 1e-12


def test_sigma_hat_bound_and_symmetry():
    rng = np.random.default_rng(3)
    s = enumerate_sphere(4, 13)
    xi = rng.random((2000, 4))
    v = sigma_hat(s, xi)
    assert np.all(np.abs(v) <= 1 + 1e-12)
    assert np.allclose(sigma_hat(s, -xi), np.conj(v))


@pytest.mark.parametrize("d,lam,M", [(3, 5, 8), (5, 2, 8), (2, 25, 16), (4, 6, 6)])
def test_three_routes_agree(d, lam, M):
    grid = sigma_hat_grid(d, lam, M)
    k = np.indices((M,) * d).reshape(d, -1).T / M
    direct = sigma_hat(enumerate_sphere(d, lam), k).reshape((M,) * d)
    assert np.max(np.abs(grid - direct)) <= 1e-10
    gen = sigma_hat_generating(d, lam, k).reshape((M,) * d)
    assert np.max(np.abs(gen - direct)) <= 1e-10


def test_generating_off_grid():
    rng = np.random.default_rng(4)
    xi = rng.random((200, 5))
    for lam in (3, 17, 30):
        assert np.allclose(sigma_hat_generating(5, lam, xi), sigma_hat(enumerate_sphere(5, lam), xi).real, atol=1e-12)


def test_empty_sphere():
    with pytest.raises(ParameterError):
        sigma_hat(enumerate_sphere(3, 7), np.zeros(3))
    with pytest.raises(ParameterError):
        sigma_hat_generating(2, 3, np.zeros(2))


def test_kernel_scaled():
    k = sphere_kernel(2, 1, 8, q=2)
    assert k.sum() == pytest.approx(1.0)
    assert k[2, 0] == k[6, 0] == k[0, 2] == k[0, 6] == 0.25


def test_grid_from_pointset_truncate():
    A = PointSet.from_points([[1, 1], [2, 3]], 2, 3, boundary_mode="truncate")
    g = grid_from_pointset(A, 7)
    assert g.padding() == 4 and g.values.sum() == 2 and g.values[1, 2] == 1
    g.require_padding(2)
    with pytest.raises(PaddingError):
        g.require_padding(3)
    with pytest.raises(ParameterError):
        grid_from_pointset(A.with_mode("periodic"), 7)


def test_dump_round_trip():
    rng = np.random.default_rng(5)
    v = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    for f in (GridFunction(v), GridFunction(v, "truncate", 2)):
        g = load_grid(dump_grid(f))
        assert np.array_equal(g.values, f.values) and g.boundary_mode == f.boundary_mode
        assert g.box_side == f.box_side
    with pytest.raises(ParseError) as exc:
        load_grid("1 2 periodic\n0 0\n1 x\n")
    assert exc.value.line == 3


def test_spectrum_shape():
    assert Spectrum(np.zeros((4, 4))).side == 4
