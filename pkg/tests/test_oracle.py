import numpy as np
import pytest

from rigidemt import PRESETS, constants
from rigidemt.density import single_layer_exterior, solve_first_order
from rigidemt.elastic import Loading
from rigidemt.emt import emt_first_order
from rigidemt.oracle import (
    OracleError,
    complex_cauchy_operator,
    complex_log_operator,
    convergence_study,
    cotangent_weights,
    discretize,
    emt_by_quadrature,
    kelvin_single_layer,
    log_weights,
    oracle_solve,
    sawtooth_weights,
    traction_moments,
)

N = 64
T = 2 * np.pi * np.arange(N) / N


@pytest.mark.parametrize("k", [1, 3, 7])
def test_log_weights_fourier_multiplier(k):
    f = np.exp(1j * k * T)
    np.testing.assert_allclose(log_weights(N) @ f, -f / (2 * k), atol=1e-14)
    np.testing.assert_allclose(log_weights(N) @ np.ones(N), 0, atol=1e-14)


@pytest.mark.parametrize("k", [-5, -1, 2, 9])
def test_sawtooth_weights(k):
    f = np.exp(1j * k * T)
    np.testing.assert_allclose(sawtooth_weights(N) @ f, f / (2j * k), atol=1e-14)
    np.testing.assert_allclose(sawtooth_weights(N) @ np.ones(N), np.pi / 2, atol=1e-14)


@pytest.mark.parametrize("k", [-4, 1, 6])
def test_cotangent_weights(k):
    f = np.exp(1j * k * T)
    np.testing.assert_allclose(cotangent_weights(N) @ f, -0.5j * np.sign(k) * f, atol=1e-14)


def test_cauchy_principal_value_on_circle():
    bd = discretize(PRESETS["disk"], N)
    z = bd.z
    # f = 1: PV = 1/(2 zeta);  f = zeta: PV = -1/2
    np.testing.assert_allclose(complex_cauchy_operator(bd, np.ones(N), z, on_boundary=True), 0.5 / z, atol=1e-13)
    np.testing.assert_allclose(complex_cauchy_operator(bd, z, z, on_boundary=True), -0.5, atol=1e-13)
    # exterior: (1/2pi) int dsigma/(z - zeta) = 1/z
    zt = np.array([2.0, -1.5j])
    np.testing.assert_allclose(complex_cauchy_operator(bd, np.ones(N), zt), 1 / zt, atol=1e-13)


def test_log_operator_on_circle():
    bd = discretize(PRESETS["disk"], N)
    val = complex_log_operator(bd, np.cos(bd.t), bd.z, on_boundary=True)
    np.testing.assert_allclose(val.real, -0.5 * np.cos(bd.t), atol=1e-13)
    np.testing.assert_allclose(complex_log_operator(bd, np.ones(N), bd.z, on_boundary=True).real, 0, atol=1e-13)
    with pytest.raises(ValueError):
        complex_log_operator(bd, np.ones(N), np.array([0.5]), on_boundary=True)


def test_kelvin_quadrature_matches_series_layer():
    mat = constants(2.5, 0.7)
    phi = PRESETS["trilobe"]
    dc = solve_first_order(phi, mat, Loading.canonical("U3"))
    bd = discretize(phi, 256)
    dens = dc.psi(bd.t) / bd.speed
    w = 1.6 * np.exp(1j * np.linspace(0, 6, 9))
    np.testing.assert_allclose(kelvin_single_layer(bd, dens, mat, phi(w)), single_layer_exterior(dc, w), atol=1e-12)


def test_oracle_solution_quality():
    sol = oracle_solve(PRESETS["egg"], constants(1.0, 1.0), "U1", n_modes=32)
    assert sol.residual < 1e-12
    assert abs(sol.coeffs[sol.modes == 0][0]) < 1e-13


def test_oracle_routes_agree():
    mat = constants(0.0, 1.0)
    a, _ = emt_by_quadrature(PRESETS["egg"], mat, 32, route="direct")
    b, _ = emt_by_quadrature(PRESETS["egg"], mat, 32, route="loadings")
    np.testing.assert_allclose(a, b, atol=1e-10 * np.abs(a).max())
    np.testing.assert_allclose(a, emt_first_order(PRESETS["egg"], mat).m, atol=1e-10 * np.abs(a).max())


def test_oracle_accepts_callable_field():
    mat = constants(1.0, 1.0)
    a = oracle_solve(PRESETS["ellipse"], mat, Loading.canonical("U2"), 24)
    b = oracle_solve(PRESETS["ellipse"], mat, lambda z: np.conj(-z) / (2 * mat.mu), 24)
    np.testing.assert_allclose(a.coeffs, b.coeffs, atol=1e-12)


def test_convergence_once_modes_resolve_density():
    # the egg U3 density has modes -2..1; one mode cannot represent it
    res = dict(convergence_study(PRESETS["egg"], constants(1.0, 1.0), "U3", modes=(1, 2, 16)))
    assert res[1] > 1e-6
    assert res[2] < 1e-12 and res[16] < 1e-12


def test_equilibrium_of_oracle_field():
    mat = constants(1.0, 1.0)
    sol = oracle_solve(PRESETS["egg"], mat, "U3", 32)
    np.testing.assert_allclose(traction_moments(sol, PRESETS["egg"], mat, "U3"), 0, atol=1e-10)


def test_oracle_errors():
    with pytest.raises(ValueError):
        oracle_solve(PRESETS["disk"], constants(1, 1), "U1", n_modes=16, n_points=20)
    with pytest.raises(OracleError):
        oracle_solve(PRESETS["disk"], constants(1, 1), "U1", n_modes=8, rank_tol=1.0)
    with pytest.raises(ValueError):
        emt_by_quadrature(PRESETS["disk"], constants(1, 1), 8, route="nope")


def test_rigid_rotation_field_needs_no_density():
    from rigidemt.elastic import rigid_motions

    sol = oracle_solve(PRESETS["egg"], constants(1.0, 1.0), rigid_motions()[2], 32)
    assert np.abs(sol.coeffs).max() < 1e-12
    np.testing.assert_allclose(sol.b, [0, 0, 1], atol=1e-12)
