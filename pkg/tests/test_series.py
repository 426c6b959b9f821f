import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from rigidemt.geometry import ExteriorMap, random_map
from rigidemt.series import (
    LaurentSeries,
    SeriesConsistencyError,
    derivative_expansion,
    faber_coefficients,
    faber_compositions,
    grunsky_coefficients,
    map_series,
    mul,
    reciprocal_derivative,
)

cplx = st.complex_numbers(max_magnitude=10, allow_nan=False, allow_infinity=False)


def series_strategy():
    return st.builds(
        lambda lo, cs: LaurentSeries(lo, np.array(cs, dtype=complex), 64),
        st.integers(-6, 3),
        st.lists(cplx, min_size=1, max_size=6),
    )


@settings(max_examples=60, deadline=None)
@given(series_strategy(), series_strategy())
def test_product_matches_pointwise_product(a, b):
    w = np.array([1.7 + 0.4j, -2.1 + 1.3j])
    np.testing.assert_allclose((a * b)(w), a(w) * b(w), rtol=1e-10, atol=1e-8)


@settings(max_examples=60, deadline=None)
@given(series_strategy(), series_strategy(), series_strategy())
def test_product_commutative_and_distributive(a, b, c):
    w = np.array([1.3 - 0.6j])
    np.testing.assert_allclose((a * b)(w), (b * a)(w), rtol=1e-12, atol=1e-9)
    np.testing.assert_allclose((a * (b + c))(w), (a * b + a * c)(w), rtol=1e-10, atol=1e-8)


def test_coeff_access_and_shift():
    s = LaurentSeries.from_dict({-2: 3.0, 1: 1j})
    assert s.coeff(-2) == 3.0 and s.coeff(1) == 1j and s.coeff(0) == 0
    assert s.shift(2).coeff(0) == 3.0
    np.testing.assert_allclose(s.derivative()(2.0), -2 * 3.0 * 2.0 ** -3 + 1j)


def test_truncation_clips_and_counts():
    a = LaurentSeries.from_dict({-3: 1.0, 0: 1.0}, truncation=4)
    p = mul(a, a)
    assert p.coeff(-6) == 0
    assert p.clipped >= 1


def test_map_series_evaluates_map():
    phi = ExteriorMap(1.2, (0.3, 0.2 - 0.1j, 0.05j))
    w = 1.5 * np.exp(1j * np.linspace(0, 6, 7))
    np.testing.assert_allclose(map_series(phi)(w), phi(w), rtol=1e-14)


def test_reciprocal_derivative():
    phi = ExteriorMap(1.0, (0, 0.3, -0.1j, 0.05))
    w = 1.1 * np.exp(1j * np.linspace(0, 6, 9))
    r = reciprocal_derivative(phi, truncation=200)
    np.testing.assert_allclose(r(w) * phi.derivative(w), 1.0, atol=1e-10)


def test_faber_polynomials_of_ellipse():
    # Phi = w + a/w: F_1 = z, F_2 = z^2 - 2a
    a = 0.4
    p = faber_coefficients(ExteriorMap(1.0, (0, a)), 2)
    np.testing.assert_allclose(p[1], [0, 1])
    np.testing.assert_allclose(p[2], [-2 * a, 0, 1])


@pytest.mark.parametrize("degree", [1, 2, 3, 5])
def test_faber_composition_has_single_positive_power(degree):
    phi = random_map(np.random.default_rng(degree), degree)
    M = 6
    p = faber_coefficients(phi, M)
    F = faber_compositions(phi, M)
    w = 1.3 * phi.gamma * np.exp(1j * np.linspace(0, 6, 11))
    for m in range(1, M + 1):
        # monomial form and the composed Laurent series agree
        np.testing.assert_allclose(np.polyval(p[m][::-1], phi(w)), F[m](w), rtol=1e-10)
        assert F[m].coeff(m) == pytest.approx(1.0)
        for j in range(0, m):
            assert abs(F[m].coeff(j)) < 1e-11


def test_grunsky_symmetry():
    # n c_{m,n} = m c_{n,m}
    phi = random_map(np.random.default_rng(3), 3)
    c = grunsky_coefficients(phi, 6)
    for m in range(1, 7):
        for n in range(1, 7):
            assert n * c[m, n] == pytest.approx(m * c[n, m], abs=1e-12)


def test_grunsky_translation_invariant():
    phi = random_map(np.random.default_rng(4), 2)
    np.testing.assert_array_equal(grunsky_coefficients(phi, 5), grunsky_coefficients(phi.translated(3 - 2j), 5))


def test_grunsky_detects_clipping():
    phi = ExteriorMap(1.0, (0, 0.3, 0.1))
    with pytest.raises(SeriesConsistencyError):
        grunsky_coefficients(phi, 6, truncation=2)


def test_derivative_expansion():
    phi = random_map(np.random.default_rng(5), 3).centered()
    M = 5
    p = faber_coefficients(phi, M)
    d = derivative_expansion(p, M)
    z = np.array([0.3 + 0.2j, -1.1 + 0.7j])
    for m in range(1, M + 1):
        dp = np.polyval(np.polyder(p[m][::-1]), z)
        comb = sum(d[m, j] * np.polyval(p[j][::-1], z) for j in range(m))
        np.testing.assert_allclose(comb, dp, rtol=1e-12)
