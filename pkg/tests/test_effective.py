import numpy as np
import pytest

from rigidemt import PRESETS, constants
from rigidemt.effective import (
    BeyondDiluteError,
    GeometryError,
    background_stiffness,
    effective,
    nearest_isotropic,
    normalized_emt,
    parse_fractions,
    sweep,
    volume_fraction,
)
from rigidemt.emt import emt_first_order


@pytest.fixture(scope="module")
def egg():
    mat = constants(1.0, 1.0)
    return mat, emt_first_order(PRESETS["egg"], mat)


def test_background_matrix():
    C = background_stiffness(constants(2.0, 0.5))
    np.testing.assert_array_equal(C, [[3, 2, 0], [2, 3, 0], [0, 0, 1]])


def test_f_zero_is_background(egg):
    mat, emt = egg
    np.testing.assert_array_equal(effective(mat, emt, 0.0).c_star, background_stiffness(mat))


def test_linear_without_lattice(egg):
    mat, emt = egg
    et = effective(mat, emt, 0.2)
    np.testing.assert_allclose(et.c_star - et.c_background, 0.2 * normalized_emt(emt), rtol=0, atol=1e-15)


def test_lattice_correction(egg):
    mat, emt = egg
    S = 0.05 * np.eye(3)
    f = 0.3
    M = normalized_emt(emt)
    expect = background_stiffness(mat) + f * M @ np.linalg.inv(np.eye(3) - f * S @ M)
    np.testing.assert_allclose(effective(mat, emt, f, S).c_star, expect, rtol=1e-14)


def test_singular_lattice_flagged(egg):
    mat, emt = egg
    M = normalized_emt(emt)
    f = 0.1
    S = np.linalg.inv(M) / f  # makes I - f S M vanish
    with pytest.raises(BeyondDiluteError):
        effective(mat, emt, f, S)
    rows = sweep(mat, emt, [0.0, f], S)
    assert rows[0]["ok"] and not rows[1]["ok"]


def test_volume_fraction():
    assert volume_fraction(PRESETS["disk"], 10.0) == pytest.approx(np.pi / 10)
    with pytest.raises(GeometryError):
        volume_fraction(PRESETS["disk"], 1.0)


def test_disk_keeps_isotropy():
    mat = constants(1.0, 1.0)
    et = effective(mat, emt_first_order(PRESETS["disk"], mat), 0.1)
    assert et.diagnostics["isotropy_deviation"] < 1e-14
    lam, mu, _ = nearest_isotropic(et.c_star)
    assert mu > mat.mu  # rigid inclusions stiffen


def test_parse_fractions():
    assert parse_fractions("0:0.3:0.1") == [0.0, 0.1, 0.2, 0.3]
    assert parse_fractions("0.1, 0.2") == [0.1, 0.2]
    with pytest.raises(ValueError):
        parse_fractions("0:1:0")


def test_fraction_range(egg):
    mat, emt = egg
    with pytest.raises(ValueError):
        effective(mat, emt, 1.0)
