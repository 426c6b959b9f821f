"""Acceptance criteria, one PASS/FAIL line each.

Run under pytest (the lines are repeated in the terminal summary) or directly
with ``python3 tests/test_acceptance.py``.
"""
from __future__ import annotations

import math
import sys
import time
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))
from conftest import record_acceptance  # noqa: E402

from rigidemt import PRESETS, constants  # noqa: E402
from rigidemt.density import canonical_densities  # noqa: E402
from rigidemt.effective import background_stiffness, effective, normalized_emt  # noqa: E402
from rigidemt.elastic import CANONICAL, Loading  # noqa: E402
from rigidemt.emt import closed_form_emt, emt_from_densities, farfield_ratio, pair_identities  # noqa: E402
from rigidemt.density import solve_first_order  # noqa: E402
from rigidemt.geometry import random_map  # noqa: E402
from rigidemt.oracle import emt_by_quadrature  # noqa: E402
from rigidemt.verify import random_material  # noqa: E402

MATERIALS = (constants(1.0, 1.0), constants(0.0, 1.0), constants(2.5, 0.7))


def _line(number: int, title: str, passed: bool, detail: str) -> str:
    return f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d} - {title}: {detail}"


def _report(number, title, passed, detail):
    record_acceptance(_line(number, title, passed, detail))
    assert passed, detail


def _rel(a, b) -> float:
    return float(np.max(np.abs(np.asarray(a) - np.asarray(b))) / max(np.max(np.abs(b)), 1e-300))


def _emt(phi, mat, dens=None):
    dens = canonical_densities(phi, mat) if dens is None else dens
    return emt_from_densities(dens, phi, mat, check=False)


@pytest.fixture(scope="module")
def random_set():
    """20 random shapes per degree 1..3, each paired with 5 random materials."""
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    items = []
    for N in (1, 2, 3):
        for _ in range(20):
            phi = random_map(rng, N, gamma_range=(0.5, 2.0))
            for _ in range(5):
                mat = random_material(rng)
                dens = canonical_densities(phi, mat)
                items.append((N, phi, mat, _emt(phi, mat, dens), dens))
    return items, time.perf_counter() - t0


def test_criterion_01_closed_forms(random_set):
    items, t_build = random_set
    t0 = time.perf_counter()
    worst = max(_rel(emt.m, closed_form_emt(phi, mat, N).m) for N, phi, mat, emt, _ in items)
    seconds = t_build + time.perf_counter() - t0
    _report(1, "closed-form equivalence", worst <= 1e-10 and seconds < 5.0,
            f"{len(items)} cases, max rel diff {worst:.2e} (tol 1e-10), {seconds:.2f}s (target < 5s)")


def test_criterion_02_oracle():
    t0 = time.perf_counter()
    worst = 0.0
    for phi in PRESETS.values():
        for mat in MATERIALS:
            orc, _ = emt_by_quadrature(phi, mat, n_modes=64)
            worst = max(worst, _rel(orc, _emt(phi, mat).m))
    seconds = time.perf_counter() - t0
    _report(2, "oracle equivalence", worst <= 1e-6 and seconds < 30.0,
            f"4 shapes x 3 materials, max rel diff {worst:.2e} (tol 1e-6), {seconds:.2f}s (target < 30s)")


def test_criterion_03_symmetry(random_set):
    items, _ = random_set
    emts = [it[3] for it in items] + [_emt(phi, mat) for phi in PRESETS.values() for mat in MATERIALS]
    worst = max(t.asymmetry() / t.norm() for t in emts)
    _report(3, "symmetry", worst <= 1e-12, f"{len(emts)} tensors, max asymmetry/||m|| {worst:.2e} (tol 1e-12)")


def test_criterion_04_identities(random_set):
    items, _ = random_set
    worst, which = 0.0, ""
    for _, _, mat, emt, _ in items:
        for k, v in pair_identities(emt.pairs, mat).items():
            if v > worst:
                worst, which = v, k
    _report(4, "E-pair identities", worst <= 1e-10, f"max relative defect {worst:.2e} ({which or 'all zero'}) (tol 1e-10)")


def test_criterion_05_translation():
    rng = np.random.default_rng(7)
    worst = 0.0
    for i in range(30):
        phi = random_map(rng, 1 + i % 3)
        mat = random_material(rng)
        base = _emt(phi, mat).m
        shift = complex(*rng.normal(size=2)) * 10 ** rng.uniform(-1, 1)
        worst = max(worst, _rel(_emt(phi.translated(shift), mat).m, base))
    _report(5, "translation invariance", worst <= 1e-12, f"30 random shifts, max entrywise rel diff {worst:.2e} (tol 1e-12)")


def test_criterion_06_farfield_ellipse():
    mat = constants(1.0, 1.0)
    ratios = {t: farfield_ratio(solve_first_order(PRESETS["ellipse"], mat, Loading.canonical(t)), radii=(10.0, 20.0))
              for t in CANONICAL}
    ok = all(0.20 <= r <= 0.32 for r in ratios.values())
    txt = ", ".join(f"{t} {r:.4f}" for t, r in ratios.items())
    _report(6, "far-field decay (ellipse)", ok, f"|r(20)|/|r(10)|: {txt} (window [0.20, 0.32])")


def test_criterion_07_scaling_rotation():
    rng = np.random.default_rng(11)
    shapes = list(PRESETS.values()) + [random_map(rng, N) for N in (1, 2, 3)]
    worst_s = worst_r = 0.0
    for phi in shapes:
        mat = random_material(rng)
        base = _emt(phi, mat)
        for t in (0.5, 2.0):
            worst_s = max(worst_s, _rel(_emt(phi.scaled(t), mat).m, t * t * base.m))
        M0 = base.mandel
        for ang in rng.uniform(0, 2 * math.pi, size=3):
            M1 = _emt(phi.rotated(ang), mat).mandel
            worst_r = max(worst_r, abs(np.trace(M1) - np.trace(M0)) / abs(np.trace(M0)),
                          abs(np.linalg.det(M1) - np.linalg.det(M0)) / abs(np.linalg.det(M0)))
    worst = max(worst_s, worst_r)
    _report(7, "scaling and rotation covariance", worst <= 1e-10,
            f"scaling {worst_s:.2e}, rotation trace/det {worst_r:.2e} (tol 1e-10)")


def test_criterion_08_spot_values():
    mat = constants(1.0, 1.0)
    d, e = _emt(PRESETS["disk"], mat), _emt(PRESETS["ellipse"], mat)
    pi = math.pi
    checks = [(d.entry(1, 2, 1, 2), 1.5 * pi), (d.entry(1, 1, 1, 1), 4.5 * pi),
              (d.entry(1, 1, 2, 2), 1.5 * pi), (d.entry(1, 2, 1, 1), 0.0), (e.entry(1, 2, 1, 2), pi)]
    worst = max(abs(v - x) / max(abs(x), 1.0) for v, x in checks)
    _report(8, "disk and ellipse spot values", worst <= 1e-10, f"max rel error {worst:.2e} (tol 1e-10)")


def test_criterion_09_effective():
    mat = constants(1.0, 1.0)
    emt = _emt(PRESETS["egg"], mat)
    C = background_stiffness(mat)
    M = normalized_emt(emt)
    zero = np.array_equal(effective(mat, emt, 0.0).c_star, C)
    # "exactly": C* - C and f M agree to within the rounding of one addition
    eps = np.finfo(float).eps
    ulps = max(float(np.max(np.abs((effective(mat, emt, f).c_star - C) - f * M)
                            / (eps * np.maximum(np.abs(effective(mat, emt, f).c_star), 1.0))))
               for f in (0.01, 0.05, 0.1, 0.3))
    h = 1e-4
    slope = (effective(mat, emt, 2 * h).c_star - effective(mat, emt, h).c_star) / h
    serr = _rel(slope, M)
    ok = zero and ulps <= 2.0 and serr <= 1e-6
    _report(9, "effective-tensor contract", ok,
            f"f=0 equals C: {zero}; C*-C vs fM within {ulps:.2f} ulp; slope rel err {serr:.2e} (tol 1e-6)")


def test_criterion_10_boundary_residual(random_set):
    items, _ = random_set
    dens = [d for *_, ds in items for d in ds]
    dens += [d for phi in PRESETS.values() for mat in MATERIALS for d in canonical_densities(phi, mat)]
    worst = max(d.residual for d in dens)
    _report(10, "boundary residual", worst <= 1e-8, f"{len(dens)} densities at 256 samples, max rel {worst:.2e} (tol 1e-8)")


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
