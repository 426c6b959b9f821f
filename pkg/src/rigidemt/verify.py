"""Verification suite: property checks, closed forms and oracle comparisons.

Each check returns a :class:`Check` with the measured value and the bound it
was held to. ``tol`` is the base relative tolerance for analytic identities;
checks that are naturally tighter or looser scale it by a fixed factor
(symmetry and translation: ``tol / 100``; boundary residual: ``tol * 100``;
oracle agreement: ``tol * 1e4``).
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .density import canonical_densities, single_layer_exterior, solve_first_order
from .effective import background_stiffness, effective, normalized_emt
from .elastic import LameMaterial, Loading, constants
from .emt import closed_form_emt, emt_from_densities, farfield_ratio, farfield_residuals, pair_identities
from .geometry import PRESETS, ExteriorMap, random_map
from .oracle import emt_by_quadrature


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    bound: float | tuple
    details: dict = field(default_factory=dict)
    seconds: float = 0.0

    def line(self) -> str:
        b = self.bound
        bs = f"[{b[0]:.3g}, {b[1]:.3g}]" if isinstance(b, tuple) else f"<= {b:.3g}"
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} {bs} ({self.seconds:.2f}s)"

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": bool(self.passed), "value": float(self.value),
                "bound": list(self.bound) if isinstance(self.bound, tuple) else float(self.bound),
                "seconds": self.seconds, "details": self.details}


def _timed(fn):
    def wrapper(*args, **kwargs):
        t0 = time.perf_counter()
        c = fn(*args, **kwargs)
        c.seconds = time.perf_counter() - t0
        return c

    wrapper.__name__ = fn.__name__
    wrapper.__doc__ = fn.__doc__
    return wrapper


def random_material(rng: np.random.Generator, convention: str = "plane_strain") -> LameMaterial:
    mu = rng.uniform(0.3, 3.0)
    lam = rng.uniform(-0.9 * mu, 3.0 * mu)
    return LameMaterial(lam, mu, convention)


def _rel_max(a, b) -> float:
    return float(np.max(np.abs(a - b)) / max(np.max(np.abs(b)), 1e-300))


PRESET_MATERIALS = (constants(1.0, 1.0), constants(0.0, 1.0), constants(2.5, 0.7))


@dataclass
class RandomSet:
    """Shapes and materials of the randomized closed-form comparison, with their EMTs."""

    items: list  # (N, phi, mat, emt, densities)


def build_random_set(seed: int = 0, n_shapes: int = 20, n_materials: int = 5,
                     degrees=(1, 2, 3), convention: str = "plane_strain") -> RandomSet:
    rng = np.random.default_rng(seed)
    items = []
    for N in degrees:
        for _ in range(n_shapes):
            phi = random_map(rng, N)
            for _ in range(n_materials):
                mat = random_material(rng, convention)
                dens = canonical_densities(phi, mat, check=True)
                emt = emt_from_densities(dens, phi, mat, check=False)
                items.append((N, phi, mat, emt, dens))
    return RandomSet(items)


@_timed
def check_closed_forms(rs: RandomSet, tol: float = 1e-10) -> Check:
    worst = 0.0
    where = None
    for N, phi, mat, emt, _ in rs.items:
        cf = closed_form_emt(phi, mat, N)
        e = _rel_max(emt.m, cf.m)
        if e > worst:
            worst, where = e, {"N": N, "gamma": phi.gamma}
    return Check("closed-form equivalence", worst <= tol, worst, tol, {"cases": len(rs.items), "worst": where})


@_timed
def check_symmetry(emts, tol: float = 1e-12) -> Check:
    worst = max(t.asymmetry() / max(t.norm(), 1e-300) for t in emts)
    return Check("tensor symmetry", worst <= tol, worst, tol, {"tensors": len(emts)})


@_timed
def check_identities(rs: RandomSet, tol: float = 1e-10) -> Check:
    worst = 0.0
    name = ""
    for _, _, mat, emt, _ in rs.items:
        for k, v in pair_identities(emt.pairs, mat).items():
            if v > worst:
                worst, name = v, k
    return Check("E-pair identities", worst <= tol, worst, tol, {"worst_identity": name})


@_timed
def check_translation(seed: int = 0, tol: float = 1e-12, trials: int = 20) -> Check:
    rng = np.random.default_rng(seed + 1)
    worst = 0.0
    for i in range(trials):
        phi = random_map(rng, 1 + i % 3)
        mat = random_material(rng)
        base = emt_from_densities(canonical_densities(phi, mat, check=False), phi, mat, check=False).m
        c = complex(rng.normal(), rng.normal()) * 10 ** rng.uniform(-1, 1)
        sh = phi.translated(c)
        moved = emt_from_densities(canonical_densities(sh, mat, check=False), sh, mat, check=False).m
        worst = max(worst, _rel_max(moved, base))
    return Check("translation invariance", worst <= tol, worst, tol, {"trials": trials})


@_timed
def check_farfield(phi: ExteriorMap, mat: LameMaterial, window=(0.20, 0.32), label: str = "ellipse",
                   variant: str = "corrected") -> Check:
    """Remainder decay ratio between ``|w| = 10`` and ``|w| = 20`` must lie in ``window``."""
    ratios = {}
    for t in ("U1", "U2", "U3"):
        dc = solve_first_order(phi, mat, Loading.canonical(t))
        ratios[t] = farfield_ratio(dc, variant=variant)
    inside = [window[0] <= r <= window[1] for r in ratios.values()]
    dist = [0.0 if ok else min(abs(r - window[0]), abs(r - window[1])) for ok, r in zip(inside, ratios.values())]
    worst = list(ratios.values())[int(np.argmax(dist))]
    return Check(f"far-field decay window ({label})", all(inside), worst, tuple(window),
                 {"ratios": ratios, "variant": variant})


@_timed
def check_farfield_order(mat: LameMaterial, bound: float = 0.32, floor: float = 1e-13) -> Check:
    """The remainder after the leading terms decays at least like ``|w|^-2`` on every preset.

    Remainders already at rounding level (``floor`` relative to the leading
    term) count as decayed.
    """
    worst = 0.0
    table = {}
    for name, phi in PRESETS.items():
        for t in ("U1", "U2", "U3"):
            dc = solve_first_order(phi, mat, Loading.canonical(t))
            r0, r1 = farfield_residuals(dc)
            lead = max(float(np.max(np.abs(2 * single_layer_exterior(dc, 10.0 * np.exp(0.7j))))), 1e-300)
            ratio = 0.0 if r0 <= floor * lead else r1 / r0
            table[f"{name}/{t}"] = ratio
            worst = max(worst, ratio)
    return Check("far-field remainder order", worst <= bound, worst, bound, {"ratios": table})


def _emt(phi, mat):
    return emt_from_densities(canonical_densities(phi, mat, check=False), phi, mat, check=False)


@_timed
def check_scaling_rotation(tol: float = 1e-10, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed + 2)
    shapes = list(PRESETS.values()) + [random_map(rng, N) for N in (1, 2, 3)]
    worst_s = 0.0
    worst_r = 0.0
    for phi in shapes:
        mat = random_material(rng)
        base = _emt(phi, mat)
        for t in (0.5, 2.0):
            worst_s = max(worst_s, _rel_max(_emt(phi.scaled(t), mat).m, t * t * base.m))
        M0 = base.mandel
        tr0, det0 = np.trace(M0), np.linalg.det(M0)
        for ang in (math.pi / 6, math.pi / 4, math.pi / 2):
            M1 = _emt(phi.rotated(ang), mat).mandel
            worst_r = max(worst_r, abs(np.trace(M1) - tr0) / abs(tr0),
                          abs(np.linalg.det(M1) - det0) / max(abs(det0), 1e-300))
    worst = max(worst_s, worst_r)
    return Check("scaling and rotation covariance", worst <= tol, worst, tol,
                 {"scaling": worst_s, "rotation": worst_r})


@_timed
def check_spot_values(tol: float = 1e-10) -> Check:
    mat = constants(1.0, 1.0)
    d = _emt(PRESETS["disk"], mat)
    e = _emt(PRESETS["ellipse"], mat)
    pi = math.pi
    targets = [
        ("disk m1212", d.entry(1, 2, 1, 2), 1.5 * pi),
        ("disk m1111", d.entry(1, 1, 1, 1), 4.5 * pi),
        ("disk m1122", d.entry(1, 1, 2, 2), 1.5 * pi),
        ("disk m1211", d.entry(1, 2, 1, 1), 0.0),
        ("ellipse m1212", e.entry(1, 2, 1, 2), pi),
    ]
    errs = {n: abs(v - x) / max(abs(x), 1.0) for n, v, x in targets}
    worst = max(errs.values())
    return Check("disk and ellipse spot values", worst <= tol, worst, tol, {"errors": errs})


@_timed
def check_effective(tol: float = 1e-6) -> Check:
    mat = constants(1.0, 1.0)
    emt = _emt(PRESETS["egg"], mat)
    C = background_stiffness(mat)
    Mn = normalized_emt(emt)
    zero_ok = bool(np.array_equal(effective(mat, emt, 0.0).c_star, C))
    eps = np.finfo(float).eps
    lin = 0.0
    for f in (0.01, 0.05, 0.1, 0.3):
        cs = effective(mat, emt, f).c_star
        lin = max(lin, float(np.max(np.abs((cs - C) - f * Mn) / (2 * eps * np.maximum(np.abs(cs), 1.0)))))
    f1, f2 = 1e-4, 2e-4
    slope = (effective(mat, emt, f2).c_star - effective(mat, emt, f1).c_star) / (f2 - f1)
    serr = _rel_max(slope, Mn)
    ok = zero_ok and lin <= 1.0 and serr <= tol
    return Check("effective tensor contract", ok, serr, tol,
                 {"f0_equals_background": zero_ok, "linear_defect_in_ulps": lin})


@_timed
def check_residuals(densities, tol: float = 1e-8) -> Check:
    worst = max(d.residual for d in densities)
    return Check("boundary residual", worst <= tol, worst, tol, {"densities": len(densities)})


@_timed
def check_oracle(tol: float = 1e-6, n_modes: int = 64, materials=PRESET_MATERIALS) -> Check:
    worst = 0.0
    table = {}
    for name, phi in PRESETS.items():
        for mat in materials:
            series = _emt(phi, mat).m
            orc, res = emt_by_quadrature(phi, mat, n_modes)
            e = _rel_max(orc, series)
            table[f"{name}/lambda={mat.lam:g},mu={mat.mu:g}"] = e
            worst = max(worst, e)
    return Check("oracle equivalence", worst <= tol, worst, tol, {"n_modes": n_modes, "errors": table})


@_timed
def check_backsub(rs: RandomSet, tol: float = 1e-12) -> Check:
    worst = 0.0
    for _, phi, mat, _, dens in rs.items[:: max(1, len(rs.items) // 30)]:
        for d in dens:
            alt = solve_first_order(phi, mat, d.loading, method="backsub", check=False)
            scale = max(abs(v) for v in d.c.values())
            worst = max(worst, max(abs(d.c[k] - alt.c[k]) for k in d.c) / scale)
    return Check("dense vs back-substitution", worst <= tol, worst, tol)


def run_suite(tol: float = 1e-10, seed: int = 0, quick: bool = False, convention: str = "plane_strain") -> list[Check]:
    """The full verification suite. ``quick`` shrinks the random set and the oracle size."""
    n_shapes = 5 if quick else 20
    rs = build_random_set(seed, n_shapes=n_shapes, n_materials=2 if quick else 5, convention=convention)
    all_dens = [d for *_, dens in rs.items for d in dens]
    emts = [it[3] for it in rs.items]
    for phi in PRESETS.values():
        for mat in PRESET_MATERIALS:
            dens = canonical_densities(phi, mat)
            all_dens.extend(dens)
            emts.append(emt_from_densities(dens, phi, mat, check=False))
    checks = [
        check_closed_forms(rs, tol),
        check_symmetry(emts, tol / 100),
        check_identities(rs, tol),
        check_translation(seed, tol / 100),
        check_farfield_order(constants(1.0, 1.0)),
        check_farfield(PRESETS["egg"], constants(1.0, 1.0), label="egg"),
        check_scaling_rotation(tol, seed),
        check_spot_values(tol),
        check_effective(tol * 1e4),
        check_residuals(all_dens, tol * 100),
        check_backsub(rs, tol / 100),
        check_oracle(tol * 1e4, n_modes=32 if quick else 64),
    ]
    return checks


def informational_checks() -> list[Check]:
    """Checks reported but excluded from the exit status.

    The ``[0.20, 0.32]`` window for the ellipse cannot be met: the ellipse is
    centrally symmetric, so its far-field remainder decays like ``|w|^-3``
    and the ratio is 1/8.
    """
    return [check_farfield(PRESETS["ellipse"], constants(1.0, 1.0))]
