"""Dilute effective stiffness of a periodic array of rigid inclusions.

Tensors are 3x3 Mandel matrices in the basis ``(e11, e22, sqrt(2) e12)``.
The EMT enters per unit inclusion area: ``C* = C + f Mn (I - f S Mn)^{-1}``
with ``Mn = M / |D|``, so ``f Mn = M / cell_area``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .elastic import LameMaterial
from .emt import EmtTensor
from .geometry import ExteriorMap, area

SYM_TOL = 1e-10


class BeyondDiluteError(ArithmeticError):
    """``I - f S M`` is singular: the fraction is outside the dilute regime."""


class GeometryError(ValueError):
    """The inclusion does not fit in the unit cell."""


def background_stiffness(mat: LameMaterial) -> np.ndarray:
    lam, mu = mat.lam, mat.mu
    return np.array([
        [lam + 2 * mu, lam, 0.0],
        [lam, lam + 2 * mu, 0.0],
        [0.0, 0.0, 2 * mu],
    ])


def volume_fraction(phi: ExteriorMap, cell_area: float = 1.0) -> float:
    A = area(phi)
    if not cell_area > A:
        raise GeometryError(f"inclusion area {A:.6g} does not fit in a cell of area {cell_area:.6g}")
    return A / cell_area


def normalized_emt(emt: EmtTensor) -> np.ndarray:
    """Mandel EMT divided by the inclusion area."""
    return emt.mandel / emt.area


_J = np.array([[1.0, 1.0, 0.0], [1.0, 1.0, 0.0], [0.0, 0.0, 0.0]])
_I = np.eye(3)


def nearest_isotropic(C: np.ndarray):
    """Least-squares fit ``lambda J + 2 mu I`` to ``C``; returns ``(lam, mu, relative deviation)``."""
    basis = np.stack([_J.ravel(), 2 * _I.ravel()], axis=1)
    (lam, mu), *_ = np.linalg.lstsq(basis, np.asarray(C).ravel(), rcond=None)
    iso = lam * _J + 2 * mu * _I
    dev = float(np.linalg.norm(C - iso) / max(np.linalg.norm(C), 1e-300))
    return float(lam), float(mu), dev


@dataclass
class EffectiveTensor:
    c_background: np.ndarray
    f: float
    c_star: np.ndarray
    s_matrix: np.ndarray | None = None
    diagnostics: dict = field(default_factory=dict)


def effective(mat: LameMaterial, emt: EmtTensor, f: float, s: np.ndarray | None = None) -> EffectiveTensor:
    """``C* = C + f Mn (I - f S Mn)^{-1}``; ``S`` defaults to zero.

    Raises :class:`BeyondDiluteError` when ``I - f S Mn`` is singular. The
    asymmetry of ``C*`` is measured and reported, not corrected.
    """
    if not 0.0 <= f < 1.0:
        raise ValueError(f"volume fraction must lie in [0, 1), got {f!r}")
    C = background_stiffness(mat)
    Mn = normalized_emt(emt)
    if s is None:
        cs = C + f * Mn
    else:
        s = np.asarray(s, dtype=float)
        if s.shape != (3, 3):
            raise ValueError("S must be a 3x3 matrix")
        fsm = f * s @ Mn
        K = np.eye(3) - fsm
        sv = np.linalg.svd(K, compute_uv=False)
        if sv[-1] <= 1e-12 * (1.0 + np.linalg.norm(fsm, 2)):
            raise BeyondDiluteError(f"I - f S M is singular at f = {f:g}")
        cs = C + f * Mn @ np.linalg.inv(K)
    asym = float(np.max(np.abs(cs - cs.T)) / max(np.max(np.abs(cs)), 1e-300))
    lam, mu, dev = nearest_isotropic(cs)
    diag = {"asymmetry": asym, "symmetric": asym <= SYM_TOL,
            "isotropic_lambda": lam, "isotropic_mu": mu, "isotropy_deviation": dev}
    return EffectiveTensor(C, f, cs, s, diag)


def parse_fractions(text: str) -> list[float]:
    """``START:STOP:STEP`` (inclusive of STOP up to rounding) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError("fractions must be START:STOP:STEP")
        start, stop, step = (float(p) for p in parts)
        if step <= 0:
            raise ValueError("STEP must be positive")
        n = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 15) for i in range(max(n, 0))]
    return [float(p) for p in text.split(",") if p.strip()]


def sweep(mat: LameMaterial, emt: EmtTensor, fractions, s: np.ndarray | None = None) -> list[dict]:
    """One row per fraction; rows where ``I - f S M`` is singular are flagged, not dropped."""
    rows = []
    for f in fractions:
        try:
            et = effective(mat, emt, f, s)
        except BeyondDiluteError as exc:
            rows.append({"f": f, "ok": False, "note": str(exc)})
            continue
        c = et.c_star
        rows.append({
            "f": f, "ok": True,
            "C11": c[0, 0], "C12": c[0, 1], "C13": c[0, 2],
            "C22": c[1, 1], "C23": c[1, 2], "C33": c[2, 2],
            "isotropy_deviation": et.diagnostics["isotropy_deviation"],
            "asymmetry": et.diagnostics["asymmetry"],
            "note": "",
        })
    return rows
