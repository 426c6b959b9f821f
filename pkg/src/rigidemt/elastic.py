"""Lamé materials, rigid motions and uniform background loadings."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np


class MaterialError(ValueError):
    """Inadmissible Lamé parameters or malformed material input."""


@dataclass(frozen=True)
class LameMaterial:
    """Isotropic plane material.

    ``alpha`` and ``beta`` are the Kelvin-matrix constants,
    ``kappa`` the Kolosov constant (plane strain unless stated otherwise).
    """

    lam: float
    mu: float
    convention: str = "plane_strain"
    tilde_lam: float | None = None
    tilde_mu: float | None = None

    def __post_init__(self):
        if not (math.isfinite(self.lam) and math.isfinite(self.mu)):
            raise MaterialError("Lamé parameters must be finite")
        if self.mu <= 0 or self.lam + self.mu <= 0:
            raise MaterialError(
                f"inadmissible Lamé parameters lambda={self.lam!r}, mu={self.mu!r}: "
                "need mu > 0 and lambda + mu > 0"
            )
        if self.convention not in ("plane_strain", "plane_stress"):
            raise MaterialError(f"unknown kappa convention {self.convention!r}")

    @property
    def alpha(self) -> float:
        return 0.5 * (1.0 / self.mu + 1.0 / (2.0 * self.mu + self.lam))

    @property
    def beta(self) -> float:
        return 0.5 * (1.0 / self.mu - 1.0 / (2.0 * self.mu + self.lam))

    @property
    def nu(self) -> float:
        """Poisson ratio ``lambda / (2 (lambda + mu))``."""
        return self.lam / (2.0 * (self.lam + self.mu))

    @property
    def kappa(self) -> float:
        if self.convention == "plane_stress":
            nu = self.nu
            return (3.0 - nu) / (1.0 + nu)
        return (self.lam + 3.0 * self.mu) / (self.lam + self.mu)

    def to_dict(self) -> dict:
        return {"lambda": self.lam, "mu": self.mu, "kappa_convention": self.convention}


def constants(lam: float, mu: float, convention: str = "plane_strain") -> LameMaterial:
    return LameMaterial(float(lam), float(mu), convention)


def material_from_dict(obj) -> LameMaterial:
    if not isinstance(obj, dict):
        raise MaterialError("$: top level must be an object")
    vals = {}
    for key in ("lambda", "mu"):
        if key not in obj:
            raise MaterialError(f"{key}: missing required field")
        v = obj[key]
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            raise MaterialError(f"{key}: must be a number, got {v!r}")
        vals[key] = float(v)
    conv = obj.get("kappa_convention", "plane_strain")
    # the transmission constants are accepted for forward compatibility only
    tl = obj.get("lambda_tilde")
    tm = obj.get("mu_tilde")
    return LameMaterial(vals["lambda"], vals["mu"], conv,
                        None if tl is None else float(tl), None if tm is None else float(tm))


def load_material(path) -> LameMaterial:
    try:
        with open(path) as fh:
            obj = json.load(fh)
    except OSError as exc:
        raise MaterialError(f"{path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise MaterialError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    return material_from_dict(obj)


@dataclass(frozen=True)
class Loading:
    """Uniform background field ``2 mu H = (kappa A - conj A) F_1 - a0 conj(A) - conj(B F_1)``.

    ``tag`` is one of ``U1``, ``U2``, ``U3`` or ``General``.
    """

    tag: str = "General"
    A: complex = 0j
    B: complex = 0j

    @classmethod
    def canonical(cls, tag: str) -> "Loading":
        A, B = canonical_loading_params(tag)
        return cls(tag, A, B)


CANONICAL = ("U1", "U2", "U3")


def canonical_loading_params(tag: str) -> tuple[complex, complex]:
    table = {"U1": (1 + 0j, 0j), "U2": (0j, 1 + 0j), "U3": (0j, 1j)}
    try:
        return table[tag]
    except KeyError:
        raise ValueError(f"unknown canonical loading {tag!r}") from None


def background_field(loading: Loading, mat: LameMaterial, z, a0: complex = 0j):
    """Complex displacement ``H = H1 + i H2`` of the loading at ``z``.

    ``F_1(z) = z - a0``; the constant ``-a0 conj(A)`` term is part of the
    parametrization, so the field depends on the map only through ``a0``.
    """
    z = np.asarray(z, dtype=np.complex128)
    A, B = complex(loading.A), complex(loading.B)
    F1 = z - a0
    k = mat.kappa
    return ((k * A - A.conjugate()) * F1 - a0 * A.conjugate() - np.conj(B * F1)) / (2.0 * mat.mu)


def linear_field(i: int, j: int):
    """Real linear field ``H(x) = x_i e_j`` (``i, j`` in ``{1, 2}``) as a complex function."""
    unit = 1.0 if j == 1 else 1j

    def H(z):
        z = np.asarray(z, dtype=np.complex128)
        x = z.real if i == 1 else z.imag
        return x * unit

    return H


def rigid_motions():
    """Complex evaluators of ``R1 = (1, 0)``, ``R2 = (0, 1)``, ``R3 = (x2, -x1)``."""

    def R1(z):
        return np.ones_like(np.asarray(z, dtype=np.complex128))

    def R2(z):
        return 1j * np.ones_like(np.asarray(z, dtype=np.complex128))

    def R3(z):
        return -1j * np.asarray(z, dtype=np.complex128)

    return R1, R2, R3


def rigid_motion_vector(z, which: int):
    """Vector form ``(u1, u2)`` of ``R_which`` at the points ``z``."""
    u = rigid_motions()[which - 1](z)
    return np.stack([u.real, u.imag], axis=-1)
