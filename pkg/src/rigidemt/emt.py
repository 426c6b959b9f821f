"""First-order elastic moment tensors of rigid inclusions.

Everything is assembled from the two complex functionals of each canonical
density,

    E1 = integral of z phi d sigma,    E2 = integral of z conj(phi) d sigma,

which reduce to finite coefficient sums for polynomial maps.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .density import DensityCoefficients, canonical_densities
from .elastic import LameMaterial
from .geometry import ExteriorMap, area

log = logging.getLogger(__name__)

TOL = 1e-10
_m1122_warned = False
SQ2 = math.sqrt(2.0)


class InconsistencyError(RuntimeError):
    """An internal identity that must hold for a correct solve was violated."""


@dataclass(frozen=True)
class EPair:
    e1: complex
    e2: complex
    index: int = 0

    def to_dict(self) -> dict:
        return {"e1": [self.e1.real, self.e1.imag], "e2": [self.e2.real, self.e2.imag]}


def _rel(x, scale) -> float:
    return abs(x) / max(scale, 1e-300)


def e_pairs(dc: DensityCoefficients, phi: ExteriorMap | None = None, check: bool = True,
            tol: float = TOL, index: int = 0) -> EPair:
    """``(E1, E2)`` from the coefficient sums, cross-checked by trapezoid quadrature."""
    phi = dc.phi if phi is None else phi
    g = phi.gamma
    c = dc.c
    e1 = 2 * math.pi * (g * c.get(-1, 0j) + sum(phi.a[m] * c.get(m, 0j) * g ** (-m) for m in range(1, phi.degree + 1)))
    e2 = 2 * math.pi * (g * c.get(1, 0j).conjugate()
                        + sum(phi.a[m] * c.get(-m, 0j).conjugate() * g ** (-m) for m in range(1, phi.degree + 1)))
    if check:
        q1, q2 = e_pairs_quadrature(dc, phi)
        scale = max(abs(e1), abs(e2), abs(q1), abs(q2), 1e-300)
        if _rel(e1 - q1, scale) > tol or _rel(e2 - q2, scale) > tol:
            raise InconsistencyError(
                f"E-pair coefficient sums disagree with quadrature: {e1}, {e2} vs {q1}, {q2}"
            )
    return EPair(complex(e1), complex(e2), index)


def e_pairs_quadrature(dc: DensityCoefficients, phi: ExteriorMap | None = None, n: int | None = None):
    """``(E1, E2)`` by the trapezoid rule in ``theta`` (exact for trigonometric polynomials)."""
    phi = dc.phi if phi is None else phi
    if n is None:
        lo, arr = dc.trig()
        n = 4 * (phi.degree + arr.size + abs(lo) + 4)
    theta = 2 * np.pi * np.arange(n) / n
    z = phi(phi.gamma * np.exp(1j * theta))
    psi = dc.psi(theta)
    w = 2 * np.pi / n
    return complex(w * np.sum(z * psi)), complex(w * np.sum(z * np.conj(psi)))


@dataclass
class EmtTensor:
    """First-order EMT ``m[i][j][k][l] = m^{ij}_{kl}`` (0-based indices)."""

    m: np.ndarray
    area: float = float("nan")
    pairs: tuple = ()
    diagnostics: dict = field(default_factory=dict)

    @property
    def mandel(self) -> np.ndarray:
        return to_mandel(self.m)

    @property
    def voigt(self) -> np.ndarray:
        """Plain Voigt view: rows/cols ``(11, 22, 12)`` with no shear weights."""
        m = self.m
        idx = [(0, 0), (1, 1), (0, 1)]
        return np.array([[m[a][b][c][d] for (c, d) in idx] for (a, b) in idx])

    def entry(self, i: int, j: int, k: int, l: int) -> float:  # noqa: E741
        """1-based accessor ``m^{ij}_{kl}``."""
        return float(self.m[i - 1, j - 1, k - 1, l - 1])

    def asymmetry(self) -> float:
        m = self.m
        return float(max(
            np.max(np.abs(m - m.transpose(1, 0, 2, 3))),
            np.max(np.abs(m - m.transpose(0, 1, 3, 2))),
            np.max(np.abs(m - m.transpose(2, 3, 0, 1))),
        ))

    def norm(self) -> float:
        return float(np.linalg.norm(self.m))


def to_mandel(m: np.ndarray) -> np.ndarray:
    idx = [(0, 0), (1, 1), (0, 1)]
    w = [1.0, 1.0, SQ2]
    return np.array([[w[p] * w[q] * m[a][b][c][d] for q, (c, d) in enumerate(idx)]
                     for p, (a, b) in enumerate(idx)])


def from_mandel(M: np.ndarray) -> np.ndarray:
    idx = [(0, 0), (1, 1), (0, 1)]
    w = [1.0, 1.0, SQ2]
    m = np.zeros((2, 2, 2, 2))
    for p, (a, b) in enumerate(idx):
        for q, (c, d) in enumerate(idx):
            v = M[p][q] / (w[p] * w[q])
            for (i, j) in {(a, b), (b, a)}:
                for (k, l) in {(c, d), (d, c)}:  # noqa: E741
                    m[i, j, k, l] = v
    return m


def assemble(pairs, mat: LameMaterial) -> np.ndarray:
    """The sixteen entries from the three E-pairs of the canonical loadings."""
    (E11, E21), (E12, E22), (E13, E23) = [(p.e1, p.e2) for p in pairs]
    mu, k = mat.mu, mat.kappa
    a = mu / (2 * (k - 1))
    b = mu / 2
    E21r, E22r, E23r = E21.real, E22.real, E23.real
    m = np.zeros((2, 2, 2, 2))
    m[0, 0, 0, 0] = a * (E11.real + E21r) - b * (E12.real + E22r)
    m[1, 1, 1, 1] = a * (-E11.real + E21r) + b * (-E12.real + E22r)
    s = b * E13.imag
    m[0, 1, 0, 1] = m[1, 0, 0, 1] = m[0, 1, 1, 0] = m[1, 0, 1, 0] = s
    m[0, 0, 1, 1] = a * (-E11.real + E21r) + b * (E12.real - E22r)
    m[1, 1, 0, 0] = a * (E11.real + E21r) + b * (E12.real + E22r)
    m[0, 0, 0, 1] = m[0, 0, 1, 0] = a * E11.imag - b * E12.imag
    m[0, 1, 0, 0] = m[1, 0, 0, 0] = b * (E13.real + E23r)
    m[1, 1, 0, 1] = m[1, 1, 1, 0] = a * E11.imag + b * E12.imag
    m[0, 1, 1, 1] = m[1, 0, 1, 1] = b * (-E13.real + E23r)
    return m


def statement_m1122(pairs, mat: LameMaterial) -> float:
    """The alternative short form ``mu/(2(kappa-1)) Re E21 - mu/2 Re E12`` of ``m^{11}_{22}``.

    It is reported as a diagnostic next to the assembled value; the two do
    not coincide in general (for the unit disk with ``lambda = mu = 1`` this
    form gives ``9 pi / 2`` against ``3 pi / 2``).
    """
    (E11, E21), (E12, E22), _ = [(p.e1, p.e2) for p in pairs]
    return mat.mu / (2 * (mat.kappa - 1)) * E21.real - mat.mu / 2 * E12.real


def pair_identities(pairs, mat: LameMaterial) -> dict:
    """Relative defects of the identities tying the E-pairs together."""
    (E11, E21), (E12, E22), (E13, E23) = [(p.e1, p.e2) for p in pairs]
    k = mat.kappa
    scale = max(abs(E11), abs(E21), abs(E12), abs(E22), abs(E13), abs(E23))
    return {
        "im_e2_1": _rel(E21.imag, scale),
        "im_e2_2": _rel(E22.imag, scale),
        "im_e2_3": _rel(E23.imag, scale),
        "re_e11_vs_e22": _rel(E11.real + (k - 1) * E22.real, scale),
        "re_e13_vs_im_e12": _rel(E13.real + E12.imag, scale),
        "im_e11_vs_e23": _rel(E11.imag - (k - 1) * E23.real, scale),
    }


def emt_from_densities(densities, phi: ExteriorMap, mat: LameMaterial, check: bool = True,
                       tol: float = TOL) -> EmtTensor:
    pairs = tuple(e_pairs(d, phi, check=check, tol=tol, index=i + 1) for i, d in enumerate(densities))
    m = assemble(pairs, mat)
    ids = pair_identities(pairs, mat)
    diag = {
        "identities": ids,
        "asymmetry": 0.0,
        "statement_m1122": statement_m1122(pairs, mat),
        "residuals": [d.residual for d in densities],
    }
    t = EmtTensor(m, area(phi), pairs, diag)
    diag["asymmetry"] = t.asymmetry() / max(t.norm(), 1e-300)
    diag["statement_m1122_defect"] = abs(diag["statement_m1122"] - m[0, 0, 1, 1]) / max(t.norm(), 1e-300)
    if diag["statement_m1122_defect"] > tol:
        global _m1122_warned
        level = logging.DEBUG if _m1122_warned else logging.WARNING
        _m1122_warned = True
        log.log(level, "short form of m1122 gives %.17g, the entry list gives %.17g (relative defect %.3e); "
                    "the entry-list value is used", diag["statement_m1122"], m[0, 0, 1, 1],
                    diag["statement_m1122_defect"])
    if check:
        bad = {k: v for k, v in ids.items() if v > tol}
        if bad:
            raise InconsistencyError(f"E-pair identities violated: {bad}")
    return t


def emt_first_order(phi: ExteriorMap, mat: LameMaterial, check: bool = True, tol: float = TOL,
                    method: str = "dense") -> EmtTensor:
    """First-order EMT of the rigid inclusion bounded by ``phi``.

    With ``check`` the E-pair quadrature cross-check and the pair identities
    are enforced (``InconsistencyError`` on failure).
    """
    dens = canonical_densities(phi, mat, method=method, check=check)
    return emt_from_densities(dens, phi, mat, check=check, tol=tol)


# ----- closed forms for low-degree maps -----------------------------------------

def _closed_n12(phi: ExteriorMap, mat: LameMaterial) -> np.ndarray:
    """Closed form for maps ``w + a1/w + a2/w^2`` (``a2 = 0`` gives the one-term family)."""
    g = phi.gamma
    a1, a2 = phi.coeff(1), phi.coeff(2)
    al, be, k = mat.alpha, mat.beta, mat.kappa
    pi = math.pi
    den = al * g ** 6 + be * g ** 2 * abs(a1) ** 2 + 2 * be * abs(a2) ** 2
    num = al * g ** 6 - be * g ** 2 * abs(a1) ** 2 - 2 * be * abs(a2) ** 2
    t = pi / (k - 1) * num / (al * be * g ** 4)
    s = pi / al * (al + be) * g ** 4 / den
    m = np.zeros((2, 2, 2, 2))
    m1111 = 2 * pi / al * a1.real + pi * g ** 2 / al + t - s * a1.imag ** 2
    m2222 = -2 * pi / al * a1.real + pi * g ** 2 / al + t - s * a1.imag ** 2
    m1122 = t - pi * g ** 2 / al + s * a1.imag ** 2
    m1212 = pi * g ** 2 / al - s * a1.real ** 2
    m1211 = pi / al * a1.imag * (1 + (al + be) * g ** 4 * a1.real / den)
    m2122 = pi / al * a1.imag * (1 - (al + be) * g ** 4 * a1.real / den)
    m[0, 0, 0, 0] = m1111
    m[1, 1, 1, 1] = m2222
    m[0, 0, 1, 1] = m[1, 1, 0, 0] = m1122
    m[0, 1, 0, 1] = m[1, 0, 0, 1] = m[0, 1, 1, 0] = m[1, 0, 1, 0] = m1212
    for (i, j, kk, l) in [(0, 1, 0, 0), (1, 0, 0, 0), (0, 0, 0, 1), (0, 0, 1, 0)]:
        m[i, j, kk, l] = m1211
    for (i, j, kk, l) in [(1, 0, 1, 1), (0, 1, 1, 1), (1, 1, 0, 1), (1, 1, 1, 0)]:
        m[i, j, kk, l] = m2122
    return m


def _n3_pairs_corrected(phi: ExteriorMap, mat: LameMaterial):
    """E-pairs of the three-term family by explicit elimination.

    The two highest tail coefficients are proportional to ``conj(c1)``; the
    remaining one follows from a 2x2 real-linear solve written in closed
    form, and ``Im c1`` from the rotation constraint, which is linear in it.
    """
    g = phi.gamma
    a1, a2, a3 = phi.coeff(1), phi.coeff(2), phi.coeff(3)
    al, be, mu = mat.alpha, mat.beta, mat.mu
    pairs = []
    for i, (A, B) in enumerate([(1.0, 0j), (0.0, 1 + 0j), (0.0, 1j)]):
        x = g * A / (be * mu)
        k0 = al * g ** 9 / (mu * (al ** 2 * g ** 8 - be ** 2 * abs(a3) ** 2))
        u = a1.conjugate() / g ** 3 + a1 * a3.conjugate() / g ** 7

        def tail(c1):
            R = -B - mu * be * c1 * u
            cm1 = k0 * (R.conjugate() - be / (al * g ** 4) * a3 * R)
            cm2 = -2 * be / al * c1.conjugate() * a2 / g ** 3
            cm3 = -3 * be / al * c1.conjugate() * a3 / g ** 4
            return cm1, cm2, cm3

        def rot(c1):
            cm1, cm2, cm3 = tail(c1)
            return (g * c1 + a1.conjugate() / g * cm1 + a2.conjugate() / g ** 2 * cm2
                    + a3.conjugate() / g ** 3 * cm3).imag

        r0 = rot(complex(x, 0.0))
        y = -r0 / (rot(complex(x, 1.0)) - r0)
        c1 = complex(x, y)
        cm1, cm2, cm3 = tail(c1)
        e1 = 2 * math.pi * (g * cm1 + a1 * c1 / g)
        e2 = 2 * math.pi * (g * c1.conjugate() + a1 * cm1.conjugate() / g + a2 * cm2.conjugate() / g ** 2
                            + a3 * cm3.conjugate() / g ** 3)
        pairs.append(EPair(e1, e2, i + 1))
    return tuple(pairs)


def _n3_pairs_printed(phi: ExteriorMap, mat: LameMaterial):
    """The helper expressions for the three-term family evaluated literally.

    The internal ``c1`` of the second helper is taken as
    ``gamma/(beta mu) Re(A) + i Bhelper(B)``. Kept for comparison only; it
    does not reproduce the solved EMT.
    """
    g = phi.gamma
    a1, a2, a3 = phi.coeff(1), phi.coeff(2), phi.coeff(3)
    al, be, mu = mat.alpha, mat.beta, mat.mu
    den = al ** 2 * g ** 4 * mu - be ** 2 * mu * abs(a3) ** 2
    lead = al * g ** 4 / den
    P = g + 2 * be * abs(a2) ** 2 / (al * g ** 5) + 3 * be * abs(a3) ** 2 / (al * g ** 7)

    def Bh(B):
        B = complex(B)
        num = (-(B * a1 - be / al * B.conjugate() * a1 * a3.conjugate()).imag + a3.imag / g ** 6
               + be / (al * g ** 2) * (a1 ** 2 * a3.conjugate()).imag + be / (al * g ** 6) * (a1 ** 2).imag * abs(a3) ** 2)
        dd = P + lead * (be * mu * abs(a1) ** 2 / g ** 3 * (1 + a3.real / g ** 4)
                         + be ** 2 * mu / (al * g ** 3) * ((a1 ** 2 * a3.conjugate()).real + (a1 ** 2).real * abs(a3) ** 2))
        return lead * num / dd

    def Ch(B, c1):
        B = complex(B)
        return al * g ** 5 / den * (
            -B.conjugate() - be * mu / g ** 3 * c1.conjugate() * a1 - be * mu / g ** 7 * c1.conjugate() * a1 * a3
            + be / al * a3 * (B + be * mu / g ** 3 * c1 * a1.conjugate() + be * mu / g ** 7 * c1 * a1.conjugate() * a3.conjugate())
        )

    out = []
    for i, (A, B) in enumerate([(1.0, 0j), (0.0, 1 + 0j), (0.0, 1j)]):
        b = Bh(B)
        c1 = complex(g * A / (be * mu), b)
        C = Ch(B, c1)
        if i == 0:
            e1 = 2 * math.pi * (a1 / (be * mu) + 1j * a1 / g * b + g * C)
            e2 = 2 * math.pi * ((g ** 2 / (be * mu) - 2 * be / (al * g ** 5) * abs(a2) ** 2
                                 - 3 * be / (al * g ** 7) * abs(a3) ** 2) - P * 1j * b + a1 / g * C.conjugate())
        else:
            e1 = 2 * math.pi * (1j * a1 / g * b + g * C)
            e2 = 2 * math.pi * (-P * 1j * b + a1 / g * C.conjugate())
        out.append(EPair(complex(e1), complex(e2), i + 1))
    return tuple(out)


def closed_form_emt(phi: ExteriorMap, mat: LameMaterial, N: int | None = None,
                    variant: str = "corrected") -> EmtTensor:
    """EMT from explicit formulas for maps of degree ``N <= 3`` (centered internally).

    For ``N <= 2`` the entries are explicit rational expressions in
    ``gamma, a1, a2``. For ``N = 3`` the E-pairs are produced by explicit
    elimination (``variant="corrected"``) or by the literal helper expressions
    (``variant="printed"``, diagnostic only), then assembled.
    """
    deg = phi.degree
    if N is None:
        N = max(deg, 1)
    if N not in (1, 2, 3):
        raise ValueError("closed forms exist for N in {1, 2, 3}")
    if deg > N:
        raise ValueError(f"map has degree {deg}, closed form requested for N = {N}")
    phi = phi.centered()
    if N <= 2:
        return EmtTensor(_closed_n12(phi, mat), area(phi))
    if variant == "corrected":
        pairs = _n3_pairs_corrected(phi, mat)
    elif variant == "printed":
        pairs = _n3_pairs_printed(phi, mat)
    else:
        raise ValueError(f"unknown variant {variant!r}")
    return EmtTensor(assemble(pairs, mat), area(phi), pairs)


# ----- far field ------------------------------------------------------------------

def farfield_leading(pair: EPair, mat: LameMaterial, w, variant: str = "corrected"):
    """Leading ``O(1/|w|)`` part of ``2 S[phi]`` expressed through ``(E1, E2)``.

    ``corrected``: ``-(a/2pi) E1/w - ((a-b)/2pi) conj(E2/w) - (b/2pi) conj(E1) w / conj(w)^2``;
    ``printed``: ``-(a/2pi) E1/w - (a/2pi) conj(E2/w) + (b/2pi) conj(E1) w / conj(w)^2``.
    """
    w = np.asarray(w, dtype=np.complex128)
    al, be = mat.alpha, mat.beta
    e1, e2 = pair.e1, pair.e2
    c = 1.0 / (2 * math.pi)
    if variant == "corrected":
        return (-al * c * e1 / w - (al - be) * c * np.conj(e2 / w)
                - be * c * np.conj(e1) * w / np.conj(w) ** 2)
    if variant == "printed":
        return -al * c * e1 / w - al * c * np.conj(e2 / w) + be * c * np.conj(e1) * w / np.conj(w) ** 2
    raise ValueError(f"unknown variant {variant!r}")


def farfield_residuals(dc: DensityCoefficients, radii=(10.0, 20.0), angle: float = 0.7,
                       variant: str = "corrected", samples: int = 64) -> list[float]:
    """``max |2 S[phi] - leading|`` over ``samples`` directions on each circle ``|w| = R``.

    The directions are offset by ``angle`` to avoid accidental zeros.
    """
    from .density import single_layer_exterior

    pair = e_pairs(dc, check=False)
    th = angle + 2 * np.pi * np.arange(samples) / samples
    out = []
    for R in radii:
        w = R * np.exp(1j * th)
        r = 2 * single_layer_exterior(dc, w) - farfield_leading(pair, dc.mat, w, variant)
        out.append(float(np.max(np.abs(r))))
    return out


def farfield_ratio(dc: DensityCoefficients, radii=(10.0, 20.0), angle: float = 0.7,
                   variant: str = "corrected", samples: int = 64) -> float:
    """Decay ratio of the far-field remainder between ``|w| = radii[0]`` and ``radii[1]``.

    About 1/4 when the remainder is ``O(|w|^-2)``; about 1/8 for centrally
    symmetric shapes, whose ``|w|^-2`` terms cancel.
    """
    r0, r1 = farfield_residuals(dc, radii, angle, variant, samples)
    return r1 / r0
