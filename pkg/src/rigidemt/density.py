"""Layer densities of a rigid inclusion under uniform loading, and the exterior single layer.

The density is stored through its coefficients ``c_m`` in the basis
``e^{i m theta} / h``; the product ``Psi = phi * h`` is then the trigonometric
polynomial ``sum c_m e^{i m theta}``, and every boundary integral against
``d sigma = h d theta`` becomes an integral of ``Psi`` in ``theta``.

For a polynomial map of degree ``N`` under first-order loading only
``c_1`` and ``c_{-1}, ..., c_{-K}`` (``K = max(N, 1)``) can be nonzero.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from .elastic import LameMaterial, Loading, background_field
from .geometry import ExteriorMap
from .series import faber_table, reciprocal_derivative

log = logging.getLogger(__name__)

COND_LIMIT = 1e12


class DegenerateSystemError(RuntimeError):
    """The matching system is numerically singular for this shape/material."""


class DomainError(ValueError):
    """Evaluation point is not in the exterior of the inclusion."""


@dataclass
class DensityCoefficients:
    """Solved density of one loading.

    ``c`` maps nonzero integers to complex coefficients. ``b`` holds the rigid
    motion ``(b1, b2, b3)`` taken by the boundary, so that the total boundary
    displacement equals ``b1 R1 + b2 R2 + b3 R3``. ``residual`` is the maximum
    boundary mismatch relative to the background scale.
    """

    phi: ExteriorMap
    mat: LameMaterial
    loading: Loading
    c: dict
    b: tuple = (0.0, 0.0, 0.0)
    residual: float = float("nan")
    condition: float = float("nan")
    method: str = "dense"
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def map_degree(self) -> int:
        return self.phi.degree

    def trig(self) -> tuple[int, np.ndarray]:
        """``(lo, coeffs)`` of ``Psi = sum c_m e^{i m theta}``."""
        keys = list(self.c) or [0]
        lo, hi = min(min(keys), 0), max(max(keys), 0)
        arr = np.zeros(hi - lo + 1, dtype=np.complex128)
        for k, v in self.c.items():
            arr[k - lo] = v
        return lo, arr

    def psi(self, theta):
        """Samples of ``phi * h`` (the density times the arclength speed)."""
        lo, arr = self.trig()
        theta = np.asarray(theta, dtype=float)
        k = np.arange(lo, lo + arr.size)
        return np.exp(1j * np.multiply.outer(theta, k)) @ arr

    def to_dict(self) -> dict:
        return {
            "loading": self.loading.tag,
            "c": {str(k): [v.real, v.imag] for k, v in sorted(self.c.items(), key=lambda kv: -kv[0])},
            "b": list(self.b),
            "residual": self.residual,
        }


# ----- the matching system -----------------------------------------------------

def _zbar_coeffs(phi: ExteriorMap):
    """Fourier coefficients of ``conj(zeta(theta))``: index ``j`` -> coefficient of ``e^{i j theta}``."""
    g = phi.gamma
    out = {-1: complex(g), 0: phi.a[0].conjugate()}
    for k in range(1, phi.degree + 1):
        out[k] = phi.a[k].conjugate() * g ** (-k)
    return out


class _System:
    """Coefficient data for the first-order matching equations of one map/material."""

    def __init__(self, phi: ExteriorMap, mat: LameMaterial):
        self.phi = phi
        self.mat = mat
        self.N = phi.degree
        self.K = max(self.N, 1)
        # the derivative expansion does not depend on a0
        self.d = faber_table(phi.centered(), self.N + 2).deriv
        self.zb = _zbar_coeffs(phi)
        g, mu, al, be = phi.gamma, mat.mu, mat.alpha, mat.beta
        N, K = self.N, self.K
        zb = lambda j: self.zb.get(j, 0j)  # noqa: E731
        # G_j = B delta_{j1} + Nd_j conj(x_j) + sum_k Mx[j,k] x_k + v1[j] c1  (x_k = c_{-k})
        self.Mx = np.zeros((K, K), dtype=np.complex128)
        self.Nd = np.array([mu * al * g ** (-j) / j for j in range(1, K + 1)], dtype=np.complex128)
        self.v1 = np.zeros(K, dtype=np.complex128)
        for j in range(1, K + 1):
            for m in range(j + 1, N + 2):
                w = mu * be * g ** (-m) * self.d[m, j] / m
                self.v1[j - 1] += w * zb(m - 1)
                for k in range(1, K + 1):
                    self.Mx[j - 1, k - 1] += w * zb(m + k)
        # rotation: Im(g c1 + sum_k rot[k] x_k) = 0
        self.rot = np.array([phi.coeff(k).conjugate() * g ** (-k) for k in range(1, K + 1)])

    def residuals(self, c1: complex, x: np.ndarray, A: complex, B: complex) -> np.ndarray:
        g, mu, be = self.phi.gamma, self.mat.mu, self.mat.beta
        G = self.Nd * np.conj(x) + self.Mx @ x + self.v1 * c1
        G[0] += B
        out = [(A - mu * be * c1 / g).real]
        for v in G:
            out += [v.real, v.imag]
        out.append((g * c1 + self.rot @ x).imag)
        return np.array(out)


def _unpack(v: np.ndarray, K: int):
    c1 = complex(v[0], v[1])
    x = v[2 : 2 + 2 * K : 2] + 1j * v[3 : 3 + 2 * K : 2]
    return c1, x


def _solve_dense(sysd: _System, A: complex, B: complex):
    K = sysd.K
    n = 2 * (K + 1)
    f = lambda v: sysd.residuals(*_unpack(v, K), A, B)  # noqa: E731
    r0 = f(np.zeros(n))
    J = np.column_stack([f(e) - r0 for e in np.eye(n)])
    cond = float(np.linalg.cond(J))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateSystemError(f"matching system is singular (condition number {cond:.3e})")
    v = np.linalg.solve(J, -r0)
    c1, x = _unpack(v, K)
    return c1, x, cond


def _solve_backsub(sysd: _System, A: complex, B: complex):
    """Eliminate ``c_{-k}`` in terms of ``c1``, then fix ``Re c1`` and ``Im c1``.

    The tail equations are real-linear, ``Mx x + Nd conj(x) = r``; they are
    solved as the complex system ``[[Mx, Nd], [conj Nd, conj Mx]] [x; conj x]``
    for the three right-hand sides generated by ``B``, ``c1 = 1`` and ``c1 = i``.
    """
    K = sysd.K
    g, mu, be = sysd.phi.gamma, sysd.mat.mu, sysd.mat.beta
    D = np.diag(sysd.Nd)
    big = np.block([[sysd.Mx, D], [D.conj(), sysd.Mx.conj()]])
    cond = float(np.linalg.cond(big))
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateSystemError(f"tail system is singular (condition number {cond:.3e})")

    def tail(rhs):
        sol = np.linalg.solve(big, np.concatenate([rhs, rhs.conj()]))
        return sol[:K]

    eB = np.zeros(K, dtype=np.complex128)
    eB[0] = B
    x0 = tail(-eB)
    xr = tail(-sysd.v1)
    xi = tail(-1j * sysd.v1)
    re = A.real * g / (mu * be)
    # rotation equation is affine in Im c1
    base = (g * re + sysd.rot @ (x0 + re * xr)).imag
    slope = (1j * g + sysd.rot @ xi).imag
    if abs(slope) < 1e-300:
        raise DegenerateSystemError("rotation constraint does not determine Im(c1)")
    im = -base / slope
    return complex(re, im), x0 + re * xr + im * xi, cond


def solve_first_order(phi: ExteriorMap, mat: LameMaterial, loading: Loading,
                      method: str = "dense", check: bool = True, samples: int = 256) -> DensityCoefficients:
    """Density coefficients for the uniform loading ``(A, B)``.

    ``method`` is ``"dense"`` (the full real-linear system) or ``"backsub"``
    (tail elimination followed by the two scalar constraints). The boundary
    residual at ``samples`` points is computed when ``check`` is true.
    """
    sysd = _System(phi, mat)
    A, B = complex(loading.A), complex(loading.B)
    if method == "dense":
        c1, x, cond = _solve_dense(sysd, A, B)
    elif method == "backsub":
        c1, x, cond = _solve_backsub(sysd, A, B)
    else:
        raise ValueError(f"unknown method {method!r}")
    c = {1: c1}
    for k in range(1, sysd.K + 1):
        c[-k] = complex(x[k - 1])
    # F_1 coefficient of the boundary trace: purely imaginary, equal to -2 mu i b3
    g, mu, al, be = phi.gamma, mat.mu, mat.alpha, mat.beta
    X = mat.kappa * A - A.conjugate() + mu * (-al * c1 + be * c1.conjugate()) / g
    b3 = -X.imag / (2 * mu)
    dc = DensityCoefficients(phi, mat, loading, c, (0.0, 0.0, b3), condition=cond, method=method)
    if check:
        dc.b, dc.residual = boundary_fit(dc, samples)
    return dc


def canonical_densities(phi: ExteriorMap, mat: LameMaterial, method: str = "dense", check: bool = True):
    """Densities of the three canonical loadings ``U1, U2, U3``."""
    return [solve_first_order(phi, mat, Loading.canonical(t), method, check) for t in ("U1", "U2", "U3")]


# ----- exterior evaluation ---------------------------------------------------

def _conv(lo_a, a, lo_b, b):
    return lo_a + lo_b, np.convolve(a, b)


class _Layer:
    """Moments of a density and evaluation of the exterior single layer."""

    def __init__(self, dc: DensityCoefficients):
        phi = dc.phi
        self.phi = phi
        self.mat = dc.mat
        lo, psi = dc.trig()
        N = phi.degree
        zb = _zbar_coeffs(phi)
        zlo = -1
        zarr = np.array([zb.get(j, 0j) for j in range(-1, N + 1)])
        xlo, xi = _conv(zlo, zarr, lo, psi)
        blo = -(lo + psi.size - 1)
        bar = psi[::-1].conj()
        self.M = max(N * (N + 1), -min(lo, blo, xlo), 1)
        nmax = max(lo + psi.size - 1, blo + bar.size - 1, xlo + xi.size - 1, 1)
        self.grunsky = faber_table(phi, max(self.M, nmax)).grunsky
        self.mom_phi = self._moments(lo, psi)
        self.mom_bar = self._moments(blo, bar)
        self.mom_zb = self._moments(xlo, xi)

    def _moments(self, lo, arr):
        g = self.phi.gamma
        M = self.M
        get = lambda k: arr[k - lo] if 0 <= k - lo < arr.size else 0j  # noqa: E731
        mom = np.zeros(M + 1, dtype=np.complex128)
        nmax = lo + arr.size - 1
        for m in range(M + 1):
            s = g ** m * get(-m)
            if m >= 1:
                for n in range(1, nmax + 1):
                    s += self.grunsky[m, n] * g ** (-n) * get(n)
            mom[m] = s
        return mom

    @staticmethod
    def _log_series(mom, w):
        out = mom[0] * np.log(w)
        winv = 1.0 / w
        p = np.ones_like(w)
        for m in range(1, mom.size):
            p = p * winv
            out = out - mom[m] * p / m
        return out

    def _cauchy_series(self, mom, w, recip):
        winv = 1.0 / w
        p = winv.copy()
        acc = np.zeros_like(w)
        for m in range(mom.size):
            acc = acc + mom[m] * p
            p = p * winv
        return acc * recip

    def two_s(self, w, mode="direct", truncation=None):
        w = np.asarray(w, dtype=np.complex128)
        al, be = self.mat.alpha, self.mat.beta
        err = 0.0
        if mode == "direct":
            recip = 1.0 / self.phi.derivative(w)
        elif mode == "series":
            r = reciprocal_derivative(self.phi, truncation)
            recip = r(w)
            # size of the first omitted term of 1/Phi'
            last = np.max(np.abs(r.coeffs[:4])) if r.coeffs.size else 0.0
            err = float(last * np.max(np.abs(w)) ** (r.lo - 1)) if last else 0.0
        else:
            raise ValueError(f"unknown mode {mode!r}")
        Lp = self._log_series(self.mom_phi, w)
        Lb = self._log_series(self.mom_bar, w)
        Cp = self._cauchy_series(self.mom_phi, w, recip)
        Cz = self._cauchy_series(self.mom_zb, w, recip)
        val = al * (Lp + np.conj(Lb)) - be * self.phi(w) * np.conj(Cp) + be * np.conj(Cz)
        return val, err


def _layer(dc: DensityCoefficients) -> _Layer:
    lay = dc._cache.get("layer")
    if lay is None:
        lay = dc._cache["layer"] = _Layer(dc)
    return lay


def _check_exterior(phi: ExteriorMap, w, allow_boundary: bool):
    w = np.asarray(w, dtype=np.complex128)
    r = np.abs(w)
    lim = phi.gamma * (1 - 1e-12)
    bad = r < lim if allow_boundary else r <= phi.gamma * (1 + 1e-14)
    if np.any(bad):
        raise DomainError(f"|w| must exceed gamma = {phi.gamma:g}")
    return w


def single_layer_exterior(dc: DensityCoefficients, w, mode: str = "direct", truncation: int | None = None,
                          allow_boundary: bool = False, return_error: bool = False):
    """Single layer ``S[phi]`` at ``z = Phi(w)`` for ``|w| > gamma``.

    ``mode="direct"`` divides by ``Phi'(w)`` exactly; ``mode="series"`` uses the
    truncated expansion of ``1/Phi'`` and reports an error estimate when
    ``return_error`` is set. ``allow_boundary`` admits ``|w| = gamma``, where
    the value is the exterior limit (the single layer is continuous).
    """
    w = _check_exterior(dc.phi, w, allow_boundary)
    val, err = _layer(dc).two_s(w, mode, truncation)
    val = 0.5 * val
    if return_error:
        return val, 0.5 * err
    return val


def total_field(dc: DensityCoefficients, w, allow_boundary: bool = False):
    """Total displacement ``H + S[phi]`` at ``z = Phi(w)``."""
    w = _check_exterior(dc.phi, w, allow_boundary)
    z = dc.phi(w)
    return background_field(dc.loading, dc.mat, z, dc.phi.a[0]) + single_layer_exterior(dc, w, allow_boundary=True)


def boundary_fit(dc: DensityCoefficients, samples: int = 256):
    """Fit ``b1 R1 + b2 R2 + b3 R3`` to the boundary trace; return ``(b, relative residual)``.

    The residual is the largest pointwise mismatch divided by the largest
    background displacement on the boundary.
    """
    phi = dc.phi
    theta = 2 * np.pi * np.arange(samples) / samples
    w = phi.gamma * np.exp(1j * theta)
    z = phi(w)
    u = total_field(dc, w, allow_boundary=True)
    H = background_field(dc.loading, dc.mat, z, phi.a[0])
    # u = b1 + i b2 - i b3 z  in real least squares
    Amat = np.column_stack([
        np.concatenate([np.ones(samples), np.zeros(samples)]),
        np.concatenate([np.zeros(samples), np.ones(samples)]),
        np.concatenate([z.imag, -z.real]),
    ])
    rhs = np.concatenate([u.real, u.imag])
    sol, *_ = np.linalg.lstsq(Amat, rhs, rcond=None)
    res = np.max(np.abs(Amat @ sol - rhs).reshape(2, -1).max(axis=0))
    scale = max(float(np.max(np.abs(H))), 1e-300)
    if not np.any(H):
        scale = max(float(np.max(np.abs(u))), 1.0)
    return tuple(float(s) for s in sol), float(res / scale)


def density_from_dict(obj: dict, phi: ExteriorMap, mat: LameMaterial) -> DensityCoefficients:
    from .elastic import CANONICAL

    tag = obj.get("loading", "General")
    loading = Loading.canonical(tag) if tag in CANONICAL else Loading(tag)
    c = {int(k): complex(v[0], v[1]) for k, v in obj["c"].items()}
    return DensityCoefficients(phi, mat, loading, c, tuple(obj.get("b", (0.0, 0.0, 0.0))),
                               float(obj.get("residual", float("nan"))))
