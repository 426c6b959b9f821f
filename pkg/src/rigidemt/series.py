"""Truncated Laurent series and Faber-polynomial machinery of an exterior map.

A Laurent series here is a finite window of coefficients of ``w**e`` with
``lo <= e <= hi``. Products drop every exponent below ``-truncation``; the
number of dropped nonzero terms is tracked in ``clipped`` so callers can tell
an exact result from a clipped one.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._kernels import laurent_mul

DEFAULT_EXTRA = 32


def default_truncation(degree: int) -> int:
    """Default negative-exponent budget ``4N + 32``."""
    return 4 * degree + DEFAULT_EXTRA


@dataclass(frozen=True)
class LaurentSeries:
    """Finite Laurent window ``sum_k coeffs[k] * w**(lo + k)``."""

    lo: int
    coeffs: np.ndarray
    truncation: int = 64
    clipped: int = 0

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128).ravel()
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if self.truncation < 0:
            raise ValueError("truncation must be nonnegative")
        if c.size and self.lo < -self.truncation:
            keep = self.lo + c.size - 1 >= -self.truncation
            cut = -self.truncation - self.lo
            dropped = int(np.count_nonzero(c[: min(cut, c.size)]))
            object.__setattr__(self, "clipped", self.clipped + dropped)
            if not keep:
                object.__setattr__(self, "coeffs", np.zeros(0, dtype=np.complex128))
                object.__setattr__(self, "lo", -self.truncation)
            else:
                object.__setattr__(self, "coeffs", c[cut:])
                object.__setattr__(self, "lo", -self.truncation)

    @classmethod
    def from_dict(cls, terms: dict, truncation: int = 64) -> "LaurentSeries":
        if not terms:
            return cls(0, np.zeros(0), truncation)
        lo, hi = min(terms), max(terms)
        c = np.zeros(hi - lo + 1, dtype=np.complex128)
        for e, v in terms.items():
            c[e - lo] += v
        return cls(lo, c, truncation)

    @classmethod
    def monomial(cls, exponent: int, value: complex = 1.0, truncation: int = 64):
        return cls(exponent, np.array([value]), truncation)

    @property
    def hi(self) -> int:
        return self.lo + self.coeffs.size - 1

    def coeff(self, e: int) -> complex:
        k = e - self.lo
        if 0 <= k < self.coeffs.size:
            return complex(self.coeffs[k])
        return 0j

    def to_dict(self, tol: float = 0.0) -> dict:
        return {
            self.lo + k: complex(v)
            for k, v in enumerate(self.coeffs)
            if abs(v) > tol
        }

    def _aligned(self, other):
        lo = min(self.lo, other.lo)
        hi = max(self.hi, other.hi)
        a = np.zeros(hi - lo + 1, dtype=np.complex128)
        b = np.zeros_like(a)
        a[self.lo - lo : self.lo - lo + self.coeffs.size] = self.coeffs
        b[other.lo - lo : other.lo - lo + other.coeffs.size] = other.coeffs
        return lo, a, b

    def __add__(self, other):
        if not isinstance(other, LaurentSeries):
            other = LaurentSeries.monomial(0, other, self.truncation)
        lo, a, b = self._aligned(other)
        return LaurentSeries(
            lo, a + b, min(self.truncation, other.truncation), self.clipped + other.clipped
        )

    __radd__ = __add__

    def __neg__(self):
        return LaurentSeries(self.lo, -self.coeffs, self.truncation, self.clipped)

    def __sub__(self, other):
        return self + (-other if isinstance(other, LaurentSeries) else -other)

    def __mul__(self, other):
        if isinstance(other, LaurentSeries):
            return mul(self, other)
        return LaurentSeries(self.lo, self.coeffs * other, self.truncation, self.clipped)

    __rmul__ = __mul__

    def shift(self, k: int) -> "LaurentSeries":
        """Multiply by ``w**k``."""
        return LaurentSeries(self.lo + k, self.coeffs, self.truncation, self.clipped)

    def conj_coeffs(self) -> "LaurentSeries":
        return LaurentSeries(self.lo, self.coeffs.conj(), self.truncation, self.clipped)

    def derivative(self) -> "LaurentSeries":
        e = np.arange(self.lo, self.hi + 1)
        return LaurentSeries(self.lo - 1, self.coeffs * e, self.truncation, self.clipped)

    def __call__(self, w):
        w = np.asarray(w, dtype=np.complex128)
        if self.coeffs.size == 0:
            return np.zeros_like(w)
        # Horner in w on the shifted polynomial, then rescale by w**lo
        acc = np.zeros_like(w)
        for c in self.coeffs[::-1]:
            acc = acc * w + c
        return acc * w ** self.lo


def mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    """Cauchy product, clipped to the smaller of the two truncation budgets."""
    trunc = min(a.truncation, b.truncation)
    return LaurentSeries(
        a.lo + b.lo, laurent_mul(a.coeffs, b.coeffs), trunc, a.clipped + b.clipped
    )


def map_series(phi, truncation: int | None = None, include_a0: bool = True) -> LaurentSeries:
    """``Phi(w) = w + a0 + a1/w + ...`` as a Laurent series."""
    n = phi.degree
    trunc = default_truncation(n) if truncation is None else truncation
    c = np.zeros(n + 2, dtype=np.complex128)
    # exponents -n .. 1
    c[n + 1] = 1.0
    if include_a0:
        c[n] = phi.a[0]
    for k in range(1, n + 1):
        c[n - k] = phi.a[k]
    return LaurentSeries(-n, c, trunc)


def map_derivative_series(phi, truncation: int | None = None) -> LaurentSeries:
    """``Phi'(w) = 1 - sum_m m a_m w**(-m-1)``."""
    return map_series(phi, truncation).derivative()


def reciprocal_derivative(phi, truncation: int | None = None) -> LaurentSeries:
    """Laurent expansion of ``1/Phi'(w)`` in powers of ``1/w``.

    ``Phi'`` has leading coefficient 1, so the reciprocal is computed by the
    usual triangular recursion on the coefficients of ``1/w``.
    """
    trunc = default_truncation(phi.degree) if truncation is None else truncation
    # Phi'(w) = 1 + sum_{j>=2} g_j w^{-j}, g_{m+1} = -m a_m
    g = np.zeros(trunc + 1, dtype=np.complex128)
    g[0] = 1.0
    for m in range(1, phi.degree + 1):
        if m + 1 <= trunc:
            g[m + 1] = -m * phi.a[m]
    r = np.zeros(trunc + 1, dtype=np.complex128)
    r[0] = 1.0
    for k in range(1, trunc + 1):
        jmax = min(k, phi.degree + 1)
        r[k] = -np.dot(g[1 : jmax + 1], r[k - 1 : k - jmax - 1 if k - jmax - 1 >= 0 else None : -1])
    # coefficient of w^{-k} is r[k]; store ascending exponents -trunc..0
    return LaurentSeries(-trunc, r[::-1].copy(), trunc)


def faber_coefficients(phi, M: int) -> list[np.ndarray]:
    """Monomial coefficients ``p[m][n]`` of the Faber polynomials ``F_0 .. F_M``.

    Uses ``F_{n+1} = (z - a0) F_n - sum_{k=1}^{n} a_k F_{n-k} - n a_n``, which
    follows from matching powers of ``w`` in the generating function.
    """
    if M < 1:
        raise ValueError("M must be >= 1")
    a = phi.a
    N = phi.degree
    p = [np.array([1.0 + 0j])]
    for n in range(M):
        nxt = np.zeros(n + 2, dtype=np.complex128)
        nxt[1:] += p[n]
        nxt[: n + 1] -= a[0] * p[n]
        for k in range(1, min(n, N) + 1):
            nxt[: p[n - k].size] -= a[k] * p[n - k]
        if 1 <= n <= N:
            nxt[0] -= n * a[n]
        p.append(nxt)
    return p


def faber_compositions(phi, M: int, truncation: int | None = None) -> list[LaurentSeries]:
    """``F_m(Phi(w))`` for ``m = 0..M`` as Laurent series in ``w``.

    The recursion runs on ``Phi(w) - a0`` so ``a0`` never enters and the
    result is exactly translation invariant. With the default budget nothing
    is clipped for polynomial maps.
    """
    N = phi.degree
    trunc = max(M * max(N, 1) + M, default_truncation(N)) if truncation is None else truncation
    a = phi.a
    psi = map_series(phi, trunc, include_a0=False)
    F = [LaurentSeries.monomial(0, 1.0, trunc)]
    for n in range(M):
        nxt = mul(psi, F[n])
        for k in range(1, min(n, N) + 1):
            nxt = nxt - a[k] * F[n - k]
        if 1 <= n <= N:
            nxt = nxt - n * a[n]
        F.append(nxt)
    return F


class SeriesConsistencyError(RuntimeError):
    """Raised when a composed Faber polynomial keeps spurious nonnegative powers."""


def grunsky_coefficients(phi, M: int, truncation: int | None = None, tol: float = 1e-12) -> np.ndarray:
    """Grunsky coefficients ``c[m][n]`` (1-based, array of shape ``(M+1, M+1)``).

    ``c[m][n]`` is the coefficient of ``w**-n`` in ``F_m(Phi(w))``. The
    coefficients of ``w**j`` for ``0 <= j < m`` must vanish; a violation
    beyond ``tol`` (relative) raises :class:`SeriesConsistencyError`.
    """
    F = faber_compositions(phi, M, truncation)
    c = np.zeros((M + 1, M + 1), dtype=np.complex128)
    for m in range(1, M + 1):
        s = F[m]
        scale = max(1.0, float(np.max(np.abs(s.coeffs))))
        lead = s.coeff(m)
        spurious = max((abs(s.coeff(j)) for j in range(0, m)), default=0.0)
        if abs(lead - 1) > tol * scale or spurious > tol * scale:
            raise SeriesConsistencyError(
                f"F_{m}(Phi(w)) has leading {lead!r} and spurious power {spurious:.3e}"
            )
        for n in range(1, M + 1):
            c[m, n] = s.coeff(-n)
    return c


def derivative_expansion(p: list[np.ndarray], M: int) -> np.ndarray:
    """Coefficients ``d[m][j]`` with ``F_m' = sum_{j<m} d[m][j] F_j``.

    The Faber polynomials are monic, so this is a unit triangular change of
    basis solved from the top degree down.
    """
    d = np.zeros((M + 1, M + 1), dtype=np.complex128)
    for m in range(1, M + 1):
        r = np.arange(1, m + 1) * p[m][1 : m + 1]  # coefficients of F_m'
        r = r.astype(np.complex128)
        for j in range(m - 1, -1, -1):
            d[m, j] = r[j] / p[j][j]
            r[: j + 1] -= d[m, j] * p[j]
    return d


@dataclass(frozen=True)
class FaberTable:
    """Faber data of a map up to order ``M``."""

    order: int
    p: list = field(repr=False)
    grunsky: np.ndarray = field(repr=False)
    deriv: np.ndarray = field(repr=False)


def faber_table(phi, M: int, truncation: int | None = None) -> FaberTable:
    """Monomial, Grunsky and derivative-expansion coefficients to order ``M``.

    ``deriv`` is computed from the translation-free Faber polynomials (it
    does not depend on ``a0``), which avoids binomial cancellation.
    """
    p = faber_coefficients(phi, M)
    p0 = faber_coefficients(phi.translated(-phi.a[0]), M) if phi.a[0] != 0 else p
    return FaberTable(
        order=M,
        p=p,
        grunsky=grunsky_coefficients(phi, M, truncation),
        deriv=derivative_expansion(p0, M),
    )
