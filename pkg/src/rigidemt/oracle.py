"""Independent boundary-integral solver for the rigid-inclusion problem.

Nothing here uses the series machinery: the boundary is sampled from the map,
derivatives come from FFT differentiation of the samples, the Kelvin matrix is
integrated with a spectrally accurate product rule for the logarithmic part,
and the rigid-motion condition is imposed by overdetermined least squares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernels import kelvin_apply, kelvin_boundary_matrices
from .elastic import LameMaterial, Loading, background_field, linear_field
from .geometry import ExteriorMap


class OracleError(RuntimeError):
    """Rank deficiency or another failure of the collocation solve."""


@dataclass(frozen=True)
class Boundary:
    """Uniform samples ``zeta(t_p)`` of the boundary with spectral derivatives."""

    t: np.ndarray
    z: np.ndarray
    dz: np.ndarray
    d2z: np.ndarray

    @property
    def n(self) -> int:
        return self.t.size

    @property
    def speed(self) -> np.ndarray:
        return np.abs(self.dz)


def _spectral_derivatives(z: np.ndarray):
    n = z.size
    k = np.fft.fftfreq(n, 1.0 / n)
    if n % 2 == 0:
        k[n // 2] = 0.0
    zh = np.fft.fft(z)
    return np.fft.ifft(1j * k * zh), np.fft.ifft(-(k ** 2) * zh)


def discretize(phi: ExteriorMap, n: int) -> Boundary:
    t = 2 * np.pi * np.arange(n) / n
    z = phi(phi.gamma * np.exp(1j * t))
    dz, d2z = _spectral_derivatives(z)
    return Boundary(t, z, dz, d2z)


def _circulant(row: np.ndarray) -> np.ndarray:
    n = row.size
    idx = (np.arange(n)[None, :] - np.arange(n)[:, None]) % n
    return row[idx]


def log_weights(n: int) -> np.ndarray:
    """Matrix ``W`` with ``(W f)_p = (1/2pi) int 0.5 log(4 sin^2((t_p - t)/2)) f(t) dt``.

    Exact for trigonometric interpolants of ``f`` on ``n`` uniform nodes.
    """
    k = np.fft.fftfreq(n, 1.0 / n)
    wk = np.zeros(n)
    nz = k != 0
    wk[nz] = -0.5 / np.abs(k[nz])
    row = np.real(np.fft.ifft(wk))
    return _circulant(row)


def sawtooth_weights(n: int) -> np.ndarray:
    """``(V f)_p = (1/2pi) int s(t - t_p) f(t) dt`` with ``s(u) = u/2`` on ``[0, 2pi)``."""
    k = np.fft.fftfreq(n, 1.0 / n)
    wk = np.zeros(n, dtype=np.complex128)
    wk[0] = np.pi / 2
    nz = k != 0
    wk[nz] = 1.0 / (2j * k[nz])
    if n % 2 == 0:
        wk[n // 2] = 0.0
    # (V f)_p = sum_k fhat_k e^{i k t_p} conj-shift multiplier
    row = np.fft.ifft(np.conj(wk))
    return _circulant(row)


def cotangent_weights(n: int) -> np.ndarray:
    """``(Q f)_p = (1/2pi) PV int 0.5 cot((t_p - t)/2) f(t) dt`` (conjugate-function multiplier)."""
    k = np.fft.fftfreq(n, 1.0 / n)
    wk = -0.5j * np.sign(k)
    if n % 2 == 0:
        wk[n // 2] = 0.0
    row = np.fft.ifft(np.conj(wk))
    return _circulant(row)


def _targets(z):
    return np.atleast_1d(np.asarray(z, dtype=np.complex128))


def _node_index(bd: Boundary, z):
    d = np.abs(z[:, None] - bd.z[None, :])
    j = np.argmin(d, axis=1)
    hit = d[np.arange(z.size), j] <= 1e-12 * max(1.0, float(np.max(np.abs(bd.z))))
    return hit, j


def complex_log_operator(bd: Boundary, phi_samples, target, on_boundary: bool = False):
    """``(1/2pi) int log(z - zeta) phi(zeta) d sigma`` by quadrature.

    ``phi_samples`` are the density values at the nodes. Off the boundary the
    trapezoid rule is used with the branch of ``arg(z - zeta)`` continued along
    the boundary (exact up to ``2 pi i int phi``, which vanishes for admissible
    densities). With ``on_boundary`` every target must be a node; the
    logarithmic and sawtooth singularities are integrated by product rules.
    A target hitting a node without ``on_boundary`` is shifted off the node
    along the outward normal once, then rejected.
    """
    phi_samples = np.asarray(phi_samples, dtype=np.complex128)
    psi = phi_samples * bd.speed
    n = bd.n
    z = _targets(target)
    if on_boundary:
        hit, j = _node_index(bd, z)
        if not np.all(hit):
            raise ValueError("on-boundary evaluation requires targets at the nodes")
        W = log_weights(n)
        V = sawtooth_weights(n)
        D = bd.z[:, None] - bd.z[None, :]
        u = (bd.t[None, :] - bd.t[:, None]) % (2 * np.pi)
        eye = np.eye(n, dtype=bool)
        Dm = np.where(eye, 1.0, D)
        s2 = np.where(eye, 1.0, 4 * np.sin(0.5 * u) ** 2)
        Rr = np.log(np.abs(Dm)) - 0.5 * np.log(s2)
        Rr[eye] = np.log(bd.speed)
        # smooth remainder of arg: arg(D) - u/2, continued from the diagonal value arg(-zeta')
        ang = np.angle(Dm) - 0.5 * u
        ref = np.angle(-bd.dz)[:, None]
        ang = ref + np.angle(np.exp(1j * (ang - ref)))
        ang[eye] = np.angle(-bd.dz)
        full_re = W @ psi + (Rr @ psi) / n
        full_im = V @ psi + (ang @ psi) / n
        return (full_re + 1j * full_im)[j]
    hit, j = _node_index(bd, z)
    if np.any(hit):
        nrm = -1j * bd.dz[j[hit]] / bd.speed[j[hit]]
        z = z.copy()
        z[hit] = z[hit] + 1e-7 * nrm * max(1.0, float(np.max(np.abs(bd.z))))
        hit2, _ = _node_index(bd, z)
        if np.any(hit2):
            raise ValueError("target coincides with a quadrature node")
    D = z[:, None] - bd.z[None, :]
    lg = np.log(np.abs(D)) + 1j * np.unwrap(np.angle(D), axis=1)
    return (lg @ psi) / n


def complex_cauchy_operator(bd: Boundary, phi_samples, target, on_boundary: bool = False):
    """``(1/2pi) int phi(zeta) / (z - zeta) d sigma``; principal value on the boundary."""
    phi_samples = np.asarray(phi_samples, dtype=np.complex128)
    psi = phi_samples * bd.speed
    n = bd.n
    z = _targets(target)
    if on_boundary:
        hit, j = _node_index(bd, z)
        if not np.all(hit):
            raise ValueError("on-boundary evaluation requires targets at the nodes")
        Q = cotangent_weights(n)
        D = bd.z[:, None] - bd.z[None, :]
        dt = bd.t[:, None] - bd.t[None, :]
        eye = np.eye(n, dtype=bool)
        with np.errstate(divide="ignore", invalid="ignore"):
            R = 1.0 / D - 0.5 / np.tan(0.5 * dt) / bd.dz[:, None]
        R[eye] = bd.d2z / (2 * bd.dz ** 2)
        full = (Q @ psi) / bd.dz + (R @ psi) / n
        return full[j]
    D = z[:, None] - bd.z[None, :]
    if np.any(np.abs(D) < 1e-14):
        raise ValueError("target coincides with a quadrature node")
    return ((1.0 / D) @ psi) / n


def kelvin_single_layer(bd: Boundary, phi_samples, mat: LameMaterial, target):
    """Direct Kelvin-matrix quadrature of the vector single layer at off-boundary targets."""
    psi = np.asarray(phi_samples, dtype=np.complex128) * bd.speed
    return kelvin_apply(_targets(target), bd.z, psi, 2 * np.pi / bd.n, mat.alpha, mat.beta)


def muskhelishvili_single_layer(bd: Boundary, phi_samples, mat: LameMaterial, target):
    """Single layer from ``2 S = kappa f - z conj(f') - conj(g)`` with the complex operators.

    ``f = beta L[phi]`` and ``g = -alpha L[conj phi] - beta C[conj(zeta) phi]``;
    ``kappa beta = alpha`` in the plane-strain convention.
    """
    z = _targets(target)
    phi_samples = np.asarray(phi_samples, dtype=np.complex128)
    al, be = mat.alpha, mat.beta
    Lp = complex_log_operator(bd, phi_samples, z)
    Lb = complex_log_operator(bd, np.conj(phi_samples), z)
    Cp = complex_cauchy_operator(bd, phi_samples, z)
    Cz = complex_cauchy_operator(bd, np.conj(bd.z) * phi_samples, z)
    two_s = al * Lp - z * np.conj(be * Cp) + al * np.conj(Lb) + be * np.conj(Cz)
    return 0.5 * two_s


# ----- collocation solve ---------------------------------------------------------

@dataclass
class OracleSolution:
    boundary: Boundary
    modes: np.ndarray
    coeffs: np.ndarray          # Fourier coefficients of Psi = phi * speed
    b: np.ndarray               # rigid motion b1, b2, b3
    residual: float             # max boundary mismatch / max |H|
    lstsq_residual: float
    singular_ratio: float

    @property
    def psi(self) -> np.ndarray:
        """``phi * |zeta'|`` at the nodes."""
        return np.exp(1j * np.outer(self.boundary.t, self.modes)) @ self.coeffs

    @property
    def density(self) -> np.ndarray:
        return self.psi / self.boundary.speed


def _as_field(loading, mat: LameMaterial, a0: complex):
    if callable(loading):
        return loading
    if isinstance(loading, str):
        loading = Loading.canonical(loading)
    return lambda z: background_field(loading, mat, z, a0)


def oracle_solve(phi: ExteriorMap, mat: LameMaterial, loading, n_modes: int = 64,
                 n_points: int | None = None, rank_tol: float = 1e-13) -> OracleSolution:
    """Least-squares collocation of ``u = H + S[phi] = b1 R1 + b2 R2 + b3 R3`` on the boundary.

    ``loading`` is a :class:`Loading`, a canonical tag, or any callable
    ``H(z)`` returning complex displacements. The density is expanded in
    ``e^{ikt}/|zeta'|`` for ``|k| <= n_modes``; the mean-zero and rotation
    orthogonality constraints are appended as scaled equations.
    """
    n = max(4 * n_modes, 256) if n_points is None else n_points
    if n < 2 * n_modes + 3:
        raise ValueError("n_points must be at least 2*n_modes + 3")
    bd = discretize(phi, n)
    H = _as_field(loading, mat, phi.a[0])
    R, U = kelvin_boundary_matrices(bd.z, bd.dz, bd.t)
    Lop = log_weights(n) + R / n
    E11 = (U.real ** 2) / n
    E12 = (U.real * U.imag) / n
    E22 = (U.imag ** 2) / n
    ks = np.arange(-n_modes, n_modes + 1)
    nc = ks.size
    B = np.exp(1j * np.outer(bd.t, ks))
    P1 = np.hstack([B.real, -B.imag])
    P2 = np.hstack([B.imag, B.real])
    al, be = mat.alpha, mat.beta
    S1 = al * Lop @ P1 - be * (E11 @ P1 + E12 @ P2)
    S2 = al * Lop @ P2 - be * (E12 @ P1 + E22 @ P2)
    x1, x2 = bd.z.real, bd.z.imag
    rig1 = np.column_stack([-np.ones(n), np.zeros(n), -x2])
    rig2 = np.column_stack([np.zeros(n), -np.ones(n), x1])
    A = np.vstack([np.hstack([S1, rig1]), np.hstack([S2, rig2])])
    h = H(bd.z)
    rhs = -np.concatenate([h.real, h.imag])
    ncol = A.shape[1]
    c0r = np.zeros(ncol)
    c0r[n_modes] = 1.0
    c0i = np.zeros(ncol)
    c0i[nc + n_modes] = 1.0
    rot = np.zeros(ncol)
    rot[: 2 * nc] = (x2 @ P1 - x1 @ P2) / n
    scale = np.abs(A).max()
    A = np.vstack([A, scale * c0r, scale * c0i, scale * rot])
    rhs = np.concatenate([rhs, [0.0, 0.0, 0.0]])
    sv = np.linalg.svd(A, compute_uv=False)
    ratio = float(sv[-1] / sv[0])
    if ratio < rank_tol:
        raise OracleError(f"collocation matrix is rank deficient (smallest/largest singular value {ratio:.3e})")
    sol, *_ = np.linalg.lstsq(A, rhs, rcond=None)
    ls_res = float(np.max(np.abs(A @ sol - rhs)))
    coeffs = sol[:nc] + 1j * sol[nc : 2 * nc]
    b = sol[2 * nc :]
    # boundary residual: |u - rigid| from the boundary rows only
    bres = (A[: 2 * n] @ sol - rhs[: 2 * n]).reshape(2, n)
    hs = max(float(np.max(np.abs(h))), 1e-300)
    res = float(np.max(np.hypot(bres[0], bres[1]))) / hs
    return OracleSolution(bd, ks, coeffs, b, res, ls_res, ratio)


def _emt_entries(sols: dict, scale: dict | None = None) -> np.ndarray:
    m = np.zeros((2, 2, 2, 2))
    for (i, j), s in sols.items():
        bd = s.boundary
        y = (bd.z.real, bd.z.imag)
        g = s.psi
        comp = (g.real, g.imag)
        for k in range(2):
            for l in range(2):  # noqa: E741
                m[i - 1, j - 1, k, l] = 2 * np.pi / bd.n * float(np.sum(y[k] * comp[l]))
    return m


def emt_by_quadrature(phi: ExteriorMap, mat: LameMaterial, n_modes: int = 64, route: str = "direct",
                      n_points: int | None = None):
    """EMT ``m^{ij}_{kl} = int y_k (g^j_i)_l d sigma`` from oracle densities.

    ``route="direct"`` solves for the four fields ``H = x_i e_j``;
    ``route="loadings"`` solves the three canonical loadings and combines
    them. Returns ``(m, max boundary residual)``.
    """
    if route == "direct":
        sols = {(i, j): oracle_solve(phi, mat, linear_field(i, j), n_modes, n_points)
                for i in (1, 2) for j in (1, 2)}
        return _emt_entries(sols), max(s.residual for s in sols.values())
    if route != "loadings":
        raise ValueError(f"unknown route {route!r}")
    u = {t: oracle_solve(phi, mat, t, n_modes, n_points) for t in ("U1", "U2", "U3")}
    mu, k = mat.mu, mat.kappa
    bd = u["U1"].boundary
    g = {
        (1, 1): mu / (k - 1) * u["U1"].psi - mu * u["U2"].psi,
        (2, 2): mu / (k - 1) * u["U1"].psi + mu * u["U2"].psi,
        (1, 2): mu * u["U3"].psi,
        (2, 1): mu * u["U3"].psi,
    }
    m = np.zeros((2, 2, 2, 2))
    y = (bd.z.real, bd.z.imag)
    for (i, j), gij in g.items():
        for kk in range(2):
            integ = 2 * np.pi / bd.n * np.sum(y[kk] * gij)
            for l, e in enumerate((1.0, 1j)):  # noqa: E741
                m[i - 1, j - 1, kk, l] = (np.conj(e) * integ).real
    return m, max(s.residual for s in u.values())


def convergence_study(phi: ExteriorMap, mat: LameMaterial, loading="U3", modes=(8, 16, 24, 32, 40, 48)):
    """Boundary residual versus ``n_modes`` (list of ``(n_modes, residual)``)."""
    return [(k, oracle_solve(phi, mat, loading, k).residual) for k in modes]


def traction_moments(sol: OracleSolution, phi: ExteriorMap, mat: LameMaterial, loading,
                     radius: float | None = None, samples: int = 256, step: float = 1e-4):
    """Soft check: ``int (sigma(u) n) . R_j`` over a circle enclosing the inclusion.

    The total field is evaluated by direct Kelvin quadrature, differentiated
    by central differences, and the traction integrated by the trapezoid
    rule. The three values are returned relative to the background traction
    scale; they should be small for an equilibrated rigid inclusion.
    """
    H = _as_field(loading, mat, phi.a[0])
    bd = sol.boundary
    dens = sol.density
    c = complex(np.mean(bd.z))
    r = radius if radius is not None else 2.0 * float(np.max(np.abs(bd.z - c)))
    th = 2 * np.pi * np.arange(samples) / samples
    nrm = np.exp(1j * th)
    pts = c + r * nrm

    def u(z):
        return H(z) + kelvin_single_layer(bd, dens, mat, z)

    hx = step * r
    dux = (u(pts + hx) - u(pts - hx)) / (2 * hx)
    duy = (u(pts + 1j * hx) - u(pts - 1j * hx)) / (2 * hx)
    e11, e22 = dux.real, duy.imag
    e12 = 0.5 * (dux.imag + duy.real)
    lam, mu = mat.lam, mat.mu
    tr = e11 + e22
    s11 = lam * tr + 2 * mu * e11
    s22 = lam * tr + 2 * mu * e22
    s12 = 2 * mu * e12
    t1 = s11 * nrm.real + s12 * nrm.imag
    t2 = s12 * nrm.real + s22 * nrm.imag
    ds = r * 2 * np.pi / samples
    x1, x2 = pts.real, pts.imag
    m1 = float(np.sum(t1) * ds)
    m2 = float(np.sum(t2) * ds)
    m3 = float(np.sum(t1 * x2 - t2 * x1) * ds)
    hd = (H(pts + hx) - H(pts - hx)) / (2 * hx)
    sc = (abs(lam) + 2 * mu) * float(np.max(np.abs(hd))) * 2 * math.pi * r * max(1.0, r)
    return np.array([m1, m2, m3]) / max(sc, 1e-300)
