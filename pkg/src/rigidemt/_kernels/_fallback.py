"""Pure numpy implementations of the hot kernels.

These are the reference versions; the compiled module in ``_core.pyx`` must
reproduce them to rounding error.
"""
import numpy as np


def laurent_mul(a, b):
    """Full Cauchy product of two complex coefficient arrays."""
    a = np.ascontiguousarray(a, dtype=np.complex128)
    b = np.ascontiguousarray(b, dtype=np.complex128)
    if a.size == 0 or b.size == 0:
        return np.zeros(0, dtype=np.complex128)
    return np.convolve(a, b)


def kelvin_boundary_matrices(zeta, dzeta, t):
    """Smooth pieces of the Kelvin kernel between boundary nodes.

    Returns ``(R, U)`` where ``R[p, q] = log|z_p - z_q| - 0.5*log(4 sin^2((t_p - t_q)/2))``
    (diagonal: ``log|z'(t_p)|``) and ``U[p, q]`` is the unit complex direction of
    ``z_p - z_q`` (diagonal: the unit tangent at ``p``).
    """
    zeta = np.asarray(zeta, dtype=np.complex128)
    dzeta = np.asarray(dzeta, dtype=np.complex128)
    t = np.asarray(t, dtype=np.float64)
    n = zeta.size
    d = zeta[:, None] - zeta[None, :]
    dt = t[:, None] - t[None, :]
    absd = np.abs(d)
    eye = np.eye(n, dtype=bool)
    absd[eye] = 1.0
    s2 = 4.0 * np.sin(0.5 * dt) ** 2
    s2[eye] = 1.0
    R = np.log(absd) - 0.5 * np.log(s2)
    U = d / absd
    diag = np.arange(n)
    R[diag, diag] = np.log(np.abs(dzeta))
    U[diag, diag] = dzeta / np.abs(dzeta)
    return R, U


def kelvin_apply(targets, zeta, psi, weight, alpha, beta):
    """Trapezoid single layer ``sum_q w * Gamma(x - y_q) psi_q`` at off-boundary targets.

    ``psi`` holds complex samples ``psi1 + i psi2`` of the density times the
    arclength speed, ``weight`` is the uniform parameter step. The Kelvin matrix
    is applied componentwise in real arithmetic.
    """
    targets = np.atleast_1d(np.asarray(targets, dtype=np.complex128))
    d = targets[:, None] - np.asarray(zeta, dtype=np.complex128)[None, :]
    x1, x2 = d.real, d.imag
    r2 = x1 * x1 + x2 * x2
    lg = 0.5 * np.log(r2)
    c = 1.0 / (2.0 * np.pi)
    g11 = c * (alpha * lg - beta * x1 * x1 / r2)
    g12 = -c * beta * x1 * x2 / r2
    g22 = c * (alpha * lg - beta * x2 * x2 / r2)
    p1 = np.asarray(psi).real
    p2 = np.asarray(psi).imag
    s1 = weight * (g11 @ p1 + g12 @ p2)
    s2 = weight * (g12 @ p1 + g22 @ p2)
    return s1 + 1j * s2
