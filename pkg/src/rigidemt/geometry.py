"""Exterior conformal maps ``Phi(w) = w + a0 + a1/w + ... + aN/w**N`` on ``|w| > gamma``."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np


class InvalidMapError(ValueError):
    """The map is malformed or fails the univalence checks."""


class ShapeFileError(ValueError):
    """A shape file could not be parsed; ``field`` names the offending entry."""

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


@dataclass(frozen=True)
class ExteriorMap:
    """Exterior map with conformal radius ``gamma`` and coefficients ``a[0..N]``.

    Trailing zero coefficients are dropped, so ``degree`` is the index of the
    last nonzero ``a_k`` (at least 0).
    """

    gamma: float
    a: tuple = field(default=(0j,))

    def __post_init__(self):
        g = float(self.gamma)
        if not math.isfinite(g) or g <= 0:
            raise InvalidMapError(f"gamma must be a positive finite number, got {self.gamma!r}")
        coeffs = [complex(c) for c in self.a] or [0j]
        if not all(math.isfinite(c.real) and math.isfinite(c.imag) for c in coeffs):
            raise InvalidMapError("map coefficients must be finite")
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "gamma", g)
        object.__setattr__(self, "a", tuple(coeffs))

    @property
    def degree(self) -> int:
        return len(self.a) - 1

    def coeff(self, k: int) -> complex:
        return self.a[k] if 0 <= k < len(self.a) else 0j

    # ----- transformations -------------------------------------------------
    def translated(self, c: complex) -> "ExteriorMap":
        a = list(self.a)
        a[0] = a[0] + complex(c)
        return ExteriorMap(self.gamma, tuple(a))

    def centered(self) -> "ExteriorMap":
        return self.translated(-self.a[0])

    def scaled(self, t: float) -> "ExteriorMap":
        """Map of the dilated shape ``t*D`` (``gamma -> t gamma``, ``a_k -> t**(k+1) a_k``)."""
        if t <= 0:
            raise ValueError("scale factor must be positive")
        return ExteriorMap(self.gamma * t, tuple(c * t ** (k + 1) for k, c in enumerate(self.a)))

    def rotated(self, angle: float) -> "ExteriorMap":
        """Map of the rotated shape ``e^{i angle} D``.

        With ``w -> e^{i angle} w`` reparametrizing the exterior disk, the
        normalization at infinity is kept and ``a_k -> a_k e^{i(k+1) angle}``.
        """
        r = np.exp(1j * angle)
        return ExteriorMap(self.gamma, tuple(c * r ** (k + 1) for k, c in enumerate(self.a)))

    def conjugated(self) -> "ExteriorMap":
        """Map of the mirror image ``conj(D)``."""
        return ExteriorMap(self.gamma, tuple(c.conjugate() for c in self.a))

    # ----- evaluation ------------------------------------------------------
    def __call__(self, w):
        w = np.asarray(w, dtype=np.complex128)
        z = w + self.a[0]
        winv = 1.0 / w
        p = np.ones_like(w)
        for k in range(1, len(self.a)):
            p = p * winv
            z = z + self.a[k] * p
        return z

    def derivative(self, w):
        w = np.asarray(w, dtype=np.complex128)
        d = np.ones_like(w)
        winv = 1.0 / w
        p = winv.copy()
        for k in range(1, len(self.a)):
            p = p * winv
            d = d - k * self.a[k] * p
        return d

    def second_derivative(self, w):
        w = np.asarray(w, dtype=np.complex128)
        d = np.zeros_like(w)
        winv = 1.0 / w
        p = winv * winv
        for k in range(1, len(self.a)):
            p = p * winv
            d = d + k * (k + 1) * self.a[k] * p
        return d

    def to_dict(self) -> dict:
        return {"gamma": self.gamma, "a": [[c.real, c.imag] for c in self.a]}


def boundary_point(phi: ExteriorMap, theta):
    """``Phi(gamma e^{i theta})``."""
    return phi(phi.gamma * np.exp(1j * np.asarray(theta, dtype=float)))


def scale_factor(phi: ExteriorMap, theta):
    """Arclength speed ``h(theta) = gamma |Phi'(gamma e^{i theta})|`` so that ``d sigma = h d theta``.

    For ``gamma = 1`` this is the plain ``|Phi'|``. Raises if ``Phi'`` vanishes.
    """
    w = phi.gamma * np.exp(1j * np.asarray(theta, dtype=float))
    h = phi.gamma * np.abs(phi.derivative(w))
    if np.any(h <= 1e-14 * phi.gamma):
        raise InvalidMapError("the map derivative vanishes on the boundary circle")
    return h


def area(phi: ExteriorMap) -> float:
    """Enclosed area ``pi (gamma^2 - sum m |a_m|^2 gamma^{-2m})``."""
    g = phi.gamma
    s = sum(m * abs(phi.a[m]) ** 2 * g ** (-2 * m) for m in range(1, len(phi.a)))
    A = math.pi * (g * g - s)
    if A <= 0:
        raise InvalidMapError(f"nonpositive area {A:.6g}: the map is not univalent")
    return A


def shoelace_area(phi: ExteriorMap, n: int = 4096) -> float:
    z = boundary_point(phi, 2 * np.pi * np.arange(n) / n)
    x, y = z.real, z.imag
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def univalence_bound(phi: ExteriorMap) -> float:
    """``sum m |a_m| gamma^{-(m+1)}``; values ``<= 1`` guarantee univalence."""
    g = phi.gamma
    return sum(m * abs(phi.a[m]) * g ** (-(m + 1)) for m in range(1, len(phi.a)))


def _first_self_intersection(z: np.ndarray):
    """Return ``(i, j, point)`` for the first crossing of the closed polyline ``z``.

    Segments are bucketed on a uniform grid so the scan stays near-linear.
    """
    n = z.size
    p = z
    q = np.roll(z, -1)
    lo_x = np.minimum(p.real, q.real)
    hi_x = np.maximum(p.real, q.real)
    lo_y = np.minimum(p.imag, q.imag)
    hi_y = np.maximum(p.imag, q.imag)
    xmin, xmax = lo_x.min(), hi_x.max()
    ymin, ymax = lo_y.min(), hi_y.max()
    cells = max(1, int(math.sqrt(n)))
    sx = (xmax - xmin) / cells or 1.0
    sy = (ymax - ymin) / cells or 1.0
    grid: dict = {}
    for i in range(n):
        for cx in range(int((lo_x[i] - xmin) / sx), int((hi_x[i] - xmin) / sx) + 1):
            for cy in range(int((lo_y[i] - ymin) / sy), int((hi_y[i] - ymin) / sy) + 1):
                grid.setdefault((cx, cy), []).append(i)

    def cross(a, b):
        return a.real * b.imag - a.imag * b.real

    best = None
    for segs in grid.values():
        for u in range(len(segs)):
            i = segs[u]
            for v in range(u + 1, len(segs)):
                j = segs[v]
                if abs(i - j) <= 1 or abs(i - j) == n - 1:
                    continue
                r = q[i] - p[i]
                s = q[j] - p[j]
                den = cross(r, s)
                if den == 0:
                    continue
                t = cross(p[j] - p[i], s) / den
                uu = cross(p[j] - p[i], r) / den
                if 0 <= t <= 1 and 0 <= uu <= 1:
                    key = (min(i, j), max(i, j))
                    if best is None or key < best[:2]:
                        best = (key[0], key[1], complex(p[i] + t * r))
    return best


@dataclass
class ValidationReport:
    ok: bool
    method: str
    bound: float
    message: str = ""
    intersection: tuple | None = None

    def to_dict(self) -> dict:
        d = {"ok": self.ok, "method": self.method, "bound": self.bound, "message": self.message}
        if self.intersection is not None:
            i, j, pt = self.intersection
            d["intersection"] = {"segments": [i, j], "point": [pt.real, pt.imag]}
        return d


def validate(phi: ExteriorMap, samples: int = 8192, raise_on_failure: bool = False) -> ValidationReport:
    """Check univalence: the coefficient bound first, then a self-intersection scan.

    Both checks are heuristic in the sense that the scan only resolves the
    boundary at ``samples`` points; a vanishing derivative on the circle is
    also treated as a failure.
    """
    b = univalence_bound(phi)
    if b <= 1.0:
        rep = ValidationReport(True, "coefficient-bound", b)
    else:
        theta = 2 * np.pi * np.arange(samples) / samples
        w = phi.gamma * np.exp(1j * theta)
        dmin = float(np.min(np.abs(phi.derivative(w))))
        if dmin < 1e-8:
            rep = ValidationReport(False, "derivative", b, f"|Phi'| drops to {dmin:.3e} on the boundary circle")
        else:
            hit = _first_self_intersection(phi(w))
            if hit is None:
                try:
                    area(phi)
                    rep = ValidationReport(True, "self-intersection-scan", b)
                except InvalidMapError as exc:
                    rep = ValidationReport(False, "area", b, str(exc))
            else:
                i, j, pt = hit
                rep = ValidationReport(
                    False,
                    "self-intersection-scan",
                    b,
                    f"boundary crosses itself near {pt.real:.6g}{pt.imag:+.6g}i "
                    f"(samples {i} and {j} of {samples})",
                    hit,
                )
    if raise_on_failure and not rep.ok:
        raise InvalidMapError(rep.message)
    return rep


def inverse_map(phi: ExteriorMap, z, tol: float = 1e-14, maxiter: int = 60):
    """Solve ``Phi(w) = z`` for ``|w| > gamma`` by Newton's method started at ``w = z - a0``.

    Returns ``nan`` where the iteration does not settle outside the disk
    (typically for points inside the inclusion).
    """
    z = np.atleast_1d(np.asarray(z, dtype=np.complex128))
    w = z - phi.a[0]
    # push starts away from the circle
    small = np.abs(w) < 1.5 * phi.gamma
    ws = w[small]
    mag = np.abs(ws)
    ws = np.divide(ws, mag, out=np.ones_like(ws), where=mag > 0)
    w[small] = ws * 1.5 * phi.gamma
    for _ in range(maxiter):
        with np.errstate(divide="ignore", invalid="ignore"):
            step = (phi(w) - z) / phi.derivative(w)
        w = w - step
        if np.all(np.abs(step) <= tol * np.maximum(1.0, np.abs(w))):
            break
    bad = (np.abs(phi(w) - z) > 1e-9 * np.maximum(1.0, np.abs(z))) | (np.abs(w) < phi.gamma * (1 - 1e-12))
    w = w.astype(np.complex128)
    w[bad] = np.nan
    return w


# ----- shape files -----------------------------------------------------------

def map_from_dict(obj) -> ExteriorMap:
    if not isinstance(obj, dict):
        raise ShapeFileError("top level must be an object", "$")
    if "gamma" not in obj:
        raise ShapeFileError("missing required field", "gamma")
    g = obj["gamma"]
    if isinstance(g, bool) or not isinstance(g, (int, float)) or not g > 0:
        raise ShapeFileError(f"must be a positive number, got {g!r}", "gamma")
    a = obj.get("a", [[0.0, 0.0]])
    if not isinstance(a, list) or not a:
        raise ShapeFileError("must be a nonempty list of [re, im] pairs", "a")
    coeffs = []
    for k, pair in enumerate(a):
        if (
            not isinstance(pair, (list, tuple))
            or len(pair) != 2
            or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in pair)
        ):
            raise ShapeFileError(f"expected [re, im], got {pair!r}", f"a[{k}]")
        coeffs.append(complex(pair[0], pair[1]))
    try:
        return ExteriorMap(float(g), tuple(coeffs))
    except InvalidMapError as exc:
        raise ShapeFileError(str(exc), "a") from exc


def load_shape(path) -> ExteriorMap:
    """Read a shape file ``{"gamma": g, "a": [[re, im], ...]}``.

    A preset name (``disk``, ``ellipse``, ``egg``, ``trilobe``) is accepted in
    place of a path.
    """
    if str(path) in PRESETS:
        return PRESETS[str(path)]
    try:
        with open(path) as fh:
            text = fh.read()
    except OSError as exc:
        raise ShapeFileError(str(exc), str(path)) from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ShapeFileError(f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}", str(path)) from exc
    return map_from_dict(obj)


PRESETS: dict[str, ExteriorMap] = {
    "disk": ExteriorMap(1.0, (0j,)),
    "ellipse": ExteriorMap(1.0, (0j, 0.5)),
    "egg": ExteriorMap(1.0, (0j, 0.2, 0.15)),
    "trilobe": ExteriorMap(1.0, (0j, 0j, 0j, 0.2)),
}


def random_map(rng: np.random.Generator, degree: int, gamma_range=(0.5, 2.0), fill: float = 0.8,
               a0_scale: float = 1.0) -> ExteriorMap:
    """Random map of exact degree ``degree`` inside the univalence bound.

    The tail is drawn with random complex directions and rescaled so that the
    coefficient bound equals a random fraction (at most ``fill``) of 1.
    """
    g = rng.uniform(*gamma_range)
    a0 = a0_scale * complex(rng.normal(), rng.normal())
    if degree == 0:
        return ExteriorMap(g, (a0,))
    tail = rng.normal(size=degree) + 1j * rng.normal(size=degree)
    tail[-1] = tail[-1] if abs(tail[-1]) > 0.3 else 0.3 * np.exp(1j * rng.uniform(0, 2 * np.pi))
    m = np.arange(1, degree + 1)
    b = float(np.sum(m * np.abs(tail) * g ** (-(m + 1.0))))
    target = fill * rng.uniform(0.3, 1.0)
    tail = tail * (target / b)
    return ExteriorMap(g, (a0, *tail))


def as_map(obj: ExteriorMap | Sequence | str) -> ExteriorMap:
    if isinstance(obj, ExteriorMap):
        return obj
    if isinstance(obj, str):
        return load_shape(obj)
    raise TypeError(f"cannot interpret {obj!r} as an exterior map")
