"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each kernel is timed on both backends with identical inputs; the outputs are
checked for agreement before timing. The package dispatches the Cauchy
product to numpy on both backends; the compiled loop is timed here to show why.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from rigidemt import PRESETS
from rigidemt._kernels import _fallback
from rigidemt.oracle import discretize

try:
    from rigidemt._kernels import _core
except ImportError:  # pragma: no cover
    _core = None


def cases():
    rng = np.random.default_rng(0)
    a = rng.normal(size=400) + 1j * rng.normal(size=400)
    b = rng.normal(size=300) + 1j * rng.normal(size=300)
    yield "laurent_mul 400x300", "laurent_mul", (a, b)
    yield "laurent_mul 64x64", "laurent_mul", (a[:64], b[:64])
    for n in (256, 512):
        bd = discretize(PRESETS["egg"], n)
        yield f"kelvin_boundary_matrices n={n}", "kelvin_boundary_matrices", (bd.z, bd.dz, bd.t)
    bd = discretize(PRESETS["trilobe"], 512)
    psi = rng.normal(size=512) + 1j * rng.normal(size=512)
    tg = 3.0 * np.exp(1j * np.linspace(0, 2 * np.pi, 2000))
    yield "kelvin_apply 2000 targets x 512 nodes", "kelvin_apply", (tg, bd.z, psi, 2 * np.pi / 512, 0.6, 0.2)


def _agree(x, y):
    if isinstance(x, tuple):
        return all(_agree(u, v) for u, v in zip(x, y))
    return np.allclose(x, y, rtol=1e-12, atol=1e-12)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if _core is None:
        print("compiled extension not built; nothing to compare")
        return
    print(f"{'kernel':42s} {'compiled ms':>12s} {'fallback ms':>12s} {'speedup':>8s}")
    for label, name, inputs in cases():
        fc, ff = getattr(_core, name), getattr(_fallback, name)
        if not _agree(fc(*inputs), ff(*inputs)):
            raise SystemExit(f"{label}: backends disagree")
        tc = min(timeit.repeat(lambda: fc(*inputs), number=1, repeat=args.repeat)) * 1e3
        tf = min(timeit.repeat(lambda: ff(*inputs), number=1, repeat=args.repeat)) * 1e3
        print(f"{label:42s} {tc:12.3f} {tf:12.3f} {tf / tc:7.1f}x")


if __name__ == "__main__":
    main()
