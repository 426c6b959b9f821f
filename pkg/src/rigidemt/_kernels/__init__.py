"""Hot kernels with a compiled core and a numpy fallback.

The compiled extension is used when it imports; set ``RIGIDEMT_PURE_PYTHON=1``
to force the fallback.
"""
import os

from . import _fallback

BACKEND = "python"

if os.environ.get("RIGIDEMT_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _core as _impl

        BACKEND = "compiled"
    except ImportError:  # extension not built
        _impl = _fallback
else:
    _impl = _fallback

# np.convolve beats the compiled loop except for very short series (see
# benchmarks/bench_kernels.py), so the Cauchy product always uses numpy.
laurent_mul = _fallback.laurent_mul
kelvin_boundary_matrices = _impl.kelvin_boundary_matrices
kelvin_apply = _impl.kelvin_apply

__all__ = [
    "BACKEND",
    "laurent_mul",
    "kelvin_boundary_matrices",
    "kelvin_apply",
]
