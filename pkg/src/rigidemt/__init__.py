"""Elastic moment tensors of rigid planar inclusions from exterior conformal maps."""
from ._kernels import BACKEND
from .elastic import LameMaterial, Loading, constants
from .geometry import PRESETS, ExteriorMap

__version__ = "0.1.0"

__all__ = ["BACKEND", "ExteriorMap", "LameMaterial", "Loading", "PRESETS", "constants", "__version__"]
