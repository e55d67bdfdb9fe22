"""Numeric kernel backends.

The hot inner loops of the transform catalog (resampling, spline evaluation,
pooling, quantization, convolution) live behind this package. At import time
we select the compiled Cython extension when it is available and fall back
to the pure NumPy twin otherwise. The environment variable
``ADAPTAUG_KERNELS`` forces a choice:

    ADAPTAUG_KERNELS=python   always use the NumPy fallback
    ADAPTAUG_KERNELS=cython   require the extension (ImportError if missing)
    ADAPTAUG_KERNELS=auto     default behaviour

``benchmarks/bench_kernels.py`` compares the two backends.
"""

from __future__ import annotations

import os
from types import ModuleType

from . import pure

KERNEL_NAMES = (
    "resample_linear",
    "interp_linear",
    "natural_cubic_curve",
    "pool_average",
    "quantize_uniform",
    "convolve_reflect",
)

try:
    from . import _fast
except ImportError:
    _fast = None

_BACKENDS: dict[str, ModuleType | None] = {"python": pure, "cython": _fast}
_active_name = "python"


def available_backends() -> tuple[str, ...]:
    return tuple(name for name, mod in _BACKENDS.items() if mod is not None)


def backend_name() -> str:
    """Name of the backend currently bound to the kernel functions."""
    return _active_name


def set_backend(name: str) -> None:
    """Rebind the module-level kernel functions to the named backend."""
    global _active_name
    mod = _BACKENDS.get(name)
    if mod is None:
        raise ImportError(f"kernel backend {name!r} is not available")
    for fn in KERNEL_NAMES:
        globals()[fn] = getattr(mod, fn)
    _active_name = name


_requested = os.environ.get("ADAPTAUG_KERNELS", "auto").lower()
if _requested == "python":
    set_backend("python")
elif _requested == "cython":
    set_backend("cython")
else:
    set_backend("cython" if _fast is not None else "python")
