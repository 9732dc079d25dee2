"""Backend selection for the raster kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise,
or when ``FLOORVEC_PURE_PYTHON=1`` is set, the numpy fallback is used.
``BACKEND`` names the active choice.
"""

import os

from . import _kernels_py as python_backend

compiled_backend = None
if os.environ.get("FLOORVEC_PURE_PYTHON", "") not in ("1", "true", "yes"):
    try:
        from . import _ckernels as compiled_backend
    except ImportError:  # extension not built
        compiled_backend = None

_impl = compiled_backend if compiled_backend is not None else python_backend
BACKEND = "compiled" if compiled_backend is not None else "python"

fill_polygon = _impl.fill_polygon
splat_gaussian = _impl.splat_gaussian
local_maxima = _impl.local_maxima
nms_keep = _impl.nms_keep
confusion_matrix = _impl.confusion_matrix


def select(name: str) -> None:
    """Switch the active backend at runtime (``"compiled"`` or ``"python"``)."""
    global _impl, BACKEND, fill_polygon, splat_gaussian, local_maxima, nms_keep, confusion_matrix
    if name == "compiled":
        if compiled_backend is None:
            raise RuntimeError("compiled kernels are not available")
        _impl = compiled_backend
    elif name == "python":
        _impl = python_backend
    else:
        raise ValueError(f"unknown backend {name!r}")
    BACKEND = name
    fill_polygon = _impl.fill_polygon
    splat_gaussian = _impl.splat_gaussian
    local_maxima = _impl.local_maxima
    nms_keep = _impl.nms_keep
    confusion_matrix = _impl.confusion_matrix
