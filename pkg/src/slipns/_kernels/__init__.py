"""Stencil kernel backend selection.

The compiled Cython kernels are used when available; the numpy
implementation is a drop-in fallback. Set SLIPNS_BACKEND=numpy or
SLIPNS_BACKEND=cython to force a choice (forcing cython without the
compiled module is an import error).
"""

import os

from . import _numpy_impl

_FUNCS = (
    "divergence",
    "gradient",
    "curl_face_to_edge",
    "curl_edge_to_face",
    "mass_flux_divergence",
    "momentum_advection",
    "velocity_faces",
)

_forced = os.environ.get("SLIPNS_BACKEND", "").strip().lower()

if _forced == "numpy":
    _impl = _numpy_impl
    BACKEND = "numpy"
else:
    try:
        from . import _stencils as _impl

        BACKEND = "cython"
    except ImportError:
        if _forced == "cython":
            raise ImportError(
                "SLIPNS_BACKEND=cython but the compiled kernels are missing; "
                "reinstall the package or unset the variable"
            )
        _impl = _numpy_impl
        BACKEND = "numpy"


def get_backend(name=None):
    """Return the kernel namespace for `name` (default: the active one)."""
    if name in (None, BACKEND):
        return _impl
    if name == "numpy":
        return _numpy_impl
    if name == "cython":
        from . import _stencils

        return _stencils
    raise ValueError(f"unknown backend {name!r}")


divergence = _impl.divergence
gradient = _impl.gradient
curl_face_to_edge = _impl.curl_face_to_edge
curl_edge_to_face = _impl.curl_edge_to_face
mass_flux_divergence = _impl.mass_flux_divergence
momentum_advection = _impl.momentum_advection
velocity_faces = _impl.velocity_faces
