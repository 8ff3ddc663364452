"""Kernel backend selection.

The hot numeric loops live in ``impl`` as plain scalar-loop functions. By
default they are compiled with numba's ``njit``; setting the environment
variable ``NULLDIST_PURE_NUMPY=1`` (or numba being unavailable) keeps the
pure-Python fallback. Both paths execute the identical source, so results
match bit for bit.
"""

import os
import warnings

from . import impl

_JIT_NAMES = (
    "t_of_u",
    "u_of_t",
    "scale_f",
    "scale_df",
    "phi_val",
    "phi_deriv",
    "tau_of_u",
    "nearest_image_delta",
    "spatial_dist",
    "chain_null_length",
    "refine_waypoints",
    "realize_chain",
    "max_polyline_length",
    "_geodesic_rhs",
    "geodesic_rk4",
    "lorentzian_length_builtin",
)


def _want_pure():
    return os.environ.get("NULLDIST_PURE_NUMPY", "").strip().lower() in {"1", "true", "yes"}


BACKEND = "numpy"

if not _want_pure():
    try:
        from numba import njit
    except ImportError:
        warnings.warn("numba unavailable; falling back to the pure-numpy kernels")
    else:
        for _name in _JIT_NAMES:
            setattr(impl, _name, njit(cache=True)(getattr(impl, _name)))
        BACKEND = "numba"

t_of_u = impl.t_of_u
u_of_t = impl.u_of_t
scale_f = impl.scale_f
scale_df = impl.scale_df
phi_val = impl.phi_val
phi_deriv = impl.phi_deriv
tau_of_u = impl.tau_of_u
nearest_image_delta = impl.nearest_image_delta
spatial_dist = impl.spatial_dist
chain_null_length = impl.chain_null_length
refine_waypoints = impl.refine_waypoints
realize_chain = impl.realize_chain
max_polyline_length = impl.max_polyline_length
geodesic_rk4 = impl.geodesic_rk4
lorentzian_length_builtin = impl.lorentzian_length_builtin
