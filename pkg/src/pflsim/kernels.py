"""Kernel backend selection.

The compiled extension ``pflsim._core`` is preferred; the pure-Python module
``pflsim._core_py`` is the fallback and the reference implementation. Force a
backend with ``PFLSIM_BACKEND=python`` or ``PFLSIM_BACKEND=cython``.
"""

import os

from . import _core_py

_requested = os.environ.get("PFLSIM_BACKEND", "").lower()

if _requested == "python":
    _impl = _core_py
elif _requested == "cython":
    from . import _core as _impl  # hard failure if forced but unavailable
else:
    try:
        from . import _core as _impl
    except ImportError:
        _impl = _core_py

BACKEND = _impl.BACKEND

p3r_fk = _impl.p3r_fk
p3r_jac = _impl.p3r_jac
p3r_jacdot = _impl.p3r_jacdot
p3r_mass = _impl.p3r_mass
p3r_coriolis = _impl.p3r_coriolis
p3r_gravity = _impl.p3r_gravity
mdh_frames = _impl.mdh_frames
mdh_fk = _impl.mdh_fk
mdh_jac_geo = _impl.mdh_jac_geo
mdh_rnea = _impl.mdh_rnea
mdh_bias = _impl.mdh_bias
mdh_mass = _impl.mdh_mass


def backend_name():
    """Name of the active kernel backend ('cython' or 'python')."""
    return BACKEND
