"""Hot stencil kernels with a compiled core and a pure-numpy fallback.

Every first-order vector-field application reduces to repeated calls of

    out[inner] += coeff[inner] * (u[shift +1 along axis] - u[shift -1]) * inv2h

where ``inner`` is the grid with the outermost layer stripped on every axis.
That accumulation dominates the runtime of the identity evaluators, so it is
implemented twice: in Cython (``_stencil_cy``, built by setup.py) and in
numpy slicing (``_stencil_py``).  The compiled module is preferred when
importable; set ``SHARPREM_PURE_PYTHON=1`` to force the fallback.
"""

import os

import numpy as np

from . import _stencil_py

if os.environ.get("SHARPREM_PURE_PYTHON", "").strip() not in ("", "0"):
    _impl = None
else:
    try:
        from . import _stencil_cy as _impl
    except ImportError:
        _impl = None

KERNEL_BACKEND = "numpy" if _impl is None else "cython"

_CY_ARRAY = {} if _impl is None else {
    (1, 0): _impl.axis_diff_1d,
    (2, 0): _impl.axis_diff_2d_ax0,
    (2, 1): _impl.axis_diff_2d_ax1,
    (3, 0): _impl.axis_diff_3d_ax0,
    (3, 1): _impl.axis_diff_3d_ax1,
    (3, 2): _impl.axis_diff_3d_ax2,
}
_CY_CONST = {} if _impl is None else {
    (1, 0): _impl.axis_diff_1d_const,
    (2, 0): _impl.axis_diff_2d_ax0_const,
    (2, 1): _impl.axis_diff_2d_ax1_const,
    (3, 0): _impl.axis_diff_3d_ax0_const,
    (3, 1): _impl.axis_diff_3d_ax1_const,
    (3, 2): _impl.axis_diff_3d_ax2_const,
}


def accumulate_axis_diff(u, coeff, axis, inv2h, out, force_numpy=False):
    """out[inner] += coeff * centered difference of u along ``axis``.

    ``coeff`` may be a scalar or an array of u's shape.  Values outside the
    inner block are never written.  Arrays must be C-contiguous float64.
    """
    key = (u.ndim, axis)
    if np.isscalar(coeff) or getattr(coeff, "ndim", 0) == 0:
        c = float(coeff)
        if c == 0.0:
            return
        if not force_numpy and key in _CY_CONST:
            _CY_CONST[key](u, c, inv2h, out)
        else:
            _stencil_py.axis_diff_const(u, c, axis, inv2h, out)
    else:
        if not force_numpy and key in _CY_ARRAY:
            _CY_ARRAY[key](u, coeff, inv2h, out)
        else:
            _stencil_py.axis_diff_array(u, coeff, axis, inv2h, out)
