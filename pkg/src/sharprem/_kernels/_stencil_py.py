"""Pure-numpy stencil kernels (fallback for the compiled core)."""

import numpy as np


def _inner(ndim):
    return tuple(slice(1, -1) for _ in range(ndim))


def _shifted(ndim, axis, step):
    # inner block shifted by ±1 along one axis
    sl = [slice(1, -1)] * ndim
    sl[axis] = slice(2, None) if step > 0 else slice(None, -2)
    return tuple(sl)


def axis_diff_array(u, coeff, axis, inv2h, out):
    inner = _inner(u.ndim)
    np.add(
        out[inner],
        coeff[inner] * (u[_shifted(u.ndim, axis, +1)] - u[_shifted(u.ndim, axis, -1)]) * inv2h,
        out=out[inner],
    )


def axis_diff_const(u, coeff, axis, inv2h, out):
    inner = _inner(u.ndim)
    np.add(
        out[inner],
        (u[_shifted(u.ndim, axis, +1)] - u[_shifted(u.ndim, axis, -1)]) * (coeff * inv2h),
        out=out[inner],
    )
