# Compiled stencil kernels: fused coefficient * centered-difference
# accumulation on the inner block of 1/2/3-dimensional grids.
#
# The bodies only ever index the inner block, so neighbour reads at +/-1
# stay inside the array without bounds checks.

cimport cython


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_1d(const double[::1] u, const double[::1] c, double inv2h, double[::1] out):
    cdef Py_ssize_t i, n = u.shape[0]
    for i in range(1, n - 1):
        out[i] += c[i] * (u[i + 1] - u[i - 1]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_1d_const(const double[::1] u, double c, double inv2h, double[::1] out):
    cdef Py_ssize_t i, n = u.shape[0]
    cdef double s = c * inv2h
    for i in range(1, n - 1):
        out[i] += (u[i + 1] - u[i - 1]) * s


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_2d_ax0(const double[:, ::1] u, const double[:, ::1] c, double inv2h,
                     double[:, ::1] out):
    cdef Py_ssize_t i, j, n0 = u.shape[0], n1 = u.shape[1]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            out[i, j] += c[i, j] * (u[i + 1, j] - u[i - 1, j]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_2d_ax0_const(const double[:, ::1] u, double c, double inv2h,
                           double[:, ::1] out):
    cdef Py_ssize_t i, j, n0 = u.shape[0], n1 = u.shape[1]
    cdef double s = c * inv2h
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            out[i, j] += (u[i + 1, j] - u[i - 1, j]) * s


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_2d_ax1(const double[:, ::1] u, const double[:, ::1] c, double inv2h,
                     double[:, ::1] out):
    cdef Py_ssize_t i, j, n0 = u.shape[0], n1 = u.shape[1]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            out[i, j] += c[i, j] * (u[i, j + 1] - u[i, j - 1]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_2d_ax1_const(const double[:, ::1] u, double c, double inv2h,
                           double[:, ::1] out):
    cdef Py_ssize_t i, j, n0 = u.shape[0], n1 = u.shape[1]
    cdef double s = c * inv2h
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            out[i, j] += (u[i, j + 1] - u[i, j - 1]) * s


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax0(const double[:, :, ::1] u, const double[:, :, ::1] c, double inv2h,
                     double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += c[i, j, k] * (u[i + 1, j, k] - u[i - 1, j, k]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax0_const(const double[:, :, ::1] u, double c, double inv2h,
                           double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef double s = c * inv2h
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += (u[i + 1, j, k] - u[i - 1, j, k]) * s


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax1(const double[:, :, ::1] u, const double[:, :, ::1] c, double inv2h,
                     double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += c[i, j, k] * (u[i, j + 1, k] - u[i, j - 1, k]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax1_const(const double[:, :, ::1] u, double c, double inv2h,
                           double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef double s = c * inv2h
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += (u[i, j + 1, k] - u[i, j - 1, k]) * s


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax2(const double[:, :, ::1] u, const double[:, :, ::1] c, double inv2h,
                     double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += c[i, j, k] * (u[i, j, k + 1] - u[i, j, k - 1]) * inv2h


@cython.boundscheck(False)
@cython.wraparound(False)
def axis_diff_3d_ax2_const(const double[:, :, ::1] u, double c, double inv2h,
                           double[:, :, ::1] out):
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t n0 = u.shape[0], n1 = u.shape[1], n2 = u.shape[2]
    cdef double s = c * inv2h
    for i in range(1, n0 - 1):
        for j in range(1, n1 - 1):
            for k in range(1, n2 - 1):
                out[i, j, k] += (u[i, j, k + 1] - u[i, j, k - 1]) * s
