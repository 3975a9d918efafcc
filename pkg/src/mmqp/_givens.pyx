# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled Givens re-triangularization kernel."""
from libc.math cimport hypot


def retriangularize(double[:, ::1] R, double[:, ::1] rowmat, double[:, ::1] colmat,
                    Py_ssize_t start):
    cdef Py_ssize_t rows = R.shape[0], cols = R.shape[1]
    cdef Py_ssize_t nrow = rowmat.shape[1], ncol = colmat.shape[0]
    cdef Py_ssize_t j, i, stop
    cdef double x, y, rho, c, s, a, b
    cdef long mults = 0, divs = 0, sqrts = 0
    stop = rows - 1 if rows - 1 < cols else cols
    for j in range(start, stop):
        x = R[j, j]
        y = R[j + 1, j]
        if y == 0.0 and x >= 0.0:
            continue
        rho = hypot(x, y)
        if rho == 0.0:
            continue
        c = x / rho
        s = y / rho
        for i in range(j + 1, cols):
            a = R[j, i]
            b = R[j + 1, i]
            R[j, i] = c * a + s * b
            R[j + 1, i] = c * b - s * a
        R[j, j] = rho
        R[j + 1, j] = 0.0
        for i in range(nrow):
            a = rowmat[j, i]
            b = rowmat[j + 1, i]
            rowmat[j, i] = c * a + s * b
            rowmat[j + 1, i] = c * b - s * a
        for i in range(ncol):
            a = colmat[i, j]
            b = colmat[i, j + 1]
            colmat[i, j] = c * a + s * b
            colmat[i, j + 1] = c * b - s * a
        mults += 2 + 4 * ((cols - j - 1) + nrow + ncol)
        divs += 2
        sqrts += 1
    return mults, divs, sqrts
