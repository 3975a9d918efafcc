"""Pure-Python/numpy Givens re-triangularization kernel (fallback backend)."""
import math


def retriangularize(R, rowmat, colmat, start):
    """Zero the subdiagonal of ``R`` from column ``start`` on, in place.

    Rotation ``j`` acts on rows ``j, j+1`` of ``R`` and ``rowmat`` and on
    columns ``j, j+1`` of ``colmat`` (which receives the transposed rotation
    from the right).  Returns ``(mults, divs, sqrts)``.
    """
    rows, cols = R.shape
    mults = divs = sqrts = 0
    for j in range(start, min(rows - 1, cols)):
        x = R[j, j]
        y = R[j + 1, j]
        if y == 0.0 and x >= 0.0:
            continue
        rho = math.hypot(x, y)
        if rho == 0.0:
            continue
        c = x / rho
        s = y / rho
        a = R[j, j + 1:].copy()
        b = R[j + 1, j + 1:].copy()
        R[j, j + 1:] = c * a + s * b
        R[j + 1, j + 1:] = c * b - s * a
        R[j, j] = rho
        R[j + 1, j] = 0.0
        if rowmat.shape[1]:
            a = rowmat[j].copy()
            b = rowmat[j + 1].copy()
            rowmat[j] = c * a + s * b
            rowmat[j + 1] = c * b - s * a
        if colmat.shape[0]:
            a = colmat[:, j].copy()
            b = colmat[:, j + 1].copy()
            colmat[:, j] = c * a + s * b
            colmat[:, j + 1] = c * b - s * a
        width = (cols - j - 1) + rowmat.shape[1] + colmat.shape[0]
        mults += 2 + 4 * width
        divs += 2
        sqrts += 1
    return mults, divs, sqrts
