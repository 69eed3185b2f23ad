"""Double-double matrix arithmetic for extended-precision reference values.

A double-double number is an unevaluated sum ``hi + lo`` of two binary64
values with ``|lo| <= ulp(hi) / 2``, giving roughly 32 significant decimal
digits.  Arrays are stored as pairs ``(hi, lo)``.  Only what the power
oracle needs is implemented: elementwise add/multiply and a matrix product.
"""

from __future__ import annotations

import mpmath
import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def _two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def _quick_two_sum(a, b):
    s = a + b
    return s, b - (s - a)


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a, b):
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd_add(x, y):
    """Accurate double-double addition."""
    xh, xl = x
    yh, yl = y
    s, e = _two_sum(xh, yh)
    t, f = _two_sum(xl, yl)
    e = e + t
    s, e = _quick_two_sum(s, e)
    e = e + f
    return _quick_two_sum(s, e)


def dd_mul(x, y):
    xh, xl = x
    yh, yl = y
    p, e = _two_prod(xh, yh)
    e = e + (xh * yl + xl * yh)
    return _quick_two_sum(p, e)


def dd_matmul(x, y):
    """Product of two double-double matrices given as ``(hi, lo)`` pairs."""
    xh, xl = x
    yh, yl = y
    if xh.shape[1] != yh.shape[0]:
        raise ValueError(f"cannot multiply {xh.shape} by {yh.shape}")
    shape = (xh.shape[0], yh.shape[1])
    acc = (np.zeros(shape), np.zeros(shape))
    for k in range(xh.shape[1]):
        col = (xh[:, k:k + 1], xl[:, k:k + 1])
        row = (yh[k:k + 1, :], yl[k:k + 1, :])
        acc = dd_add(acc, dd_mul(col, row))
    return acc


def dd_repeated_squares(x, count: int):
    """Double-double analogue of :func:`ssmcascade.linalg.repeated_squares`."""
    powers = [x]
    for _ in range(count - 1):
        powers.append(dd_matmul(powers[-1], powers[-1]))
    return powers


def from_mpmath(mat) -> tuple[np.ndarray, np.ndarray]:
    """Round an ``mpmath.matrix`` to double-double."""
    rows, cols = mat.rows, mat.cols
    hi = np.empty((rows, cols))
    lo = np.empty((rows, cols))
    for i in range(rows):
        for j in range(cols):
            v = mat[i, j]
            h = float(v)
            hi[i, j] = h
            lo[i, j] = float(v - h)
    return hi, lo


def to_mpmath(x) -> mpmath.matrix:
    hi, lo = x
    out = mpmath.matrix(hi.shape[0], hi.shape[1])
    for i in range(hi.shape[0]):
        for j in range(hi.shape[1]):
            out[i, j] = mpmath.mpf(float(hi[i, j])) + mpmath.mpf(float(lo[i, j]))
    return out


def hippo_bilinear_mp(m: int, delta, dps: int = 40) -> mpmath.matrix:
    """Bilinear-discretized HiPPO state matrix computed in ``dps`` digits.

    Built directly from the defining formula with mpmath (forward
    substitution on the lower-triangular ``I - delta/2 A``), so it shares
    no floating-point code with the binary64 path.
    """
    with mpmath.workdps(dps):
        delta = mpmath.mpf(delta)
        half = delta / 2
        r = [mpmath.sqrt(2 * n + 1) for n in range(1, m + 1)]
        a = mpmath.matrix(m, m)
        for i in range(m):
            for k in range(i):
                a[i, k] = -r[i] * r[k]
            a[i, i] = -(i + 2)
        lhs = mpmath.matrix(m, m)
        rhs = mpmath.matrix(m, m)
        for i in range(m):
            for k in range(i + 1):
                ident = 1 if i == k else 0
                lhs[i, k] = ident - half * a[i, k]
                rhs[i, k] = ident + half * a[i, k]
        out = mpmath.matrix(m, m)
        for j in range(m):
            for i in range(j, m):
                acc = rhs[i, j]
                for k in range(j, i):
                    acc -= lhs[i, k] * out[k, j]
                out[i, j] = acc / lhs[i, i]
        return out
