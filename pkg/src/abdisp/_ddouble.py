"""Compensated double-double arithmetic on numpy arrays.

A value is carried as a (hi, lo) pair of float64 arrays with hi + lo the
intended number and |lo| <= ulp(hi)/2.  Only the handful of operations the
alternating Bessel series needs are provided.  The algorithms are the
classical error-free transformations (Knuth two-sum, Dekker split/product)
and therefore vectorize with plain numpy ufuncs.
"""

from __future__ import annotations

import numpy as np

_SPLITTER = 134217729.0  # 2**27 + 1


def two_sum(a, b):
    s = a + b
    bb = s - a
    err = (a - (s - bb)) + (b - bb)
    return s, err


def quick_two_sum(a, b):
    # requires |a| >= |b| elementwise
    s = a + b
    err = b - (s - a)
    return s, err


def split(a):
    t = _SPLITTER * a
    hi = t - (t - a)
    lo = a - hi
    return hi, lo


def two_prod(a, b):
    p = a * b
    ah, al = split(a)
    bh, bl = split(b)
    err = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, err


def dd(a):
    """Promote a float/array to a (hi, lo) pair."""
    a = np.asarray(a, dtype=np.float64)
    return a.copy(), np.zeros_like(a)


def dd_add(x, y):
    xh, xl = x
    yh, yl = y
    s1, s2 = two_sum(xh, yh)
    t1, t2 = two_sum(xl, yl)
    s2 = s2 + t1
    s1, s2 = quick_two_sum(s1, s2)
    s2 = s2 + t2
    return quick_two_sum(s1, s2)


def dd_mul(x, y):
    xh, xl = x
    yh, yl = y
    p1, p2 = two_prod(xh, yh)
    p2 = p2 + (xh * yl + xl * yh)
    return quick_two_sum(p1, p2)


def dd_div(x, y):
    xh, xl = x
    yh, yl = y
    q1 = xh / yh
    p1, p2 = two_prod(q1, yh)
    s, e = two_sum(xh, -p1)
    e = e + xl - p2 - q1 * yl
    q2 = (s + e) / yh
    return quick_two_sum(q1, q2)


def dd_neg(x):
    return -x[0], -x[1]


def dd_abs_hi(x):
    return np.abs(x[0])


def dd_to_float(x):
    return x[0] + x[1]
