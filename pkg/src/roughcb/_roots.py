"""Inversion of smooth, convex, increasing functions on [0, inf)."""

from __future__ import annotations

import math

_EPS = 2.220446049250313e-16


def invert_increasing(f, df, y, hi, x0=None, max_iter=400):
    """Solve ``f(x) = y`` on ``[0, hi]`` for increasing ``f`` with ``f(0) = 0``.

    Newton steps are kept inside the current bracket.  After 8 consecutive
    steps that fail to halve the residual the iteration falls back to
    bisection.  ``hi`` must satisfy ``f(hi) >= y``.
    """
    if y == 0.0:
        return 0.0
    lo = 0.0
    x = hi if x0 is None else min(max(x0, 0.0), hi)
    stalls = 0
    prev = math.inf
    for _ in range(max_iter):
        r = f(x) - y
        if r == 0.0:
            return x
        if r > 0.0:
            hi = x
        else:
            lo = x
        if hi - lo <= 4.0 * _EPS * hi:
            return 0.5 * (lo + hi)
        if abs(r) > 0.5 * prev:
            stalls += 1
        else:
            stalls = 0
        prev = abs(r)
        xn = math.nan
        if stalls < 8:
            d = df(x)
            if d > 0.0 and math.isfinite(d):
                xn = x - r / d
        if not (lo < xn < hi):
            xn = 0.5 * (lo + hi)
            stalls = 0
            prev = math.inf
        if abs(xn - x) <= 2.0 * _EPS * abs(x):
            return xn
        x = xn
    return x
