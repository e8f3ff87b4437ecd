"""Bracketed scalar maximization by golden-section search."""
from __future__ import annotations

import math

from .errors import ConvergenceError

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
INV_PHI2 = (3.0 - math.sqrt(5.0)) / 2.0


def golden_section_max(f, lo, hi, tol=1e-8, max_iter=200):
    """Maximize a unimodal ``f`` on [lo, hi].

    The iteration count is fixed by the tolerance, so the result is fully
    deterministic.  On equal probe values the left half is kept, which breaks
    plateau ties toward the smaller argument.

    Returns
    -------
    (x_star, f_star)
    """
    lo, hi = float(lo), float(hi)
    if not hi > lo:
        raise ValueError("need hi > lo")
    h = hi - lo
    n = max(0, math.ceil(math.log(tol / h) / math.log(INV_PHI)))
    if n > max_iter:
        raise ConvergenceError(
            f"golden-section needs {n} iterations for tol={tol}, cap is {max_iter}")

    a, b = lo, hi
    c = a + INV_PHI2 * h
    d = a + INV_PHI * h
    fc, fd = f(c), f(d)
    for _ in range(n):
        if fc >= fd:
            b, d, fd = d, c, fc
            h *= INV_PHI
            c = a + INV_PHI2 * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h *= INV_PHI
            d = a + INV_PHI * h
            fd = f(d)

    if b - a > tol * (1 + 1e-9) + 4 * math.ulp(hi):
        raise ConvergenceError(f"bracket width {b - a} above tolerance {tol}", values=(a, b))
    x = c if fc >= fd else d
    return x, f(x)
