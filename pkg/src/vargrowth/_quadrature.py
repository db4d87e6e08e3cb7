"""Small quadrature helpers shared by the density machinery."""

from __future__ import annotations

from functools import lru_cache
from typing import Callable

import numpy as np


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float, max_depth: int = 48) -> float:
    """Integrate f over [a, b] to absolute tolerance tol.

    Classic recursive Simpson with Richardson correction; the integrand is
    assumed smooth on the (open) interval, so callers must split at kinks.
    """
    if b <= a:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    return _simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, max_depth)


def _simpson_rec(f, a, m, b, fa, fm, fb, whole, tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
    right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
    delta = left + right - whole
    if depth <= 0 or abs(delta) <= 15.0 * tol:
        return left + right + delta / 15.0
    half = 0.5 * tol
    return (_simpson_rec(f, a, lm, m, fa, flm, fm, left, half, depth - 1)
            + _simpson_rec(f, m, rm, b, fm, frm, fb, right, half, depth - 1))


@lru_cache(maxsize=64)
def gauss_legendre(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights on [-1, 1], cached per order."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w
