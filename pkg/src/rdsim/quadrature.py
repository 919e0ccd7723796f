"""Adaptive Simpson quadrature on finite intervals."""
from __future__ import annotations

import math
from typing import Callable, Sequence

from .tolerances import QUAD_TOL


def adaptive_simpson(f: Callable[[float], float], a: float, b: float,
                     tol: float = QUAD_TOL, max_depth: int = 60) -> float:
    """Integrate ``f`` over [a, b] with Richardson-corrected adaptive Simpson."""
    if a == b:
        return 0.0
    if b < a:
        return -adaptive_simpson(f, b, a, tol, max_depth)
    fa, fb = f(a), f(b)
    m = 0.5 * (a + b)
    fm = f(m)
    whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb)
    total = 0.0
    # explicit stack: (a, b, fa, fm, fb, whole, tol, depth)
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        a, b, fa, fm, fb, whole, eps, depth = stack.pop()
        m = 0.5 * (a + b)
        lm, rm = 0.5 * (a + m), 0.5 * (m + b)
        flm, frm = f(lm), f(rm)
        left = (m - a) / 6.0 * (fa + 4.0 * flm + fm)
        right = (b - m) / 6.0 * (fm + 4.0 * frm + fb)
        delta = left + right - whole
        if depth >= max_depth or abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
        else:
            stack.append((a, m, fa, flm, fm, left, 0.5 * eps, depth + 1))
            stack.append((m, b, fm, frm, fb, right, 0.5 * eps, depth + 1))
    return total


def integrate_pieces(f: Callable[[float], float], breakpoints: Sequence[float],
                     tol: float = QUAD_TOL) -> float:
    """Sum of adaptive Simpson integrals between consecutive breakpoints."""
    pts = sorted(breakpoints)
    pieces = [(lo, hi) for lo, hi in zip(pts[:-1], pts[1:]) if hi > lo]
    if not pieces:
        return 0.0
    span = pts[-1] - pts[0]
    return math.fsum(adaptive_simpson(f, lo, hi, tol * (hi - lo) / span) for lo, hi in pieces)
