"""Adaptive Simpson quadrature for the metric integrals.

Segment boundaries are supplied by the callers so that integrand kinks
(finite-support breakpoints) never fall inside a panel.
"""

from __future__ import annotations

MAX_DEPTH = 40
ABS_FLOOR = 1e-14


def _simpson(fa, fm, fb, h):
    return h / 6.0 * (fa + 4.0 * fm + fb)


def _adapt(f, a, m, b, fa, fm, fb, whole, rel_tol, depth):
    lm = 0.5 * (a + m)
    rm = 0.5 * (m + b)
    flm = f(lm)
    frm = f(rm)
    left = _simpson(fa, flm, fm, m - a)
    right = _simpson(fm, frm, fb, b - m)
    delta = left + right - whole
    if depth >= MAX_DEPTH or abs(delta) <= 15.0 * max(rel_tol * abs(left + right), ABS_FLOOR):
        return left + right + delta / 15.0
    return (_adapt(f, a, lm, m, fa, flm, fm, left, rel_tol, depth + 1)
            + _adapt(f, m, rm, b, fm, frm, fb, right, rel_tol, depth + 1))


def adaptive_simpson(f, a: float, b: float, rel_tol: float = 1e-8) -> float:
    """Integrate the scalar function f over [a, b]."""
    if not b > a:
        return 0.0
    m = 0.5 * (a + b)
    fa, fm, fb = f(a), f(m), f(b)
    whole = _simpson(fa, fm, fb, b - a)
    return _adapt(f, a, m, b, fa, fm, fb, whole, rel_tol, 0)


def integrate_segments(f, knots, rel_tol: float = 1e-8) -> float:
    """Integrate f over consecutive [knots[i], knots[i+1]] panels and sum."""
    total = 0.0
    for a, b in zip(knots[:-1], knots[1:]):
        if b > a:
            total += adaptive_simpson(f, a, b, rel_tol)
    return total
