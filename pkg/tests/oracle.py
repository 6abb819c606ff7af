"""Exact reference values by symbolic integration, independent of the
package's signal algebra and quadrature."""

from __future__ import annotations

import sympy as sp

t = sp.Symbol("t", real=True)


def _pieces(knots, exprs):
    return list(zip(knots, knots[1:], exprs))


# rate of the schedule and the drive shape on each interval
EX1 = {
    "kdot": _pieces([0, 1, 2, 3, 4], [-1, 0, 1, 0]),
    "x": _pieces([0, 2, 4], [t, 4 - t]),
}
EX2 = {
    "kdot": _pieces([0, 1, 2, 3, 4, 5, 6], [-sp.Rational(1, 2), 0, -sp.Rational(1, 2), 0, 1, 0]),
    "x": _pieces([0, 3, 6], [t, 6 - t]),
}


def _at(pieces, a, b):
    for lo, hi, e in pieces:
        if lo <= a and b <= hi:
            return sp.sympify(e)
    raise ValueError("interval straddles a knot")


def integral(ex, weight):
    """``int weight(kdot, x) dt`` over the whole example, exactly."""
    knots = sorted({p for key in ("kdot", "x") for lo, hi, _ in ex[key] for p in (lo, hi)})
    total = 0
    for a, b in zip(knots, knots[1:]):
        total += sp.integrate(weight(_at(ex["kdot"], a, b), _at(ex["x"], a, b)), (t, a, b))
    return sp.nsimplify(total)


def half_kdot_x2(ex):
    return integral(ex, lambda kd, x: sp.Rational(1, 2) * kd * x**2)


def half_abs_kdot_x2(ex):
    return integral(ex, lambda kd, x: sp.Rational(1, 2) * sp.Abs(kd) * x**2)
