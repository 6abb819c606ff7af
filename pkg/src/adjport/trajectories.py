"""Canonical worked-example trajectories, the indexed families built from
them, and randomized admissible inputs for property checks.

Each example is stated as a pair of patterns ``(k, s)``: a positive
schedule and a drive shape.  :func:`adapt` maps a pattern pair onto the
parameter and drive of a particular law, so the same family shape can be
applied to active and lossless laws alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import signals as sg
from .devices import DRIVE_KIND, LAW_IDS, LOSSLESS_LAWS, DeviceError
from .energy import FamilyMember, TrajectoryFamily
from .signals import PiecewiseSignal, Segment, Signal

__all__ = [
    "Pattern",
    "example1",
    "example2",
    "example3",
    "example4",
    "adapt",
    "family",
    "CANONICAL_FAMILY",
    "FAMILY_IDS",
    "hermite",
    "random_case",
]

TWO_PI = 2.0 * math.pi

# laws whose drive pattern is a velocity (inerter-like) rather than a displacement
VELOCITY_PATTERN = ("direct-inerter", "flyweight-inerter", "varinerter", "rotary-varinerter")


@dataclass(frozen=True)
class Pattern:
    """Schedule ``k`` and drive shape ``s`` over ``[t0, t1]``."""

    k: PiecewiseSignal
    s: PiecewiseSignal
    t0: float
    t1: float


def example1() -> Pattern:
    """Spring cycle: ``x`` rises then falls, ``k`` drops while ``x`` is small
    and recovers while it is large."""
    k = sg.from_rates(2.0, [0, 1, 2, 3, 4], [-1.0, 0.0, 1.0, 0.0])
    x = sg.piecewise_linear([0, 2, 4], [0, 2, 0])
    return Pattern(k, x, 0.0, 4.0)


def example2() -> Pattern:
    k = sg.from_rates(2.0, [0, 1, 2, 3, 4, 5, 6], [-0.5, 0.0, -0.5, 0.0, 1.0, 0.0])
    x = sg.piecewise_linear([0, 3, 6], [0, 3, 0])
    return Pattern(k, x, 0.0, 6.0)


def example3(n: int) -> Pattern:
    """``k = 2 + sin 2 pi t`` with ``x = 1`` on ``[0, n]``, then ``k = 2`` and
    ``x = t + 1 - n`` on ``[n, 2n]``."""
    n = _check_index(n)
    k = PiecewiseSignal([sg.make_sinusoid_segment(2.0, 1.0, TWO_PI, 0.0, (0, n)),
                         sg.make_poly_segment([2.0], (n, 2 * n))])
    x = PiecewiseSignal([sg.make_poly_segment([1.0], (0, n)),
                         sg.make_poly_segment([1.0, 1.0], (n, 2 * n))])
    return Pattern(k, x, 0.0, 2.0 * n)


def example4(n: int) -> Pattern:
    """``k = 2 + cos 2 pi t`` and ``x = sin 2 pi t`` on ``[0, n + 3/4]``."""
    n = _check_index(n)
    t1 = n + 0.75
    k = PiecewiseSignal([sg.make_sinusoid_segment(2.0, 1.0, TWO_PI, math.pi / 2, (0, t1))])
    x = PiecewiseSignal([sg.make_sinusoid_segment(0.0, 1.0, TWO_PI, 0.0, (0, t1))])
    return Pattern(k, x, 0.0, t1)


def _check_index(n) -> int:
    if int(n) != n or n < 1:
        raise ValueError(f"family index must be a positive integer, got {n!r}")
    return int(n)


def adapt(law_id: str, pattern: Pattern) -> tuple[Signal, Signal]:
    """Parameter and drive signals of ``law_id`` for a pattern pair.

    Active laws take ``k`` itself.  Lossless laws take ``sqrt(k)`` (or its
    reciprocal for the force-driven spring forms), which gives the same
    frozen-parameter element.  Inerter-like laws integrate ``s`` so that it
    becomes the velocity.
    """
    if law_id not in LAW_IDS:
        raise DeviceError(f"unknown law id {law_id!r}")
    k, s = pattern.k, pattern.s
    if law_id in LOSSLESS_LAWS:
        root = sg.sqrt(k)
        param = sg.reciprocal(root) if law_id in ("varspring-dual", "rotary-varspring") else root
    else:
        param = k
    drive = s.antiderivative() if law_id in VELOCITY_PATTERN else s
    return param, drive


_REPEATED = {"ex1": example1, "ex2": example2}
_INDEXED = {"ex3": example3, "ex4": example4}
FAMILY_IDS = ("ex1", "ex2", "ex3", "ex4")
CANONICAL_FAMILY = {
    "direct-spring": "ex1",
    "smoothing-spring": "ex2",
    "up-smoothing-spring": "ex3",
    "semi-smoothing-spring": "ex4",
    "direct-inerter": "ex1",
    "flyweight-inerter": "ex2",
}


def family(family_id: str, law_id: str) -> TrajectoryFamily:
    """Indexed family of shape ``family_id`` adapted to ``law_id``.

    ``ex1`` and ``ex2`` repeat one cycle ``n`` times; ``ex3`` and ``ex4``
    are the growing single-run families.
    """
    if family_id in _REPEATED:
        base = _REPEATED[family_id]()

        def member(n: int) -> FamilyMember:
            n = _check_index(n)
            pat = Pattern(base.k.repeated(n, carry=True), base.s.repeated(n, carry=True),
                          base.t0, base.t0 + n * (base.t1 - base.t0))
            param, drive = adapt(law_id, pat)
            return FamilyMember(param, drive, pat.t0, pat.t1)

        return TrajectoryFamily(family_id, member, True,
                                f"{family_id} cycle repeated n times, adapted to {law_id}")
    if family_id in _INDEXED:
        build = _INDEXED[family_id]

        def member(n: int) -> FamilyMember:
            pat = build(n)
            param, drive = adapt(law_id, pat)
            return FamilyMember(param, drive, pat.t0, pat.t1)

        return TrajectoryFamily(family_id, member, False,
                                f"{family_id} family indexed by n, adapted to {law_id}")
    raise ValueError(f"unknown family id {family_id!r}")


# --------------------------------------------------------------------------
# randomized admissible inputs


def hermite(times, values, slopes) -> PiecewiseSignal:
    """C1 piecewise cubic through ``values`` with the given knot slopes."""
    segs = []
    for a, b, y0, y1, m0, m1 in zip(times, times[1:], values, values[1:], slopes, slopes[1:]):
        h = b - a
        d = (y1 - y0) / h
        c2 = (3 * d - 2 * m0 - m1) / h
        c3 = (m0 + m1 - 2 * d) / h**2
        segs.append(sg.make_poly_segment([y0, m0, c2, c3], (a, b)))
    return PiecewiseSignal(segs)


def random_case(rng: np.random.Generator, law_id: str, matched: bool = False,
                ) -> tuple[Signal, Signal]:
    """Random positive parameter and C1 drive for ``law_id``.

    The parameter is continuous piecewise linear in ``[0.5, 2]``; the drive
    is a C1 piecewise cubic.  Knot gaps differ by at most a factor of three.  With ``matched`` both are mirrored about the
    midpoint so that every quantity returns to its starting value.
    """
    if law_id not in LAW_IDS:
        raise DeviceError(f"unknown law id {law_id!r}")
    n = int(rng.integers(2, 6))
    span = float(rng.uniform(1.0, 3.0))
    # comparable gaps keep every stretch resolvable on a fixed sample grid
    gaps = rng.uniform(0.5, 1.5, n)
    times = np.concatenate(([0.0], np.cumsum(gaps) / gaps.sum())) * span
    times[-1] = span
    pv = rng.uniform(0.5, 2.0, n + 1)
    dv = rng.uniform(-1.0, 1.0, n + 1)
    ds = rng.uniform(-2.0, 2.0, n + 1)
    if matched:
        ds[-1] = 0.0
        times = np.concatenate((times, 2 * span - times[-2::-1]))
        pv = np.concatenate((pv, pv[-2::-1]))
        dv = np.concatenate((dv, dv[-2::-1]))
        ds = np.concatenate((ds, -ds[-2::-1]))
    times = [float(t) for t in times]
    param = sg.piecewise_linear(times, pv)
    drive = hermite(times, dv, ds)
    return param, drive
