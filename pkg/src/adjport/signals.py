"""Piecewise-analytic signals with exact derivatives.

Every time-varying quantity in the package (displacements, spring and
inertance schedules, transformer ratios, currents and voltages) is a
:class:`Signal`.  Signals are zero before their start time, right-continuous
at breakpoints, and can be combined with ``+``, ``-``, ``*`` and ``/``.
Composite signals keep exact derivatives through the product and chain
rules, so device laws never need numerical differentiation of their inputs.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np
from numpy.polynomial import polynomial as P

__all__ = [
    "SignalError",
    "SignalDomainError",
    "Segment",
    "Signal",
    "PiecewiseSignal",
    "RunningIntegral",
    "make_poly_segment",
    "make_sinusoid_segment",
    "constant",
    "linear",
    "piecewise_linear",
    "from_rates",
    "eval",
    "continuity_class",
    "sqrt",
    "reciprocal",
    "positive_part",
    "negative_part",
    "square",
    "breakpoints_of",
]

MAX_DEGREE = 8
CONTINUITY_TOL = 1e-12


class SignalError(ValueError):
    """Invalid signal construction."""


class SignalDomainError(SignalError):
    """Evaluation outside the domain of a signal."""


# --------------------------------------------------------------------------
# segments


@dataclass(frozen=True)
class Segment:
    """One analytic piece on ``[t_a, t_b)``.

    The value is ``sum(c[i] * (t - t_a)**i) + sum(A * sin(w*t + phi))``: a
    polynomial in local time plus sinusoids in absolute time.  ``kind``
    reports which constructor built it; sums of both kinds are ``"mixed"``.
    """

    t_a: float
    t_b: float
    coeffs: tuple[float, ...] = (0.0,)
    sines: tuple[tuple[float, float, float], ...] = ()

    def __post_init__(self):
        if not (math.isfinite(self.t_a) and math.isfinite(self.t_b)):
            raise SignalError("segment interval must be finite")
        if not self.t_a < self.t_b:
            raise SignalError(f"empty segment interval [{self.t_a}, {self.t_b})")
        if len(self.coeffs) == 0:
            raise SignalError("polynomial segment needs at least one coefficient")
        if len(self.coeffs) > MAX_DEGREE + 1:
            raise SignalError(f"polynomial degree exceeds cap of {MAX_DEGREE}")

    @property
    def kind(self) -> str:
        if not self.sines:
            return "poly"
        if len(self.sines) == 1 and all(c == 0 for c in self.coeffs[1:]):
            return "sin"
        return "mixed"

    def value(self, t, order: int = 0):
        t = np.asarray(t, dtype=float)
        c = np.asarray(self.coeffs, dtype=float)
        if order:
            c = P.polyder(c, order) if len(c) > order else np.zeros(1)
        out = P.polyval(t - self.t_a, c)
        for amp, omega, phase in self.sines:
            out = out + amp * omega**order * np.sin(omega * t + phase + order * math.pi / 2)
        return out

    def shifted(self, dt: float) -> "Segment":
        sines = tuple((a, w, ph - w * dt) for a, w, ph in self.sines)
        return Segment(self.t_a + dt, self.t_b + dt, self.coeffs, sines)

    def scaled(self, a: float, b: float = 0.0) -> "Segment":
        """Segment for ``a*self + b``."""
        c = [a * ci for ci in self.coeffs]
        c[0] += b
        return Segment(self.t_a, self.t_b, tuple(c), tuple((a * s, w, ph) for s, w, ph in self.sines))

    def restricted(self, t_a: float, t_b: float) -> "Segment":
        """Same function on the sub-interval ``[t_a, t_b)``, re-expanded locally."""
        shift = t_a - self.t_a
        c = np.asarray(self.coeffs, dtype=float)
        # Taylor re-expansion of the local polynomial about the new origin
        new = [P.polyval(shift, P.polyder(c, k) if len(c) > k else np.zeros(1)) / math.factorial(k)
               for k in range(len(c))]
        return Segment(t_a, t_b, tuple(float(v) for v in new), self.sines)

    def antiderivative(self) -> "Segment":
        """An antiderivative vanishing at ``t_a``."""
        c = list(P.polyint(np.asarray(self.coeffs, dtype=float)))
        sines = []
        for amp, omega, phase in self.sines:
            if omega == 0:
                c[1] = c[1] + amp * math.sin(phase) if len(c) > 1 else amp * math.sin(phase)
                continue
            # -A/w cos(wt+phi) = A/w sin(wt + phi - pi/2)
            sines.append((amp / omega, omega, phase - math.pi / 2))
        if len(c) > MAX_DEGREE + 1:
            raise SignalError(f"antiderivative would exceed the degree cap of {MAX_DEGREE}")
        seg = Segment(self.t_a, self.t_b, tuple(float(v) for v in c), tuple(sines))
        c0 = float(seg.value(self.t_a))
        return seg.scaled(1.0, -c0)


def make_poly_segment(coeffs: Sequence[float], interval: tuple[float, float]) -> Segment:
    """Polynomial ``sum(coeffs[i] * (t - t_a)**i)`` on ``interval``."""
    coeffs = tuple(float(c) for c in coeffs)
    return Segment(float(interval[0]), float(interval[1]), coeffs)


def make_sinusoid_segment(offset: float, amplitude: float, omega: float, phase: float,
                          interval: tuple[float, float]) -> Segment:
    """``offset + amplitude*sin(omega*t + phase)`` on ``interval`` (absolute time)."""
    sines = ((float(amplitude), float(omega), float(phase)),) if amplitude != 0 else ()
    return Segment(float(interval[0]), float(interval[1]), (float(offset),), sines)


# --------------------------------------------------------------------------
# signal base class


def _as_array(t):
    return np.atleast_1d(np.asarray(t, dtype=float))


class Signal:
    """Base class: a real function of time, zero before ``t_start``.

    Subclasses implement ``_eval(t, order, side)`` for a 1-D array of times
    in ``[t_start, ...]``.  ``side="left"`` requests left limits, which the
    integrators use at the right end of steps that land on a breakpoint.
    """

    t_start: float = 0.0
    t_end: float = math.inf
    breakpoints: tuple[float, ...] = ()
    max_order: int = 2

    def eval(self, t, order: int = 0, side: str = "right"):
        if not 0 <= order <= self.max_order:
            raise SignalError(f"derivative order {order} not available (max {self.max_order})")
        if side not in ("right", "left"):
            raise SignalError(f"side must be 'right' or 'left', got {side!r}")
        scalar = np.ndim(t) == 0
        tt = _as_array(t)
        active = tt >= self.t_start if side == "right" else tt > self.t_start
        out = np.zeros(tt.shape)
        if active.any():
            ta = tt[active]
            if ta.max() > self.t_end:
                raise SignalDomainError(
                    f"t={ta.max()!r} beyond signal end {self.t_end!r} (no extension)")
            out[active] = self._eval(ta, order, side)
        return float(out[0]) if scalar else out

    def __call__(self, t):
        return self.eval(t)

    def _eval(self, t, order, side):  # pragma: no cover - abstract
        raise NotImplementedError

    # algebra ------------------------------------------------------------

    def __add__(self, other):
        if isinstance(other, Signal):
            return _Sum((self, other), (1.0, 1.0))
        return _Sum((self,), (1.0,), float(other))

    __radd__ = __add__

    def __neg__(self):
        return _Sum((self,), (-1.0,))

    def __sub__(self, other):
        if isinstance(other, Signal):
            return _Sum((self, other), (1.0, -1.0))
        return _Sum((self,), (1.0,), -float(other))

    def __rsub__(self, other):
        return _Sum((self,), (-1.0,), float(other))

    def __mul__(self, other):
        if isinstance(other, Signal):
            return _Product(self, other)
        return _Sum((self,), (float(other),))

    __rmul__ = __mul__

    def __truediv__(self, other):
        if isinstance(other, Signal):
            return _Product(self, reciprocal(other))
        return _Sum((self,), (1.0 / float(other),))

    def __rtruediv__(self, other):
        return reciprocal(self) * float(other)

    def derivative(self, k: int = 1) -> "Signal":
        return _Derivative(self, k)

    def sample(self, t, order: int = 0):
        return self.eval(np.asarray(t, dtype=float), order)


def breakpoints_of(*signals: Signal) -> tuple[float, ...]:
    pts = set()
    for s in signals:
        pts.update(s.breakpoints)
    return tuple(sorted(p for p in pts if math.isfinite(p)))


def _common_domain(signals):
    return (min(s.t_start for s in signals), min(s.t_end for s in signals),
            breakpoints_of(*signals), min(s.max_order for s in signals))


# --------------------------------------------------------------------------
# piecewise signals


class PiecewiseSignal(Signal):
    """Contiguous analytic segments starting at ``t_start``.

    Parameters
    ----------
    segments : sequence of Segment
        Ordered pieces; each must start where the previous one ends.
    extend : bool
        Hold the final value constant after the last segment instead of
        raising :class:`SignalDomainError`.
    """

    max_order = 12

    def __init__(self, segments: Iterable[Segment], extend: bool = False):
        segs = tuple(segments)
        if not segs:
            raise SignalError("a piecewise signal needs at least one segment")
        for prev, nxt in zip(segs, segs[1:]):
            if prev.t_b != nxt.t_a:
                raise SignalError(
                    f"segments must be contiguous: [{prev.t_a}, {prev.t_b}) then "
                    f"[{nxt.t_a}, {nxt.t_b})")
        self.segments = segs
        self.extend = bool(extend)
        self.t_start = segs[0].t_a
        self.t_end = math.inf if extend else segs[-1].t_b
        self.last_time = segs[-1].t_b
        self.breakpoints = tuple([s.t_a for s in segs] + [segs[-1].t_b])
        self._starts = np.array([s.t_a for s in segs])
        self._final = float(segs[-1].value(segs[-1].t_b))

    def __repr__(self):
        return f"PiecewiseSignal({len(self.segments)} segments on [{self.t_start}, {self.last_time}])"

    def _index(self, t, side):
        how = "right" if side == "right" else "left"
        idx = np.searchsorted(self._starts, t, side=how) - 1
        return np.clip(idx, 0, len(self.segments) - 1)

    def _eval(self, t, order, side):
        if len(t) == 1:  # scalar fast path used heavily by the ODE fields
            tv = t[0]
            if tv > self.last_time:
                return np.array([self._final if order == 0 else 0.0])
            starts = self.breakpoints
            i = (bisect.bisect_right if side == "right" else bisect.bisect_left)(starts, tv) - 1
            i = min(max(i, 0), len(self.segments) - 1)
            return np.atleast_1d(self.segments[i].value(tv, order))
        out = np.empty(t.shape)
        beyond = t > self.last_time
        if beyond.any():
            out[beyond] = self._final if order == 0 else 0.0
        inside = ~beyond
        idx = self._index(t[inside], side)
        vals = np.empty(idx.shape)
        ti = t[inside]
        for j in np.unique(idx):
            m = idx == j
            vals[m] = self.segments[j].value(ti[m], order)
        out[inside] = vals
        return out

    # constructions --------------------------------------------------------

    def shifted(self, dt: float) -> "PiecewiseSignal":
        return PiecewiseSignal([s.shifted(dt) for s in self.segments], self.extend)

    def affine(self, a: float, b: float = 0.0) -> "PiecewiseSignal":
        """Exact ``a*self + b`` as a piecewise signal."""
        return PiecewiseSignal([s.scaled(a, b) for s in self.segments], self.extend)

    def combine(self, other: "PiecewiseSignal", a: float = 1.0, b: float = 1.0) -> "PiecewiseSignal":
        """Exact ``a*self + b*other`` on the union of both breakpoint grids.

        Both signals must cover the same interval.
        """
        if self.t_start != other.t_start or self.last_time != other.last_time:
            raise SignalError("combine requires signals on the same interval")
        grid = sorted(set(self.breakpoints) | set(other.breakpoints))
        segs = []
        for ta, tb in zip(grid, grid[1:]):
            s1 = self.segments[int(self._index(np.array([ta]), "right")[0])].restricted(ta, tb)
            s2 = other.segments[int(other._index(np.array([ta]), "right")[0])].restricted(ta, tb)
            n = max(len(s1.coeffs), len(s2.coeffs))
            c = [a * (s1.coeffs[i] if i < len(s1.coeffs) else 0.0)
                 + b * (s2.coeffs[i] if i < len(s2.coeffs) else 0.0) for i in range(n)]
            sines = tuple((a * A, w, ph) for A, w, ph in s1.sines) + \
                tuple((b * A, w, ph) for A, w, ph in s2.sines)
            segs.append(Segment(ta, tb, tuple(c), sines))
        return PiecewiseSignal(segs, self.extend and other.extend)

    def antiderivative(self, initial: float = 0.0) -> "PiecewiseSignal":
        """Continuous antiderivative equal to ``initial`` at ``t_start``."""
        segs = []
        level = float(initial)
        for s in self.segments:
            a = s.antiderivative().scaled(1.0, level)
            segs.append(a)
            level = float(a.value(s.t_b))
        return PiecewiseSignal(segs)

    def repeated(self, n: int, carry: bool = True) -> "PiecewiseSignal":
        """``n`` back-to-back copies of this signal.

        With ``carry`` each copy is offset so the value is continuous across
        the joins (a displacement whose velocity repeats keeps drifting).
        """
        if n < 1:
            raise SignalError("repeat count must be >= 1")
        period = self.last_time - self.t_start
        drift = self._final - float(self.segments[0].value(self.t_start)) if carry else 0.0
        segs = []
        for j in range(n):
            for s in self.segments:
                segs.append(s.shifted(j * period).scaled(1.0, j * drift))
        return PiecewiseSignal(segs, self.extend)


def constant(value: float, interval: tuple[float, float], extend: bool = False) -> PiecewiseSignal:
    return PiecewiseSignal([make_poly_segment([value], interval)], extend)


def linear(c0: float, c1: float, interval: tuple[float, float]) -> PiecewiseSignal:
    """``c0 + c1*(t - t_a)`` on ``interval``."""
    return PiecewiseSignal([make_poly_segment([c0, c1], interval)])


def piecewise_linear(times: Sequence[float], values: Sequence[float]) -> PiecewiseSignal:
    """Continuous piecewise-linear interpolant through ``(times, values)``."""
    if len(times) != len(values) or len(times) < 2:
        raise SignalError("need matching times/values with at least two points")
    segs = [make_poly_segment([v0, (v1 - v0) / (t1 - t0)], (t0, t1))
            for t0, t1, v0, v1 in zip(times, times[1:], values, values[1:])]
    return PiecewiseSignal(segs)


def from_rates(initial: float, times: Sequence[float], rates: Sequence[float]) -> PiecewiseSignal:
    """Continuous signal built from a piecewise-constant rate.

    ``rates[i]`` applies on ``[times[i], times[i+1])``; this is how the
    parameter schedules of the worked examples are stated (an initial value
    and its slope on each interval).
    """
    segs = []
    level = float(initial)
    for (t0, t1), rate in zip(zip(times, times[1:]), rates):
        segs.append(make_poly_segment([level, rate], (t0, t1)))
        level += rate * (t1 - t0)
    return PiecewiseSignal(segs)


# --------------------------------------------------------------------------
# composite signals


class _Sum(Signal):
    def __init__(self, terms, weights, const: float = 0.0):
        self.terms = tuple(terms)
        self.weights = tuple(weights)
        self.const = const
        self.t_start, self.t_end, self.breakpoints, self.max_order = _common_domain(self.terms)

    def _eval(self, t, order, side):
        out = np.full(t.shape, self.const if order == 0 else 0.0)
        for w, f in zip(self.weights, self.terms):
            out = out + w * f.eval(t, order, side)
        return out


class _Product(Signal):
    def __init__(self, f: Signal, g: Signal):
        self.f, self.g = f, g
        self.t_start, self.t_end, self.breakpoints, self.max_order = _common_domain((f, g))

    def _eval(self, t, order, side):
        out = np.zeros(t.shape)
        for k in range(order + 1):
            out = out + math.comb(order, k) * self.f.eval(t, k, side) * self.g.eval(t, order - k, side)
        return out


class _Derivative(Signal):
    def __init__(self, f: Signal, k: int):
        if k < 1 or k > f.max_order:
            raise SignalError(f"cannot differentiate {k} times (max {f.max_order})")
        self.f, self.k = f, k
        self.t_start, self.t_end, self.breakpoints = f.t_start, f.t_end, f.breakpoints
        self.max_order = f.max_order - k

    def _eval(self, t, order, side):
        return self.f.eval(t, order + self.k, side)


class _Mapped(Signal):
    """``g(f(t))`` with derivatives up to order 3 by the chain rule.

    ``g(u, n)`` returns the n-th derivative of the outer function.
    """

    def __init__(self, f: Signal, g: Callable, name: str):
        self.f, self.g, self.name = f, g, name
        self.t_start, self.t_end, self.breakpoints = f.t_start, f.t_end, f.breakpoints
        self.max_order = min(f.max_order, 3)

    def __repr__(self):
        return f"{self.name}({self.f!r})"

    def _eval(self, t, order, side):
        u = self.f.eval(t, 0, side)
        if order == 0:
            return self.g(u, 0)
        d1 = self.f.eval(t, 1, side)
        if order == 1:
            return self.g(u, 1) * d1
        d2 = self.f.eval(t, 2, side)
        if order == 2:
            return self.g(u, 2) * d1**2 + self.g(u, 1) * d2
        d3 = self.f.eval(t, 3, side)
        return self.g(u, 3) * d1**3 + 3 * self.g(u, 2) * d1 * d2 + self.g(u, 1) * d3


def _sqrt_derivs(u, n):
    if np.any(u <= 0):
        raise SignalError("square root of a non-positive signal")
    return {0: np.sqrt(u), 1: 0.5 * u**-0.5, 2: -0.25 * u**-1.5, 3: 0.375 * u**-2.5}[n]


def _recip_derivs(u, n):
    if np.any(u == 0):
        raise SignalError("reciprocal of a signal that vanishes")
    return {0: 1 / u, 1: -(u**-2), 2: 2 * u**-3, 3: -6 * u**-4}[n]


def _pos_derivs(u, n):
    if n == 0:
        return np.maximum(u, 0.0)
    return (u > 0).astype(float) if n == 1 else np.zeros_like(u)


def _neg_derivs(u, n):
    if n == 0:
        return np.minimum(u, 0.0)
    return (u < 0).astype(float) if n == 1 else np.zeros_like(u)


def sqrt(f: Signal) -> Signal:
    return _Mapped(f, _sqrt_derivs, "sqrt")


def reciprocal(f: Signal) -> Signal:
    return _Mapped(f, _recip_derivs, "reciprocal")


def square(f: Signal) -> Signal:
    return _Product(f, f)


def positive_part(f: Signal) -> Signal:
    """``(f)_+``; kinks at zero crossings are left to adaptive quadrature."""
    return _Mapped(f, _pos_derivs, "positive_part")


def negative_part(f: Signal) -> Signal:
    return _Mapped(f, _neg_derivs, "negative_part")


class RunningIntegral(Signal):
    """``initial + integral of f from t_start to t``.

    Integrals at a table of knots (breakpoints plus a uniform grid) are
    computed once at construction; evaluation adds an adaptive integral from
    the nearest knot.  The object is immutable after construction.
    """

    def __init__(self, f: Signal, initial: float = 0.0, t_end: float | None = None,
                 spec=None, knots_per_unit: int = 32):
        from .numerics import QuadratureSpec, integrate_intervals

        self.f = f
        self.initial = float(initial)
        self.spec = spec if spec is not None else QuadratureSpec()
        self.t_start = f.t_start
        self.t_end = f.t_end if t_end is None else min(float(t_end), f.t_end)
        if not math.isfinite(self.t_end):
            raise SignalError("running integral needs a finite horizon")
        self.breakpoints = tuple(b for b in f.breakpoints if b <= self.t_end) + (self.t_end,)
        self.breakpoints = tuple(sorted(set(self.breakpoints)))
        self.max_order = f.max_order + 1
        span = self.t_end - self.t_start
        n = max(1, int(math.ceil(span * knots_per_unit)))
        grid = self.t_start + span * np.arange(n + 1) / n
        grid = np.minimum(grid, self.t_end)  # rounding can overshoot the end
        knots = np.union1d(grid, [b for b in self.breakpoints if self.t_start <= b <= self.t_end])
        self._knots = knots
        pieces = integrate_intervals(f.eval, knots[:-1], knots[1:], spec=self.spec)
        self._table = np.concatenate(([0.0], np.cumsum(pieces)))
        self._integrate_intervals = integrate_intervals

    def _eval(self, t, order, side):
        if order > 0:
            return self.f.eval(t, order - 1, side)
        idx = np.clip(np.searchsorted(self._knots, t, side="right") - 1, 0, len(self._knots) - 1)
        base = self._table[idx]
        a = self._knots[idx]
        rest = np.zeros(t.shape)
        need = t > a
        if need.any():
            rest[need] = self._integrate_intervals(self.f.eval, a[need], t[need], spec=self.spec)
        return self.initial + base + rest


# --------------------------------------------------------------------------
# functional API


def eval(signal: Signal, t, order: int = 0):  # noqa: A001 - mirrors the operation name
    """Value or derivative of ``signal`` at ``t`` (right-hand at breakpoints)."""
    return signal.eval(t, order)


def continuity_class(signal: Signal, tol: float = CONTINUITY_TOL) -> int:
    """Largest d <= 2 with value and derivatives up to d continuous at every
    internal breakpoint; -1 when the value itself jumps."""
    internal = [b for b in signal.breakpoints
                if signal.t_start < b < min(signal.t_end, getattr(signal, "last_time", signal.t_end))]
    if not internal:
        return 2
    t = np.asarray(internal)
    for order in range(3):
        if order > signal.max_order:
            return order - 1
        left = signal.eval(t, order, side="left")
        right = signal.eval(t, order, side="right")
        scale = 1.0 + np.maximum(np.abs(left), np.abs(right))
        if np.any(np.abs(left - right) > tol * scale):
            return order - 1
    return 2
