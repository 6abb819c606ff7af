"""Deterministic quadrature and ODE integration.

Both integrators respect breakpoints: quadrature panels and Runge-Kutta
steps never straddle a point where the integrand or field loses
smoothness.  These two routines are the only places where the package
introduces numerical error.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from .signals import Signal, SignalError

__all__ = [
    "QuadratureSpec",
    "OdeSpec",
    "IntegrationError",
    "OdeConvergenceError",
    "integrate",
    "integrate_intervals",
    "cumulative_integrate",
    "solve_ode",
    "OdeSolution",
    "StateSignal",
    "snap_grid",
    "sampled_derivative",
]


@dataclass(frozen=True)
class QuadratureSpec:
    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_depth: int = 40

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


@dataclass(frozen=True)
class OdeSpec:
    h: float = 1e-3
    max_refinements: int = 6
    tol: float = 1e-9

    def __post_init__(self):
        if not self.h > 0:
            raise ValueError("ODE base step must be positive")
        if self.tol <= 0:
            raise ValueError("ODE tolerance must be positive")


class IntegrationError(ArithmeticError):
    """Adaptive quadrature hit the depth limit.

    ``estimate`` and ``error`` carry the best result reached.
    """

    def __init__(self, message, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class OdeConvergenceError(ArithmeticError):
    def __init__(self, message, max_difference):
        super().__init__(message)
        self.max_difference = max_difference


# --------------------------------------------------------------------------
# Gauss-Kronrod 7/15

_XGK = np.array([
    0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
    0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
    0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
    0.207784955007898467600689403773245, 0.0])
_WGK = np.array([
    0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
    0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
    0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
    0.204432940075298892414161999234649, 0.209482141084727828012999174891714])
_WG = np.array([
    0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
    0.381830050505118944950369775488975, 0.417959183673469387755102040816327])

_NODES = np.concatenate((-_XGK[:-1], _XGK[::-1]))          # 15 nodes, ascending
_KW = np.concatenate((_WGK[:-1], _WGK[::-1]))
_GW = np.zeros(15)
_GW[[1, 3, 5, 7, 9, 11, 13]] = np.concatenate((_WG[:-1], _WG[::-1]))
_EPS = np.finfo(float).eps


def _gk15(f, lo, hi):
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    x = mid[:, None] + half[:, None] * _NODES[None, :]
    fx = np.asarray(f(x.ravel()), dtype=float).reshape(x.shape)
    if not np.all(np.isfinite(fx)):
        raise IntegrationError("integrand is not finite on the integration interval",
                               math.nan, math.inf)
    k = half * (fx @ _KW)
    g = half * (fx @ _GW)
    resabs = np.abs(half) * (np.abs(fx) @ _KW)
    return k, np.abs(k - g), resabs


def integrate_intervals(f: Callable, a, b, spec: QuadratureSpec | None = None) -> np.ndarray:
    """Integrals of ``f`` over many intervals ``[a[i], b[i]]`` at once.

    ``f`` must accept a 1-D array of times.  Panels are bisected
    independently until each interval meets
    ``max(abs_tol, rel_tol*|I|)``; the error budget of an interval is shared
    among its panels in proportion to width.
    """
    spec = spec or QuadratureSpec()
    a = np.atleast_1d(np.asarray(a, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    sign = np.where(b < a, -1.0, 1.0)
    lo0, hi0 = np.minimum(a, b), np.maximum(a, b)
    n = len(lo0)
    result = np.zeros(n)
    errsum = np.zeros(n)
    width = hi0 - lo0
    live = width > 0
    owner = np.nonzero(live)[0]
    lo, hi = lo0[live], hi0[live]
    depth = 0
    while len(owner):
        k, err, resabs = _gk15(f, lo, hi)
        estimate = result + np.bincount(owner, k, minlength=n)
        budget = np.maximum(spec.abs_tol, spec.rel_tol * np.abs(estimate))
        allowed = budget[owner] * (hi - lo) / width[owner]
        ok = (err <= allowed) | (err <= 50 * _EPS * resabs)
        result += np.bincount(owner[ok], k[ok], minlength=n)
        errsum += np.bincount(owner[ok], err[ok], minlength=n)
        if ok.all():
            break
        if depth >= spec.max_depth:
            bad = ~ok
            best = result + np.bincount(owner[bad], k[bad], minlength=n)
            err_tot = errsum + np.bincount(owner[bad], err[bad], minlength=n)
            raise IntegrationError(
                f"quadrature did not converge within depth {spec.max_depth}",
                sign * best, err_tot)
        bad = ~ok
        lo, hi, owner = lo[bad], hi[bad], owner[bad]
        mid = 0.5 * (lo + hi)
        lo, hi, owner = np.concatenate((lo, mid)), np.concatenate((mid, hi)), np.concatenate((owner, owner))
        depth += 1
    return sign * result


def _split(t0, t1, breakpoints):
    inner = sorted(p for p in set(breakpoints) if t0 < p < t1)
    return np.array([t0, *inner, t1], dtype=float)


def integrate(f: Callable, t0: float, t1: float, breakpoints: Sequence[float] = (),
              spec: QuadratureSpec | None = None) -> float:
    """Integral of ``f`` over ``[t0, t1]`` with panels split at ``breakpoints``.

    Raises :class:`IntegrationError` (with the best estimate attached) when a
    panel fails to converge at the maximum depth.
    """
    if t1 < t0:
        raise ValueError("integrate requires t0 <= t1")
    if t1 == t0:
        return 0.0
    edges = _split(float(t0), float(t1), breakpoints)
    try:
        return float(np.sum(integrate_intervals(f, edges[:-1], edges[1:], spec)))
    except IntegrationError as exc:
        raise IntegrationError(str(exc), float(np.sum(exc.estimate)),
                               float(np.sum(exc.error))) from None


def cumulative_integrate(f: Callable, grid, breakpoints: Sequence[float] = (),
                         spec: QuadratureSpec | None = None) -> np.ndarray:
    """Running integral of ``f`` from ``grid[0]`` evaluated at every grid point."""
    grid = np.asarray(grid, dtype=float)
    if len(grid) == 0:
        return np.zeros(0)
    if np.any(np.diff(grid) < 0):
        raise ValueError("grid must be non-decreasing")
    inner = np.array(sorted(p for p in set(breakpoints) if grid[0] < p < grid[-1]), dtype=float)
    edges = np.union1d(grid, inner)
    pieces = integrate_intervals(f, edges[:-1], edges[1:], spec)
    running = np.concatenate(([0.0], np.cumsum(pieces)))
    return running[np.searchsorted(edges, grid)]


def snap_grid(t0: float, t1: float, dt: float, breakpoints: Sequence[float] = ()) -> np.ndarray:
    """Uniform sample grid ``t0 + i*dt`` with points within rounding of a
    breakpoint moved exactly onto it."""
    if dt <= 0:
        raise ValueError("sample step must be positive")
    n = int(math.floor((t1 - t0) / dt + 1e-9))
    grid = t0 + dt * np.arange(n + 1)
    if t1 - grid[-1] > 1e-9 * dt:
        grid = np.append(grid, t1)
    else:
        grid[-1] = t1
    for p in breakpoints:
        if t0 <= p <= t1:
            j = int(np.argmin(np.abs(grid - p)))
            if abs(grid[j] - p) <= 1e-9 * dt:
                grid[j] = p
    return grid


# --------------------------------------------------------------------------
# ODE integration


def _input_values(inputs, t, side):
    if not inputs:
        return None
    return np.array([sig.eval(t, order, side) for sig, order in inputs])


def _normalise_inputs(inputs):
    out = []
    for item in inputs:
        if isinstance(item, Signal):
            out.append((item, 0))
        else:
            sig, order = item
            out.append((sig, int(order)))
    return tuple(out)


class OdeSolution:
    """Nodes of the accepted RK4 run with a cubic Hermite dense output.

    ``dy_right[i]`` is the field at node ``i`` using right-hand input values
    and ``dy_left[i]`` the one using left limits; they differ only at
    breakpoints.
    """

    def __init__(self, t, y, dy_right, dy_left, step, refinements, max_difference):
        self.t = t
        self.y = y
        self.dy_right = dy_right
        self.dy_left = dy_left
        self.step = step
        self.refinements = refinements
        self.max_difference = max_difference
        self.ddy_right = None
        self.ddy_left = None

    def with_second_derivatives(self, ddy_right, ddy_left) -> "OdeSolution":
        """Copy whose dense output is quintic Hermite using the given
        second derivatives at the nodes."""
        out = OdeSolution(self.t, self.y, self.dy_right, self.dy_left, self.step,
                          self.refinements, self.max_difference)
        out.ddy_right = np.asarray(ddy_right, dtype=float).reshape(self.y.shape)
        out.ddy_left = np.asarray(ddy_left, dtype=float).reshape(self.y.shape)
        return out

    @property
    def t0(self):
        return float(self.t[0])

    @property
    def t1(self):
        return float(self.t[-1])

    def __call__(self, t, side: str = "right") -> np.ndarray:
        """State at ``t`` (shape ``(d,)`` for scalar t, else ``(d, m)``)."""
        scalar = np.ndim(t) == 0
        tt = np.atleast_1d(np.asarray(t, dtype=float))
        if np.any(tt < self.t[0]) or np.any(tt > self.t[-1]):
            raise SignalError("time outside the ODE solution interval")
        how = "right" if side == "right" else "left"
        i = np.clip(np.searchsorted(self.t, tt, side=how) - 1, 0, len(self.t) - 2)
        t_a, t_b = self.t[i], self.t[i + 1]
        h = t_b - t_a
        s = (tt - t_a) / h
        y_a, y_b = self.y[i].T, self.y[i + 1].T
        d_a, d_b = self.dy_right[i].T, self.dy_left[i + 1].T
        if self.ddy_right is None:
            h00 = 2 * s**3 - 3 * s**2 + 1
            h10 = s**3 - 2 * s**2 + s
            h01 = -2 * s**3 + 3 * s**2
            h11 = s**3 - s**2
            out = h00 * y_a + h10 * h * d_a + h01 * y_b + h11 * h * d_b
        else:
            a_a, a_b = self.ddy_right[i].T, self.ddy_left[i + 1].T
            s2, s3 = s * s, s**3
            q = 1 - s
            h00 = q**3 * (1 + 3 * s + 6 * s2)
            h10 = q**3 * s * (1 + 3 * s)
            h20 = 0.5 * q**3 * s2
            h01 = s3 * (10 - 15 * s + 6 * s2)
            h11 = s3 * q * (-4 + 3 * s)
            h21 = 0.5 * s3 * q * q
            out = (h00 * y_a + h10 * h * d_a + h20 * h * h * a_a
                   + h01 * y_b + h11 * h * d_b + h21 * h * h * a_b)
        return out[:, 0] if scalar else out


def solve_ode(field: Callable, y0, t0: float, t1: float, breakpoints: Sequence[float] = (),
              spec: OdeSpec | None = None, inputs: Sequence = (),
              t_eval: Sequence[float] | None = None) -> OdeSolution:
    """Classical RK4 on a breakpoint-aligned grid, halving the step until two
    successive runs agree.

    Parameters
    ----------
    field : callable
        ``field(t, y)`` or, when ``inputs`` are given, ``field(t, y, u)``
        where ``u[j]`` is the value of the j-th input signal at ``t``.  It
        must broadcast over a trailing sample axis (``y`` of shape
        ``(d, m)``) so the solution can be differentiated in bulk.
    inputs : sequence
        Signals (or ``(signal, order)`` pairs) sampled ahead of the time
        loop at every stage time.  Step ends use left limits.
    t_eval : sequence, optional
        Extra times that must be grid nodes.

    Every inter-knot interval (knots are ``t0``, ``t1``, breakpoints and
    ``t_eval``) gets ``ceil(width/h)`` steps, doubled at each refinement.
    Runs L and L+1 are compared at all nodes of run L; the finer run is
    returned once ``|diff| <= tol*max(1, |y|)`` everywhere.
    """
    spec = spec or OdeSpec()
    if t1 < t0:
        raise ValueError("solve_ode requires t0 <= t1")
    y0 = np.atleast_1d(np.asarray(y0, dtype=float))
    inputs = _normalise_inputs(inputs)
    extra = list(breakpoints) + (list(t_eval) if t_eval is not None else [])
    knots = _split(float(t0), float(t1), extra)
    if t1 == t0:
        d = field(t0, y0, _input_values(inputs, t0, "right")) if inputs else field(t0, y0)
        d = np.reshape(d, y0.shape)
        return OdeSolution(np.array([t0, t0]), np.array([y0, y0]), np.array([d, d]),
                           np.array([d, d]), 0.0, 0, 0.0)
    base = np.maximum(1, np.ceil((knots[1:] - knots[:-1]) / spec.h - 1e-9).astype(int))

    prev = _rk4_run(field, y0, knots, base, inputs)
    prev_counts = base
    for level in range(1, spec.max_refinements + 1):
        counts = base * 2**level
        cur = _rk4_run(field, y0, knots, counts, inputs)
        coarse_idx = np.concatenate(([0], np.cumsum(prev_counts)))
        fine_idx = np.concatenate(([0], np.cumsum(counts)))
        idx = np.concatenate([fine_idx[i] + 2 * np.arange(prev_counts[i]) for i in range(len(base))]
                             + [np.array([fine_idx[-1]])])
        y_c = prev[1]
        y_f = cur[1][idx]
        diff = np.abs(y_f - y_c)
        scale = np.maximum(1.0, np.abs(y_f))
        worst = float(np.max(diff / scale))
        if worst <= spec.tol:
            t, y, dr, dl = cur
            return OdeSolution(t, y, dr, dl, float(np.max(np.diff(t))), level, worst)
        prev, prev_counts = cur, counts
    raise OdeConvergenceError(
        f"RK4 refinements did not agree within {spec.tol} after {spec.max_refinements} halvings",
        worst)


def _rk4_run(field, y0, knots, counts, inputs):
    times = [np.linspace(knots[i], knots[i + 1], counts[i] + 1)[:-1] for i in range(len(counts))]
    ts = np.concatenate(times)
    ends = np.concatenate([np.append(tt[1:], knots[i + 1]) for i, tt in enumerate(times)])
    mids = 0.5 * (ts + ends)
    knot_end = np.zeros(len(ts), dtype=bool)
    knot_end[np.cumsum(counts) - 1] = True
    if inputs:
        u_s = _input_values(inputs, ts, "right").T
        u_m = _input_values(inputs, mids, "right").T
        u_e = _input_values(inputs, ends, "left").T

        def f(t, y, u):
            return np.reshape(field(t, y, u), y.shape)
    else:
        u_s = u_m = u_e = [None] * len(ts)

        def f(t, y, u):
            return np.reshape(field(t, y), y.shape)

    m = len(ts)
    ys = np.empty((m + 1, len(y0)))
    dr = np.empty_like(ys)
    dl = np.empty_like(ys)
    y = y0.copy()
    ys[0] = y
    for j in range(m):
        h = ends[j] - ts[j]
        k1 = f(ts[j], y, u_s[j])
        k2 = f(mids[j], y + 0.5 * h * k1, u_m[j])
        k3 = f(mids[j], y + 0.5 * h * k2, u_m[j])
        k4 = f(ends[j], y + h * k3, u_e[j])
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        ys[j + 1] = y
        dr[j] = k1
        if knot_end[j]:
            dl[j + 1] = f(ends[j], y, u_e[j])
    dl[0] = dr[0]
    inner = np.nonzero(~knot_end[:-1])[0] + 1
    dl[inner] = dr[inner]
    dr[m] = dl[m]
    t_nodes = np.append(ts, ends[-1])
    return t_nodes, ys, dr, dl


class StateSignal(Signal):
    """One component of an ODE solution viewed as a :class:`Signal`.

    Order 0 uses the Hermite dense output.  Order 1 evaluates the field at
    the interpolated state; higher orders come from ``derivative`` when the
    caller can supply the state derivative as an explicit signal.
    """

    def __init__(self, solution: OdeSolution, field, inputs=(), component: int = 0,
                 derivative: Signal | None = None, breakpoints: Sequence[float] = ()):
        if derivative is not None and derivative.max_order >= 1:
            # exact second derivatives at the nodes upgrade the dense output to quintic
            if solution.y.shape[1] == 1:
                t_nodes = solution.t
                solution = solution.with_second_derivatives(
                    derivative.eval(t_nodes, 1, side="right"),
                    np.concatenate(([derivative.eval(t_nodes[0], 1)],
                                    derivative.eval(t_nodes[1:], 1, side="left"))))
        self.solution = solution
        self.field = field
        self.inputs = _normalise_inputs(inputs)
        self.component = component
        self.derivative_signal = derivative
        self.t_start = solution.t0
        self.t_end = solution.t1
        pts = {self.t_start, self.t_end, *[b for b in breakpoints if self.t_start <= b <= self.t_end]}
        self.breakpoints = tuple(sorted(pts))
        self.max_order = 1 if derivative is None else 1 + derivative.max_order

    def _eval(self, t, order, side):
        if order == 0:
            return self.solution(t, side)[self.component]
        if self.derivative_signal is not None:
            return self.derivative_signal.eval(t, order - 1, side)
        y = self.solution(t, side)
        if self.inputs:
            d = self.field(t, y, _input_values(self.inputs, t, side))
        else:
            d = self.field(t, y)
        return np.reshape(d, y.shape)[self.component]


def sampled_derivative(t, values, breakpoints: Sequence[float] = ()) -> np.ndarray:
    """Derivative of sampled data by interpolating splines fitted separately
    on each stretch between breakpoints (quintic where enough samples exist).

    At a breakpoint sample the right-hand stretch is used.
    """
    from scipy.interpolate import make_interp_spline

    t = np.asarray(t, dtype=float)
    values = np.asarray(values, dtype=float)
    if t.shape != values.shape or t.ndim != 1 or len(t) < 2:
        raise ValueError("need matching 1-D sample arrays with at least two points")
    cuts = [0]
    for p in sorted(set(breakpoints)):
        j = int(np.searchsorted(t, p))
        if 0 < j < len(t) - 1 and t[j] == p:
            cuts.append(j)
    cuts.append(len(t) - 1)
    out = np.empty_like(values)
    for a, b in zip(cuts[:-1], cuts[1:]):
        tt, vv = t[a:b + 1], values[a:b + 1]
        k = min(5, len(tt) - 1)
        if k % 2 == 0:
            k -= 1
        spl = make_interp_spline(tt, vv, k=k)
        out[a:b + 1] = spl.derivative()(tt)
    return out
