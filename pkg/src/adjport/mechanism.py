"""Kinematics of the physical constructions: the lever with a moveable
fulcrum, the opposed-cone rotary transformer, and the coupled-coil
approximation of an adjustable electrical transformer.

Lever geometry: the internal spring of height ``y0`` sits at the origin,
the external terminal is displaced by ``x`` (the bar end moves to
``x1 = -x``), and the fulcrum at ``(x_r, y_r)`` divides the bar with ratio
``r = (y0 - y_r) / y_r``.  The internal spring compresses by
``x0 = r x + (r + 1) x_r``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from . import signals as sg
from .devices import DeviceError, _check_domain, _horizon, _require_positive
from .energy import CycleReport, check_cycle_conditions
from .numerics import (OdeSpec, QuadratureSpec, StateSignal, integrate, sampled_derivative,
                       solve_ode)
from .signals import Signal

__all__ = [
    "LeverConfig",
    "ConeGeometry",
    "CoilConfig",
    "FulcrumTrajectory",
    "fulcrum_trajectory",
    "parallel_residual",
    "straight_line_pivot",
    "MomentResiduals",
    "moment_balance_residual",
    "TravelReport",
    "fulcrum_travel_report",
    "cone_ratio",
    "CoilDrift",
    "coupled_coils_drift",
    "CoilEnergy",
    "coupled_coils_energy",
]


@dataclass(frozen=True)
class LeverConfig:
    """Lever height ``y0``, initial fulcrum abscissa ``x_r0`` and the
    internal element constant ``k0``."""

    y0: float
    x_r0: float = 0.0
    k0: float = 1.0

    def __post_init__(self):
        if not self.y0 > 0:
            raise DeviceError("lever height y0 must be positive")
        if not self.k0 > 0:
            raise DeviceError("internal element constant must be positive")


@dataclass(frozen=True)
class ConeGeometry:
    """Opposed cones of base radius ``R0``, half-aperture ``alpha`` and
    axial length ``S``."""

    R0: float
    alpha: float
    S: float

    def __post_init__(self):
        if not self.R0 > 0:
            raise DeviceError("cone base radius must be positive")
        if not 0 < self.alpha < math.pi / 2:
            raise DeviceError("half-aperture must lie in (0, pi/2)")
        if not self.S > 0:
            raise DeviceError("axial length must be positive")


@dataclass(frozen=True)
class CoilConfig:
    """Primary inductance ``L``, coupling ratio ``m(t)`` and ``gamma(t_s)``."""

    L: float
    m: Signal
    gamma0: float = 0.0

    def __post_init__(self):
        if not self.L > 0:
            raise DeviceError("coil inductance must be positive")


# --------------------------------------------------------------------------
# lever


@dataclass(frozen=True)
class FulcrumTrajectory:
    r: Signal
    x: Signal
    x_r: Signal
    y_r: Signal
    config: LeverConfig

    @property
    def x0(self) -> Signal:
        """Compression of the internal element."""
        return self.r * self.x + (self.r + 1.0) * self.x_r

    @property
    def nodes(self) -> np.ndarray:
        return self.x_r.solution.t


def fulcrum_trajectory(r: Signal, x: Signal, config: LeverConfig,
                       spec: OdeSpec | None = None) -> FulcrumTrajectory:
    """Fulcrum path that keeps the fulcrum force workless.

    ``y_r = y0 / (r + 1)`` follows algebraically; ``x_r`` solves
    ``(r + 1) xdot_r + rdot (x + x_r) = 0``.
    """
    _require_positive(r, x, "r")
    t1 = _horizon(r, x)

    def field(t, y, u):
        return -u[0] * (u[1] + y) / (u[2] + 1.0)

    inputs = ((r, 1), (x, 0), (r, 0))
    pts = sg.breakpoints_of(r, x)
    sol = solve_ode(field, [config.x_r0], x.t_start, t1, pts, spec, inputs)
    def rate(state):
        return -(r.derivative() * (x + state)) / (r + 1.0)

    # the rate of the cubic interpolant is exact at the nodes, which is all the
    # quintic upgrade needs; re-evaluating it on the quintic sharpens it between
    plain = StateSignal(sol, field, inputs, breakpoints=pts)
    first = StateSignal(sol, field, inputs, derivative=rate(plain), breakpoints=pts)
    x_r = StateSignal(sol, field, inputs, derivative=rate(first), breakpoints=pts)
    y_r = config.y0 * sg.reciprocal(r + 1.0)
    return FulcrumTrajectory(r, x, x_r, y_r, config)


def parallel_residual(x_r, y_r, x: Signal, t=None, breakpoints=()):
    """``y_r xdot_r - ydot_r (x_r + x)``: zero when the fulcrum moves parallel
    to the bar.

    With signals the residual is a signal (sampled at ``t`` if given).  With
    arrays sampled at ``t`` the rates come from piecewise splines split at
    ``breakpoints``.
    """
    if isinstance(x_r, Signal) and isinstance(y_r, Signal):
        res = y_r * x_r.derivative() - y_r.derivative() * (x_r + x)
        return res if t is None else res.eval(np.asarray(t, dtype=float))
    if t is None:
        raise DeviceError("sampled fulcrum paths need their sample times")
    t = np.asarray(t, dtype=float)
    x_r = np.asarray(x_r, dtype=float)
    y_r = np.asarray(y_r, dtype=float)
    pts = tuple(breakpoints) + tuple(x.breakpoints)
    return (y_r * sampled_derivative(t, x_r, pts)
            - sampled_derivative(t, y_r, pts) * (x_r + x.eval(t)))


def straight_line_pivot(x_r0: float, speed: float, y_r: float,
                        interval: tuple[float, float]) -> tuple[Signal, Signal]:
    """Fulcrum pushed along a fixed horizontal line (a predetermined path)."""
    return sg.linear(x_r0, speed, interval), sg.constant(y_r, interval)


class MomentResiduals(NamedTuple):
    moment: Signal       # F y_r - k0 x0 (y0 - y_r)
    kinematic: Signal    # x0dot - r xdot
    force: Signal        # F implied by the moment balance


def moment_balance_residual(F: Signal, x: Signal, traj: FulcrumTrajectory,
                            config: LeverConfig | None = None) -> MomentResiduals:
    """Moment balance about the fulcrum and the kinematic relation
    ``x0dot = r xdot`` for a lever driven by ``x`` with terminal force ``F``."""
    config = traj.config if config is None else config
    _check_domain(traj.r, x, "r")
    x0 = traj.r * x + (traj.r + 1.0) * traj.x_r
    gap = config.y0 - traj.y_r
    moment = F * traj.y_r - config.k0 * x0 * gap
    kinematic = x0.derivative() - traj.r * x.derivative()
    force = config.k0 * x0 * gap / traj.y_r
    return MomentResiduals(moment, kinematic, force)


class TravelReport(NamedTuple):
    min: float
    max: float
    range: float


def fulcrum_travel_report(x_r, t=None) -> TravelReport:
    """Extent of fulcrum travel over a run.

    ``x_r`` is an array of samples or a signal; a signal from
    :func:`fulcrum_trajectory` is sampled at its ODE nodes unless ``t`` is
    given.
    """
    if isinstance(x_r, Signal):
        if t is None:
            sol = getattr(x_r, "solution", None)
            t = sol.t if sol is not None else np.linspace(x_r.t_start, _horizon(x_r), 2001)
        vals = x_r.eval(np.asarray(t, dtype=float))
    else:
        vals = np.asarray(x_r, dtype=float)
    lo, hi = float(np.min(vals)), float(np.max(vals))
    return TravelReport(lo, hi, hi - lo)


# --------------------------------------------------------------------------
# cone transformer


def cone_ratio(geometry: ConeGeometry, s: Signal) -> Signal:
    """Ratio of contact radii for balls at axial position ``s``.

    ``p = (R0 + s tan a) / (R0 + (S - s) tan a)``, so ``p(S/2) = 1`` and
    ``p(s) p(S - s) = 1``.
    """
    t1 = _horizon(s)
    t = np.linspace(s.t_start, t1, 1025)
    vals = s.eval(t)
    if np.any(vals < 0) or np.any(vals > geometry.S):
        raise DeviceError("assembly position must stay within [0, S]")
    g = math.tan(geometry.alpha)
    near = geometry.R0 + g * s
    far = (geometry.R0 + g * geometry.S) - g * s
    return near / far


# --------------------------------------------------------------------------
# coupled coils


class CoilDrift(NamedTuple):
    gamma: Signal
    v2: Signal
    residual: Signal


def coupled_coils_drift(config: CoilConfig, v1: Signal, t0: float | None = None,
                        t1: float | None = None, spec: OdeSpec | None = None) -> CoilDrift:
    """Integrate ``gammadot = v1 / L`` for ``gamma = i1 + m i2`` and report
    ``v2 = m v1 + L mdot gamma``; ``residual = L mdot gamma`` is the departure
    from the ideal ratio ``v2 = m v1``."""
    _require_positive(config.m, v1, "m")
    t0 = v1.t_start if t0 is None else float(t0)
    t1 = _horizon(config.m, v1) if t1 is None else float(t1)
    L = config.L

    def field(t, y, u):
        return u[0] / L + 0.0 * y

    inputs = ((v1, 0),)
    pts = sg.breakpoints_of(v1, config.m)
    sol = solve_ode(field, [config.gamma0], t0, t1, pts, spec, inputs)
    gamma = StateSignal(sol, field, inputs, derivative=v1 / L, breakpoints=pts)
    residual = L * config.m.derivative() * gamma
    return CoilDrift(gamma, config.m * v1 + residual, residual)


class CoilEnergy(NamedTuple):
    direct: float        # int i2 v2 with v2 = L d/dt(m^2 i2)
    closed_form: float   # (L/2) int d(m^2)/dt i2^2
    cycle: CycleReport


def coupled_coils_energy(config: CoilConfig, i2: Signal, t0: float | None = None,
                         t1: float | None = None,
                         spec: QuadratureSpec | None = None) -> CoilEnergy:
    """Energy supplied at port 2 with port 1 open, computed two ways.

    The closed form equals the direct integral only when ``m`` and ``i2``
    return to their starting values; ``cycle`` reports whether they do.
    """
    _require_positive(config.m, i2, "m")
    t0 = i2.t_start if t0 is None else float(t0)
    t1 = _horizon(config.m, i2) if t1 is None else float(t1)
    m_sq = config.m * config.m
    v2 = config.L * (m_sq * i2).derivative()
    pts = sg.breakpoints_of(config.m, i2)
    direct = integrate((i2 * v2).eval, t0, t1, pts, spec)
    closed = 0.5 * config.L * integrate((m_sq.derivative() * i2 * i2).eval, t0, t1, pts, spec)
    cycle = check_cycle_conditions({"m": config.m, "i2": i2}, t0, t1, 0)
    return CoilEnergy(direct, closed, cycle)
