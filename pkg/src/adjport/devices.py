"""One-port and two-port device laws for adjustable springs, inerters,
capacitors, inductors and transformers.

Mechanical laws use the through/across pairing (F, x): positive F is
compressive and positive x brings the terminals together, so F*xdot is the
power supplied to the device.  Electrical laws reuse the same columns under
the force-current analogy (F <-> i, xdot <-> v); rotary laws read F as
torque and x as relative angle.

Each law function returns the conjugate terminal variable as a
:class:`~adjport.signals.Signal`.  :class:`OnePortLaw` bundles a law id with
its parameter signal and produces a :class:`Response` (all terminal
signals plus the internal energy for lossless laws); :func:`simulate`
samples a response into a :class:`SimResult`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from . import signals as sg
from .numerics import (OdeSpec, QuadratureSpec, StateSignal, cumulative_integrate,
                       sampled_derivative, snap_grid, solve_ode)
from .signals import PiecewiseSignal, RunningIntegral, Signal

__all__ = [
    "DeviceError",
    "DomainMismatchError",
    "ActiveLawError",
    "LAW_IDS",
    "ACTIVE_LAWS",
    "LOSSLESS_LAWS",
    "OnePortLaw",
    "TwoPortLaw",
    "Response",
    "SimResult",
    "direct_spring",
    "smoothing_spring",
    "up_smoothing_spring",
    "semi_smoothing_spring",
    "direct_inerter",
    "flyweight_inerter",
    "varspring_ode",
    "varspring_integral",
    "varinerter",
    "varspring_dual",
    "varspring_dual_residual",
    "variable_capacitor",
    "variable_inductor",
    "varinductor",
    "varcapacitor",
    "ideal_transformer",
    "terminate_transformer",
    "terminated_response",
    "parallel_plate_capacitance",
    "motor_generator_map",
    "motor_generator_response",
    "simulate",
]


class DeviceError(ValueError):
    """Invalid law, parameter or input."""


class DomainMismatchError(DeviceError):
    """Parameter signal does not cover the input's time interval."""


class ActiveLawError(DeviceError):
    """Internal energy requested for a law that has none."""


ACTIVE_LAWS = (
    "direct-spring", "smoothing-spring", "up-smoothing-spring", "semi-smoothing-spring",
    "direct-inerter", "flyweight-inerter", "variable-capacitor", "variable-inductor",
)
LOSSLESS_LAWS = (
    "varspring-ode", "varspring-integral", "varinerter", "varspring-dual",
    "varinductor", "varcapacitor", "rotary-varspring", "rotary-varinerter",
)
LAW_IDS = ACTIVE_LAWS + LOSSLESS_LAWS

# which terminal variable the caller prescribes:
#   "x"  displacement (or angle); the law returns F
#   "v"  across rate (voltage); x is its running integral, the law returns i
#   "F"  through variable (force, torque, current); the law returns xdot
DRIVE_KIND = {
    "direct-spring": "x", "smoothing-spring": "x", "up-smoothing-spring": "x",
    "semi-smoothing-spring": "x", "direct-inerter": "x", "flyweight-inerter": "x",
    "varspring-ode": "x", "varspring-integral": "x", "varinerter": "x",
    "rotary-varinerter": "x", "varspring-dual": "F", "rotary-varspring": "F",
    "varinductor": "F", "variable-inductor": "F", "varcapacitor": "v",
    "variable-capacitor": "v",
}
DOMAIN = {law: "translational" for law in LAW_IDS}
DOMAIN.update({"rotary-varspring": "rotary", "rotary-varinerter": "rotary",
               "varinductor": "electrical", "varcapacitor": "electrical",
               "variable-capacitor": "electrical", "variable-inductor": "electrical"})
COLUMN_LABELS = {
    "translational": ("x", "xdot", "F"),
    "rotary": ("theta", "omega", "T"),
    "electrical": ("flux_linkage", "v", "i"),
}


# --------------------------------------------------------------------------
# argument checks


def _check_domain(param: Signal, drive: Signal, name: str):
    if param.t_start > drive.t_start or param.t_end < drive.t_end:
        raise DomainMismatchError(
            f"{name} covers [{param.t_start}, {param.t_end}] but the input needs "
            f"[{drive.t_start}, {drive.t_end}]")


def _probe_times(sig: Signal, t0: float, t1: float, n: int = 513) -> np.ndarray:
    t = np.linspace(t0, t1, n)
    pts = [b for b in sig.breakpoints if t0 <= b <= t1]
    return np.union1d(t, pts)


def _require_positive(param: Signal, drive: Signal, name: str):
    _check_domain(param, drive, name)
    t1 = drive.t_end if math.isfinite(drive.t_end) else getattr(drive, "last_time", drive.t_start + 1)
    t = _probe_times(param, drive.t_start, t1)
    vals = param.eval(t)
    inner = t[t > drive.t_start]
    left = param.eval(inner, side="left") if len(inner) else np.ones(1)
    if np.any(vals <= 0) or np.any(left <= 0):
        raise DeviceError(f"{name} must be strictly positive on the input interval")


def _horizon(*sigs: Signal) -> float:
    t_end = min(s.t_end for s in sigs)
    if not math.isfinite(t_end):
        t_end = max(getattr(s, "last_time", -math.inf) for s in sigs)
    if not math.isfinite(t_end):
        raise DeviceError("cannot determine a finite horizon for the input")
    return t_end


# --------------------------------------------------------------------------
# active adjustable springs and inerters


def direct_spring(k: Signal, x: Signal) -> Signal:
    """``F = k x``."""
    _require_positive(k, x, "k")
    return k * x


def _smoothed(k: Signal, x: Signal, integrand: Signal, weight: float, spec) -> Signal:
    memory = RunningIntegral(integrand, t_end=_horizon(k, x), spec=spec)
    return k * x - weight * memory


def smoothing_spring(k: Signal, x: Signal, spec: QuadratureSpec | None = None) -> Signal:
    """``F = k x - int kdot x``; equivalently ``Fdot = k xdot``."""
    _require_positive(k, x, "k")
    return _smoothed(k, x, k.derivative() * x, 1.0, spec)


def up_smoothing_spring(k: Signal, x: Signal, spec: QuadratureSpec | None = None) -> Signal:
    """``F = k x - int (kdot)_+ x``.

    Only increases of ``k`` are smoothed; decreases act like the direct law.
    The positive part uses the right-hand derivative at breakpoints.
    """
    _require_positive(k, x, "k")
    return _smoothed(k, x, sg.positive_part(k.derivative()) * x, 1.0, spec)


def semi_smoothing_spring(k: Signal, x: Signal, spec: QuadratureSpec | None = None) -> Signal:
    """``F = k x - 1/2 int kdot x``."""
    _require_positive(k, x, "k")
    return _smoothed(k, x, k.derivative() * x, 0.5, spec)


def direct_inerter(b: Signal, x: Signal) -> Signal:
    """``F = b xddot``."""
    _require_positive(b, x, "b")
    return b * x.derivative(2)


def flyweight_inerter(b: Signal, x: Signal) -> Signal:
    """``F = d/dt(b xdot)``."""
    _require_positive(b, x, "b")
    return (b * x.derivative()).derivative()


# --------------------------------------------------------------------------
# lossless laws


class VarspringState(NamedTuple):
    F: Signal
    w: Signal


def varspring_ode(r: Signal, x: Signal, w0: float = 0.0,
                  spec: OdeSpec | None = None) -> VarspringState:
    """Varspring in state form: ``F = r^2 x + r w`` with ``wdot = -rdot x``.

    ``w0`` is ``w`` at the start of ``x``.  With ``w0 = 0`` the device
    behaves before the start like a fixed spring of stiffness ``r(t_s)^2``.
    The returned ``w`` signal is the RK4 solution; its derivative is the
    exact right-hand side, so ``F`` differentiates to
    ``r^2 xdot + (rdot/r) F``.
    """
    _require_positive(r, x, "r")
    t1 = _horizon(r, x)

    def field(t, y, u):
        return -u[0] * u[1]

    inputs = ((r, 1), (x, 0))
    sol = solve_ode(field, [w0], x.t_start, t1, sg.breakpoints_of(r, x), spec, inputs)
    w = StateSignal(sol, field, inputs, derivative=-(r.derivative() * x),
                    breakpoints=sg.breakpoints_of(r, x))
    return VarspringState(r * r * x + r * w, w)


def varspring_integral(r: Signal, x: Signal, spec: QuadratureSpec | None = None) -> Signal:
    """Varspring in integral form: ``F(t) = r(t) * int r xdot``.

    A displacement that is already non-zero at the start contributes the
    step ``r(t_s) x(t_s)`` to the integral, matching :func:`varspring_ode`
    with ``w0 = 0``.
    """
    _require_positive(r, x, "r")
    step = r.eval(x.t_start) * x.eval(x.t_start)
    memory = RunningIntegral(r * x.derivative(), initial=step, t_end=_horizon(r, x), spec=spec)
    return r * memory


def varinerter(r: Signal, x: Signal) -> Signal:
    """``F = r d/dt(r xdot)``; internal energy ``1/2 r^2 xdot^2``."""
    _require_positive(r, x, "r")
    return r * (r * x.derivative()).derivative()


def varspring_dual(p: Signal, F: Signal) -> Signal:
    """Force-driven varspring: ``xdot = p d/dt(p F)``; internal energy ``1/2 p^2 F^2``."""
    _require_positive(p, F, "p")
    return p * (p * F).derivative()


def varinductor(ell: Signal, i: Signal) -> Signal:
    """``v = l d/dt(l i)``."""
    _require_positive(ell, i, "l")
    return ell * (ell * i).derivative()


def varcapacitor(c: Signal, v: Signal) -> Signal:
    """``i = c d/dt(c v)``."""
    _require_positive(c, v, "c")
    return c * (c * v).derivative()


def variable_capacitor(C: Signal, v: Signal) -> Signal:
    """``i = d/dt(C v)`` (capacitance defined as charge over voltage)."""
    _require_positive(C, v, "C")
    return (C * v).derivative()


def variable_inductor(L: Signal, i: Signal) -> Signal:
    """``v = d/dt(L i)`` (inductance defined as flux over current)."""
    _require_positive(L, i, "L")
    return (L * i).derivative()


def varspring_dual_residual(p: Signal, F, x: Signal, t=None):
    """Residual ``xdot - p d/dt(p F)`` of the dual varspring form.

    ``F`` may be a :class:`Signal`, in which case the residual is returned
    as a signal (or sampled at ``t`` when given), or an array of samples at
    ``t``.  Sampled forces are differentiated with piecewise quintic splines
    split at the breakpoints of ``p`` and ``x``; this is a check on the
    numbers, not on the algebra.
    """
    if p.t_start > x.t_start or p.t_end < min(x.t_end, getattr(F, "t_end", x.t_end)):
        raise DomainMismatchError("p does not cover the interval of x and F")
    if isinstance(F, Signal):
        res = x.derivative() - p * (p * F).derivative()
        return res if t is None else res.eval(np.asarray(t, dtype=float))
    if t is None:
        raise DeviceError("sampled forces need their sample times")
    t = np.asarray(t, dtype=float)
    pF = p.eval(t) * np.asarray(F, dtype=float)
    d_pF = sampled_derivative(t, pF, sg.breakpoints_of(p, x))
    return x.eval(t, 1) - p.eval(t) * d_pF


# --------------------------------------------------------------------------
# one-port law objects


@dataclass(frozen=True)
class Response:
    """Terminal signals of a one-port law driven over ``[t_start, t_end]``."""

    law_id: str
    parameter: Signal
    x: Signal
    xdot: Signal
    F: Signal
    internal_energy: Signal | None
    t_start: float
    t_end: float

    @property
    def power(self) -> Signal:
        return self.F * self.xdot

    @property
    def breakpoints(self) -> tuple[float, ...]:
        return tuple(b for b in sg.breakpoints_of(self.parameter, self.x, self.xdot, self.F)
                     if self.t_start <= b <= self.t_end)


@dataclass(frozen=True)
class OnePortLaw:
    """A law id with its adjustable parameter signal.

    ``w0`` is the initial internal state for ``varspring-ode``.
    """

    law_id: str
    parameter: Signal
    w0: float = 0.0

    def __post_init__(self):
        if self.law_id not in LAW_IDS:
            raise DeviceError(f"unknown law id {self.law_id!r}")

    @property
    def lossless(self) -> bool:
        return self.law_id in LOSSLESS_LAWS

    @property
    def drive_kind(self) -> str:
        return DRIVE_KIND[self.law_id]

    @property
    def domain(self) -> str:
        return DOMAIN[self.law_id]

    def respond(self, drive: Signal, quad: QuadratureSpec | None = None,
                ode: OdeSpec | None = None) -> Response:
        """Drive the law with its prescribed terminal variable."""
        u = self.parameter
        law = self.law_id
        kind = self.drive_kind
        t_end = _horizon(u, drive)
        energy = None
        if kind == "x":
            x = drive
            xdot = x.derivative()
            if law == "direct-spring":
                F = direct_spring(u, x)
            elif law == "smoothing-spring":
                F = smoothing_spring(u, x, quad)
            elif law == "up-smoothing-spring":
                F = up_smoothing_spring(u, x, quad)
            elif law == "semi-smoothing-spring":
                F = semi_smoothing_spring(u, x, quad)
            elif law == "direct-inerter":
                F = direct_inerter(u, x)
            elif law == "flyweight-inerter":
                F = flyweight_inerter(u, x)
            elif law == "varspring-ode":
                F, w = varspring_ode(u, x, self.w0, ode)
                energy = 0.5 * sg.square(u * x + w)
            elif law == "varspring-integral":
                F = varspring_integral(u, x, quad)
                energy = 0.5 * sg.square(F / u)
            else:  # varinerter, rotary-varinerter
                F = varinerter(u, x)
                energy = 0.5 * sg.square(u * xdot)
        elif kind == "v":
            xdot = drive
            x = _antiderivative(drive, 0.0, t_end, quad)
            if law == "variable-capacitor":
                F = variable_capacitor(u, drive)
            else:
                F = varcapacitor(u, drive)
                energy = 0.5 * sg.square(u * drive)
        else:
            F = drive
            if law == "variable-inductor":
                xdot = variable_inductor(u, F)
                x = u * F  # flux linkage L*i
            else:
                xdot = varspring_dual(u, F) if law != "varinductor" else varinductor(u, F)
                x0 = u.eval(F.t_start) ** 2 * F.eval(F.t_start)
                x = _antiderivative(xdot, x0, t_end, quad)
                energy = 0.5 * sg.square(u * F)
        return Response(law, u, x, xdot, F, energy, drive.t_start, t_end)


def _antiderivative(sig: Signal, initial: float, t_end: float, quad) -> Signal:
    if isinstance(sig, PiecewiseSignal) and not sig.extend:
        try:
            return sig.antiderivative(initial)
        except sg.SignalError:
            pass
    return RunningIntegral(sig, initial=initial, t_end=t_end, spec=quad)


# --------------------------------------------------------------------------
# transformers and transducers


TWO_PORT_KINDS = ("mechanical-rotary-transformer", "electrical-transformer")
TERMINATIONS = ("unit-capacitor", "unit-inductor", "unit-spring", "unit-inerter")


@dataclass(frozen=True)
class TwoPortLaw:
    """Adjustable ideal transformer: efforts scale by the ratio, flows by
    minus its reciprocal."""

    kind: str
    ratio: Signal

    def __post_init__(self):
        if self.kind not in TWO_PORT_KINDS:
            raise DeviceError(f"unknown two-port kind {self.kind!r}")


def ideal_transformer(law: TwoPortLaw, effort: Signal, flow: Signal) -> tuple[Signal, Signal]:
    """Port-2 (effort, flow) from port-1 (effort, flow).

    Rotary: ``T1 = p T`` and ``omega1 = -omega/p``.  Electrical:
    ``v2 = m v1`` and ``i2 = -i1/m``.  The total power
    ``effort*flow + effort2*flow2`` vanishes identically.
    """
    _require_positive(law.ratio, effort, "transformer ratio")
    return law.ratio * effort, -(flow / law.ratio)


def terminate_transformer(law: TwoPortLaw, terminal_element: str) -> OnePortLaw:
    """One-port seen at port 1 when port 2 is closed by a unit element."""
    m = law.ratio
    if law.kind == "mechanical-rotary-transformer":
        if terminal_element == "unit-spring":
            return OnePortLaw("rotary-varspring", m)
        if terminal_element == "unit-inerter":
            return OnePortLaw("rotary-varinerter", sg.reciprocal(m))
    else:
        if terminal_element == "unit-capacitor":
            return OnePortLaw("varcapacitor", m)
        if terminal_element == "unit-inductor":
            return OnePortLaw("varinductor", sg.reciprocal(m))
    raise DeviceError(f"termination {terminal_element!r} not supported for {law.kind}")


def terminated_response(law: TwoPortLaw, terminal_element: str, drive: Signal) -> Signal:
    """Port-1 conjugate variable computed through the transformer relations
    and the terminating element, without using the induced one-port law.

    The drive is a torque (unit spring), an angle (unit inerter), a voltage
    (unit capacitor) or a current (unit inductor).
    """
    m = law.ratio
    zero = drive * 0.0
    if law.kind == "mechanical-rotary-transformer" and terminal_element == "unit-spring":
        T1, _ = ideal_transformer(law, drive, zero)
        omega1 = -T1.derivative()             # T1 = -theta1
        return -(m * omega1)                  # omega1 = -omega/p
    if law.kind == "mechanical-rotary-transformer" and terminal_element == "unit-inerter":
        _, omega1 = ideal_transformer(law, zero, drive.derivative())
        T1 = -omega1.derivative()             # T1 = -b domega1/dt, b = 1
        return T1 / m                         # T1 = p T
    if law.kind == "electrical-transformer" and terminal_element == "unit-capacitor":
        v2, _ = ideal_transformer(law, drive, zero)
        i2 = -v2.derivative()                 # i2 = -dv2/dt
        return -(m * i2)                      # i2 = -i1/m
    if law.kind == "electrical-transformer" and terminal_element == "unit-inductor":
        _, i2 = ideal_transformer(law, zero, drive)
        v2 = -i2.derivative()                 # v2 = -di2/dt
        return v2 / m                         # v2 = m v1
    raise DeviceError(f"termination {terminal_element!r} not supported for {law.kind}")


def parallel_plate_capacitance(eps0: float, kappa: float, a: float, b: float, d: float,
                               x: Signal) -> Signal:
    """Capacitance of parallel plates (length ``a``, width ``b``, gap ``d``)
    with a dielectric slab of constant ``kappa`` inserted a distance ``x``."""
    if d <= 0 or a <= 0 or b <= 0:
        raise DeviceError("plate dimensions and gap must be positive")
    if kappa < 1:
        raise DeviceError("dielectric constant must be >= 1")
    t1 = _horizon(x)
    probe = x.eval(_probe_times(x, x.t_start, t1))
    if np.any(probe < 0) or np.any(probe > a):
        raise DeviceError("slab insertion must stay within [0, a]")
    scale = eps0 * b / d
    return scale * ((kappa - 1.0) * x + a)


def motor_generator_map(kE: float, kT: float, rotary_law: OnePortLaw) -> OnePortLaw:
    """Electrical one-port seen through an ideal DC machine (``v = kE omega``,
    ``T = kT i``) attached to a rotary varspring or varinerter."""
    if kE <= 0 or kT <= 0:
        raise DeviceError("machine constants must be positive")
    if not math.isclose(kE, kT, rel_tol=1e-12):
        raise DeviceError("the transducer needs kE == kT")
    k = kE
    if rotary_law.law_id == "rotary-varspring":
        return OnePortLaw("varinductor", k * rotary_law.parameter)
    if rotary_law.law_id == "rotary-varinerter":
        return OnePortLaw("varcapacitor", rotary_law.parameter / k)
    raise DeviceError(f"motor-generator map needs a rotary law, got {rotary_law.law_id!r}")


def motor_generator_response(kE: float, kT: float, rotary_law: OnePortLaw, drive: Signal) -> Signal:
    """Electrical conjugate variable computed through the machine equations."""
    if rotary_law.law_id == "rotary-varspring":
        omega = rotary_law.respond(kT * drive).xdot          # current -> torque -> speed
        return kE * omega
    if rotary_law.law_id == "rotary-varinerter":
        theta = _antiderivative(drive / kE, 0.0, drive.t_end, None)   # voltage -> speed
        torque = rotary_law.respond(theta).F
        return torque / kT
    raise DeviceError(f"motor-generator response needs a rotary law, got {rotary_law.law_id!r}")


# --------------------------------------------------------------------------
# sampled results


@dataclass(frozen=True)
class SimResult:
    """Uniformly sampled terminal trajectory.

    ``energy`` is the running integral of ``power`` from the first sample,
    computed by breakpoint-aware quadrature (not from the samples).
    ``internal_energy`` is NaN throughout for active laws.
    """

    law_id: str
    domain: str
    t: np.ndarray
    x: np.ndarray
    xdot: np.ndarray
    F: np.ndarray
    u: np.ndarray
    power: np.ndarray
    energy: np.ndarray
    internal_energy: np.ndarray

    COLUMNS = ("t", "x", "xdot", "F", "u", "power", "energy", "internal_energy")

    @property
    def labels(self) -> tuple[str, str, str]:
        return COLUMN_LABELS[self.domain]

    @property
    def net_energy(self) -> float:
        return float(self.energy[-1])

    @property
    def balance_residual(self) -> np.ndarray:
        """``|energy - (I - I(t0))|`` per sample (NaN for active laws)."""
        return np.abs(self.energy - (self.internal_energy - self.internal_energy[0]))

    def table(self) -> np.ndarray:
        return np.column_stack([getattr(self, c) for c in self.COLUMNS])


def simulate(law: OnePortLaw, drive: Signal, t0: float | None = None, t1: float | None = None,
             dt: float = 1e-3, quad: QuadratureSpec | None = None,
             ode: OdeSpec | None = None) -> SimResult:
    """Drive ``law`` and sample every column on a uniform grid."""
    resp = law.respond(drive, quad, ode)
    t0 = resp.t_start if t0 is None else float(t0)
    t1 = resp.t_end if t1 is None else float(t1)
    if t0 < resp.t_start or t1 > resp.t_end or t1 <= t0:
        raise DeviceError(f"sampling window [{t0}, {t1}] outside [{resp.t_start}, {resp.t_end}]")
    grid = snap_grid(t0, t1, dt, resp.breakpoints)
    F = resp.F.eval(grid)
    xdot = resp.xdot.eval(grid)
    power = F * xdot
    energy = cumulative_integrate(resp.power.eval, grid, resp.breakpoints, quad)
    if resp.internal_energy is not None:
        internal = resp.internal_energy.eval(grid)
    else:
        internal = np.full(grid.shape, np.nan)
    return SimResult(law.law_id, law.domain, grid, resp.x.eval(grid), xdot, F,
                     law.parameter.eval(grid), power, energy, internal)
