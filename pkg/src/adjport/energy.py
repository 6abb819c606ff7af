"""Energy accounting, cycle checks, passivity falsification and
losslessness verification.

``falsify_passivity`` can only gather numerical evidence: it evaluates the
supplied energy over an indexed family of trajectories and reports whether
the energies keep falling without bound.  ``verify_losslessness`` checks the
running balance between supplied energy and the change of internal energy.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from . import signals as sg
from .devices import (ACTIVE_LAWS, DRIVE_KIND, LOSSLESS_LAWS, ActiveLawError, DeviceError,
                      OnePortLaw, Response)
from .numerics import QuadratureSpec, cumulative_integrate, integrate, snap_grid
from .signals import Signal

__all__ = [
    "CYCLE_TOL",
    "MAX_CYCLE_ORDER",
    "terminal_energy",
    "internal_energy",
    "CycleEntry",
    "CycleReport",
    "check_cycle_conditions",
    "cycle_quantities",
    "FamilyMember",
    "TrajectoryFamily",
    "ActivityCertificate",
    "falsify_passivity",
    "Trajectory",
    "LosslessReport",
    "verify_losslessness",
]

CYCLE_TOL = 1e-9
MAX_CYCLE_ORDER = 2
EVIDENCE = "evidence-of-activity"
INCONCLUSIVE = "inconclusive"


def terminal_energy(F: Signal, xdot: Signal, t0: float, t1: float,
                    spec: QuadratureSpec | None = None) -> float:
    """Energy supplied at the terminals, ``int_{t0}^{t1} F xdot dt``."""
    power = F * xdot
    return integrate(power.eval, t0, t1, sg.breakpoints_of(F, xdot), spec)


def internal_energy(law, *, u: float, F: float | None = None, xdot: float | None = None,
                    x: float | None = None, w: float | None = None) -> float:
    """Stored energy of a lossless law from its state at one instant.

    ``law`` is a law id or :class:`OnePortLaw`.  Spring-like laws need
    ``F`` (or ``x`` and ``w`` for the state form); inerter-like laws need
    ``xdot``.  Electrical laws take ``F`` as the current and ``xdot`` as the
    voltage.
    """
    law_id = law.law_id if isinstance(law, OnePortLaw) else str(law)
    if law_id in ACTIVE_LAWS:
        raise ActiveLawError(f"{law_id} has no internal energy function")
    if law_id not in LOSSLESS_LAWS:
        raise DeviceError(f"unknown law id {law_id!r}")
    if u <= 0:
        raise DeviceError("parameter must be positive")

    def need(name, value):
        if value is None:
            raise DeviceError(f"{law_id} internal energy needs {name}")
        return float(value)

    if law_id == "varspring-ode" and x is not None and w is not None:
        return 0.5 * (u * x + w) ** 2
    if law_id in ("varspring-ode", "varspring-integral"):
        return 0.5 * need("F", F) ** 2 / u**2
    if law_id in ("varspring-dual", "rotary-varspring", "varinductor"):
        return 0.5 * u**2 * need("F", F) ** 2
    return 0.5 * u**2 * need("xdot", xdot) ** 2


# --------------------------------------------------------------------------
# cycle conditions


@dataclass(frozen=True)
class CycleEntry:
    name: str
    order: int
    mismatch: float
    passed: bool


@dataclass(frozen=True)
class CycleReport:
    """Endpoint comparison of each quantity and its derivatives.

    Values are taken as the right limit at the earlier time and the left
    limit at the later one, so swapping ``t0`` and ``t1`` gives the same
    report.  ``order`` is the highest derivative checked.
    """

    t0: float
    t1: float
    order: int
    tol: float
    entries: tuple[CycleEntry, ...]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    def quantity_passed(self, name: str) -> bool:
        return all(e.passed for e in self.entries if e.name == name)

    def to_dict(self) -> dict:
        return {"t0": self.t0, "t1": self.t1, "order": self.order, "tol": self.tol,
                "passed": self.passed, "entries": [asdict(e) for e in self.entries]}


def check_cycle_conditions(quantities, t0: float, t1: float, order: int = 0,
                           tol: float = CYCLE_TOL) -> CycleReport:
    """Compare each signal (and derivatives up to ``order``) at ``t0`` and ``t1``.

    ``quantities`` is a mapping name -> signal or a plain sequence of
    signals (named ``q0``, ``q1``, ...).  A derivative the signal cannot
    provide counts as a failed entry with NaN mismatch.
    """
    if not 0 <= order <= MAX_CYCLE_ORDER:
        raise ValueError(f"cycle order must be in [0, {MAX_CYCLE_ORDER}]")
    if not isinstance(quantities, Mapping):
        quantities = {f"q{i}": q for i, q in enumerate(quantities)}
    a, b = min(t0, t1), max(t0, t1)
    entries = []
    for name, sig in quantities.items():
        for k in range(order + 1):
            if a == b:
                mismatch = 0.0
            elif k > sig.max_order:
                mismatch = math.nan
            else:
                mismatch = abs(sig.eval(b, k, side="left") - sig.eval(a, k, side="right"))
            entries.append(CycleEntry(name, k, float(mismatch), bool(mismatch <= tol)))
    return CycleReport(float(t0), float(t1), order, float(tol), tuple(entries))


def cycle_quantities(resp: Response) -> dict[str, Signal]:
    """The endpoint conditions under which a law's cycle energy is
    characterised: parameter with displacement and force for spring-like
    laws, parameter with velocity for inerter-like laws, parameter with
    force for force-driven laws."""
    law = resp.law_id
    kind = DRIVE_KIND[law]
    if law in ("direct-inerter", "flyweight-inerter", "varinerter", "rotary-varinerter") or kind == "v":
        return {"u": resp.parameter, "xdot": resp.xdot}
    if kind == "F":
        return {"u": resp.parameter, "F": resp.F}
    return {"u": resp.parameter, "x": resp.x, "F": resp.F}


# --------------------------------------------------------------------------
# trajectory families and falsification


@dataclass(frozen=True)
class FamilyMember:
    """Parameter and drive signals of one family member over ``[t0, t1]``."""

    parameter: Signal
    drive: Signal
    t0: float
    t1: float


@dataclass(frozen=True)
class TrajectoryFamily:
    """Indexed trajectories ``member(n)`` for ``n = 1, 2, ...``.

    A repetition family's member ``n`` is ``n`` back-to-back copies of
    member 1, with the law's internal state carried across the joins.
    """

    family_id: str
    member: Callable[[int], FamilyMember]
    repetition: bool = False
    description: str = ""


@dataclass(frozen=True)
class ActivityCertificate:
    """Numerical witness (or lack of one) that a law is not passive.

    For repetition families ``per_cycle_energy`` is the energy of a single
    cycle and ``cycle`` its endpoint report.  Otherwise ``slope`` is the
    fitted rate of change of ``E_n`` at ``n_max`` and ``slope_stderr`` its
    standard error (quadratic trend when ``n_max >= 4``, linear otherwise).
    """

    law_id: str
    family_id: str
    description: str
    indices: tuple[int, ...]
    energies: tuple[float, ...]
    repetition: bool
    per_cycle_energy: float | None
    cycle: CycleReport | None
    slope: float
    slope_stderr: float
    strictly_decreasing: bool
    tol: float
    verdict: str

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in (
            "law_id", "family_id", "description", "repetition", "per_cycle_energy", "slope",
            "slope_stderr", "strictly_decreasing", "tol", "verdict")}
        d["indices"] = list(self.indices)
        d["energies"] = list(self.energies)
        d["cycle"] = None if self.cycle is None else self.cycle.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, allow_nan=True)


def _trend(n: np.ndarray, e: np.ndarray) -> tuple[float, float]:
    deg = 2 if len(n) >= 4 else 1
    z = n - n.mean()
    coef, cov = np.polyfit(z, e, deg, cov="unscaled")
    resid = e - np.polyval(coef, z)
    dof = len(n) - (deg + 1)
    s2 = float(resid @ resid) / dof
    # derivative of the fit at the last index, as a linear functional of coef
    zl = z[-1]
    g = np.array([2 * zl, 1.0, 0.0]) if deg == 2 else np.array([1.0, 0.0])
    slope = float(g @ coef)
    var = float(g @ cov @ g) * s2
    return slope, math.sqrt(max(var, 0.0))


def falsify_passivity(law, family: TrajectoryFamily, n_max: int, tol: float = 1e-9,
                      quad: QuadratureSpec | None = None) -> ActivityCertificate:
    """Evaluate ``E_n`` for ``n = 1..n_max`` and judge whether the supplied
    energy falls without bound.

    ``law`` is a law id or a :class:`OnePortLaw` (only its id and ``w0``
    are used; the family supplies the parameter signal).
    """
    if n_max < 3:
        raise ValueError("n_max must be at least 3")
    law_id = law.law_id if isinstance(law, OnePortLaw) else str(law)
    w0 = law.w0 if isinstance(law, OnePortLaw) else 0.0
    indices = tuple(range(1, n_max + 1))
    energies = []
    first = None
    for n in indices:
        m = family.member(n)
        resp = OnePortLaw(law_id, m.parameter, w0).respond(m.drive, quad)
        energies.append(terminal_energy(resp.F, resp.xdot, m.t0, m.t1, quad))
        if n == 1:
            first = (m, resp)
    e = np.array(energies)
    decreasing = bool(np.all(np.diff(e) < -tol))
    slope, se = _trend(np.array(indices, dtype=float), e)
    cycle = None
    per_cycle = None
    if family.repetition:
        m, resp = first
        cycle = check_cycle_conditions(cycle_quantities(resp), m.t0, m.t1, 0)
        per_cycle = float(energies[0])
        active = cycle.passed and per_cycle < -tol
    else:
        significant = abs(slope) > 10 * se if se > 0 else abs(slope) > tol
        active = decreasing and slope < -tol and significant
    return ActivityCertificate(law_id, family.family_id, family.description, indices,
                               tuple(float(v) for v in energies), family.repetition, per_cycle,
                               cycle, slope, se, decreasing, tol,
                               EVIDENCE if active else INCONCLUSIVE)


# --------------------------------------------------------------------------
# losslessness


@dataclass(frozen=True)
class Trajectory:
    """Input for :func:`verify_losslessness`; ``parameter=None`` uses the law's own."""

    drive: Signal
    parameter: Signal | None = None
    matched: bool = False
    label: str = ""


@dataclass(frozen=True)
class LosslessReport:
    """``max_residual`` is ``max |E(t) - (I(t) - I(t0))| / (1 + |I(t)|)`` over
    all samples of all trajectories; ``matched_energies`` lists the net
    energy of each matched-endpoint trajectory."""

    law_id: str
    max_residual: float
    matched_energies: tuple[float, ...]
    min_margin: float
    tol: float
    passed: bool

    def to_dict(self) -> dict:
        d = asdict(self)
        d["matched_energies"] = list(self.matched_energies)
        return d


def verify_losslessness(law: OnePortLaw, trajectories: Sequence[Trajectory],
                        quad: QuadratureSpec | None = None, tol: float = 1e-6,
                        dt: float = 1e-2) -> LosslessReport:
    """Running energy balance of a lossless law on each trajectory.

    ``min_margin`` is the smallest ``E(t) + I(t0)`` seen, which must stay
    non-negative for passivity with the bound ``K = I(t0)``.
    """
    if law.law_id not in LOSSLESS_LAWS:
        raise ActiveLawError(f"{law.law_id} is not in the lossless family")
    worst = 0.0
    margin = math.inf
    matched = []
    for traj in trajectories:
        param = law.parameter if traj.parameter is None else traj.parameter
        resp = OnePortLaw(law.law_id, param, law.w0).respond(traj.drive, quad)
        grid = snap_grid(resp.t_start, resp.t_end, dt, resp.breakpoints)
        energy = cumulative_integrate(resp.power.eval, grid, resp.breakpoints, quad)
        stored = resp.internal_energy.eval(grid)
        resid = np.abs(energy - (stored - stored[0])) / (1.0 + np.abs(stored))
        worst = max(worst, float(resid.max()))
        margin = min(margin, float(np.min(energy + stored[0])))
        if traj.matched:
            matched.append(float(energy[-1]))
    ok = worst <= tol and all(abs(e) <= tol for e in matched) and margin >= -tol
    return LosslessReport(law.law_id, worst, tuple(matched), margin, tol, ok)
