"""Strict JSON scenario files.

A signal is written as one of::

    {"type": "poly", "interval": [a, b], "coeffs": [c0, c1, ...]}
    {"type": "sin", "interval": [a, b], "offset": o, "amp": A, "omega": w, "phase": p}
    {"type": "constant", "interval": [a, b], "value": v}
    {"type": "points", "times": [...], "values": [...]}
    {"type": "rates", "initial": v0, "times": [...], "rates": [...]}
    {"type": "piecewise", "segments": [<poly or sin>, ...]}

``poly`` coefficients are in local time ``t - a``; ``sin`` is
``o + A sin(w t + p)`` in absolute time.  Any signal may add
``"extend": true`` to hold its last value.  Unknown fields are errors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from . import signals as sg
from .devices import LAW_IDS
from .numerics import OdeSpec, QuadratureSpec
from .signals import PiecewiseSignal, Signal
from .trajectories import FAMILY_IDS

__all__ = [
    "ScenarioError",
    "Tolerances",
    "Scenario",
    "FalsifyScenario",
    "DriftScenario",
    "parse_signal",
    "load_json",
    "parse_scenario",
    "parse_falsify",
    "parse_drift",
]


class ScenarioError(ValueError):
    """Malformed scenario; the message starts with the offending location."""


@dataclass(frozen=True)
class Tolerances:
    quad_rel: float = 1e-10
    quad_abs: float = 1e-12
    ode: float = 1e-9
    cycle: float = 1e-9

    @property
    def quad(self) -> QuadratureSpec:
        return QuadratureSpec(rel_tol=self.quad_rel, abs_tol=self.quad_abs)

    @property
    def ode_spec(self) -> OdeSpec:
        return OdeSpec(tol=self.ode)


@dataclass(frozen=True)
class Scenario:
    law: str
    parameter: Signal
    input: Signal
    t_start: float
    t_end: float
    dt: float
    tolerances: Tolerances
    w0: float = 0.0
    output: str | None = None


@dataclass(frozen=True)
class FalsifyScenario:
    law: str
    family: str
    n_max: int
    tolerances: Tolerances


@dataclass(frozen=True)
class DriftScenario:
    v1: Signal
    m: Signal
    gamma0: float
    t_start: float
    t_end: float
    dt: float
    tolerances: Tolerances


def load_json(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from None
    if not isinstance(data, dict):
        raise ScenarioError(f"{path}: top level must be an object")
    return data


# --------------------------------------------------------------------------
# field helpers


def _keys(obj, path: str, required: set, optional: set = frozenset()):
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected an object")
    unknown = sorted(set(obj) - required - set(optional))
    if unknown:
        raise ScenarioError(f"{path}.{unknown[0]}: unknown field")
    missing = sorted(required - set(obj))
    if missing:
        raise ScenarioError(f"{path}.{missing[0]}: required field missing")


def _number(obj, key, path, default=None, positive=False):
    if key not in obj:
        if default is None:
            raise ScenarioError(f"{path}.{key}: required field missing")
        return default
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)) or not math.isfinite(v):
        raise ScenarioError(f"{path}.{key}: expected a finite number")
    if positive and v <= 0:
        raise ScenarioError(f"{path}.{key}: must be positive")
    return float(v)


def _numbers(obj, key, path, min_len=1):
    v = obj.get(key)
    if not isinstance(v, list) or len(v) < min_len:
        raise ScenarioError(f"{path}.{key}: expected a list of at least {min_len} numbers")
    for i, item in enumerate(v):
        if isinstance(item, bool) or not isinstance(item, (int, float)) or not math.isfinite(item):
            raise ScenarioError(f"{path}.{key}[{i}]: expected a finite number")
    return [float(item) for item in v]


def _interval(obj, path):
    a, b = _numbers(obj, "interval", path, 2)[:2]
    if len(obj["interval"]) != 2 or not a < b:
        raise ScenarioError(f"{path}.interval: expected [a, b] with a < b")
    return a, b


def _segment(obj, path):
    kind = obj.get("type") if isinstance(obj, dict) else None
    if kind == "poly":
        _keys(obj, path, {"type", "interval", "coeffs"})
        return sg.make_poly_segment(_numbers(obj, "coeffs", path), _interval(obj, path))
    if kind == "sin":
        _keys(obj, path, {"type", "interval", "amp", "omega"}, {"offset", "phase"})
        return sg.make_sinusoid_segment(_number(obj, "offset", path, 0.0), _number(obj, "amp", path),
                                        _number(obj, "omega", path), _number(obj, "phase", path, 0.0),
                                        _interval(obj, path))
    raise ScenarioError(f"{path}.type: segment type must be 'poly' or 'sin'")


def parse_signal(obj, path: str = "signal") -> PiecewiseSignal:
    """Build a :class:`PiecewiseSignal` from its JSON description."""
    if not isinstance(obj, dict):
        raise ScenarioError(f"{path}: expected a signal object")
    extend = obj.get("extend", False)
    if not isinstance(extend, bool):
        raise ScenarioError(f"{path}.extend: expected true or false")
    body = {k: v for k, v in obj.items() if k != "extend"}
    kind = body.get("type")
    try:
        if kind in ("poly", "sin"):
            segs = [_segment(body, path)]
        elif kind == "constant":
            _keys(body, path, {"type", "interval", "value"})
            segs = [sg.make_poly_segment([_number(body, "value", path)], _interval(body, path))]
        elif kind == "piecewise":
            _keys(body, path, {"type", "segments"})
            items = body["segments"]
            if not isinstance(items, list) or not items:
                raise ScenarioError(f"{path}.segments: expected a non-empty list")
            segs = [_segment(s, f"{path}.segments[{i}]") for i, s in enumerate(items)]
        elif kind == "points":
            _keys(body, path, {"type", "times", "values"})
            sig = sg.piecewise_linear(_numbers(body, "times", path, 2), _numbers(body, "values", path, 2))
            segs = list(sig.segments)
        elif kind == "rates":
            _keys(body, path, {"type", "initial", "times", "rates"})
            times = _numbers(body, "times", path, 2)
            rates = _numbers(body, "rates", path)
            if len(rates) != len(times) - 1:
                raise ScenarioError(f"{path}.rates: need one rate per interval")
            segs = list(sg.from_rates(_number(body, "initial", path), times, rates).segments)
        else:
            raise ScenarioError(f"{path}.type: unknown signal type {kind!r}")
        return PiecewiseSignal(segs, extend)
    except sg.SignalError as exc:
        raise ScenarioError(f"{path}: {exc}") from None


def _tolerances(obj, path="tolerances") -> Tolerances:
    if obj is None:
        return Tolerances()
    _keys(obj, path, set(), {"quad_rel", "quad_abs", "ode", "cycle"})
    d = Tolerances()
    return Tolerances(*(_number(obj, k, path, getattr(d, k), positive=True)
                        for k in ("quad_rel", "quad_abs", "ode", "cycle")))


def _check_cover(sig: Signal, t0: float, t1: float, path: str):
    end = sig.t_end if math.isfinite(sig.t_end) else math.inf
    if sig.t_start > t0 or end < t1:
        raise ScenarioError(f"{path}: signal covers [{sig.t_start}, {sig.t_end}] "
                            f"but the scenario needs [{t0}, {t1}]")


def _window(data, dt_override):
    t0 = _number(data, "t_start", "scenario")
    t1 = _number(data, "t_end", "scenario")
    if not t1 > t0:
        raise ScenarioError("scenario.t_end: must exceed t_start")
    dt = dt_override if dt_override is not None else _number(data, "dt", "scenario", 1e-3)
    if not dt > 0:
        raise ScenarioError("scenario.dt: must be positive")
    return t0, t1, dt


def parse_scenario(data: dict, dt: float | None = None) -> Scenario:
    _keys(data, "scenario", {"law", "parameter", "input", "t_start", "t_end"},
          {"dt", "tolerances", "w0", "output"})
    law = data["law"]
    if law not in LAW_IDS:
        raise ScenarioError(f"scenario.law: unknown law id {law!r}")
    t0, t1, step = _window(data, dt)
    param = parse_signal(data["parameter"], "scenario.parameter")
    drive = parse_signal(data["input"], "scenario.input")
    _check_cover(param, t0, t1, "scenario.parameter")
    _check_cover(drive, t0, t1, "scenario.input")
    output = data.get("output")
    if output is not None and not isinstance(output, str):
        raise ScenarioError("scenario.output: expected a path string")
    return Scenario(law, param, drive, t0, t1, step, _tolerances(data.get("tolerances")),
                    _number(data, "w0", "scenario", 0.0), output)


def parse_falsify(data: dict) -> FalsifyScenario:
    _keys(data, "scenario", {"law", "family"}, {"n_max", "tolerances"})
    law = data["law"]
    if law not in LAW_IDS:
        raise ScenarioError(f"scenario.law: unknown law id {law!r}")
    if data["family"] not in FAMILY_IDS:
        raise ScenarioError(f"scenario.family: expected one of {', '.join(FAMILY_IDS)}")
    n_max = data.get("n_max", 8)
    if isinstance(n_max, bool) or not isinstance(n_max, int) or n_max < 3:
        raise ScenarioError("scenario.n_max: expected an integer >= 3")
    return FalsifyScenario(law, data["family"], n_max, _tolerances(data.get("tolerances")))


def parse_drift(data: dict, dt: float | None = None) -> DriftScenario:
    _keys(data, "scenario", {"v1", "m", "t_start", "t_end"}, {"gamma0", "dt", "tolerances"})
    t0, t1, step = _window(data, dt)
    v1 = parse_signal(data["v1"], "scenario.v1")
    m = parse_signal(data["m"], "scenario.m")
    _check_cover(v1, t0, t1, "scenario.v1")
    _check_cover(m, t0, t1, "scenario.m")
    return DriftScenario(v1, m, _number(data, "gamma0", "scenario", 0.0), t0, t1, step,
                         _tolerances(data.get("tolerances")))
