"""Acceptance criteria, one test per criterion, each at its stated tolerance."""

from __future__ import annotations

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor

import numpy as np

import oracle
from adjport import devices as dv
from adjport import mechanism as me
from adjport import signals as sg
from adjport import trajectories as tr
from adjport.cli import main
from adjport.energy import EVIDENCE, INCONCLUSIVE, Trajectory, falsify_passivity, verify_losslessness
from adjport.numerics import snap_grid
from adjport.reproduce import oracle_quad, reproduce


def test_criterion_1_example1(criterion):
    start = time.perf_counter()
    case = reproduce("ex1")
    elapsed = time.perf_counter() - start
    worst = 0.0
    ok = abs(case.computed + 1.0) <= 1e-8
    for n in range(1, 9):
        c = reproduce("ex1", n)
        worst = max(worst, abs(c.computed + n) / n)
        ok &= abs(c.computed + n) <= n * 1e-8
    ok &= elapsed < 1.0
    criterion(1, ok, f"E = {case.computed:.12g}; max |E_n + n|/n = {worst:.2e}; {elapsed:.3f} s")
    assert ok


def test_criterion_2_example3(criterion):
    ok, worst_e, worst_f = True, 0.0, 0.0
    for k in (1, 2, 3, 5):
        case = reproduce("ex3", k)
        pat = tr.example3(k)
        F = dv.up_smoothing_spring(pat.k, pat.s)
        de = abs(case.computed - (2 * k - k * k))
        df = abs(F.eval(float(k)) - (2 - 2 * k))
        worst_e, worst_f = max(worst_e, de), max(worst_f, df)
        ok &= de <= 1e-8 and df <= 1e-9
    criterion(2, ok, f"max energy error {worst_e:.2e}; max F(k) error {worst_f:.2e}")
    assert ok


def test_criterion_3_example4(criterion):
    ok, worst_e, worst_f = True, 0.0, 0.0
    for k in (1, 2):
        case = reproduce("ex4", k)
        pat = tr.example4(k)
        F = dv.semi_smoothing_spring(pat.k, pat.s)
        de = abs(case.computed - (1 - (4 * k + 3) * math.pi / 8))
        df = abs(F.eval(pat.t1, side="left") - ((4 * k + 3) * math.pi / 8 - 2))
        worst_e, worst_f = max(worst_e, de), max(worst_f, df)
        ok &= de <= 1e-8 and df <= 1e-8
    criterion(3, ok, f"max energy error {worst_e:.2e}; max F(t1) error {worst_f:.2e}")
    assert ok


def test_criterion_4_example2(criterion):
    case = reproduce("ex2")
    exact = float(oracle.half_kdot_x2(oracle.EX2))
    pat = tr.example2()
    brute = 0.5 * oracle_quad(lambda t: pat.k.eval(t, 1) * pat.s.eval(t) ** 2, 0, 6, pat.k.breakpoints)
    F = dv.smoothing_spring(pat.k, pat.s)
    jump = abs(F.eval(6.0, side="left") - F.eval(0.0))
    text = "\n".join(case.lines())
    flagged = "published value -1" in text and ("DISCREPANCY" in text) == (abs(exact + 1) > 1e-8)
    ok = (case.computed < 0 and abs(case.computed - brute) <= 1e-8
          and abs(brute - exact) <= 1e-12 and jump <= 1e-9 and flagged)
    criterion(4, ok, f"E = {case.computed:.12g}, oracle {exact} (published -1, flagged); "
                     f"|F(t1) - F(t0)| = {jump:.1e}")
    assert ok


def test_criterion_5_lossless_balance(criterion):
    start = time.perf_counter()
    rng = np.random.default_rng(5)
    worst, worst_matched, ok = 0.0, 0.0, True
    for law in sorted(dv.LOSSLESS_LAWS):
        trajs = []
        for i in range(50):
            matched = i % 2 == 0
            param, drive = tr.random_case(rng, law, matched)
            trajs.append(Trajectory(drive, param, matched))
        rep = verify_losslessness(dv.OnePortLaw(law, trajs[0].parameter), trajs, tol=1e-6)
        worst = max(worst, rep.max_residual)
        worst_matched = max(worst_matched, max(abs(e) for e in rep.matched_energies))
        ok &= rep.passed
    elapsed = time.perf_counter() - start
    ok &= elapsed < 30.0
    criterion(5, ok, f"{len(dv.LOSSLESS_LAWS)} laws x 50 cases: max normalised residual "
                     f"{worst:.2e}, max matched energy {worst_matched:.2e}; {elapsed:.1f} s")
    assert ok


def test_criterion_6_form_equivalence(criterion):
    rng = np.random.default_rng(6)
    worst_form, worst_dual, worst_dual_sampled = 0.0, 0.0, 0.0
    for _ in range(20):
        r, x = tr.random_case(rng, "varspring-ode")
        F_ode = dv.varspring_ode(r, x)[0]
        F_int = dv.varspring_integral(r, x)
        t = np.union1d(snap_grid(0.0, x.t_end, 1e-3, r.breakpoints), r.breakpoints)
        worst_form = max(worst_form, float(np.max(np.abs(F_ode.eval(t) - F_int.eval(t)))))
        p = sg.reciprocal(r)
        worst_dual = max(worst_dual, float(np.max(np.abs(dv.varspring_dual_residual(p, F_ode, x, t)))))
        sampled = dv.varspring_dual_residual(p, F_ode.eval(t), x, t)
        worst_dual_sampled = max(worst_dual_sampled, float(np.max(np.abs(sampled))))
    ok = worst_form <= 1e-7 and worst_dual <= 1e-6 and worst_dual_sampled <= 1e-6
    criterion(6, ok, f"ode vs integral {worst_form:.2e}; dual residual {worst_dual:.2e} "
                     f"(from samples {worst_dual_sampled:.2e})")
    assert ok


def test_criterion_7_mechanism(criterion):
    rng = np.random.default_rng(7)
    worst_par, worst_par_sampled, worst_mom = 0.0, 0.0, 0.0
    for _ in range(10):
        r, x = tr.random_case(rng, "varspring-ode")
        cfg = me.LeverConfig(float(rng.uniform(0.5, 2.0)), 0.0, float(rng.uniform(0.5, 2.0)))
        traj = me.fulcrum_trajectory(r, x, cfg)
        t = np.union1d(snap_grid(0.0, x.t_end, 1e-3, r.breakpoints), r.breakpoints)
        par = me.parallel_residual(traj.x_r, traj.y_r, x, t)
        sam = me.parallel_residual(traj.x_r.eval(t), traj.y_r.eval(t), x, t, r.breakpoints)
        F = cfg.k0 * dv.varspring_ode(r, x)[0]
        mom = me.moment_balance_residual(F, x, traj).moment.eval(t)
        worst_par = max(worst_par, float(np.max(np.abs(par))))
        worst_par_sampled = max(worst_par_sampled, float(np.max(np.abs(sam))))
        worst_mom = max(worst_mom, float(np.max(np.abs(mom))))
    x_r, y_r = me.straight_line_pivot(0.0, 0.5, 0.5, (0.0, 1.0))
    tt = np.linspace(0, 1, 101)
    control = float(np.max(np.abs(me.parallel_residual(x_r, y_r, sg.linear(0, 1, (0, 1)), tt))))
    ok = worst_par <= 1e-8 and worst_par_sampled <= 1e-8 and worst_mom <= 1e-7 and control > 1e-3
    criterion(7, ok, f"parallel {worst_par:.2e} (from samples {worst_par_sampled:.2e}); "
                     f"moment {worst_mom:.2e}; straight-line pivot {control:.3g}")
    assert ok


def test_criterion_8_coil_drift(criterion):
    gam, res = [], []
    interval = (0.0, 1.0)
    t = snap_grid(0.0, 1.0, 1e-3)
    for L in (10.0, 20.0, 40.0, 80.0):
        d = me.coupled_coils_drift(me.CoilConfig(L, sg.linear(1, 1, interval)), sg.constant(1.0, interval))
        gam.append(float(np.max(np.abs(d.gamma.eval(t)))))
        res.append(float(np.max(np.abs(d.residual.eval(t)))))
    ratios = [b / a for a, b in zip(gam, gam[1:])]
    spread = (max(res) - min(res)) / max(res)
    ok = all(abs(q - 0.5) <= 0.05 * 0.5 for q in ratios) and spread < 0.01
    criterion(8, ok, f"gamma ratios {', '.join(f'{q:.6f}' for q in ratios)}; "
                     f"residual spread {spread:.1e}")
    assert ok


def test_criterion_9_negative_controls(criterion):
    bad = []
    for law, fam in tr.CANONICAL_FAMILY.items():
        if falsify_passivity(law, tr.family(fam, law), 6).verdict != EVIDENCE:
            bad.append(f"{law}/{fam}")
    shapes = sorted(set(tr.CANONICAL_FAMILY.values()))
    for law in sorted(dv.LOSSLESS_LAWS):
        for fam in shapes:
            if falsify_passivity(law, tr.family(fam, law), 6).verdict != INCONCLUSIVE:
                bad.append(f"{law}/{fam}")
    ok = not bad
    criterion(9, ok, f"6 active laws certified; {len(dv.LOSSLESS_LAWS)} lossless laws x "
                     f"{len(shapes)} families inconclusive" + (f"; wrong: {bad}" if bad else ""))
    assert ok


def test_criterion_10_determinism(criterion, tmp_path):
    scen = tmp_path / "s.json"
    scen.write_text(json.dumps({
        "law": "varspring-ode",
        "parameter": {"type": "points", "times": [0, 1, 2], "values": [1, 2, 1]},
        "input": {"type": "sin", "interval": [0, 2], "amp": 1, "omega": 3.0},
        "t_start": 0, "t_end": 2, "dt": 1e-3}))
    drift = tmp_path / "d.json"
    drift.write_text(json.dumps({
        "v1": {"type": "constant", "interval": [0, 1], "value": 1},
        "m": {"type": "poly", "interval": [0, 1], "coeffs": [1, 1]},
        "t_start": 0, "t_end": 1, "dt": 0.01}))

    def run(i):
        a = main(["simulate", "-s", str(scen), "-o", str(tmp_path / f"sim{i}.csv")])
        b = main(["drift-sweep", "--L", "10,20,40,80", "-s", str(drift), "-o", str(tmp_path / f"d{i}.csv")])
        return a, b

    codes = [run(0)]
    with ThreadPoolExecutor(4) as pool:
        codes += list(pool.map(run, range(1, 5)))
    sims = {(tmp_path / f"sim{i}.csv").read_bytes() for i in range(5)}
    drifts = {(tmp_path / f"d{i}.csv").read_bytes() for i in range(5)}
    ok = all(c == (0, 0) for c in codes) and len(sims) == 1 and len(drifts) == 1
    criterion(10, ok, "5 runs (4 concurrent) of simulate and drift-sweep: "
                      f"{len(sims)} distinct simulate CSV, {len(drifts)} distinct sweep CSV")
    assert ok
