from __future__ import annotations

import csv
import json
import math
import subprocess
import sys

import numpy as np
import pytest

from adjport.cli import EXIT_MISMATCH, EXIT_OK, EXIT_PARSE, EXIT_SIM, format_value, main


def write(path, obj):
    path.write_text(json.dumps(obj), encoding="utf-8")
    return str(path)


def read_csv(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], np.array([[float(v) for v in r] for r in rows[1:]])
    return header, body


VARSPRING = {
    "law": "varspring-ode",
    "parameter": {"type": "poly", "interval": [0, 1], "coeffs": [1, 1]},
    "input": {"type": "poly", "interval": [0, 1], "coeffs": [0, 1]},
    "t_start": 0, "t_end": 1, "dt": 1e-3,
}

EXAMPLE1 = {
    "law": "direct-spring",
    "parameter": {"type": "rates", "initial": 2, "times": [0, 1, 2, 3, 4], "rates": [-1, 0, 1, 0]},
    "input": {"type": "points", "times": [0, 2, 4], "values": [0, 2, 0]},
    "t_start": 0, "t_end": 4, "dt": 0.01,
}


def test_format_value():
    assert format_value(0.1) == "0.10000000000000001"
    assert format_value(math.nan) == "nan"


def test_simulate_varspring(tmp_path, capsys):
    out = tmp_path / "v.csv"
    code = main(["simulate", "-s", write(tmp_path / "s.json", VARSPRING), "-o", str(out)])
    assert code == EXIT_OK
    header, body = read_csv(out)
    assert header == ["t", "x", "xdot", "F", "u", "power", "energy", "internal_energy"]
    assert body[-1, 3] == pytest.approx(3.0, abs=1e-6)
    assert len(body) == 1001
    assert "net energy" in capsys.readouterr().out


def test_simulate_example1_energy(tmp_path):
    out = tmp_path / "e1.csv"
    assert main(["simulate", "-s", write(tmp_path / "s.json", EXAMPLE1), "-o", str(out)]) == EXIT_OK
    _, body = read_csv(out)
    assert body[-1, 6] == pytest.approx(-1.0, abs=1e-8)
    assert np.all(np.isnan(body[:, 7]))


def test_simulate_zero_input(tmp_path):
    sc = dict(VARSPRING, input={"type": "constant", "interval": [0, 1], "value": 0})
    out = tmp_path / "z.csv"
    assert main(["simulate", "-s", write(tmp_path / "s.json", sc), "-o", str(out)]) == EXIT_OK
    _, body = read_csv(out)
    assert np.all(body[:, 3] == 0.0) and np.all(body[:, 6] == 0.0)


def test_energy_column_differences_recover_power(tmp_path):
    out = tmp_path / "e1.csv"
    main(["simulate", "-s", write(tmp_path / "s.json", EXAMPLE1), "-o", str(out)])
    _, body = read_csv(out)
    t, power, energy = body[:, 0], body[:, 5], body[:, 6]
    dt = np.diff(t)
    trap = 0.5 * (power[1:] + power[:-1]) * dt
    dpower = np.max(np.abs(np.diff(power) / dt))
    assert np.max(np.abs(np.diff(energy) - trap)) <= 10 * dt.max() ** 2 * dpower


def test_simulate_electrical_summary(tmp_path, capsys):
    sc = dict(VARSPRING, law="varcapacitor")
    main(["simulate", "-s", write(tmp_path / "s.json", sc), "-o", str(tmp_path / "c.csv")])
    out = capsys.readouterr().out
    assert "electrical" in out and "xdot=v" in out and "F=i" in out


@pytest.mark.parametrize("mutate, fragment", [
    (lambda d: d.update(bogus=1), "scenario.bogus"),
    (lambda d: d.update(law="spring"), "scenario.law"),
    (lambda d: d["input"].update(coeffs="x"), "scenario.input.coeffs"),
    (lambda d: d.update(t_end=2), "scenario.parameter"),
    (lambda d: d.update(dt=-1), "scenario.dt"),
])
def test_parse_errors_exit_2(tmp_path, capsys, mutate, fragment):
    sc = json.loads(json.dumps(VARSPRING))
    mutate(sc)
    code = main(["simulate", "-s", write(tmp_path / "s.json", sc), "-o", str(tmp_path / "o.csv")])
    assert code == EXIT_PARSE
    assert fragment in capsys.readouterr().err


def test_malformed_json_reports_line(tmp_path, capsys):
    p = tmp_path / "bad.json"
    p.write_text('{\n  "law": "direct-spring",\n  oops\n}', encoding="utf-8")
    assert main(["simulate", "-s", str(p), "-o", str(tmp_path / "o.csv")]) == EXIT_PARSE
    assert "line 3" in capsys.readouterr().err


def test_missing_file_is_parse_error(tmp_path):
    assert main(["simulate", "-s", str(tmp_path / "nope.json"), "-o", "x.csv"]) == EXIT_PARSE


def test_simulation_failure_exit_3(tmp_path, capsys):
    sc = dict(VARSPRING, law="varinerter",
              parameter={"type": "poly", "interval": [0, 1], "coeffs": [-1, 1]})
    assert main(["simulate", "-s", write(tmp_path / "s.json", sc), "-o", str(tmp_path / "o.csv")]) == EXIT_SIM
    assert "simulation failed" in capsys.readouterr().err


def test_reproduce_ex3(capsys):
    assert main(["reproduce", "ex3", "--n", "3"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "expected -3" in out and "PASS" in out


def test_reproduce_ex2_flags_discrepancy(capsys):
    assert main(["reproduce", "ex2"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "published value -1" in out
    assert "DISCREPANCY" in out


def test_reproduce_mismatch_exit_4(capsys):
    # a negative tolerance can never be met
    assert main(["reproduce", "ex1", "--tol", "-1"]) == EXIT_MISMATCH


def test_reproduce_unknown_case():
    assert main(["reproduce", "ex9"]) == EXIT_PARSE
    assert main(["reproduce"]) == EXIT_PARSE
    assert main(["reproduce", "ex3", "--n", "0"]) == EXIT_PARSE
    assert main(["reproduce", "coil-drift", "--L", "-1"]) == EXIT_PARSE


def test_reproduce_all_ordered(tmp_path, capsys):
    out = tmp_path / "all.json"
    assert main(["reproduce", "--all", "-o", str(out)]) == EXIT_OK
    ids = [c["case_id"] for c in json.loads(out.read_text())]
    assert ids == sorted(ids) and len(ids) == 14


def test_falsify_direct_spring(tmp_path):
    out = tmp_path / "cert.json"
    sc = write(tmp_path / "f.json", {"law": "direct-spring", "family": "ex1"})
    assert main(["falsify", "-s", sc, "--n-max", "8", "-o", str(out)]) == EXIT_OK
    cert = json.loads(out.read_text())
    np.testing.assert_allclose(cert["energies"], -np.arange(1, 9), atol=1e-8)
    assert cert["verdict"] == "evidence-of-activity"


def test_falsify_varinerter_inconclusive(tmp_path):
    out = tmp_path / "cert.json"
    sc = write(tmp_path / "f.json", {"law": "varinerter", "family": "ex1"})
    assert main(["falsify", "-s", sc, "-o", str(out)]) == EXIT_OK
    assert json.loads(out.read_text())["verdict"] == "inconclusive"


def test_falsify_flyweight_ex2(tmp_path):
    out = tmp_path / "cert.json"
    sc = write(tmp_path / "f.json", {"law": "flyweight-inerter", "family": "ex2", "n_max": 5})
    assert main(["falsify", "-s", sc, "-o", str(out)]) == EXIT_OK
    e = np.array(json.loads(out.read_text())["energies"])
    assert np.all(e < 0) and np.all(np.diff(e) < 0)


def test_falsify_bad_family(tmp_path):
    sc = write(tmp_path / "f.json", {"law": "direct-spring", "family": "ex7"})
    assert main(["falsify", "-s", sc, "-o", str(tmp_path / "c.json")]) == EXIT_PARSE


DRIFT = {
    "v1": {"type": "constant", "interval": [0, 1], "value": 1},
    "m": {"type": "poly", "interval": [0, 1], "coeffs": [1, 1]},
    "t_start": 0, "t_end": 1, "dt": 0.01,
}


def test_drift_sweep(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["drift-sweep", "--L", "10,20,40", "-s", write(tmp_path / "d.json", DRIFT),
                 "-o", str(out)]) == EXIT_OK
    header, body = read_csv(out)
    assert header == ["L", "max_abs_gamma", "max_abs_residual"]
    np.testing.assert_allclose(body[:, 1] / body[0, 1], [1, 0.5, 0.25], rtol=1e-12)
    np.testing.assert_allclose(body[:, 2], 1.0, rtol=1e-12)


def test_drift_sweep_frozen_ratio(tmp_path):
    sc = dict(DRIFT, m={"type": "constant", "interval": [0, 1], "value": 2})
    out = tmp_path / "d.csv"
    main(["drift-sweep", "--L", "1,2", "-s", write(tmp_path / "d.json", sc), "-o", str(out)])
    assert np.all(read_csv(out)[1][:, 2] == 0.0)


def test_drift_sweep_zero_voltage(tmp_path):
    sc = dict(DRIFT, v1={"type": "constant", "interval": [0, 1], "value": 0})
    out = tmp_path / "d.csv"
    main(["drift-sweep", "--L", "1,2", "-s", write(tmp_path / "d.json", sc), "-o", str(out)])
    assert np.all(read_csv(out)[1][:, 1] == 0.0)


def test_drift_sweep_rejects_bad_L(tmp_path):
    sc = write(tmp_path / "d.json", DRIFT)
    assert main(["drift-sweep", "--L", "10,-1", "-s", sc, "-o", str(tmp_path / "d.csv")]) == EXIT_PARSE


def test_simulate_is_bit_identical(tmp_path):
    sc = write(tmp_path / "s.json", EXAMPLE1)
    main(["simulate", "-s", sc, "-o", str(tmp_path / "a.csv")])
    main(["simulate", "-s", sc, "-o", str(tmp_path / "b.csv")])
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "adjport", "reproduce", "cone"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert "cone" in proc.stdout
