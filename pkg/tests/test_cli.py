import csv
import io
import json
import math

import numpy as np
import pytest

from casimir_babinet import __version__
from casimir_babinet.cli import main, richardson
from casimir_babinet.config import DEFAULTS, deep_merge, load_file, parse_sweep, resolve
from casimir_babinet.errors import ConfigError
from casimir_babinet.grating import SolverParams, StripScreen, em_blocks_from_scalar, solve_scalar
from casimir_babinet.interchange import write_matrices


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def read_csv(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    return list(csv.DictReader(io.StringIO("\n".join(lines))))


# --- config -------------------------------------------------------------------


def test_resolve_merges_file_and_overrides():
    cfg = resolve("energy", {"d": 2.0, "geometry": {"fill": 0.3}}, {"geometry.period": 3.0, "channel": None})
    assert cfg["d"] == 2.0 and cfg["geometry"]["fill"] == 0.3 and cfg["geometry"]["period"] == 3.0
    assert cfg["channel"] == DEFAULTS["energy"]["channel"]


def test_unknown_keys_rejected():
    with pytest.raises(ConfigError):
        resolve("energy", {"dd": 1.0})
    with pytest.raises(ConfigError):
        resolve("energy", {"scenario": "feasibility"})
    with pytest.raises(ConfigError):
        deep_merge({"a": {"b": 1}}, {"a": 3})


def test_yaml_exponent_without_dot_is_float(tmp_path):
    f = tmp_path / "c.yaml"
    f.write_text("conductor:\n  sigma: 4.5e7\n  d: 1e-6\n")
    data = load_file(f)
    assert data["conductor"] == {"sigma": 4.5e7, "d": 1e-6}


def test_parse_sweep():
    assert parse_sweep("0:1:64") == (0.0, 1.0, 64)
    with pytest.raises(ConfigError):
        parse_sweep("0:1")


def test_richardson_geometric():
    vals = [1 + 0.5**k for k in range(6)]
    est = richardson(vals)
    true_err = [abs(v - 1) for v in vals]
    assert est[-1] == pytest.approx(true_err[-1], rel=1e-12)


# --- scenarios ----------------------------------------------------------------


def test_energy_plates(capsys):
    code, out, _ = run(capsys, "energy", "--geometry", "plates", "--channel", "em", "--d", "1")
    assert code == 0
    doc = json.loads(out)
    assert doc["version"] == __version__
    assert doc["config"]["geometry"]["kind"] == "plates"
    full = doc["summary"]["full"]
    assert abs(full["value"] + math.pi**2 / 720) <= max(full["quad_error"], 1e-6) * math.pi**2 / 720
    assert "hbar*c*A/d^3" in doc["units"]["value"]


def test_energy_csv_is_bit_reproducible(capsys, tmp_path):
    out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["energy", "--geometry", "strips", "--fill", "0.5", "--d", "1", "--n-radial", "4", "--n-bloch", "3", "--format", "csv"]
    assert main(args + ["-o", str(out1)]) == 0
    assert main(args + ["-o", str(out2), "--workers", "2"]) == 0
    assert out1.read_text() == out2.read_text()
    assert "# config:" in out1.read_text()


def test_verify_babinet(capsys):
    code, out, _ = run(capsys, "verify-babinet", "--fill", "0.5", "--period", "1")
    assert code == 0
    rows = read_csv(out)
    final = max(float(v) for k, v in rows[-1].items() if k.startswith("residual"))
    assert final < 1e-6


def test_verify_babinet_external_matrices(capsys, tmp_path):
    s = StripScreen.from_fill(1.0, 0.3)
    p = SolverParams(32, 3)
    kt = (0.2, 0.1)
    sig = em_blocks_from_scalar(s, 1.0, kt, p)
    comp = em_blocks_from_scalar(s.complement(), 1.0, kt, p)
    write_matrices(tmp_path / "s.txt", sig.basis, sig.matrices())
    write_matrices(tmp_path / "c.txt", comp.basis, comp.matrices())
    code, out, _ = run(capsys, "verify-babinet", "--screen-matrices", str(tmp_path / "s.txt"),
                       "--complement-matrices", str(tmp_path / "c.txt"), "--format", "json")
    assert code == 0
    assert json.loads(out)["summary"]["max_residual"] < 1e-6
    # scalar layout
    R, T = solve_scalar(s, "D", 1.0, kt, p)
    Rc, Tc = solve_scalar(s.complement(), "N", 1.0, kt, p)
    write_matrices(tmp_path / "sd.txt", R.basis, {"R_D": R.matrix, "T_D": T.matrix})
    write_matrices(tmp_path / "cn.txt", Rc.basis, {"R_N": Rc.matrix, "T_N": Tc.matrix})
    code, out, _ = run(capsys, "verify-babinet", "--screen-matrices", str(tmp_path / "sd.txt"),
                       "--complement-matrices", str(tmp_path / "cn.txt"))
    assert code == 0


def test_invariant_violation_exit_code(capsys):
    code, _, err = run(capsys, "verify-babinet", "--n-basis", "4,8")
    assert code == 3
    assert "invariant violation" in err
    assert '"rows"' in err


def test_config_error_exit_code(capsys, tmp_path):
    assert run(capsys, "energy", "--d", "-1")[0] == 1
    bad = tmp_path / "bad.yaml"
    bad.write_text("scenario: energy\nnot_a_key: 1\n")
    assert run(capsys, "energy", "--config", str(bad))[0] == 1
    bad.write_text(": : :\n")
    assert run(capsys, "energy", "--config", str(bad))[0] == 1
    assert run(capsys, "energy", "--config", str(tmp_path / "missing.yaml"))[0] == 1
    assert run(capsys, "energy", "--workers", "0")[0] == 1


def test_convergence_failure_exit_code(capsys):
    # a strip this thin needs an impossible kernel window
    code, _, err = run(capsys, "energy", "--fill", "1e-9", "--d", "1", "--n-radial", "2", "--n-bloch", "2")
    assert code == 2
    assert "ConvergenceError" in err


def test_lateral_force_csv(capsys):
    code, out, _ = run(capsys, "lateral-force", "--delta-sweep", "0:1:64", "--d-over-spacing", "2")
    assert code == 0
    rows = read_csv(out)
    assert len(rows) == 65
    assert list(rows[0]) == ["delta_over_spacing", "lateral_force_per_area", "energy_per_cell"]
    F = np.array([float(r["lateral_force_per_area"]) for r in rows])
    scale = np.abs(F).max()
    assert abs(F[0]) < 1e-12 * scale and abs(F[32]) < 1e-12 * scale
    assert F[1] < 0


def test_feasibility_json(capsys):
    code, out, _ = run(capsys, "feasibility", "--d", "0.75e-6", "--thickness", "100e-9")
    assert code == 0
    doc = json.loads(out)
    assert doc["summary"]["verdict"] == "valid"
    assert "table" not in doc


def test_config_file_with_output_section(capsys, tmp_path):
    cfg = tmp_path / "f.yaml"
    target = tmp_path / "out.json"
    cfg.write_text(f"scenario: feasibility\nconductor:\n  d: 3.0e-7\n  thickness: 3.0e-8\noutput:\n  path: {target}\n  format: json\n")
    assert main(["feasibility", "--config", str(cfg)]) == 0
    assert json.loads(target.read_text())["summary"]["verdict"] == "valid"


def test_convergence_sweep_plates(capsys):
    code, out, _ = run(capsys, "convergence-sweep", "--values", "2,4,8,16")
    assert code == 0
    rows = read_csv(out)
    changes = [abs(float(r["change"])) for r in rows[1:]]
    assert all(b < a for a, b in zip(changes, changes[1:]))
    assert float(rows[-1]["first_over_full"]) == pytest.approx(90 / math.pi**4, rel=1e-6)


def test_convergence_sweep_babinet(capsys):
    code, out, _ = run(capsys, "convergence-sweep", "--base", "babinet", "--axis", "n_basis", "--values", "4,8,16,32",
                       "--geometry", "strips", "--fill", "0.25")
    assert code == 0
    res = [float(r["residual"]) for r in read_csv(out)]
    assert all(b < a for a, b in zip(res, res[1:]))


def test_shipped_configs_resolve():
    import pathlib

    root = pathlib.Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.yaml"))
    assert len(files) == 6
    for f in files:
        data = load_file(f)
        resolve(data["scenario"], data)


def test_version_flag(capsys):
    with pytest.raises(SystemExit):
        main(["--version"])
    assert __version__ in capsys.readouterr().out
