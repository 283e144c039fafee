import csv
import io
import json
import re
import subprocess
import sys

import pytest

from levidf.cli import RunConfig, main

DISK_BUNDLE = "1 - abs2((z2 - z1)/(1 - conj(z1)*z2))"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_exponent_disk_bundle(capsys):
    code, out, _ = run(capsys, "exponent", "--domain", "disk_bundle", "--grid", "10x10", "--format", "csv")
    table = rows(out)
    assert code == 0 and len(table) == 100
    assert {r["eta_formula"] for r in table} == {"0.5"}
    assert list(table[0])[:4] == ["leaf_index", "t_index", "z1_re", "z1_im"]


def test_exponent_bidisk(capsys):
    code, out, _ = run(capsys, "exponent", "--domain", "product_bidisk")
    assert code == 0 and {float(r["eta_formula"]) for r in rows(out)} == {0.0}


def test_exponent_ball_is_usage_error(capsys):
    code, out, err = run(capsys, "exponent", "--domain", "ball_2")
    assert code == 2 and out == ""
    assert "domain ball_2 is not Levi-flat; use sweep" in err


@pytest.mark.parametrize(
    "argv",
    [
        ["exponent", "--domain", "disk_bundle", "--grid", "1x5"],
        ["exponent", "--domain", "disk_bundle", "--offsets", "1e-3,1e-2"],
        ["exponent", "--domain", "disk_bundle", "--eta-tol", "0.5"],
        ["exponent", "--domain", "nowhere"],
        ["exponent"],
    ],
)
def test_config_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2 and err.startswith("error:")


def test_bad_flag_exits_two(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["exponent", "--grid", "ten"])
    assert exc.value.code == 2


def test_run_config_invariants():
    base = dict(command="verify", domain="x", register=None, grid=(2, 2), offsets=(1e-2, 1e-3), eta_tol=1e-3,
                radius=0.05, leaf_radius=0.6, fmt="csv", output=None, heatmap=None)
    RunConfig(**base)
    for bad in [dict(grid=(1, 4)), dict(offsets=(1e-3, 1e-3)), dict(eta_tol=1e-7)]:
        with pytest.raises(ValueError):
            RunConfig(**{**base, **bad})


def test_verify_pass_and_heatmap(capsys, tmp_path):
    svg = tmp_path / "eta.svg"
    code, out, err = run(capsys, "verify", "--domain", "disk_bundle", "--grid", "4x4", "--heatmap", str(svg))
    assert code == 0
    assert err.startswith("PASS max_discrepancy=") and "< 0.005" in err
    assert len(rows(out)) == 16
    assert "linearGradient" in svg.read_text()


def test_verify_bidisk(capsys):
    code, out, err = run(capsys, "verify", "--domain", "product_bidisk", "--grid", "3x3")
    assert code == 0 and err.startswith("PASS")
    assert all(float(r["eta_formula"]) == 0 and float(r["eta_sweep"]) <= 2e-3 for r in rows(out))


def test_verify_wrong_chart_fails(capsys, tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text(f'name = "cli_wrong_zeta"\ndimension = 2\ndelta = "{DISK_BUNDLE}"\n[chart]\nzeta = "0.9*exp(i*t)"\n')
    code, _, err = run(capsys, "verify", "--register", str(cfg), "--grid", "3x3")
    assert code == 2 and "does not lie on" in err
    code, out, err = run(capsys, "verify", "--register", str(cfg), "--unchecked", "--grid", "3x3")
    assert code == 1 and err.startswith("FAIL")
    assert any(float(r["discrepancy"]) > 5e-3 for r in rows(out))


def test_verify_registered_copy(capsys, tmp_path):
    cfg = tmp_path / "copy.toml"
    cfg.write_text(f'name = "cli_copy"\ndimension = 2\ndelta = "{DISK_BUNDLE}"\n[chart]\nzeta = "exp(i*t)"\n')
    code, out_a, _ = run(capsys, "verify", "--register", str(cfg), "--grid", "3x3")
    _, out_b, _ = run(capsys, "verify", "--domain", "disk_bundle", "--grid", "3x3")
    assert code == 0 and out_a == out_b


def test_harmonic(capsys):
    code, out, err = run(capsys, "harmonic", "--domain", "disk_bundle", "--eta", "0.5", "--format", "json")
    data = json.loads(out)
    assert code == 0 and err.startswith("PASS")
    assert data["summary"]["alpha"] == 1.0
    assert data["summary"]["max_residual"] < 1e-8
    assert abs(data["summary"]["kappa"] - 1) < 1e-8
    code, _, err = run(capsys, "harmonic", "--domain", "disk_bundle", "--alpha", "2", "--grid", "3x3")
    assert code == 1 and err.startswith("FAIL")


def test_curvature_ratio(capsys):
    code, out, _ = run(capsys, "curvature", "--domain", "disk_bundle", "--grid", "5x5")
    table = rows(out)
    assert code == 0 and len(table) == 25
    assert all(abs(float(r["a_theta_ratio"]) - 1) <= 1e-8 for r in table)


def test_sweep_command(capsys):
    code, out, _ = run(capsys, "sweep", "--domain", "ball_2", "--point", "1,0,0,0")
    assert code == 0 and float(rows(out)[0]["eta_sweep"]) >= 0.99
    code, _, err = run(capsys, "sweep", "--domain", "ball_2")
    assert code == 2 and "--point" in err


def _matrix(tmp_path, data, name="m.json"):
    p = tmp_path / name
    p.write_text(json.dumps(data))
    return str(p)


def test_schur(capsys, tmp_path):
    ident = _matrix(tmp_path, [[[1, 0], [0, 0]], [[0, 0], [1, 0]]])
    code, out, _ = run(capsys, "schur", "--matrix", ident)
    assert code == 0 and out == "Schur: positive; Eigen: positive; AGREE\n"
    flat = _matrix(tmp_path, [[1, 0], [2, 0], [2, 0], [1, 0]], "flat.json")
    code, out, _ = run(capsys, "schur", "--matrix", flat)
    assert code == 0 and out == "Schur: not positive; Eigen: not positive; AGREE\n"
    code, out, _ = run(capsys, "schur", "--matrix", ident, "--format", "json")
    assert json.loads(out)["agree"] is True


def test_schur_errors(capsys, tmp_path):
    nonherm = _matrix(tmp_path, [[[1, 0], [2, 0]], [[0, 0], [1, 0]]])
    code, _, err = run(capsys, "schur", "--matrix", nonherm)
    assert code == 2 and "max asymmetry 2.000e+00" in err
    for i, bad in enumerate(["[1, 2, 3]", "not json", "[[1, 0], [2, 0], [3, 0]]"]):
        p = tmp_path / f"bad{i}.json"
        p.write_text(bad)
        code, _, err = run(capsys, "schur", "--matrix", str(p))
        assert code == 2 and "malformed matrix file" in err
    code, _, _ = run(capsys, "schur", "--matrix", str(tmp_path / "missing.json"))
    assert code == 2


def test_reports_are_byte_deterministic(capsys, tmp_path, monkeypatch):
    outs = []
    for threads in ("1", "4"):
        monkeypatch.setenv("LEVIDF_THREADS", threads)
        path = tmp_path / f"r{threads}.json"
        assert run(capsys, "verify", "--domain", "disk_bundle", "--grid", "3x3", "--format", "json",
                   "--output", str(path))[0] == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    data = json.loads(outs[0])
    assert data["summary"]["verdict"] == "PASS"
    for token in re.findall(r"-?\d+\.\d+(?:e-?\d+)?|-?\d+e-?\d+", outs[0].decode()):
        mantissa = token.split("e")[0].replace("-", "").replace(".", "").strip("0")
        assert len(mantissa) <= 12, token


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "levidf", "exponent", "--domain", "ball_2"],
                         capture_output=True, text=True)
    assert res.returncode == 2 and "not Levi-flat" in res.stderr
