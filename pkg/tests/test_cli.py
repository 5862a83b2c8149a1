import json

import pytest

from pwsmanifold import AveragedPoly, CircleProfile, io, realize
from pwsmanifold.cli import (
    EXIT_CONFIG,
    EXIT_DEGENERATE,
    EXIT_INTEGRATION,
    EXIT_NOT_APPLICABLE,
    EXIT_OK,
    main,
)


def run(tmp_path, *args):
    out = tmp_path / "out"
    return main([*args, "--out", str(out)]), out


def write_cfg(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def test_averaged_example1(tmp_path):
    code, out = run(tmp_path, "averaged", "--config", "example1")
    assert code == EXIT_OK
    doc = json.loads((out / "averaged.json").read_text())
    got = {(c["i"], c["j"]): c["C"] for c in doc["coeffs"]}
    assert got[(1, 0)] == pytest.approx(1.0, abs=1e-12)
    assert got[(0, 1)] == pytest.approx(-1.0, abs=1e-12)
    assert abs(got[(0, 0)]) <= 1e-12
    assert doc["diagnostics"]["dual_path_max_deviation"] <= 1e-9
    assert doc["diagnostics"]["direct_quadrature_max_deviation"] <= 1e-8


def test_averaged_example2_variants(tmp_path):
    code, out = run(tmp_path, "averaged", "--config", "example2")
    assert code == EXIT_OK
    c = {(e["i"], e["j"]): e["C"] for e in json.loads((out / "averaged.json").read_text())["coeffs"]}
    assert c[(0, 0)] == pytest.approx(8.5, abs=1e-10)
    assert (c[(2, 0)], c[(0, 2)], c[(1, 0)]) == pytest.approx((1.0, 1.0, -6.0), abs=1e-12)
    code, out = run(tmp_path, "averaged", "--config", "example2", "--variant", "quoted_constant")
    assert code == EXIT_OK
    c = {(e["i"], e["j"]): e["C"] for e in json.loads((out / "averaged.json").read_text())["coeffs"]}
    assert c[(0, 0)] == pytest.approx(8.0, abs=1e-10)


def test_averaged_zero_perturbation(tmp_path):
    cfg = write_cfg(tmp_path, {"profile": {"preset": "cos"}, "perturbation": {"degree": 3}})
    code, out = run(tmp_path, "averaged", "--config", cfg)
    assert code == EXIT_OK
    assert all(e["C"] == 0.0 for e in json.loads((out / "averaged.json").read_text())["coeffs"])


def test_locus_examples(tmp_path):
    code, out = run(tmp_path, "locus", "--config", "example1")
    assert code == EXIT_OK
    m = json.loads((out / "manifold.json").read_text())
    assert (m["kind"], m["subtype"]) == ("line-segment", "cone")
    assert (out / "mesh.csv").exists()
    code, out = run(tmp_path, "locus", "--config", "example2")
    assert code == EXIT_OK
    m = json.loads((out / "manifold.json").read_text())
    assert (m["kind"], m["subtype"]) == ("conic", "ellipse")
    rows = io.read_locus_csv(out / "locus.csv")
    assert {r["branch"] for r in rows} == {0, 1}


def test_locus_not_applicable(tmp_path):
    cfg = write_cfg(tmp_path, {
        "perturbation": {"degree": 2, "plus": [{"i": 0, "j": 0, "k": 1, "a": 1.0}, {"i": 0, "j": 0, "k": 0, "a": -1.0}]},
        "locus": {"z0_min": 0.5, "z0_max": 2.0, "step": 0.1},
    })
    code, _ = run(tmp_path, "locus", "--config", cfg)
    assert code == EXIT_NOT_APPLICABLE


def test_locus_zero_poly_not_applicable(tmp_path):
    cfg = write_cfg(tmp_path, {"perturbation": {"degree": 2}, "locus": {"z0_min": 0, "z0_max": 1, "step": 0.5}})
    code, _ = run(tmp_path, "locus", "--config", cfg)
    assert code == EXIT_NOT_APPLICABLE


def test_config_errors(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{\n  "perturbation": {"degree": 2,\n}\n')
    code, _ = run(tmp_path, "averaged", "--config", str(bad))
    assert code == EXIT_CONFIG
    assert "bad.json:3:" in capsys.readouterr().err
    code, _ = run(tmp_path, "averaged", "--config", "missing.json")
    assert code == EXIT_CONFIG
    cfg = write_cfg(tmp_path, {"profile": {"terms": [{"cos": 0, "sin": 0, "coeff": 1}]}, "perturbation": {"degree": 2}})
    code, _ = run(tmp_path, "averaged", "--config", cfg)
    assert code == EXIT_CONFIG
    code, _ = run(tmp_path, "realize", "--config", write_cfg(tmp_path, {"perturbation": {"degree": 2}}))
    assert code == EXIT_CONFIG
    code, _ = run(tmp_path, "locus", "--config", "example2", "--variant", "nope")
    assert code == EXIT_CONFIG
    code, _ = run(tmp_path, "locus", "--config", "example2", "--tol-root", "-1")
    assert code == EXIT_CONFIG


def test_realize(tmp_path):
    code, out = run(tmp_path, "realize", "--config", "example2")
    assert code == EXIT_OK
    doc = json.loads((out / "realization.json").read_text())
    assert doc["residual"]["max_deviation"] <= 1e-8
    assert doc["perturbation"]["minus"] == []


def test_verify_degenerate(tmp_path):
    # psi = r (r - 1)^2: the only zero is a double root
    target = AveragedPoly.from_mapping(3, {(2, 0): 1.0, (1, 0): -2.0, (0, 0): 1.0})
    pert = realize(target, CircleProfile.zero())
    cfg = write_cfg(tmp_path, {"perturbation": io.perturbation_to_json(pert), "verify": {"z0": [0.0], "r_max": 5}})
    code, _ = run(tmp_path, "verify", "--config", cfg)
    assert code == EXIT_DEGENERATE


def test_verify_example1(tmp_path):
    code, out = run(tmp_path, "verify", "--config", "example1")
    assert code == EXIT_OK
    (rep,) = json.loads((out / "verification.json").read_text())["reports"]
    assert 0.8 <= rep["convergence_order"] <= 1.5


def test_simulate_and_tangency(tmp_path):
    code, out = run(tmp_path, "simulate", "--config", "example1")
    assert code == EXIT_OK
    lines = (out / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,z,side,event"
    assert sum(line.endswith(",1") for line in lines[1:]) == 2
    cfg = write_cfg(tmp_path, {"perturbation": {"degree": 1}, "simulate": {"start": [1e-7, 0, 0]}})
    code, _ = run(tmp_path, "simulate", "--config", cfg)
    assert code == EXIT_INTEGRATION


@pytest.mark.parametrize("command", ["averaged", "locus", "realize", "simulate"])
def test_determinism(tmp_path, command):
    a = tmp_path / "a"
    b = tmp_path / "b"
    assert main([command, "--config", "example2", "--out", str(a), "--seed", "3"]) == EXIT_OK
    assert main([command, "--config", "example2", "--out", str(b), "--seed", "3"]) == EXIT_OK
    files = sorted(p.name for p in a.iterdir())
    assert files and files == sorted(p.name for p in b.iterdir())
    for name in files:
        assert (a / name).read_bytes() == (b / name).read_bytes(), name
