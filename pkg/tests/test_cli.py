import json
from fractions import Fraction

import pytest

from conekit import cli
from conekit.report import CheckRecord, VerificationReport, dumps


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, capsys.readouterr().out


def test_energy_ledger_hesse(capsys):
    code, out = run(capsys, "energy", "ledger", "--family", "hesse", "--json")
    data = json.loads(out)
    assert code == 0
    assert data["schema"] == "conekit/1"
    assert data["data"]["residual"] == "0" and data["data"]["E"] == "30"
    assert all(c["provenance"] in ("paper", "trivial", "derived") for c in data["checks"])


def test_germ_analyze_cusp(capsys):
    code, out = run(capsys, "germ", "analyze", "--poly", "w^2 - z^3", "--json")
    assert code == 0 and json.loads(out)["data"]["c0"] == "5/6"


def test_failed_check_exit_code(capsys):
    code, _ = run(capsys, "energy", "bishop-gromov", "--case", "cuspidal-cubic", "--beta", "9/10")
    assert code == 1
    code, _ = run(capsys, "energy", "bishop-gromov", "--case", "cuspidal-cubic", "--beta", "1")
    assert code == 0


def test_usage_errors(capsys):
    assert cli.main(["nonsense"]) == 2
    assert cli.main(["energy", "ledger", "--bogus"]) == 2
    assert cli.main(["lift", "hopf"]) == 2
    capsys.readouterr()


def test_io_errors(capsys, tmp_path):
    assert cli.main(["lift", "hopf", "--sol", str(tmp_path / "missing.json")]) == 3
    assert cli.main(["energy", "ledger", "--family", "hesse", "--out", str(tmp_path / "no" / "x.json")]) == 3
    capsys.readouterr()


def test_out_file_and_determinism(capsys, tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert cli.main(["flatcone", "check", "--rugby", "0.4", "--points", "5", "--seed", "0x2A",
                         "--out", str(path)]) == 0
    capsys.readouterr()
    da, db = json.loads(a.read_text()), json.loads(b.read_text())
    assert da["checks"] == db["checks"]
    assert da["environment"]["seed"] == "0x2a"


def test_solve_then_check(capsys, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"points": [[0, 0], "inf"], "angles": ["1/2", "1/2"]}))
    sol = tmp_path / "sol.json"
    assert cli.main(["spherical", "solve", "--config", str(cfg), "--kappa", "4", "--n-radial", "32",
                     "--n-angular", "16", "--save", str(sol)]) == 0
    assert cli.main(["spherical", "check", "--sol", str(sol), "--points", "10"]) == 0
    assert cli.main(["lift", "hopf", "--sol", str(sol)]) == 0
    capsys.readouterr()


def test_flatcone_csv(capsys, tmp_path):
    path = tmp_path / "pts.csv"
    assert cli.main(["flatcone", "check", "--rugby", "0.7", "--points", "4", "--csv", str(path)]) == 0
    capsys.readouterr()
    lines = path.read_text().strip().splitlines()
    assert lines[0] == "z,w,density,predicted,relative_error" and len(lines) == 5


def test_reflection_verify(capsys):
    code, out = run(capsys, "reflection", "verify", "--family", "octahedral", "--json")
    assert code == 0 and json.loads(out)["data"]["group"]["order"] == 576


def test_report_rendering():
    rep = VerificationReport("x", {"beta": Fraction(5, 6)})
    rep.add(CheckRecord("a", 0.1, 0.30000000000000004, 1e-3, True, "trivial"))
    text = dumps(rep.to_json())
    assert '"5/6"' in text and "0.30000000000000004" in text and "0.10000000000000001" in text
    assert json.loads(text)["status"] == "pass"
    with pytest.raises(ValueError):
        CheckRecord("b", 0, 0, 0, True, "folklore")


def test_suite_quick_subset(capsys):
    code, out = run(capsys, "suite", "--quick", "--only", "1,2,3,9")
    assert code == 0
    assert out.count("[PASS]") == 4
