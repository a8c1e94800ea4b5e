import os
import subprocess
import sys

import pytest

from geocalc.cli import main

ROOT = os.path.join(os.path.dirname(__file__), "..", "scenarios")


def scenario(name):
    return os.path.join(ROOT, name)


def test_run_passing_scenario(tmp_path, capsys):
    out = tmp_path / "fig2.csv"
    assert main(["run", scenario("ftc_figure2.yaml"), "--out", str(out), "--no-timing"]) == 0
    text = capsys.readouterr().out
    assert "PASS" in text
    assert out.read_text().startswith("scenario,k,n,q,m,")


def test_run_failing_scenario_exits_one(tmp_path, capsys):
    status = main(["run", scenario("failing/flipped_glue.yaml"), "--out", str(tmp_path / "x.csv")])
    assert status == 1
    assert "FAIL" in capsys.readouterr().out


def test_quadrature_override(tmp_path):
    out = tmp_path / "o.csv"
    assert main(["run", scenario("ftc_figure2.yaml"), "--quad-q", "4", "--quad-m", "2", "--out", str(out), "-q"]) == 0
    first = out.read_text().split("\n")[1].split(",")
    assert first[3:5] == ["4", "2"]


def test_suite(tmp_path, capsys):
    assert main(["suite", ROOT, "--out", str(tmp_path), "--no-timing", "-q"]) == 0
    assert "all passed" in capsys.readouterr().out
    assert len(list(tmp_path.glob("*.csv"))) == len([f for f in os.listdir(ROOT) if f.endswith(".yaml")])


def test_suite_with_failure(tmp_path):
    assert main(["suite", os.path.join(ROOT, "failing"), "--out", str(tmp_path), "-q"]) == 1


def test_identities(tmp_path, capsys):
    out = tmp_path / "id.csv"
    assert main(["identities", "--dim", "3", "--trials", "200", "--out", str(out)]) == 0
    assert len(out.read_text().strip().split("\n")) == 8
    capsys.readouterr()
    assert main(["identities", "--dim", "2", "--trials", "50", "--method", "analytic", "--seed", "0x10"]) == 0
    assert capsys.readouterr().out.startswith("formula_id,")


def test_show_round_trips(capsys):
    assert main(["show", scenario("green_disk.yaml")]) == 0
    assert "check: green" in capsys.readouterr().out


def test_list_registries(capsys):
    assert main(["--list-patches"]) == 0
    out = capsys.readouterr().out
    assert "figure2" in out and "sphere" in out
    assert main(["--list-fields"]) == 0
    assert "complex_power" in capsys.readouterr().out


def test_errors_exit_two(tmp_path, capsys):
    bad = tmp_path / "bad.yaml"
    bad.write_text("name: b\ncheck: ftc\npatch: {key: nowhere}\nf: identity_vector\n")
    assert main(["run", str(bad)]) == 2
    assert "nowhere" in capsys.readouterr().err
    assert main([]) == 2
    assert main(["run", str(tmp_path / "missing.yaml")]) == 2
    with pytest.raises(SystemExit) as info:
        main(["run"])
    assert info.value.code == 2


def test_console_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "geocalc", "run", scenario("gauss_cube.yaml"), "--out",
                           str(tmp_path / "g.csv"), "-q"], capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    assert "PASS" in proc.stdout
