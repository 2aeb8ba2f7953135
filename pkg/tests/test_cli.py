import json

import pytest

from sdwave.cli import EXIT_BLOWUP, EXIT_CONFIG, EXIT_GATE, EXIT_PASS, OUT_ENV, main, resolve_config

FAST_LINEAR = ["--set", "time.t_max=100", "--set", "time.per_decade=10"]
SMALL_SIM = ["--set", "grid.n=32", "--set", "grid.half_width=20", "--set", "stepper.t_end=2",
             "--set", "output.plot=false"]


def run(tmp_path, *args, name="out"):
    out = tmp_path / name
    rc = main([*args, "--out", str(out)])
    return rc, out


def test_linear_decay_passes(tmp_path, capsys):
    rc, out = run(tmp_path, "linear-decay", *FAST_LINEAR)
    assert rc == EXIT_PASS
    assert "PASS" in capsys.readouterr().out
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "linear-decay" and man["config"]["time"]["t_max"] == 100
    assert {"norms.csv", "fits.csv", "plot_norms.py"} <= set(man["files"])
    assert (out / "norms.csv").read_text().splitlines()[0] == "t,quantity,value,band"


def test_reruns_are_byte_identical(tmp_path):
    _, a = run(tmp_path, "linear-decay", *FAST_LINEAR, name="a")
    _, b = run(tmp_path, "linear-decay", *FAST_LINEAR, name="b")
    for f in ("norms.csv", "fits.csv", "manifest.json"):
        assert (a / f).read_bytes() == (b / f).read_bytes()


def test_gate_failure_exit_code(tmp_path):
    rc, _ = run(tmp_path, "linear-decay", *FAST_LINEAR, "--set", "analysis.slope_tol=1e-9")
    assert rc == EXIT_GATE


def test_strict_turns_warnings_into_failures(tmp_path):
    zero = ["--set", 'data.u0={"family": "zero", "amplitude": 1, "width": 1}']
    assert run(tmp_path, "linear-decay", *FAST_LINEAR, *zero)[0] == EXIT_PASS
    assert run(tmp_path, "linear-decay", *FAST_LINEAR, *zero, "--strict", name="s")[0] == EXIT_GATE


def test_config_file_and_set_precedence(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"problem": {"dim": 2}, "time": {"t_max": 50}}))
    merged = resolve_config("linear-decay", str(cfg), ["problem.dim=4"])
    assert merged["problem"]["dim"] == 4 and merged["time"]["t_max"] == 50
    assert merged["problem"]["nu"] == 1.0


@pytest.mark.parametrize("args", [
    ["linear-decay", "--set", "problem.colour=1"],
    ["linear-decay", "--set", "problem.dim=6"],
    ["linear-decay", "--set", "nonsense"],
    ["verify", "--set", 'verify.selectors=["integral-power gamma=2"]'],
    ["verify", "--set", 'verify.selectors=["no-such-check"]'],
    ["simulate", "--set", "problem.dim=4"],
    ["frobnicate"],
])
def test_config_errors(tmp_path, args):
    assert run(tmp_path, *args)[0] == EXIT_CONFIG


def test_missing_config_file(tmp_path):
    assert run(tmp_path, "linear-decay", "--config", str(tmp_path / "nope.json"))[0] == EXIT_CONFIG


def test_profile_check(tmp_path, capsys):
    rc, out = run(tmp_path, "profile-check", "--set", "time.t_max=1000", "--set", "time.per_decade=10")
    assert rc == EXIT_PASS
    assert (out / "report.txt").exists()


def test_simulate_small(tmp_path):
    rc, out = run(tmp_path, "simulate", *SMALL_SIM)
    assert rc == EXIT_PASS
    man = json.loads((out / "manifest.json").read_text())
    assert man["solution_space_norm"]["kind"] == "X1"
    assert (out / "linear_twin.csv").exists()


def test_simulate_snapshots(tmp_path):
    rc, out = run(tmp_path, "simulate", *SMALL_SIM, "--set", "output.snapshot_every=1")
    assert rc == EXIT_PASS
    assert sorted(p.name for p in out.glob("snapshot_*.bin")) == [f"snapshot_{i:04d}.bin" for i in range(3)]


def test_simulate_blowup(tmp_path, capsys):
    rc, out = run(tmp_path, "simulate", "--set", "problem.dim=1", "--set", "problem.a=[1]",
                  "--set", "problem.p=2", "--set", "data.u0.amplitude=50", "--set", "data.u1.amplitude=50",
                  "--set", "grid.n=32", "--set", "grid.half_width=10", "--set", "stepper.t_end=5",
                  "--set", "output.plot=false")
    assert rc == EXIT_BLOWUP
    assert "blow-up" in capsys.readouterr().out
    assert json.loads((out / "manifest.json").read_text())["blowup"]


def test_verify_selector(tmp_path, capsys):
    rc, out = run(tmp_path, "verify", "--set", 'verify.selectors=["integral-power alpha=2 beta=3"]')
    assert rc == EXIT_PASS
    lines = (out / "checks.csv").read_text().splitlines()
    assert lines[0] == "id,param_json,measured,refinement_ratio,pass" and len(lines) == 2


def test_out_from_environment(tmp_path, monkeypatch):
    target = tmp_path / "env-out"
    monkeypatch.setenv(OUT_ENV, str(target))
    assert main(["verify", "--set", 'verify.selectors=["integral-power"]']) == EXIT_PASS
    assert (target / "checks.csv").exists()


def test_exponents_output(capsys):
    assert main(["exponents", "--n", "2", "--j", "0"]) == EXIT_PASS
    assert "p > 5 (strict)" in capsys.readouterr().out
    main(["exponents", "--n", "5", "--j", "1"])
    assert "unsupported" in capsys.readouterr().out
    main(["exponents", "--n", "4", "--j", "1", "--mixed"])
    assert "p > 2 (strict), q ≥ 2" in capsys.readouterr().out


def test_version_and_help():
    assert main(["--version"]) == EXIT_PASS
    assert main([]) == EXIT_CONFIG
