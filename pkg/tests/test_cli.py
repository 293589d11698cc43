import json

import pytest

from adabls import cli

TINY = {
    "problem": "logistic", "n": 40, "d": 4, "seed": 2, "methods": ["gd"],
    "regular_rhos": [0.5], "adaptive_rho": 0.3, "alpha0_multipliers": [10.0],
    "precision": 1e-6, "max_iterations": 300,
}


def write_config(tmp_path, cfg):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(cfg))
    return str(path)


def test_run_and_compare(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", write_config(tmp_path, TINY), "--out", str(out)]) == 0
    first = capsys.readouterr().out
    assert first.startswith("variant,rho,mode")
    assert (out / "summary.csv").exists()
    assert cli.main(["compare", str(out)]) == 0
    second = capsys.readouterr().out
    assert second.splitlines()[0] == first.splitlines()[0]


def test_run_seed_override(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["run", "--config", write_config(tmp_path, TINY), "--out", str(out),
                     "--seed", "11"]) == 0
    assert '"seed": 11' not in (out / "summary.csv").read_text()
    trace = next(p for p in out.glob("*.csv") if p.name != "summary.csv")
    assert "# fingerprint.seed=11" in trace.read_text()


def test_strict_exit_code(tmp_path):
    cfg = dict(TINY, max_iterations=2)
    path = write_config(tmp_path, cfg)
    assert cli.main(["run", "--config", path, "--out", str(tmp_path / "a")]) == 0
    assert cli.main(["run", "--config", path, "--out", str(tmp_path / "b"), "--strict"]) == 3


def test_config_error_exit_code(tmp_path, capsys):
    assert cli.main(["run", "--config", write_config(tmp_path, dict(TINY, bogus=1))]) == 1
    assert "config error" in capsys.readouterr().err
    assert cli.main(["run"]) == 1
    assert cli.main(["compare", str(tmp_path / "nothing")]) == 1


def test_runtime_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "traces"
    bad.mkdir()
    (bad / "000.csv").write_text("# fingerprint.method=not json\n")
    assert cli.main(["compare", str(bad)]) == 2
    assert "error" in capsys.readouterr().err


def test_gradcheck(capsys):
    assert cli.main(["gradcheck", "--problem", "rosenbrock", "--points", "10"]) == 0
    assert "PASS" in capsys.readouterr().out
    assert cli.main(["gradcheck", "--problem", "rosenbrock", "--points", "5", "--tol", "0"]) == 2


def test_replicate_examples(capsys):
    assert cli.main(["replicate-examples"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines and all(line.startswith("PASS") for line in lines)


def test_unknown_command_exits():
    with pytest.raises(SystemExit):
        cli.main(["frobnicate"])
