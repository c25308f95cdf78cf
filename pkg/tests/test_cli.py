import json

import pytest

from pxlaplace.cli import ConfigError, RunConfig, load_config, run


def _config(tmp_path, **kw):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(kw))
    return str(path)


def test_verify_twice_identical_bytes(tmp_path):
    cfg = _config(tmp_path, p="1.5 + x/2", q="1.2", verify={"samples": 20})
    for out in ("a", "b"):
        assert run(["verify", "sandwich", "--config", cfg, "--seed", "7",
                    "--out", str(tmp_path / out)]) == 0
    assert (tmp_path / "a/report.json").read_bytes() == (tmp_path / "b/report.json").read_bytes()


def test_seed_changes_report(tmp_path):
    for seed in ("1", "2"):
        run(["verify", "holder", "--seed", seed, "--out", str(tmp_path / seed)])
    assert (tmp_path / "1/report.json").read_bytes() != (tmp_path / "2/report.json").read_bytes()


def test_solve_min_writes_outputs(tmp_path):
    cfg = _config(tmp_path, box=[[0, 1]], n=129, p="2", q="1.5")
    out = tmp_path / "out"
    assert run(["solve", "min", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["converged"] and report["energy"]["total"] < 0
    assert (out / "solution.csv").read_text().startswith("# d=1;")
    assert (out / "trace.csv").read_text().startswith("iteration,")


def test_solve_mp_with_grid_override(tmp_path):
    cfg = _config(tmp_path, p="2", q="4", n=33)
    out = tmp_path / "mp"
    assert run(["solve", "mp", "--config", cfg, "--grid", "65", "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mesh"].endswith("n=65") and report["energy"]["total"] > 0


def test_norm_rejects_standing_order(tmp_path, capsys):
    good = _config(tmp_path, n=65, p="2", q="1.5")
    out = tmp_path / "s"
    run(["solve", "min", "--config", good, "--out", str(out)])
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"p": "2", "q": "2.5"}))
    code = run(["norm", str(out / "solution.csv"), "--config", str(bad), "--out",
                str(tmp_path / "n")])
    assert code == 2
    assert "1 < q- <= q+ < p-" in capsys.readouterr().err
    assert run(["norm", str(out / "solution.csv"), "--config", good, "--out",
                str(tmp_path / "n2")]) == 0


def test_solve_wrong_regime_is_config_error(tmp_path, capsys):
    cfg = _config(tmp_path, p="2", q="1.5")
    assert run(["solve", "mp", "--config", cfg, "--out", str(tmp_path / "x")]) == 2
    assert "p+ < q-" in capsys.readouterr().err


def test_non_convergence_exit_code(tmp_path):
    cfg = _config(tmp_path, p="2", q="1.5", solver={"max_iterations": 2})
    assert run(["solve", "min", "--config", cfg, "--out", str(tmp_path / "x")]) == 1


@pytest.mark.parametrize("payload", [
    {"p": "2 +"}, {"bogus": 1}, {"solver": {"tol": -1}}, {"p": "y"}, {"d": 2}, {"n": 2},
])
def test_config_errors_exit_2(tmp_path, payload):
    cfg = _config(tmp_path, **payload)
    assert run(["analyze", "--config", cfg, "--out", str(tmp_path / "x")]) == 2


def test_analyze_reports_checks(tmp_path):
    cfg = _config(tmp_path, p="1.5 + x/2", q="1.2", w="1 + x", w0="1", t="1.1", floor=0.5)
    out = tmp_path / "an"
    assert run(["analyze", "--config", cfg, "--out", str(out)]) == 0
    report = json.loads((out / "report.json").read_text())
    names = {c["name"] for c in report["checks"]}
    assert {"log_holder", "jump_condition", "weight_class", "hypothesis_III"} <= names
    bad = _config(tmp_path, p="2", q="1.5", w="x")
    assert run(["analyze", "--config", bad, "--out", str(out)]) == 2


def test_show_config_round_trip(tmp_path, capsys):
    cfg = _config(tmp_path, box=[[0, 2]], n=33, p="1.5 + x/4", q="1.2", r="2",
                  solver={"mode": "mp", "tol": 1e-7}, verify={"suites": ["holder"], "seed": 4})
    assert run(["report", "--show-config", "--config", cfg]) == 0
    echoed = capsys.readouterr().out
    again = tmp_path / "echo.json"
    again.write_text(echoed)
    assert load_config(str(again)) == load_config(cfg)
    assert RunConfig.from_dict(json.loads(echoed)).to_json() == echoed


def test_report_merges(tmp_path):
    run(["verify", "floor", "--out", str(tmp_path / "v")])
    cfg = _config(tmp_path, n=65, p="2", q="1.5")
    run(["solve", "min", "--config", cfg, "--out", str(tmp_path / "s")])
    out = tmp_path / "m"
    code = run(["report", str(tmp_path / "v/report.json"), str(tmp_path / "s/report.json"),
                "--out", str(out)])
    assert code == 0
    merged = json.loads((out / "report.json").read_text())
    assert merged["pass"] and len(merged["reports"]) == 2


def test_verify_all_skips_incompatible_suites(tmp_path):
    cfg = _config(tmp_path, p="2", q="1.5", n=33, verify={"samples": 5})
    assert run(["verify", "all", "--config", cfg, "--out", str(tmp_path / "v")]) == 0
    doc = json.loads((tmp_path / "v/report.json").read_text())
    skipped = [d for d in doc if d["suite"] == "skipped"][0]
    assert set(skipped["names"]) == {"mp-geometry", "embedding"}


def test_verify_single_incompatible_suite(tmp_path):
    cfg = _config(tmp_path, p="2", q="1.5")
    assert run(["verify", "mp-geometry", "--config", cfg, "--out", str(tmp_path / "v")]) == 2


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigError):
        load_config(str(tmp_path / "none.json"))
