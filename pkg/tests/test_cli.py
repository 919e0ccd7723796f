import csv
import io
import json
import math
import subprocess
import sys
from pathlib import Path

import pytest

from rdsim.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main
from rdsim.config import ConfigError, load_config, parse_config
from rdsim.report import flatten, strip_timestamp, to_csv

GOLDEN = Path(__file__).parent / "golden"
CONFIGS = sorted((GOLDEN / "configs").glob("*.json"))


def run_cli(tmp_path, *args):
    out = tmp_path / "report.json"
    code = main(list(args) + ["--out", str(out)])
    return code, (json.loads(out.read_text()) if out.exists() else None)


def write(tmp_path, obj, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(obj))
    return str(p)


def assert_close(a, b, path="", rel=1e-9, abs_=1e-12):
    if isinstance(a, dict):
        assert isinstance(b, dict) and set(a) == set(b), f"keys differ at {path}"
        for k in a:
            assert_close(a[k], b[k], f"{path}.{k}", rel, abs_)
    elif isinstance(a, list):
        assert isinstance(b, list) and len(a) == len(b), f"length differs at {path}"
        for i, (x, y) in enumerate(zip(a, b)):
            assert_close(x, y, f"{path}[{i}]", rel, abs_)
    elif isinstance(a, float) or isinstance(b, float):
        assert math.isclose(a, b, rel_tol=rel, abs_tol=abs_), f"{path}: {a} != {b}"
    else:
        assert a == b, f"{path}: {a!r} != {b!r}"


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_golden_reports(cfg, tmp_path):
    kind = json.loads(cfg.read_text())["kind"]
    code, report = run_cli(tmp_path, kind, "--config", str(cfg))
    assert code == EXIT_OK
    golden = json.loads((GOLDEN / cfg.name).read_text())
    assert_close(strip_timestamp(report), strip_timestamp(golden))


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_round_trip_from_report(cfg, tmp_path):
    kind = json.loads(cfg.read_text())["kind"]
    _, first = run_cli(tmp_path, kind, "--config", str(cfg))
    # feed the report itself back in, then its echoed config alone
    again = tmp_path / "again.json"
    assert main([kind, "--config", str(tmp_path / "report.json"), "--out", str(again)]) == 0
    echo = write(tmp_path, first["config"], "echo.json")
    third = tmp_path / "third.json"
    assert main([kind, "--config", echo, "--out", str(third)]) == 0
    for p in (again, third):
        assert strip_timestamp(json.loads(p.read_text())) == strip_timestamp(first)


def test_pendulum_default_interval_contains_half(tmp_path):
    code, r = run_cli(tmp_path, "pendulum", "--seed", "11")
    assert code == EXIT_OK
    lo, hi = r["results"]["intervals"]["R"]
    n = r["results"]["counts"]["n_trials"]
    # the seed is fixed, so this is deterministic rather than a 95% coin flip
    assert n == 100_000 and lo <= 0.5 <= hi
    assert abs(r["results"]["estimates"]["p_hat_R"] - 0.5) <= 5 * 0.5 / math.sqrt(n)
    assert r["config"]["seed"] == 11


def test_spinchain_default_report(tmp_path):
    code, r = run_cli(tmp_path, "spinchain")
    assert code == EXIT_OK
    c = r["results"]["commutators"]
    assert c["su2_max"] < 1e-10 and c["flip"] < 1e-10
    assert any(row["field"] == 1e-6 and abs(row["order_parameter"] - 1) < 1e-9
               for row in r["results"]["sensitivity"])


def test_negative_n_trials_exit_2(tmp_path, capsys):
    cfg = write(tmp_path, {"kind": "pendulum", "parameters": {"n_trials": -5}})
    assert main(["pendulum", "--config", cfg]) == EXIT_INVALID
    assert "n_trials" in capsys.readouterr().err


@pytest.mark.parametrize("bad, field", [
    ({"kind": "pendulum", "extra": 1}, "extra"),
    ({"kind": "pendulum", "parameters": {"dt": 0}}, "dt"),
    ({"kind": "pendulum", "parameters": {"noise": {"kind": "gaussian", "sigma": -1}}}, "noise"),
    ({"kind": "pendulum", "parameters": {"n_trials": 1.5}}, "n_trials"),
    ({"kind": "pendulum", "parameters": {"n_trials": True}}, "n_trials"),
    ({"kind": "pendulum", "seed": -1}, "seed"),
    ({"kind": "spinchain", "parameters": {"N": 20}}, "N"),
    ({"kind": "spinchain", "parameters": {"sign": 0}}, "sign"),
    ({"kind": "born", "parameters": {"ens_size": 63}}, "ens_size"),
    ({"kind": "born", "parameters": {"amplitudes": [1, 1]}}, "amplitudes"),
    ({"kind": "born", "parameters": {"checks": ["P3"]}}, "checks"),
    ({"kind": "born", "parameters": {"chain": {"N": 4, "spin": 1}}}, "spin"),
    ({"kind": "born", "output": {"format": "xml"}}, "format"),
])
def test_validation_names_field(bad, field):
    with pytest.raises(ConfigError) as exc:
        parse_config(bad)
    assert field in str(exc.value)


def test_kind_mismatch(tmp_path, capsys):
    cfg = write(tmp_path, {"kind": "born"})
    assert main(["pendulum", "--config", cfg]) == EXIT_INVALID
    assert "kind" in capsys.readouterr().err


def test_bad_json_and_missing_file(tmp_path):
    p = tmp_path / "x.json"
    p.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(p)
    assert main(["born", "--config", str(tmp_path / "missing.json")]) == EXIT_INVALID


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as exc:
        main(["pendulum", "--seed", "abc"])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["pendulum", "--format", "xml"])
    assert exc.value.code == 2


def test_failed_check_exit_3(tmp_path, monkeypatch, capsys):
    from rdsim import experiments
    real = experiments.RUNNERS["spinchain"]

    def broken(cfg, workers=1):
        results, checks = real(cfg, workers)
        checks.append(experiments.check("injected", False))
        return results, checks

    monkeypatch.setitem(experiments.RUNNERS, "spinchain", broken)
    code, r = run_cli(tmp_path, "spinchain", "--seed", "2")
    assert code == EXIT_FAILED and r["passed"] is False
    assert "injected" in capsys.readouterr().err


def test_seed_flag_overrides_file(tmp_path):
    cfg = write(tmp_path, {"kind": "pendulum", "seed": 1, "parameters": {"n_trials": 1000}})
    _, a = run_cli(tmp_path, "pendulum", "--config", cfg, "--seed", "99")
    assert a["config"]["seed"] == 99 and a["results"]["counts"]["seed"] == 99


def test_dynamics_flag(tmp_path):
    cfg = write(tmp_path, {"kind": "pendulum", "parameters": {"n_trials": 500}})
    _, e = run_cli(tmp_path, "pendulum", "--config", cfg)
    _, d = run_cli(tmp_path, "pendulum", "--config", cfg, "--dynamics")
    assert d["config"]["parameters"]["mode"] == "dynamics"
    assert d["results"]["counts"] == e["results"]["counts"]


def test_workers_do_not_change_report(tmp_path):
    cfg = write(tmp_path, {"kind": "pendulum", "parameters": {"n_trials": 40000}})
    _, a = run_cli(tmp_path, "pendulum", "--config", cfg, "--workers", "1")
    _, b = run_cli(tmp_path, "pendulum", "--config", cfg, "--workers", "3")
    assert strip_timestamp(a) == strip_timestamp(b)


def test_csv_output_rfc4180(tmp_path):
    cfg = write(tmp_path, {"kind": "born", "parameters": {"checks": ["equal_amplitude"],
                                                          "n_random_states": 0}})
    out = tmp_path / "r.csv"
    assert main(["born", "--config", cfg, "--format", "csv", "--out", str(out)]) == 0
    raw = out.read_bytes()
    assert raw.startswith(b"key,value\r\n") and raw.endswith(b"\r\n")
    rows = dict(list(csv.reader(io.StringIO(raw.decode(), newline="")))[1:])
    assert rows["results.counts.counts[0]"] == "32"
    assert rows["passed"] == "true"
    assert rows["results.count_fractions.a"] == "1/2"


def test_output_from_config_block(tmp_path):
    target = tmp_path / "from_cfg.csv"
    cfg = write(tmp_path, {"kind": "spinchain", "parameters": {"N": 2, "n_unitaries": 1},
                           "output": {"path": str(target), "format": "csv"}})
    assert main(["spinchain", "--config", cfg]) == 0
    assert target.read_text().startswith("key,value")


def test_csv_quoting():
    text = to_csv({"a": 'x,"y"', "b": [1, None, True], "c": []})
    rows = list(csv.reader(io.StringIO(text, newline="")))
    assert rows == [["key", "value"], ["a", 'x,"y"'], ["b[0]", "1"], ["b[1]", ""],
                    ["b[2]", "true"], ["c", "[]"]]


def test_flatten_stable_order():
    assert [k for k, _ in flatten({"b": 1, "a": {"d": 2, "c": 3}})] == ["a.c", "a.d", "b"]


def test_stdout_and_module_entry(tmp_path):
    cfg = write(tmp_path, {"kind": "spinchain", "parameters": {"N": 2, "n_unitaries": 2}})
    out = subprocess.run([sys.executable, "-m", "rdsim", "spinchain", "--config", cfg],
                         capture_output=True, text=True)
    assert out.returncode == 0
    assert json.loads(out.stdout)["schema"] == "rdsim-report/1"


def test_repeated_runs_identical_bytes(tmp_path):
    cfg = write(tmp_path, {"kind": "born", "parameters": {"n_random_states": 2}})
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    main(["born", "--config", cfg, "--out", str(a)])
    main(["born", "--config", cfg, "--out", str(b)])
    ja, jb = json.loads(a.read_text()), json.loads(b.read_text())
    assert set(ja["timestamp"]) == {"started_utc", "wall_time_s", "backend"}
    ja.pop("timestamp"), jb.pop("timestamp")
    assert json.dumps(ja, sort_keys=True) == json.dumps(jb, sort_keys=True)


@pytest.mark.parametrize("cfg", CONFIGS, ids=lambda p: p.stem)
def test_golden_reports_numpy_backend(cfg, tmp_path):
    import os
    kind = json.loads(cfg.read_text())["kind"]
    out = tmp_path / "np.json"
    env = dict(os.environ, RDSIM_NO_NUMBA="1")
    proc = subprocess.run([sys.executable, "-m", "rdsim", kind, "--config", str(cfg), "--out", str(out)],
                          env=env, capture_output=True, text=True)
    assert proc.returncode == 0, proc.stderr
    report = json.loads(out.read_text())
    assert report["timestamp"]["backend"] == "numpy"
    golden = json.loads((GOLDEN / cfg.name).read_text())
    assert_close(strip_timestamp(report), strip_timestamp(golden), rel=1e-8, abs_=1e-11)
