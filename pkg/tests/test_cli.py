from pathlib import Path

import orjson # type: ignore
import pytest # type: ignore

from cli.arguments import parse_args
from core.config import load_run_config, settings
from main import EXIT_CONFIG, EXIT_FAIL, EXIT_PASS, main
from services.command_router import CommandRouter
from models.log_models import FailureRunLog, RunInfo, SuccessRunLog
from services.exceptions import ConfigurationError
from services.log_manager import LogManager

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

BRACKETS_TOML = """
[model]
sigma = 10.0
rho = 28.0
gamma1 = 1.0
gamma2 = 1.0

[brackets]
max_level = 3
"""

SIMULATE_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = 2.6666666666666665
gamma1 = 0.5

[integration]
dt = 1e-3
n_steps = 50
seed = 4
start = { x = 1.0, y = 1.0, z = 1.0 }
"""


def _write(tmp_path: Path, text: str, name: str = "run.toml") -> str:
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def _log_entries(out_dir: Path):
    lines = (out_dir / settings.LORENZLAB_RUN_LOG).read_bytes().splitlines()
    return [orjson.loads(line) for line in lines]


@pytest.mark.parametrize("name", ["lab.toml", "gaussian_x.toml", "vertical_noise.toml", "transient.toml"])
def test_shipped_configs_load(name):
    config = load_run_config(CONFIGS / name)
    assert config.model.sigma > 0


def test_unknown_key_is_a_configuration_error(tmp_path):
    path = _write(tmp_path, BRACKETS_TOML + "\n[integration]\nstep = 0.1\n")
    with pytest.raises(ConfigurationError) as info:
        load_run_config(path)
    assert info.value.errors
    assert "integration.step" in info.value.message


def test_bad_toml_and_missing_file(tmp_path):
    with pytest.raises(ConfigurationError):
        load_run_config(_write(tmp_path, "[model\nsigma = 1"))
    with pytest.raises(ConfigurationError):
        load_run_config(tmp_path / "absent.toml")


def test_region_radii_are_cross_checked(tmp_path):
    path = _write(tmp_path, BRACKETS_TOML + "\n[regions]\nR0 = 16.0\nR2 = 4.0\n")
    with pytest.raises(ConfigurationError):
        load_run_config(path)


def test_seed_override_reaches_every_section(tmp_path):
    config = load_run_config(_write(tmp_path, SIMULATE_TOML)).with_overrides(seed=99, output_dir="elsewhere")
    assert config.integration.seed == 99
    assert config.certificate.seed == 99
    assert config.generator_check.seed == 99
    assert config.output_dir == "elsewhere"
    assert config.integration.dt == 1e-3


def test_parse_args():
    args = parse_args(["certificate", "recurrence", "--config", "c.toml", "--seed", "0x10", "--threads", "2"])
    assert args.command == "certificate recurrence"
    assert args.seed == 16
    assert args.threads == 2
    with pytest.raises(SystemExit):
        parse_args(["simulate", "--config", "c.toml", "--seed", "-1"])
    with pytest.raises(SystemExit):
        parse_args(["simulate"])


def test_malformed_config_writes_nothing(tmp_path):
    out = tmp_path / "out"
    code = main(["simulate", "--config", _write(tmp_path, "[model]\nsigma = -1.0\ngamma1 = 1.0\n"), "--out", str(out)])
    assert code == EXIT_CONFIG
    assert not out.exists()


def test_brackets_run(tmp_path):
    out = tmp_path / "out"
    code = main(["brackets", "--config", _write(tmp_path, BRACKETS_TOML), "--out", str(out)])
    assert code == EXIT_PASS
    report = orjson.loads((out / "brackets.json").read_bytes())
    assert report["command"] == "brackets"
    assert report["pass"] is True
    assert len(report["result"]["span"]["basis"]) == 3
    assert report["config"]["model"]["gamma1"] == 1.0
    [entry] = _log_entries(out)
    assert entry["outcome"] == "Success"
    assert entry["passed"] is True
    assert entry["action"] == "brackets"


def test_simulate_is_reproducible(tmp_path):
    config = _write(tmp_path, SIMULATE_TOML)
    first, second = tmp_path / "a", tmp_path / "b"
    assert main(["simulate", "--config", config, "--out", str(first)]) == EXIT_PASS
    assert main(["simulate", "--config", config, "--out", str(second)]) == EXIT_PASS
    lines = (first / "trajectory.csv").read_text().splitlines()
    assert lines[0] == "t,x,y,z"
    assert len(lines) == 52
    assert lines[1] == "0,1,1,1"
    assert (first / "trajectory.csv").read_bytes() == (second / "trajectory.csv").read_bytes()
    a, b = (orjson.loads((d / "simulate.json").read_bytes()) for d in (first, second))
    assert a["result"] == b["result"]


def test_precondition_failure_is_logged(tmp_path):
    out = tmp_path / "out"
    code = main(["certificate", "transience", "--config", _write(tmp_path, BRACKETS_TOML), "--out", str(out)])
    assert code == EXIT_CONFIG
    [entry] = _log_entries(out)
    assert entry["outcome"] == "Failure"
    assert entry["error"]["type"] == "ParameterError"


def test_unspanned_brackets_fail(tmp_path):
    out = tmp_path / "out"
    toml = "[model]\nsigma = 10.0\nrho = 28.0\ngamma1 = 1.0\n\n[brackets]\nmax_level = 2\n"
    assert main(["brackets", "--config", _write(tmp_path, toml), "--out", str(out)]) == EXIT_FAIL
    assert orjson.loads((out / "brackets.json").read_bytes())["pass"] is False


def test_log_manager_appends_json_lines(tmp_path):
    path = tmp_path / "log.jsonl"
    info = RunInfo(argv=["brackets"], seed=1, threads=0)
    LogManager().log(path, SuccessRunLog(action="brackets", run=info, passed=True, latency_ms=1.23456))
    LogManager().log(path, FailureRunLog(action="stationary", run=info, error={"type": "X"}))
    first, second = [orjson.loads(line) for line in path.read_bytes().splitlines()]
    assert first["latency_ms"] == 1.23
    assert "config_path" not in first["run"]
    assert second["outcome"] == "Failure"


GENERATOR_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = 0.0
gamma1 = 1.0
gamma2 = 1.0

[generator_check]
n_points = 200
n_param_sets = 2
seed = 3
"""

HITTING_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = 2.6666666666666665
gamma1 = 0.5
gamma2 = 0.5
gamma3 = 0.5

[integration]
dt = 1e-3
T = 2.0
n_traj = 16
radius = 60.0
seed = 5
start = { x = 0.0, y = 0.0, z = 100.0 }
"""

STATIONARY_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = 0.0
gamma1 = 1.0

[integration]
dt = 1e-3
T_burn = 1.0
T_sample = 5.0
thin = 10
bins = 10
seed = 2
start = { x = 5.0, y = 0.0, z = 28.0 }
"""

DEGENERATE_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = 0.0
gamma3 = 1.0

[integration]
dt = 1e-2
T = 1.0
n_traj = 50
record_every = 10
seed = 6
start = { x = 0.0, y = 0.0, z = 0.0 }
"""

TRANSIENCE_TOML = """
[model]
sigma = 10.0
rho = 28.0
beta = -0.5
gamma1 = 1.0

[certificate]
k_max = 6
seed = 1
"""

RECURRENCE_TOML = """
[model]
sigma = 10.0
rho = 0.0
beta = 0.0
gamma1 = 1.0

[integration]
dt = 1e-3

[certificate]
budget = 200
search_samples = 128
verify_samples = 1000
n_starts = 2
cross_check_T = 5.0
cross_check_n_traj = 20
"""


def _run_twice(tmp_path: Path, command: list, toml: str, files: list) -> int:
    """Runs a subcommand twice into the same directory and checks the outputs did not change."""
    out = tmp_path / "out"
    argv = command + ["--config", _write(tmp_path, toml), "--out", str(out)]
    code = main(argv)
    first = {name: (out / name).read_bytes() for name in files}
    assert main(argv) == code
    assert {name: (out / name).read_bytes() for name in files} == first
    assert len(_log_entries(out)) == 2
    return code


def _report(tmp_path: Path, name: str) -> dict:
    return orjson.loads((tmp_path / "out" / name).read_bytes())


def test_generator_check_run(tmp_path):
    code = _run_twice(tmp_path, ["generator-check"], GENERATOR_TOML, ["generator_check.json"])
    assert code == EXIT_PASS
    report = _report(tmp_path, "generator_check.json")
    assert report["command"] == "generator-check"
    assert report["pass"] is True
    result = report["result"]
    assert result["n_param_sets"] == 2
    assert result["max_rel_err_H"] < 1e-10
    assert result["max_rel_err_H_tilde"] < 1e-10
    assert result["max_rel_err_psi1"] < 1e-10
    assert set(result["max_rel_err_fd"]) == {"H", "M", "H_tilde"}


def test_unknown_field_name_is_a_configuration_error(tmp_path):
    out = tmp_path / "out"
    toml = GENERATOR_TOML + '\n[fields]\nnames = ["H", "nope"]\n'
    assert main(["generator-check", "--config", _write(tmp_path, toml), "--out", str(out)]) == EXIT_CONFIG
    [entry] = _log_entries(out)
    assert entry["outcome"] == "Failure"
    assert entry["error"]["type"] == "ConfigurationError"
    assert not (out / "generator_check.json").exists()


def test_unexpected_errors_are_not_configuration_errors(tmp_path, monkeypatch):
    def broken(self, command):
        raise ValueError("not a configuration problem")

    monkeypatch.setattr(CommandRouter, "route", broken)
    out = tmp_path / "out"
    with pytest.raises(ValueError):
        main(["brackets", "--config", _write(tmp_path, BRACKETS_TOML), "--out", str(out)])
    [entry] = _log_entries(out)
    assert entry["outcome"] == "Failure"
    assert entry["error"]["type"] == "ValueError"


def test_hitting_time_run(tmp_path):
    code = _run_twice(tmp_path, ["hitting-time"], HITTING_TOML, ["hitting_time.json", "hitting_times.csv"])
    assert code == EXIT_PASS
    lines = (tmp_path / "out" / "hitting_times.csv").read_text().splitlines()
    assert lines[0] == "traj_id,hit,hit_time"
    assert len(lines) == 17
    report = _report(tmp_path, "hitting_time.json")
    assert report["pass"] is True
    stats = report["result"]["stats"]
    assert stats["n_traj"] == 16
    assert "first_entry" not in stats
    assert stats["censored_at"] == 2.0


def test_stationary_run(tmp_path):
    files = ["stationary.json", "histogram_x.csv", "histogram_y.csv", "histogram_z.csv"]
    code = _run_twice(tmp_path, ["stationary"], STATIONARY_TOML, files)
    assert code == EXIT_PASS
    report = _report(tmp_path, "stationary.json")
    assert report["pass"] is True
    assert report["result"]["n_samples"] == 500
    assert report["result"]["burn_in"] == pytest.approx(1.0)
    assert "samples" not in report["result"]
    histogram = (tmp_path / "out" / "histogram_x.csv").read_text().splitlines()
    assert histogram[0] == "bin_lo,bin_hi,count"
    assert len(histogram) == 11


def test_diagnose_degenerate_run(tmp_path):
    files = ["diagnostic.json", "diagnostic.csv", "diagnostic_moments.csv"]
    code = _run_twice(tmp_path, ["diagnose-degenerate"], DEGENERATE_TOML, files)
    report = _report(tmp_path, "diagnostic.json")
    result = report["result"]
    assert result["n_traj"] == 50
    growth = result["growth_bound"]
    assert growth["kind"] == "growth"
    assert growth["pass"] is True
    assert growth["params"]["c"] == 0.0
    assert report["pass"] is (result["nondecreasing"] and growth["pass"])
    assert code == (EXIT_PASS if report["pass"] else EXIT_FAIL)
    assert (tmp_path / "out" / "diagnostic.csv").read_text().splitlines()[0] == "t,mean_M,stderr"


def test_diagnose_degenerate_rejects_x_noise(tmp_path):
    out = tmp_path / "out"
    code = main(["diagnose-degenerate", "--config", _write(tmp_path, BRACKETS_TOML), "--out", str(out)])
    assert code == EXIT_CONFIG
    [entry] = _log_entries(out)
    assert entry["error"]["type"] == "ParameterError"


def test_certificate_recurrence_reports_an_exhausted_budget(tmp_path):
    toml = RECURRENCE_TOML.replace("budget = 200", "budget = 3")
    code = _run_twice(tmp_path, ["certificate", "recurrence"], toml, ["certificate_recurrence.json"])
    assert code == EXIT_FAIL
    report = _report(tmp_path, "certificate_recurrence.json")
    assert report["pass"] is False
    search = report["result"]["search"]
    assert search["found"] is False
    assert "budget of 3 doublings exhausted" in search["message"]
    assert report["result"]["return_time"] == []


@pytest.mark.slow
def test_certificate_recurrence_run(tmp_path):
    code = _run_twice(tmp_path, ["certificate", "recurrence"], RECURRENCE_TOML, ["certificate_recurrence.json"])
    assert code == EXIT_PASS
    report = _report(tmp_path, "certificate_recurrence.json")
    assert report["pass"] is True
    search = report["result"]["search"]
    assert search["found"] is True
    assert all(r["pass"] and r["n_unresolved"] == 0 for r in search["reports"])
    assert search["min_V"] >= 1.0
    checks = report["result"]["return_time"]
    assert len(checks) == 2
    assert all(c["pass"] for c in checks)


@pytest.mark.slow
def test_certificate_transience_run(tmp_path):
    code = _run_twice(tmp_path, ["certificate", "transience"], TRANSIENCE_TOML, ["certificate_transience.json"])
    assert code == EXIT_PASS
    report = _report(tmp_path, "certificate_transience.json")
    assert report["pass"] is True
    result = report["result"]
    assert result["branch_smooth"] is True
    assert max(result["branch_mismatch"]) < 1e-8
    wonham = result["wonham"]
    assert all(wonham[p] for p in ("p1", "p2", "p3", "p4", "argmax_near_axis"))
    assert len(wonham["ladder"]) == 7
