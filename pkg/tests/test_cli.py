"""Command-line behavior: exit codes, CSV output, and reproducibility."""

import json
import subprocess
import sys

import pytest

from fairtrade import cli
from fairtrade.environments import ENVIRONMENT_ID_PATTERNS
from fairtrade.algorithms import LEARNER_ID_PATTERNS
from fairtrade.verify import CheckResult


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "fairtrade.cli", *args], capture_output=True, text=True
    )


def write_config(tmp_path, payload, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(payload), encoding="utf-8")
    return str(path)


# ---------------------------------------------------------------------------
# listings
# ---------------------------------------------------------------------------


def test_list_envs(capsys):
    assert cli.main(["list-envs"]) == 0
    out = capsys.readouterr().out
    for pattern in ENVIRONMENT_ID_PATTERNS:
        assert pattern in out
    assert "inline" in out


def test_list_learners(capsys):
    assert cli.main(["list-learners"]) == 0
    out = capsys.readouterr().out
    for pattern in LEARNER_ID_PATTERNS:
        assert pattern in out


# ---------------------------------------------------------------------------
# run
# ---------------------------------------------------------------------------


BASIC_CONFIG = {
    "runs": [
        {
            "learner": "conv-pricing",
            "env": "lb-mu",
            "horizons": [100, 1000],
            "n_episodes": 3,
            "base_seed": 1,
        },
        {
            "learner": "fixed:p=0.5",
            "env": {"joint": [[0.1, 0.9, 1.0]], "id": "one-atom"},
            "horizon": 50,
        },
    ]
}


def test_run_writes_curve_csv(tmp_path, capsys):
    config = write_config(tmp_path, BASIC_CONFIG)
    out = tmp_path / "curves.csv"
    assert cli.main(["run", "--config", config, "--out", str(out)]) == 0
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "algorithm,env,T,n_episodes,mean_regret,stderr,slope"
    assert len(lines) == 4  # two horizons + one horizon
    assert lines[1].startswith("conv-pricing,lb-mu,100,3,")
    assert lines[3].startswith("fixed:p=0.5,one-atom,50,1,")
    stdout = capsys.readouterr().out
    assert "conv-pricing on lb-mu" in stdout
    assert "wrote 3 rows" in stdout


def test_run_reruns_are_byte_identical(tmp_path):
    config = write_config(tmp_path, BASIC_CONFIG)
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["run", "--config", config, "--out", str(a)]) == 0
    assert cli.main(["run", "--config", config, "--out", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_run_fits_slope_with_three_horizons(tmp_path, capsys):
    config = write_config(
        tmp_path,
        {
            "output": str(tmp_path / "slope.csv"),
            "runs": [
                {"learner": "fixed:p=0.9", "env": "lb-mu", "horizons": [10, 100, 1000]}
            ],
        },
    )
    assert cli.main(["run", "--config", config]) == 0
    capsys.readouterr()
    rows = (tmp_path / "slope.csv").read_text(encoding="utf-8").strip().splitlines()[1:]
    slopes = {row.split(",")[-1] for row in rows}
    assert slopes == {"1"}  # constant per-round gap: regret exactly linear in T


@pytest.mark.parametrize(
    "payload,code",
    [
        ({"runs": [{"learner": "nope", "env": "lb-mu", "horizon": 5}]}, 3),
        ({"runs": [{"learner": "dbs", "env": "nope", "horizon": 5}]}, 3),
        ({"runs": [{"learner": "dbs", "env": "lb-mu", "horizons": [100, 10]}]}, 2),
        ({"runs": [{"learner": "fbep", "env": "lb-mu", "horizon": 5, "feedback": "two-bit"}]}, 2),
        ({"runs": []}, 2),
        ({}, 2),
    ],
)
def test_run_error_exit_codes(tmp_path, capsys, payload, code):
    config = write_config(tmp_path, payload)
    assert cli.main(["run", "--config", config, "--out", str(tmp_path / "x.csv")]) == code
    assert "error:" in capsys.readouterr().err


def test_run_rejects_malformed_json(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json", encoding="utf-8")
    assert cli.main(["run", "--config", str(bad), "--out", str(tmp_path / "x.csv")]) == 2
    capsys.readouterr()


def test_run_requires_an_output_path(tmp_path, capsys):
    config = write_config(tmp_path, BASIC_CONFIG)  # no "output" key
    assert cli.main(["run", "--config", config]) == 2
    assert "output" in capsys.readouterr().err


# ---------------------------------------------------------------------------
# sweep
# ---------------------------------------------------------------------------


def test_sweep_writes_per_point_csv(tmp_path, capsys):
    out = tmp_path / "sweep.csv"
    code = cli.main(
        ["sweep", "--learner", "dbs", "--horizon", "64", "--points", "9", "--out", str(out)]
    )
    assert code == 0
    lines = out.read_text(encoding="utf-8").strip().splitlines()
    assert lines[0] == "s,regret"
    assert len(lines) == 10
    assert "sweep dbs T=64" in capsys.readouterr().out


def test_sweep_unknown_learner(capsys):
    assert cli.main(["sweep", "--learner", "foo", "--horizon", "64"]) == 3
    capsys.readouterr()


# ---------------------------------------------------------------------------
# verify
# ---------------------------------------------------------------------------


def test_verify_single_suite_with_report(tmp_path, capsys):
    report = tmp_path / "report.json"
    assert cli.main(["verify", "--suite", "gft-trap", "--out", str(report)]) == 0
    out = capsys.readouterr().out
    assert "PASS gft-trap-regret:" in out
    rows = json.loads(report.read_text(encoding="utf-8"))
    assert [row["check"] for row in rows] == ["gft-trap-regret"]
    assert rows[0]["pass"] is True
    assert set(rows[0]) == {"check", "pass", "measured", "tolerance", "runtime_ms"}


def test_verify_unknown_suite(capsys):
    assert cli.main(["verify", "--suite", "nope"]) == 2
    assert "unknown suite" in capsys.readouterr().err


def test_verify_exit_one_when_a_check_fails(monkeypatch, capsys):
    failing = [CheckResult(check="x", passed=False, measured=1.0, tolerance=0.0, runtime_ms=0.1)]
    monkeypatch.setattr(cli, "run_suites", lambda names, threads=1: failing)
    assert cli.main(["verify", "--suite", "gft-trap"]) == 1
    assert "FAIL x:" in capsys.readouterr().out


# ---------------------------------------------------------------------------
# real process entry point
# ---------------------------------------------------------------------------


def test_module_entry_point_round_trip(tmp_path):
    proc = run_cli("list-learners")
    assert proc.returncode == 0
    assert "conv-pricing" in proc.stdout
    bad = run_cli("run", "--config", str(tmp_path / "missing.json"), "--out", "x.csv")
    assert bad.returncode == 2
    unknown = run_cli("verify", "--suite", "wat")
    assert unknown.returncode == 2
