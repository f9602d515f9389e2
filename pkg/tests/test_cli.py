"""Command-line workflows: config handling, artifacts, exit codes, determinism."""

import filecmp
import json
import os
from pathlib import Path

import pytest

from singlab.cli import (
    canonical_text,
    config_hash,
    default_config,
    load_config,
    main,
)

REPO_ROOT = Path(__file__).resolve().parents[1]

SUMMARY_KEYS = {"subcommand", "config_hash", "results", "status"}


def read_summary(out):
    with open(os.path.join(out, "summary.json")) as fh:
        return json.load(fh)


def run(tmp_path, name, *overrides, quiet=True, config=None):
    out = str(tmp_path / name)
    argv = [name.split(":")[0], "--out", out]
    if config is not None:
        argv += ["--config", str(config)]
    for ov in overrides:
        argv += ["--override", ov]
    if quiet:
        argv.append("--quiet")
    return main(argv), out


# ---------------------------------------------------------------------------
# configuration


def test_config_round_trip_is_idempotent(tmp_path):
    cfg = default_config()
    text = canonical_text(cfg)
    path = tmp_path / "all.cfg"
    path.write_text(text)
    loaded = load_config(str(path), [], "solve")
    assert loaded == cfg
    assert canonical_text(loaded) == text


def test_reference_config_mirrors_defaults():
    ref = REPO_ROOT / "configs" / "reference.cfg"
    assert load_config(str(ref), [], "solve") == default_config()


def test_overrides_reach_sections(tmp_path):
    values = load_config(None, ["h=0.125", "stability.margin=0.5"], "solve")
    assert values["solve"]["h"] == 0.125
    assert values["stability"]["margin"] == 0.5


def test_config_hash_tracks_active_section():
    base = default_config()
    tweaked = load_config(None, ["h=0.125"], "solve")
    other = load_config(None, ["stability.margin=0.5"], "solve")
    assert config_hash("solve", base) != config_hash("solve", tweaked)
    # a change in an inactive section leaves the active hash alone
    assert config_hash("solve", base) == config_hash("solve", other)


@pytest.mark.parametrize(
    "override",
    ["nope=1", "nosec.h=0.1", "h", "h=abc", "method=magic", "h=-0.1", "alpha=2.0"],
)
def test_bad_inputs_exit_4(tmp_path, override, capsys):
    code, out = run(tmp_path, "solve", override)
    assert code == 4
    assert read_summary(out)["status"] == "config-error"
    assert "config error" in capsys.readouterr().err


def test_unknown_config_key_exits_4(tmp_path):
    bad = tmp_path / "bad.cfg"
    bad.write_text("[solve]\nh = 0.125\nwarp_factor = 9\n")
    code, out = run(tmp_path, "solve:badcfg", config=bad)
    assert code == 4
    assert read_summary(out)["status"] == "config-error"


def test_no_subcommand_prints_help_and_exits_4(capsys):
    assert main([]) == 4
    assert "subcommand" in capsys.readouterr().out


def test_version_flag():
    with pytest.raises(SystemExit) as exc:
        main(["--version"])
    assert exc.value.code == 0


# ---------------------------------------------------------------------------
# subcommands


def test_solve_artifacts_and_determinism(tmp_path):
    code1, out1 = run(tmp_path, "solve:a", "h=0.03125")
    code2, out2 = run(tmp_path, "solve:b", "h=0.03125")
    assert code1 == code2 == 0
    names = sorted(os.listdir(out1))
    assert names == [
        "effective.cfg", "run_metadata.json", "solution.csv",
        "solve_report.json", "summary.json",
    ]
    summary = read_summary(out1)
    assert set(summary) == SUMMARY_KEYS
    assert summary["status"] == "ok" and summary["subcommand"] == "solve"
    assert summary["config_hash"] == config_hash(
        "solve", load_config(None, ["h=0.03125"], "solve")
    )
    # byte-identical reruns; wall-clock lives only in run_metadata.json
    same, diff, funny = filecmp.cmpfiles(out1, out2, names, shallow=False)
    assert funny == []
    assert diff == ["run_metadata.json"]


def test_solve_newton_branch(tmp_path):
    code, out = run(tmp_path, "solve:newton", "h=0.03125", "method=newton")
    assert code == 0
    report = json.load(open(os.path.join(out, "solve_report.json")))
    assert report["converged"] is True


def test_solve_reports_nonexistence_with_exit_2(tmp_path):
    code, out = run(tmp_path, "solve:ne", "n=2", "domain=disk", "h=0.0625",
                    "boundary=0.05")
    assert code == 2
    summary = read_summary(out)
    assert summary["status"] == "nonexistence"
    assert summary["results"]["status"] == "collapse"


def test_radial_artifacts(tmp_path):
    code, out = run(tmp_path, "radial", "eps=0.2 0.1", "scan_samples=60")
    assert code == 0
    names = sorted(os.listdir(out))
    for expected in ("profile_01.csv", "profile_02.csv", "scan.csv",
                     "profiles.gp", "profiles.dat", "scan.gp", "scan.dat"):
        assert expected in names
    results = read_summary(out)["results"]
    assert len(results["profiles"]) == 2


def test_bifurcation_summary(tmp_path):
    code, out = run(tmp_path, "bifurcation", "samples=60")
    assert code == 0
    results = read_summary(out)["results"]
    assert 0.99 <= results["C1"] <= 1.01
    assert 0.99 <= results["C2"] <= 1.01
    assert os.path.exists(os.path.join(out, "scan_summary.txt"))


def test_stability_artifacts(tmp_path):
    code, out = run(tmp_path, "stability", "r_inner=0.0005", "h=0.0009995")
    assert code == 0
    results = read_summary(out)["results"]
    assert results["stable"] is True
    spectral = json.load(open(os.path.join(out, "spectral.json")))
    assert spectral["lambda_min"] == pytest.approx(results["lambda_min"])
    assert os.path.exists(os.path.join(out, "eigenvector.csv"))


def test_continue_homotopy_completes(tmp_path):
    code, out = run(tmp_path, "continue", "h=0.0625", "level_end=1.5",
                    "steps=4", "track_lambda=false")
    assert code == 0
    results = read_summary(out)["results"]
    assert results["status"] == "completed"
    trace_lines = open(os.path.join(out, "trace.csv")).read().splitlines()
    assert trace_lines[0].startswith("t,")
    assert len(trace_lines) == results["steps"] + 1


def test_continue_homotopy_nonexistence_exit_2(tmp_path):
    code, out = run(tmp_path, "continue:ne", "h=0.0625", "steps=10",
                    "track_lambda=false")
    assert code == 2
    assert read_summary(out)["status"] == "nonexistence"


def test_continue_singular_targets(tmp_path):
    code, out = run(tmp_path, "continue:sing", "mode=singular", "n=7",
                    "domain=ball", "h=0.00390625", "level_start=1.0",
                    "targets=0.3")
    assert code == 0
    results = read_summary(out)["results"]
    assert results["all_achieved"] is True
    entry = results["targets"][0]
    assert entry["achieved"] and 0.8 * 0.3 <= entry["min_u"] <= 0.3
    assert os.path.exists(os.path.join(out, "singular_01.csv"))


def test_continue_rejects_bad_targets(tmp_path):
    code, _ = run(tmp_path, "continue:bad", "mode=singular", "n=7",
                  "domain=ball", "h=0.0078125", "targets=0.1 0.2")
    assert code == 4


def test_estimates_battery(tmp_path):
    code, out = run(tmp_path, "estimates", "h=0.00390625")
    assert code == 0
    results = read_summary(out)["results"]
    assert results["all_passed"] is True
    reports = json.load(open(os.path.join(out, "estimates.json")))
    assert [r["inequality"] for r in reports] == [
        "positivity-lower-bounds", "p-integral-upper-bound", "w12-p2-bound",
        "holder-quotient", "sublevel-dimension-bound",
    ]
    csv_lines = open(os.path.join(out, "estimates.csv")).read().splitlines()
    assert len(csv_lines) == len(reports) + 1


def test_estimates_rejects_unknown_check(tmp_path):
    code, _ = run(tmp_path, "estimates:bad", "checks=sorcery")
    assert code == 4


def test_reproduce_subset_and_failure_exit(tmp_path):
    code, out = run(tmp_path, "reproduce", "criteria=1 8")
    assert code == 0
    text = open(os.path.join(out, "acceptance.txt")).read()
    assert "2/2 criteria passed" in text
    assert text.count("PASS") == 2
    payload = json.load(open(os.path.join(out, "acceptance.json")))
    assert [c["index"] for c in payload["criteria"]] == [1, 8]

    code12, out12 = run(tmp_path, "reproduce:12", "criteria=12")
    assert code12 == 1
    assert read_summary(out12)["status"] == "acceptance-failures"
    assert "FAIL" in open(os.path.join(out12, "acceptance.txt")).read()


def test_quiet_flag_suppresses_progress(tmp_path, capsys):
    run(tmp_path, "solve:q1", "h=0.03125")
    assert capsys.readouterr().out == ""
    code, _ = run(tmp_path, "solve:q2", "h=0.03125", quiet=False)
    assert code == 0
    assert "[solve] status=ok" in capsys.readouterr().out
