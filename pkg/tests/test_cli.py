import json

import pytest

import pinlab
from commands.replay import replay_argv
from utils.exports import read_csv, write_csv


def run(output_dir, *argv) -> int:
    return pinlab.main(["--output-dir", str(output_dir), *argv])


def load(path) -> dict:
    with open(path, encoding="utf8") as handle:
        return json.load(handle)


def test_parser_discovers_every_command():
    parser = pinlab.build_parser()
    choices = parser._subparsers._group_actions[0].choices
    assert set(choices) == {"free-energy", "minimise", "phase-sweep", "replay", "sample", "verify"}


def test_minimise_writes_report_profiles_and_manifest(output_dir):
    argv = ["minimise", "--a", "0", "--alpha", "1", "--free-right", "--tau", "12", "--grid", "32"]
    assert run(output_dir, *argv) == 0

    folder = output_dir / "minimise"
    report = load(folder / "phase_report.json")
    assert report["schema"] == "phase_report.v1"
    assert report["phase"] == "h_left[l1]"
    profiles = sorted(folder.glob("profile_*.csv"))
    assert [path.name for path in profiles] == ["profile_0_h_left.csv"]
    assert len(read_csv(profiles[0])) == 33

    manifest = load(folder / "manifest.json")
    assert manifest["command"] == "minimise"
    assert manifest["argv"] == ["--output-dir", str(output_dir), *argv]
    assert manifest["rng"] == "Philox"
    assert manifest["outputs"] == ["phase_report.json", "profile_0_h_left.csv"]


@pytest.mark.parametrize("flags", [["--alpha", "-12"], ["--alpha=-12"]])
def test_negative_scalar_values(output_dir, flags):
    assert run(output_dir, "minimise", "--a", "1", *flags, "--free-right", "--tau", "100") == 0
    report = load(output_dir / "minimise" / "phase_report.json")
    assert report["bc"] == {"a": 1.0, "alpha": -12.0, "b": None, "beta": None}


def test_negative_lists_need_the_equals_form(output_dir):
    sweep = ["phase-sweep", "--a", "1", "--tau-max", "10", "--tau-steps", "3"]
    assert run(output_dir, *sweep, "--alpha=-12,3") == 0
    assert len(read_csv(output_dir / "phase-sweep" / "phase_sweep.csv")) == 6
    assert run(output_dir, *sweep, "--alpha", "-12,3") == 2


def test_degenerate_reward_writes_both_profiles(output_dir):
    assert run(output_dir, "minimise", "--a", "0", "--alpha", "1", "--free-right", "--tau", "8") == 0
    report = load(output_dir / "minimise" / "phase_report.json")
    assert report["degenerate"]
    assert len(list((output_dir / "minimise").glob("profile_*.csv"))) == 2


@pytest.mark.parametrize(
    "argv, code",
    [
        (["minimise", "--a", "0", "--alpha", "1", "--free-right"], 2),
        (["minimise", "--a", "0", "--alpha", "1", "--b", "0", "--tau", "1"], 2),
        (["minimise", "--a", "0", "--alpha", "1", "--free-right", "--tau", "-1"], 2),
        (["levitate"], 2),
        (["minimise", "--a", "nan", "--alpha", "1", "--free-right", "--tau", "1"], 3),
        (["free-energy", "--N", "30", "--eps", "1"], 4),
        (["free-energy", "--mode", "scan", "--N", "8", "--eps", "1"], 2),
    ],
)
def test_exit_codes(output_dir, argv, code):
    assert run(output_dir, *argv) == code


def test_reward_from_a_tau_table(output_dir, tmp_path):
    table = tmp_path / "tau.csv"
    write_csv(table, "free_energy.v1", [
        (32, 1.0, 0.0, 0.0, "tau", float("nan")),
        (float("inf"), 1.0, 2.0, 0.1, "tau", float("nan")),
        (float("inf"), 100.0, 6.0, 0.1, "tau", 1.3),
    ])
    argv = ["minimise", "--a", "0", "--alpha", "1", "--free-right", "--eps", "10", "--tau-from", str(table)]
    assert run(output_dir, *argv) == 0
    assert load(output_dir / "minimise" / "phase_report.json")["tau"] == pytest.approx(4.0)

    argv[-3] = "1000"
    assert run(output_dir, *argv) == 3


def test_phase_sweep_locates_the_switch(output_dir):
    argv = ["phase-sweep", "--a", "0", "--alpha", "1", "--tau-max", "20", "--tau-steps", "20"]
    assert run(output_dir, *argv) == 0
    folder = output_dir / "phase-sweep"
    assert len(read_csv(folder / "phase_sweep.csv")) == 20
    boundaries = read_csv(folder / "phase_boundaries.csv")
    assert len(boundaries) == 1
    assert float(boundaries[0]["tau_boundary"]) == pytest.approx(8.0, abs=1e-5)
    assert (boundaries[0]["phase_below"], boundaries[0]["phase_above"]) == ("linear", "h_left[l1]")


def test_sample_writes_traces_and_dumps(output_dir):
    argv = [
        "sample", "--N", "8", "--a", "0", "--alpha", "0", "--b", "0", "--beta", "0", "--eps", "2",
        "--sweeps", "24", "--burn-in", "4", "--replicas", "2", "--dump-every", "5",
    ]
    assert run(output_dir, *argv) == 0
    folder = output_dir / "sample"
    trace = read_csv(folder / "trace.csv")
    assert len(trace) == 40
    assert {row["replica"] for row in trace} == {"0", "1"}
    assert len(read_csv(folder / "profiles.csv")) == 2 * 4 * 9
    assert load(folder / "manifest.json")["diagnostics"]["samples"] == 40


def test_exact_free_energy_is_cached_in_the_ledger(output_dir):
    argv = ["free-energy", "--mode", "exact", "--N", "4,6", "--eps", "0.5,2"]
    assert run(output_dir, *argv) == 0
    first = read_csv(output_dir / "free-energy" / "free_energy.csv")
    assert [(row["N"], row["quantity"]) for row in first] == [("4", "log_ratio")] * 2 + [("6", "log_ratio")] * 2

    assert run(output_dir, *argv) == 0
    assert read_csv(output_dir / "free-energy" / "free_energy.csv") == first


def test_verify_core_suite_passes(output_dir):
    assert run(output_dir, "verify", "--suite", "core", "--quick") == 0
    report = load(output_dir / "verify" / "verify.json")
    assert report["passed"]
    assert set(report["suites"]) == {"core"}
    assert all(check["passed"] for check in report["suites"]["core"]["checks"])


def test_replay_reproduces_a_run(output_dir, tmp_path):
    assert run(output_dir, "minimise", "--a", "1", "--alpha", "0", "--free-right", "--tau", "70") == 0
    manifest = output_dir / "minimise" / "manifest.json"

    replayed = tmp_path / "replayed"
    assert pinlab.main(["replay", str(manifest), "--into", str(replayed)]) == 0
    original = load(output_dir / "minimise" / "phase_report.json")
    again = load(replayed / "minimise" / "phase_report.json")
    assert again["phase"] == original["phase"]
    assert again["sigma_min"] == original["sigma_min"]
    assert again["minimisers"] == original["minimisers"]
    assert load(replayed / "minimise" / "manifest.json")["argv"][:2] == ["--output-dir", str(replayed)]


def test_replay_needs_a_manifest(output_dir, tmp_path):
    assert run(output_dir, "replay", str(tmp_path / "missing.json")) == 2


def test_replay_argv_swaps_the_output_dir():
    recorded = ["--output-dir", "old", "minimise", "--tau", "1"]
    assert replay_argv(recorded) == recorded
    assert replay_argv(recorded, "new") == ["--output-dir", "new", "minimise", "--tau", "1"]
    assert replay_argv(["--output-dir=old", "verify"], "new") == ["--output-dir", "new", "verify"]
