#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests de bout en bout du CLI qb (click.testing.CliRunner) : fichiers
écrits, manifeste, codes de sortie, rejeu.

Chaque test travaille dans un répertoire temporaire.
"""

import json
import os
import tempfile
from pathlib import Path

from click.testing import CliRunner

import testkit  # noqa: F401  # ajoute src/ au path
from queue_bounds.cli.commands import main
from queue_bounds.core.experiments import (
    STEADY_STATE_MIN_HORIZON, STEADY_STATE_REPS, steady_state_horizon,
)


def _invoke(*args):
    return CliRunner().invoke(main, ["--log-level", "ERROR", *args])


def _read_json(path):
    return json.loads(Path(path).read_text(encoding="utf-8"))


# ─────────────────────────────────────────────────────────────
# simulate
# ─────────────────────────────────────────────────────────────

def test_simulate_deterministic_drain():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("simulate", "--preset", "deterministic-drain", "--reps", "1", "--out-dir", tmp)
        assert res.exit_code == 0, res.output
        lines = Path(tmp, "samples.csv").read_text(encoding="utf-8").splitlines()
        assert lines[0] == "rep,duration,A,A_star,eta_star,balk_patience,balk_room"
        assert lines[1] == "0,3.0,4.5,0.0,0,0,0"
        summary = _read_json(os.path.join(tmp, "summary.json"))
        assert summary["status"] == "ok" and summary["mode"] == "busy-period"


def test_manifest_lists_every_output():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("simulate", "--reps", "5", "--trace", "--out-dir", tmp)
        assert res.exit_code == 0, res.output
        manifest = _read_json(os.path.join(tmp, "manifest.json"))
        listed = sorted(o["path"] for o in manifest["outputs"])
        on_disk = sorted(p.relative_to(tmp).as_posix() for p in Path(tmp).rglob("*")
                         if p.is_file() and p.name != "manifest.json")
        assert listed == on_disk
        assert "trace/rep_0000.csv" in listed
        assert manifest["subcommand"] == "simulate" and len(manifest["config_hash"]) == 64


def test_thread_count_does_not_change_outputs():
    with tempfile.TemporaryDirectory() as tmp:
        one, four = os.path.join(tmp, "t1"), os.path.join(tmp, "t4")
        assert _invoke("simulate", "--reps", "64", "--seed", "9", "--threads", "1", "-o", one).exit_code == 0
        assert _invoke("simulate", "--reps", "64", "--seed", "9", "--threads", "4", "-o", four).exit_code == 0
        assert Path(one, "samples.csv").read_bytes() == Path(four, "samples.csv").read_bytes()


# ─────────────────────────────────────────────────────────────
# Codes de sortie
# ─────────────────────────────────────────────────────────────

def test_unstable_is_a_verdict_not_an_error():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("stability", "--preset", "unstable", "--out-dir", tmp)
        assert res.exit_code == 0, res.output
        summary = _read_json(os.path.join(tmp, "summary.json"))
        assert summary["verdict"] == "unstable"
        assert summary["report"]["rho_eff"] == 2.0


def test_rejected_dominance_exit_codes():
    with tempfile.TemporaryDirectory() as tmp:
        arms = os.path.join(tmp, "arms.csv")
        rows = ["arm,value"]
        for i in range(200):
            rows += [f"upper,{i * 0.01!r}", f"lower,{i * 0.01 + 1.0!r}"]
        Path(arms).write_text("\n".join(rows) + "\n", encoding="utf-8")
        strict = _invoke("dominance", "--arms-csv", arms, "--strict", "-o", os.path.join(tmp, "a"))
        assert strict.exit_code == 3, strict.output
        lenient = _invoke("dominance", "--arms-csv", arms, "-o", os.path.join(tmp, "b"))
        assert lenient.exit_code == 0, lenient.output
        summary = _read_json(os.path.join(tmp, "b", "summary.json"))
        assert summary["status"] == "rejected" and summary["rejected_count"] == 1


def test_conjecture_suite_is_labelled():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("dominance", "--suite", "conjecture", "--preset", "conjecture",
                      "--reps", "100", "--seed", "1", "-o", tmp)
        assert res.exit_code == 0, res.output
        summary = _read_json(os.path.join(tmp, "summary.json"))
        assert summary["suite"] == "conjecture" and summary["verdicts"]
        assert all(v["evidence"] == "conjecture evidence" for v in summary["verdicts"])
        assert Path(tmp, "paired.csv").is_file() and Path(tmp, "ecdf.csv").is_file()


def test_conjecture_needs_second_rate():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("dominance", "--suite", "conjecture", "--preset", "sinusoid-product",
                      "--reps", "100", "-o", tmp)
        assert res.exit_code == 2, res.output


def test_bad_config_exits_2():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "bad.json")
        Path(cfg).write_text(json.dumps({"schema_version": 1, "bogus": True}), encoding="utf-8")
        assert _invoke("simulate", "--config", cfg, "-o", tmp).exit_code == 2
        Path(cfg).write_text("{not json", encoding="utf-8")
        assert _invoke("simulate", "--config", cfg, "-o", tmp).exit_code == 2


def test_unknown_preset_exits_2():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("simulate", "--preset", "nope", "--json", "-o", tmp)
        assert res.exit_code == 2
        assert "unknown-preset" in res.output


def test_invalid_spec_exits_2():
    with tempfile.TemporaryDirectory() as tmp:
        # cycle sur un taux non périodique
        res = _invoke("simulate", "--preset", "drift", "--mode", "cycle", "--reps", "2", "-o", tmp)
        assert res.exit_code == 2, res.output


def test_caps_exceeded_exits_4():
    with tempfile.TemporaryDirectory() as tmp:
        cfg = os.path.join(tmp, "caps.json")
        Path(cfg).write_text(json.dumps({
            "schema_version": 1,
            "model": {"preset": "unstable"},
            "run": {"mode": "horizon", "horizon": 10000, "max_events": 50, "reps": 3},
        }), encoding="utf-8")
        res = _invoke("simulate", "--config", cfg, "-o", os.path.join(tmp, "out"))
        assert res.exit_code == 4, res.output
        summary = _read_json(os.path.join(tmp, "out", "summary.json"))
        assert summary["status"] == "caps_exceeded" and summary["cap_incidents"] == [0, 1, 2]


# ─────────────────────────────────────────────────────────────
# steady-state
# ─────────────────────────────────────────────────────────────

def test_steady_state_time_average_is_precise():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("steady-state", "--preset", "steady-state", "--reps", "200", "--seed", "4",
                      "-o", tmp)
        assert res.exit_code == 0, res.output
        avg = _read_json(os.path.join(tmp, "summary.json"))["time_average"]
        assert avg["horizon"] >= STEADY_STATE_MIN_HORIZON and avg["reps"] == STEADY_STATE_REPS
        assert avg["standard_error"] < 0.01, avg


def test_steady_state_horizon_grows_near_saturation():
    assert steady_state_horizon(0.0) == STEADY_STATE_MIN_HORIZON
    assert abs(steady_state_horizon(0.9) - 1e5) < 1e-3
    assert steady_state_horizon(0.999) == 1e6
    assert steady_state_horizon(1.2) == STEADY_STATE_MIN_HORIZON


# ─────────────────────────────────────────────────────────────
# Rejeu et catalogue
# ─────────────────────────────────────────────────────────────

def test_replay_reproduces_outputs():
    with tempfile.TemporaryDirectory() as tmp:
        assert _invoke("simulate", "--reps", "20", "--seed", "3", "-o", tmp).exit_code == 0
        res = _invoke("replay", os.path.join(tmp, "manifest.json"))
        assert res.exit_code == 0, res.output
        original = Path(tmp, "samples.csv").read_bytes()
        assert Path(tmp, "replay", "samples.csv").read_bytes() == original


def test_json_output_parses():
    with tempfile.TemporaryDirectory() as tmp:
        res = _invoke("bound", "--preset", "sinusoid-product", "--reps", "100", "--seed", "2",
                      "--grid-points", "20", "--bound-samples", "500", "--json", "-o", tmp)
        assert res.exit_code == 0, res.output
        data = json.loads(res.stdout)
        assert data["status"] in ("ok", "rejected")
        assert "n_max" in data and "verdicts" in data


def test_presets_listing():
    res = _invoke("presets", "--json")
    assert res.exit_code == 0
    assert "deterministic-drain" in res.output and "room-ladder" in res.output


if __name__ == "__main__":
    testkit.run_tests(globals(), "Tests du CLI qb")
