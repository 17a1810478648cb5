#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests bout en bout du pipeline : batch sur les corpus intégrés, artefacts, CLI
"""

import json
import math
from pathlib import Path

import pytest

import escape_orchestrator
from escape_orchestrator import (
    EXIT_INPUT_ERROR,
    EXIT_OK,
    EXIT_VERIFICATION_FAILED,
    BatchOptions,
    main,
    run_batch,
)
from REPORTING.scenario_io import list_corpora, load_corpus


def _options(out_dir: Path, **kw) -> BatchOptions:
    return BatchOptions(out_dir=out_dir, **kw)


# ------------------------ run_batch ------------------------

def test_batch_on_worked_examples(tmp_path):
    scenarios = load_corpus("worked_examples")
    result = run_batch(scenarios, _options(tmp_path, oracle="sweep", grid_n=1_000))
    print("Résultat :", {k: v for k, v in result.items() if k != "reports"})

    assert result["success"]
    assert result["n_scenarios"] == 3 and result["n_failed"] == 0
    by_name = {r.name: r for r in result["reports"]}
    assert by_name["aligned_line"].classification == "line"
    assert by_name["pure_arc"].classification == "arc"
    assert by_name["arc_then_line"].classification == "arc+line"
    assert by_name["aligned_line"].t_sim == pytest.approx(0.5, abs=1e-9)
    assert by_name["pure_arc"].t_plan == pytest.approx(0.7227, abs=1e-4)
    assert by_name["arc_then_line"].t_plan == pytest.approx(0.83996, abs=1e-4)
    for r in result["reports"]:
        assert r.ok and r.error is None
        assert r.checks["dominance"]
        assert r.delta <= 1e-6

    for s in scenarios:
        assert (tmp_path / "csv" / f"{s.name}.csv").exists()
    assert result["svg"] == [str(tmp_path / "svg" / "worked_examples.svg")]
    text = Path(result["report_txt"]).read_text(encoding="utf-8")
    assert "3 scénario(s), 0 en échec" in text
    assert text.splitlines()[3].split()[0] == "aligned_line"
    dumped = json.loads(Path(result["report_json"]).read_text(encoding="utf-8"))
    assert [d["name"] for d in dumped] == ["aligned_line", "arc_then_line", "pure_arc"]


def test_batch_on_all_builtin_corpora(tmp_path):
    scenarios = [s for name in list_corpora() for s in load_corpus(name)]
    result = run_batch(scenarios, _options(tmp_path, write_csv=False))
    assert result["success"], [r.name for r in result["reports"] if not r.ok]
    assert len(result["svg"]) == len(list_corpora())
    diag = {r.name: r for r in result["reports"] if r.group == "west_from_diagonal"}
    assert diag["west_from_diagonal_omega_100pi"].t_sim == pytest.approx(1 - math.hypot(0.25, 0.25), rel=0.02)
    slow = diag["west_from_diagonal_omega_pi_100"]
    assert slow.classification == "arc"
    assert slow.t_sim == pytest.approx(1.2123, abs=2e-3)
    center = {r.name: r for r in result["reports"] if r.group == "toward_center"}
    assert center["toward_center_omega_pi_100"].classification == "arc+line"
    assert center["toward_center_omega_pi_100"].t_sim == pytest.approx(1.25, abs=2e-3)


def test_batch_with_random_oracle(tmp_path):
    scenarios = load_corpus("west_from_diagonal")
    result = run_batch(scenarios, _options(tmp_path, oracle="random", samples=2_000, seed=5, write_csv=False, write_svg=False))
    assert result["success"]
    assert result["svg"] == []
    for r in result["reports"]:
        assert r.dominance["n_candidates"] == 2_000
        assert r.dominance["n_violations"] == 0


def test_empty_batch(tmp_path):
    result = run_batch([], _options(tmp_path))
    assert result["success"]
    assert result["n_scenarios"] == 0
    assert "0 scénario(s), 0 en échec" in Path(result["report_txt"]).read_text(encoding="utf-8")
    assert json.loads(Path(result["report_json"]).read_text(encoding="utf-8")) == []


def test_batch_is_deterministic(tmp_path):
    scenarios = load_corpus("worked_examples") + load_corpus("toward_center")
    a = run_batch(scenarios, _options(tmp_path / "a"))
    b = run_batch(list(reversed(scenarios)), _options(tmp_path / "b", workers=2))
    assert Path(a["report_json"]).read_bytes() == Path(b["report_json"]).read_bytes()
    for s in scenarios:
        rel = Path("csv") / f"{s.name}.csv"
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()
    for group in ("worked_examples", "toward_center"):
        rel = Path("svg") / f"{group}.svg"
        assert (tmp_path / "a" / rel).read_bytes() == (tmp_path / "b" / rel).read_bytes()


def test_failing_scenario_is_reported_not_raised(tmp_path, monkeypatch):
    real_simulate = escape_orchestrator.simulate

    def flaky(p0, params, region, opts=None):
        if params.max_turn_rate == pytest.approx(math.pi):
            raise RuntimeError("panne simulée")
        return real_simulate(p0, params, region, opts)

    monkeypatch.setattr(escape_orchestrator, "simulate", flaky)
    result = run_batch(load_corpus("worked_examples"), _options(tmp_path))
    assert not result["success"]
    assert result["n_failed"] == 1
    bad = next(r for r in result["reports"] if not r.ok)
    assert bad.name == "arc_then_line"
    assert "panne simulée" in bad.error
    assert not (tmp_path / "csv" / "arc_then_line.csv").exists()
    assert (tmp_path / "csv" / "pure_arc.csv").exists()
    assert "ERREUR" in Path(result["report_txt"]).read_text(encoding="utf-8")


def test_batch_options_validation():
    with pytest.raises(ValueError):
        BatchOptions(workers=0)
    with pytest.raises(ValueError):
        BatchOptions(oracle="exhaustive")


# ------------------------ CLI ------------------------

def test_cli_corpus_listing(capsys):
    assert main(["corpus"]) == EXIT_OK
    assert capsys.readouterr().out.split() == list_corpora()


def test_cli_corpus_export(tmp_path):
    out = tmp_path / "diagonal.scn"
    assert main(["corpus", "west_from_diagonal", "--out", str(out)]) == EXIT_OK
    assert main(["batch", str(out), "--out-dir", str(tmp_path / "run"), "--no-csv", "--no-svg"]) == EXIT_OK


def test_cli_batch_accepts_corpus_aliases(tmp_path):
    args = ["batch", "--corpus", "paper_fig3", "--corpus", "paper_fig4", "--out-dir", str(tmp_path), "--no-csv"]
    assert main(args) == EXIT_OK
    svgs = sorted(p.name for p in (tmp_path / "svg").glob("*.svg"))
    assert svgs == ["toward_center.svg", "west_from_diagonal.svg"]


def test_cli_plan(capsys):
    code = main(["plan", "--x0", "0.25", "--y0", "0", "--theta0", "pi/2", "--omega", "pi"])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["classification"] == "arc+line"
    assert [s["type"] for s in out["segments"]] == ["arc", "line"]
    assert out["total_time"] == pytest.approx(0.83996, abs=1e-4)


def test_cli_simulate_writes_csv(tmp_path, capsys):
    csv = tmp_path / "traj.csv"
    code = main(["simulate", "--x0", "0.5", "--y0", "0", "--theta0", "pi/2", "--omega", "1", "--csv", str(csv)])
    assert code == EXIT_OK
    out = json.loads(capsys.readouterr().out)
    assert out["ok"] and out["classification"] == "arc"
    assert out["switch_time"] is None
    assert csv.read_text(encoding="utf-8").startswith("t,x,y,theta,u,r,phi,lambda_theta,H\n")


def test_cli_input_errors(tmp_path):
    bad = tmp_path / "bad.scn"
    bad.write_text("[scenario x]\nomega = 1, speed = 3\n", encoding="utf-8")
    out_dir = str(tmp_path / "out")
    assert main(["batch", str(bad), "--out-dir", out_dir]) == EXIT_INPUT_ERROR
    assert main(["verify", "--corpus", "nope", "--out-dir", out_dir]) == EXIT_INPUT_ERROR
    assert main(["plan", "--x0", "2", "--y0", "0", "--theta0", "0", "--omega", "1"]) == EXIT_INPUT_ERROR
    assert main(["plan", "--x0", "0", "--y0", "0", "--theta0", "0", "--omega", "un"]) == EXIT_INPUT_ERROR
    assert main(["batch", "--corpus", "worked_examples", "--workers", "0", "--out-dir", out_dir]) == EXIT_INPUT_ERROR
    twice = ["batch", "--corpus", "worked_examples", "--corpus", "worked_examples", "--out-dir", out_dir]
    assert main(twice) == EXIT_INPUT_ERROR


def test_cli_verify(tmp_path):
    base = ["verify", "--corpus", "worked_examples", "--grid-n", "500", "--out-dir", str(tmp_path)]
    assert main(base) == EXIT_OK
    assert not (tmp_path / "csv").exists()
    # tolérance négative : tout candidat « presque optimal » devient une violation
    assert main(base + ["--dominance-tol", "-1"]) == EXIT_VERIFICATION_FAILED
