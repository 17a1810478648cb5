# escape_orchestrator.py
"""
Pipelines d'évasion minimale en temps (voiture de Dubins, région circulaire).

Par scénario :
  1) plan_escape        (construction géométrique)
  2) simulate           (boucle fermée, propagation exacte)
  3) check_pmp          (Hamiltonien, état adjoint, loi de commutation)
  4) contrôles croisés  (écart plan/simulation, plus petit arc, rejeu en boucle ouverte)
  5) oracle optionnel   (balayage bang/commutation ou falsification aléatoire)

Le batch écrit csv/<scénario>.csv, svg/<groupe>.svg, report.txt et report.json.
Codes de sortie : 0 succès, 1 scénario illisible/invalide, 2 vérification en échec.
"""

import argparse
import json
import logging
import os
import sys
import time
from collections import defaultdict
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict
from itertools import repeat
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Tuple

from dotenv import load_dotenv
from jinja2 import Environment, FileSystemLoader
from pydantic import BaseModel, Field, ValidationError

import path_setup  # noqa: F401
from FEEDBACK.pmp_checks import CostateSeries, check_pmp, reconstruct_costate
from ORACLE.dominance_oracle import (
    STRUCTURED_TOLERANCE,
    bang_switch_sweep,
    random_control_dominance,
    schedule_from_trajectory,
    simulate_open_loop,
)
from PLANNER.escape_planner import Arc, EscapePath, chord_partition, plan_escape, verify_shorter_arc
from REPORTING.scenario_io import (
    CORPUS_ALIASES,
    Scenario,
    build_scenario,
    format_scenarios,
    list_corpora,
    load_corpus,
    parse_value,
    random_scenarios,
    read_scenario_file,
)
from REPORTING.svg_plot import PlotRun, build_plot_run, write_group_svg
from REPORTING.trajectory_csv import emit_trajectory_csv
from SIMULATION.escape_simulator import Trajectory, simulate
from UTILS.errors import ScenarioParseError, ScenarioValidationError

log = logging.getLogger("escape_orchestrator")
if not log.handlers:
    logging.basicConfig(level=logging.INFO, format="%(asctime)s | %(levelname)s | %(name)s | %(message)s")

TEMPLATES_DIR = Path(__file__).parent / "REPORTING" / "templates"
report_env = Environment(loader=FileSystemLoader(str(TEMPLATES_DIR)), keep_trailing_newline=True)

# ==== Constantes ====
DEFAULT_OUT_DIR = "./escape_output"
HAMILTONIAN_TOL = 1e-6
MIN_SIGN_FRACTION = 0.999
# segment plus court que ça (relatif à ρ) : arc / arc+ligne indiscernables
CLASSIFICATION_RTOL = 1e-6

EXIT_OK = 0
EXIT_INPUT_ERROR = 1
EXIT_VERIFICATION_FAILED = 2


def _ms(t0: float) -> float:
    return (time.perf_counter() - t0) * 1000.0


# ------------------------ Modèles ------------------------

class BatchOptions(BaseModel):
    out_dir: Path = Field(Path(DEFAULT_OUT_DIR), description="Dossier de sortie (csv/, svg/, report.*)")
    write_csv: bool = Field(True, description="Écrire csv/<scénario>.csv")
    write_svg: bool = Field(True, description="Écrire svg/<groupe>.svg")
    oracle: Literal["none", "sweep", "random"] = Field("none", description="Oracle de dominance")
    seed: int = Field(0, description="Graine du générateur de commandes aléatoires")
    tol: float = Field(1e-6, gt=0, description="Écart toléré |T_plan − T_sim| (s)")
    dominance_tol: float = Field(1e-4, description="Tolérance de dominance (s) ; négative = auto-test")
    grid_n: int = Field(10_000, ge=2, description="Taille de la grille de commutation")
    samples: int = Field(10_000, ge=1, description="Nombre de commandes aléatoires")
    workers: int = Field(1, ge=1, description="Processus parallèles")
    costate_method: Literal["exact", "rk4"] = Field("exact", description="Quadrature de l'état adjoint")


class RunReport(BaseModel):
    name: str
    group: str
    classification: Optional[str] = None
    plan_classification: Optional[str] = None
    t_plan: Optional[float] = None
    t_sim: Optional[float] = None
    delta: Optional[float] = None
    pmp: Optional[Dict[str, Any]] = None
    dominance: Optional[Dict[str, Any]] = None
    checks: Dict[str, bool] = Field(default_factory=dict)
    ok: bool = False
    error: Optional[str] = None


# ------------------------ Contrôles ------------------------

def _classifications_agree(path: EscapePath, traj: Trajectory, rho: float) -> bool:
    """Égalité, ou désaccord limité à un segment de longueur négligeable (quasi-égalité géométrique)."""
    plan, sim = path.classification, traj.classification
    if plan == sim:
        return True
    eps = CLASSIFICATION_RTOL * rho
    kinds = {plan, sim}
    if kinds == {"arc", "arc+line"}:
        if plan == "arc+line":
            return path.segments[-1].length <= eps
        return traj.exit_time - traj.switch_time <= eps / path.total_length * path.total_time
    if kinds == {"line", "arc+line"}:
        arc = path.arc
        return (arc.length if isinstance(arc, Arc) else 0.0) <= eps
    return False


def run_scenario(
    scenario: Scenario,
    options: BatchOptions,
) -> Tuple[RunReport, Optional[Trajectory], Optional[EscapePath], Optional[CostateSeries]]:
    """Plan + simulation + PMP + contrôles (+ oracle). Une erreur devient une donnée du rapport."""
    t0 = time.perf_counter()
    group = scenario.figure_group
    try:
        params, region, p0 = scenario.params(), scenario.region(), scenario.pose()

        path = plan_escape(p0, params, region)
        traj = simulate(p0, params, region)
        costates = reconstruct_costate(traj, params, region, method=options.costate_method)
        pmp = check_pmp(traj, params, region, costates=costates)
        partition = chord_partition(p0, region)
        replay = simulate_open_loop(p0, schedule_from_trajectory(traj), params, region)

        delta = abs(path.total_time - traj.exit_time)
        checks = {
            "agreement": delta <= options.tol,
            "hamiltonian": pmp.max_abs_hamiltonian <= HAMILTONIAN_TOL,
            "beta_negative": pmp.beta < 0,
            "sign_match": pmp.sign_match_fraction >= MIN_SIGN_FRACTION,
            "hamiltonian_minimum": pmp.hamiltonian_minimum_ok,
            "exit_radial_rate": pmp.terminal_radial_rate >= -1e-9,
            "shorter_arc": verify_shorter_arc(path, partition),
            "classification": _classifications_agree(path, traj, region.radius),
            "open_loop_replay": replay is not None and abs(replay - traj.exit_time) <= STRUCTURED_TOLERANCE,
        }

        dominance = None
        if options.oracle == "sweep":
            dominance = bang_switch_sweep(p0, params, region, grid_n=options.grid_n, tolerance=options.dominance_tol, path=path)
        elif options.oracle == "random":
            dominance = random_control_dominance(
                p0, params, region, n_samples=options.samples, seed=options.seed, tolerance=options.dominance_tol, path=path
            )
        if dominance is not None:
            checks["dominance"] = dominance.ok

        ok = all(checks.values())
        report = RunReport(
            name=scenario.name,
            group=group,
            classification=traj.classification,
            plan_classification=path.classification,
            t_plan=path.total_time,
            t_sim=traj.exit_time,
            delta=delta,
            pmp=asdict(pmp),
            dominance=dominance.summary() if dominance is not None else None,
            checks=checks,
            ok=ok,
        )
        if ok:
            log.info("✅ %s : %s, T=%.9f s (%.1f ms)", scenario.name, path.classification, traj.exit_time, _ms(t0))
        else:
            failed = ", ".join(k for k, v in checks.items() if not v)
            log.warning("⚠️ %s : contrôles en échec (%s)", scenario.name, failed)
        return report, traj, path, costates

    except Exception as e:
        log.exception("❌ Scénario %s en échec", scenario.name)
        return RunReport(name=scenario.name, group=group, ok=False, error=str(e)), None, None, None


def _run_worker(scenario: Scenario, options: BatchOptions) -> Tuple[RunReport, Optional[PlotRun]]:
    """Un scénario + ses artefacts par scénario (CSV) ; renvoie de quoi tracer le groupe."""
    report, traj, path, costates = run_scenario(scenario, options)
    if traj is None:
        return report, None
    if options.write_csv:
        emit_trajectory_csv(traj, costates, scenario.params(), options.out_dir / "csv" / f"{scenario.name}.csv")
    plot = build_plot_run(scenario.name, traj, path, scenario.rho) if options.write_svg else None
    return report, plot


# ------------------------ Rapports ------------------------

def _fmt(x: Optional[float], spec: str) -> str:
    return "-" if x is None else format(x, spec)


def render_text_report(reports: List[RunReport]) -> str:
    rows = []
    for r in reports:
        margin = r.dominance["margin"] if r.dominance else None
        rows.append({
            "name": r.name,
            "t_plan": _fmt(r.t_plan, ".12f"),
            "t_sim": _fmt(r.t_sim, ".12f"),
            "delta": _fmt(r.delta, ".3e"),
            "max_h": _fmt(r.pmp["max_abs_hamiltonian"] if r.pmp else None, ".3e"),
            "classification": r.classification or "-",
            "margin": _fmt(margin, ".3e"),
            "status": "OK" if r.ok else ("ERREUR: " + r.error if r.error else "ECHEC"),
        })
    tpl = report_env.get_template("run_report.txt")
    return tpl.render(rows=rows, n_failed=sum(not r.ok for r in reports))


# ------------------------ Pipeline ------------------------

def run_batch(scenarios: List[Scenario], options: BatchOptions) -> Dict[str, Any]:
    """
    Pipeline « scénarios → rapports » :
    1) exécution (séquentielle ou pool de processus, ordre stable par nom)
    2) CSV par scénario, SVG par groupe
    3) report.txt + report.json
    """
    t0 = time.perf_counter()
    ordered = sorted(scenarios, key=lambda s: s.name)
    out_dir = Path(options.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    log.info("▶️ Batch : %d scénario(s) → %s", len(ordered), out_dir)

    if options.workers > 1 and len(ordered) > 1:
        with ProcessPoolExecutor(max_workers=options.workers) as ex:
            results = list(ex.map(_run_worker, ordered, repeat(options)))
    else:
        results = [_run_worker(s, options) for s in ordered]
    reports = [r for r, _ in results]

    svg_files: List[str] = []
    if options.write_svg:
        groups: Dict[str, List[PlotRun]] = defaultdict(list)
        radius: Dict[str, float] = {}
        for s, (_, plot) in zip(ordered, results):
            if plot is None:
                continue
            groups[s.figure_group].append(plot)
            radius[s.figure_group] = max(radius.get(s.figure_group, 0.0), s.rho)
        for group in sorted(groups):
            p = write_group_svg(out_dir / "svg" / f"{group}.svg", group, groups[group], radius[group])
            svg_files.append(str(p))

    report_txt = out_dir / "report.txt"
    report_txt.write_text(render_text_report(reports), encoding="utf-8")
    report_json = out_dir / "report.json"
    with open(report_json, "w", encoding="utf-8") as f:
        json.dump([r.model_dump(mode="json") for r in reports], f, ensure_ascii=False, indent=2)
        f.write("\n")

    n_failed = sum(not r.ok for r in reports)
    if n_failed:
        log.warning("⚠️ Batch terminé : %d/%d scénario(s) en échec (%.1f ms)", n_failed, len(reports), _ms(t0))
    else:
        log.info("✅ Batch terminé : %d scénario(s) (%.1f ms)", len(reports), _ms(t0))

    return {
        "success": n_failed == 0,
        "n_scenarios": len(reports),
        "n_failed": n_failed,
        "reports": reports,
        "report_txt": str(report_txt),
        "report_json": str(report_json),
        "svg": svg_files,
    }


# ------------------------ CLI ------------------------

def _scenario_from_args(args) -> Scenario:
    fields = {}
    for key in ("v", "omega", "rho", "x0", "y0", "theta0"):
        raw = getattr(args, key)
        if raw is None:
            continue
        try:
            fields[key] = parse_value(raw)
        except ValueError:
            raise ScenarioValidationError(key, f"valeur illisible : {raw!r}") from None
    return build_scenario("cli", fields)


def _collect_scenarios(args) -> List[Scenario]:
    scenarios: List[Scenario] = []
    for f in getattr(args, "files", None) or []:
        scenarios.extend(read_scenario_file(Path(f)))
    for name in getattr(args, "corpus", None) or []:
        scenarios.extend(load_corpus(name))
    n_random = getattr(args, "random", None)
    if n_random:
        scenarios.extend(random_scenarios(n_random, seed=args.seed))
    seen = set()
    for s in scenarios:
        if s.name in seen:
            raise ScenarioValidationError("name", f"scénario '{s.name}' présent plusieurs fois", scenario=s.name)
        seen.add(s.name)
    return scenarios


def _path_to_dict(path: EscapePath) -> Dict[str, Any]:
    segs = []
    for seg in path.segments:
        if isinstance(seg, Arc):
            segs.append({"type": "arc", "center": list(seg.center), "radius": seg.radius,
                         "start_angle": seg.start_angle, "sweep": seg.sweep, "length": seg.length})
        else:
            segs.append({"type": "line", "start": list(seg.start), "end": list(seg.end), "length": seg.length})
    return {
        "classification": path.classification,
        "total_length": path.total_length,
        "total_time": path.total_time,
        "segments": segs,
    }


def _add_pose_args(p: argparse.ArgumentParser):
    p.add_argument("--x0", required=True)
    p.add_argument("--y0", required=True)
    p.add_argument("--theta0", required=True, help="rad ou multiple de pi (ex. pi/2)")
    p.add_argument("--omega", required=True, help="rad/s ou multiple de pi (ex. pi/6)")
    p.add_argument("--v")
    p.add_argument("--rho")


def _add_batch_args(p: argparse.ArgumentParser, oracle: str, artifacts: bool, out_default: str):
    p.add_argument("files", nargs="*", help="fichiers de scénarios .scn")
    names = list_corpora() + sorted(CORPUS_ALIASES)
    p.add_argument("--corpus", action="append", help=f"corpus intégré ({', '.join(names)})")
    p.add_argument("--random", type=int, help="ajoute N scénarios aléatoires")
    p.add_argument("--out-dir", type=Path, default=Path(out_default))
    p.add_argument("--csv", action=argparse.BooleanOptionalAction, default=artifacts)
    p.add_argument("--svg", action=argparse.BooleanOptionalAction, default=artifacts)
    p.add_argument("--oracle", choices=["none", "sweep", "random"], default=oracle)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--dominance-tol", type=float, default=1e-4)
    p.add_argument("--grid-n", type=int, default=10_000)
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--costate", choices=["exact", "rk4"], default="exact")


def build_parser(out_default: str) -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(description="Évasion en temps minimal d'une voiture de Dubins hors d'un disque")
    ap.add_argument("--verbose", action="store_true", help="logs DEBUG")
    sub = ap.add_subparsers(dest="mode", required=True)

    p_plan = sub.add_parser("plan", help="chemin géométrique")
    _add_pose_args(p_plan)

    p_sim = sub.add_parser("simulate", help="simulation en boucle fermée + PMP")
    _add_pose_args(p_sim)
    p_sim.add_argument("--csv", type=Path, help="écrit la trajectoire en CSV")

    _add_batch_args(sub.add_parser("verify", help="vérification (oracle par défaut : sweep)"), "sweep", False, out_default)
    _add_batch_args(sub.add_parser("batch", help="batch avec CSV / SVG / rapports"), "none", True, out_default)

    p_corpus = sub.add_parser("corpus", help="liste ou émet les corpus intégrés")
    p_corpus.add_argument("names", nargs="*")
    p_corpus.add_argument("--out", type=Path, help="fichier de sortie (sinon stdout)")
    return ap


def main(argv: Optional[List[str]] = None) -> int:
    load_dotenv()
    out_default = os.getenv("DUBINS_ESCAPE_OUT") or DEFAULT_OUT_DIR
    args = build_parser(out_default).parse_args(argv)
    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        if args.mode == "corpus":
            if not args.names:
                print("\n".join(list_corpora()))
                return EXIT_OK
            text = format_scenarios([s for n in args.names for s in load_corpus(n)])
            if args.out:
                args.out.write_text(text, encoding="utf-8")
                log.info("✅ Corpus écrit : %s", args.out)
            else:
                sys.stdout.write(text)
            return EXIT_OK

        if args.mode in ("plan", "simulate"):
            scenario = _scenario_from_args(args)
        else:
            scenarios = _collect_scenarios(args)
    except (ScenarioParseError, ScenarioValidationError, FileNotFoundError) as e:
        log.error("❌ Entrée invalide : %s", e)
        return EXIT_INPUT_ERROR

    if args.mode == "plan":
        try:
            path = plan_escape(scenario.pose(), scenario.params(), scenario.region())
        except Exception as e:
            log.exception("❌ Planification impossible")
            print(json.dumps({"success": False, "error": str(e)}, ensure_ascii=False, indent=2))
            return EXIT_VERIFICATION_FAILED
        print(json.dumps(_path_to_dict(path), ensure_ascii=False, indent=2))
        return EXIT_OK

    if args.mode == "simulate":
        options = BatchOptions(write_csv=False, write_svg=False)
        report, traj, _, costates = run_scenario(scenario, options)
        if traj is not None and args.csv:
            emit_trajectory_csv(traj, costates, scenario.params(), args.csv)
            log.info("✅ CSV écrit : %s", args.csv)
        out = report.model_dump(mode="json")
        if traj is not None:
            out["switch_time"] = traj.switch_time
            out["exit_pose"] = [traj.exit_pose.x, traj.exit_pose.y, traj.exit_pose.theta]
            out["n_samples"] = len(traj.samples)
        print(json.dumps(out, ensure_ascii=False, indent=2))
        return EXIT_OK if report.ok else EXIT_VERIFICATION_FAILED

    try:
        options = BatchOptions(
            out_dir=args.out_dir,
            write_csv=args.csv,
            write_svg=args.svg,
            oracle=args.oracle,
            seed=args.seed,
            tol=args.tol,
            dominance_tol=args.dominance_tol,
            grid_n=args.grid_n,
            samples=args.samples,
            workers=args.workers,
            costate_method=args.costate,
        )
    except ValidationError as e:
        log.error("❌ Options invalides : %s", e)
        return EXIT_INPUT_ERROR
    result = run_batch(scenarios, options)
    print(Path(result["report_txt"]).read_text(encoding="utf-8"), end="")
    return EXIT_OK if result["success"] else EXIT_VERIFICATION_FAILED


if __name__ == "__main__":
    sys.exit(main())
