# -*- coding: utf-8 -*-
"""
svg_plot.py - Figures SVG des chemins d'évasion (une figure par groupe).

- bord de la région (cercle), polyligne simulée par scénario, chemin planifié en pointillés
- marqueurs : départ, commutation, sortie
- échelle isotrope (viewBox carré, axe y retourné)

Polylignes simplifiées avec shapely avant rendu jinja2 (templates/escape_paths.svg).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from jinja2 import Environment, FileSystemLoader, select_autoescape
from shapely.geometry import LineString

from PLANNER.escape_planner import EscapePath
from SIMULATION.escape_simulator import Trajectory

log = logging.getLogger("svg_plot")

TEMPLATES_DIR = Path(__file__).parent / "templates"
env = Environment(
    loader=FileSystemLoader(str(TEMPLATES_DIR)),
    autoescape=select_autoescape(["html", "xml", "svg"]),
    keep_trailing_newline=True,
)

# ==== Constantes ====
SIMPLIFY_RTOL = 1e-4   # tolérance de simplification, relative à ρ
MARGIN = 1.08
PALETTE = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"]


@dataclass(frozen=True)
class PlotRun:
    name: str
    points: np.ndarray
    plan_points: Optional[np.ndarray]
    start: Tuple[float, float]
    switch: Optional[Tuple[float, float]]
    exit: Tuple[float, float]


def simplify_polyline(points: np.ndarray, tolerance: float) -> np.ndarray:
    if len(points) < 3:
        return np.asarray(points, dtype=float)
    line = LineString(points).simplify(tolerance, preserve_topology=False)
    return np.asarray(line.coords, dtype=float)


def build_plot_run(name: str, traj: Trajectory, path: Optional[EscapePath], rho: float) -> PlotRun:
    tol = SIMPLIFY_RTOL * rho
    switch = None
    if traj.switch_time is not None:
        s = next(s for s in traj.samples if s.t == traj.switch_time)
        switch = (s.pose.x, s.pose.y)
    start = traj.samples[0].pose
    return PlotRun(
        name=name,
        points=simplify_polyline(traj.positions(), tol),
        plan_points=simplify_polyline(path.sample_points(), tol) if path is not None else None,
        start=(start.x, start.y),
        switch=switch,
        exit=(traj.exit_pose.x, traj.exit_pose.y),
    )


def _fmt_points(points: np.ndarray) -> str:
    return " ".join(f"{x:.6f},{y:.6f}" for x, y in points)


def render_group_svg(group: str, runs: Sequence[PlotRun], rho: float) -> str:
    half = MARGIN * rho
    items = []
    for i, run in enumerate(sorted(runs, key=lambda r: r.name)):
        items.append({
            "name": run.name,
            "color": PALETTE[i % len(PALETTE)],
            "points": _fmt_points(run.points),
            "plan_points": _fmt_points(run.plan_points) if run.plan_points is not None else None,
            "start": run.start,
            "switch": run.switch,
            "exit": run.exit,
        })
    tpl = env.get_template("escape_paths.svg")
    return tpl.render(
        group=group,
        rho=rho,
        half=half,
        size=2.0 * half,
        stroke=rho / 250.0,
        marker=rho / 80.0,
        runs=items,
    )


def write_group_svg(path: Path, group: str, runs: List[PlotRun], rho: float) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(render_group_svg(group, runs, rho), encoding="utf-8")
    log.debug("SVG écrit : %s (%d chemins)", path, len(runs))
    return path
