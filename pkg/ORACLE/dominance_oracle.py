# -*- coding: utf-8 -*-
"""
dominance_oracle.py - Vérification brute-force : aucune commande admissible
ne sort plus vite que la loi de rétroaction.

Familles de candidats :
  • bang_switch_sweep        : u0 ∈ {+1, −1} jusqu'à un instant de commutation
                               (grille uniforme sur [0, t_max]) puis u = 0,
                               plus virages purs et ligne droite pure
  • random_control_dominance : commandes constantes par morceaux tirées au
                               hasard (≤ 8 segments + une queue rectiligne),
                               générateur numpy initialisé par `seed`

Chaque candidat est évalué en forme close (escape_times_batch, vectorisé numpy) ;
simulate_open_loop est la version scalaire de référence.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from CORE.dubins_core import TWO_PI, EscapeRegion, Pose, RobotParams, to_polar
from PLANNER.circle_geometry import TurnDirection, TurningCircle, boundary_crossing_angles, line_exit_distance
from PLANNER.escape_planner import EscapePath, default_max_time, plan_escape
from SIMULATION.escape_simulator import Trajectory, step_exact
from UTILS.errors import ContractViolation, PreconditionError

log = logging.getLogger("dominance_oracle")

# ==== Constantes ====
SWEEP_TOLERANCE = 1e-4      # s
RANDOM_TOLERANCE = 1e-4     # s
STRUCTURED_TOLERANCE = 1e-9  # s
MAX_SEGMENTS = 8
MAX_REPORTED_VIOLATIONS = 50
_U_EPS = 1e-12


@dataclass(frozen=True)
class CandidateControl:
    schedule: Tuple[Tuple[float, float], ...]
    description: str = ""
    escape_time: Optional[float] = None

    def __post_init__(self):
        for d, u in self.schedule:
            if not (math.isfinite(d) and d > 0):
                raise ContractViolation(f"durée de segment invalide : {d!r}")
            if not (math.isfinite(u) and abs(u) <= 1.0):
                raise ContractViolation(f"|u| doit être ≤ 1 (reçu {u!r})")

    @property
    def total_duration(self) -> float:
        return sum(d for d, _ in self.schedule)


@dataclass(frozen=True)
class DominanceReport:
    best_candidate_time: float
    optimal_time: float
    margin: float
    n_candidates: int
    violations: Tuple[CandidateControl, ...]
    tolerance: float
    n_violations: int
    best_candidate: Optional[CandidateControl] = field(default=None)

    @property
    def ok(self) -> bool:
        return self.n_violations == 0

    def summary(self) -> Dict[str, Any]:
        return {
            "optimal_time": self.optimal_time,
            "best_candidate_time": self.best_candidate_time,
            "margin": self.margin,
            "n_candidates": self.n_candidates,
            "n_violations": self.n_violations,
            "tolerance": self.tolerance,
            "best_candidate": self.best_candidate.description if self.best_candidate else None,
        }


# ------------------------ Évaluation scalaire ------------------------

def _segment_exit(p: Pose, u: float, duration: float, params: RobotParams, rho: float) -> Optional[float]:
    """Premier instant de sortie dans [0, duration] sous commande u constante, ou None."""
    v = params.speed
    if abs(u) < _U_EPS:
        t = line_exit_distance((p.x, p.y), p.theta, rho) / v
        return t if t <= duration else None
    rate = params.max_turn_rate * abs(u)
    radius = v / rate
    sgn = 1.0 if u > 0 else -1.0
    center = (p.x + sgn * radius * math.sin(p.theta), p.y - sgn * radius * math.cos(p.theta))
    circle = TurningCircle(center=center, radius=radius, direction=TurnDirection.from_control(int(sgn)))
    a0 = circle.angle_of((p.x, p.y))
    sweeps = [(sgn * (a0 - a)) % TWO_PI for a in boundary_crossing_angles(circle, rho)]
    sweeps = [s for s in sweeps if s > 0.0]
    if not sweeps:
        return None
    t = min(sweeps) / rate
    return t if t <= duration else None


def simulate_open_loop(
    p0: Pose,
    ctrl: CandidateControl,
    params: RobotParams,
    region: EscapeRegion,
) -> Optional[float]:
    rho = region.radius
    if to_polar(p0).r >= rho:
        raise PreconditionError("départ hors région")
    t = 0.0
    p = p0
    for duration, u in ctrl.schedule:
        hit = _segment_exit(p, u, duration, params, rho)
        if hit is not None:
            return t + hit
        p = step_exact(p, u, duration, params)
        t += duration
        if math.hypot(p.x, p.y) >= rho:
            return t
    return None


# ------------------------ Évaluation vectorisée ------------------------

def escape_times_batch(
    p0: Pose,
    durations: np.ndarray,
    controls: np.ndarray,
    params: RobotParams,
    region: EscapeRegion,
) -> np.ndarray:
    """
    Instants de sortie de N commandes constantes par morceaux (K segments,
    durées nulles = bourrage). NaN si la commande se termine dans la région.
    """
    durations = np.atleast_2d(np.asarray(durations, dtype=float))
    controls = np.atleast_2d(np.asarray(controls, dtype=float))
    if durations.shape != controls.shape:
        raise ContractViolation(f"formes incompatibles : {durations.shape} vs {controls.shape}")
    if np.any(durations < 0) or np.any(np.abs(controls) > 1.0):
        raise ContractViolation("durées négatives ou |u| > 1")
    rho = region.radius
    if to_polar(p0).r >= rho:
        raise PreconditionError("départ hors région")

    n, k = durations.shape
    v, omega = params.speed, params.max_turn_rate
    x = np.full(n, p0.x)
    y = np.full(n, p0.y)
    th = np.full(n, p0.theta)
    t_acc = np.zeros(n)
    result = np.full(n, np.nan)
    active = np.ones(n, dtype=bool)

    with np.errstate(invalid="ignore", divide="ignore"):
        for j in range(k):
            d = durations[:, j]
            u = controls[:, j]
            straight = np.abs(u) < _U_EPS
            t_exit = np.full(n, np.inf)

            # droite : s = −b + √(b² − (r² − ρ²))
            b = x * np.cos(th) + y * np.sin(th)
            disc = np.maximum(b * b - (x * x + y * y - rho * rho), 0.0)
            t_line = (-b + np.sqrt(disc)) / v
            t_exit = np.where(straight, t_line, t_exit)

            # arc : intersection cercle de braquage / bord
            rate = omega * np.abs(u)
            radius = np.where(straight, 1.0, v / np.where(straight, 1.0, rate))
            sgn = np.where(u > 0, 1.0, -1.0)
            cx = x + sgn * radius * np.sin(th)
            cy = y - sgn * radius * np.cos(th)
            dist = np.hypot(cx, cy)
            cos_g = (radius * radius + dist * dist - rho * rho) / (2.0 * radius * dist)
            valid = ~straight & (np.abs(cos_g) <= 1.0) & (dist > 0)
            g = np.arccos(np.clip(cos_g, -1.0, 1.0))
            base = np.arctan2(-cy, -cx)
            a0 = np.arctan2(y - cy, x - cx)
            s1 = np.mod(sgn * (a0 - (base + g)), TWO_PI)
            s2 = np.mod(sgn * (a0 - (base - g)), TWO_PI)
            s1 = np.where(s1 > 0.0, s1, np.inf)
            s2 = np.where(s2 > 0.0, s2, np.inf)
            t_arc = np.minimum(s1, s2) / np.where(straight, 1.0, rate)
            t_exit = np.where(valid, t_arc, t_exit)

            hit = active & (t_exit <= d)
            result[hit] = t_acc[hit] + t_exit[hit]
            active &= ~hit

            # avance exacte des lignes restantes
            dth = -omega * u * d
            half = 0.5 * dth
            small = np.abs(half) < 1e-8
            sinc = np.where(small, 1.0 - half * half / 6.0, np.sin(half) / np.where(small, 1.0, half))
            chord = v * d * sinc
            x = x + chord * np.cos(th + half)
            y = y + chord * np.sin(th + half)
            th = th + dth
            t_acc = t_acc + d

            late = active & (np.hypot(x, y) >= rho)
            result[late] = t_acc[late]
            active &= ~late

    return result


# ------------------------ Horaires de référence ------------------------

def _tail_duration(t: float) -> float:
    return max(2.0 * t, 1e-9)


def schedule_from_trajectory(traj: Trajectory) -> CandidateControl:
    """Horaire bang puis u = 0 extrait d'une trajectoire en boucle fermée."""
    u0 = traj.initial_control
    tail = _tail_duration(traj.exit_time)
    if u0 == 0:
        return CandidateControl(((tail, 0.0),), "ligne droite (boucle fermée)")
    t_bang = traj.switch_time if traj.switch_time is not None else traj.exit_time
    return CandidateControl(((t_bang, float(u0)), (tail, 0.0)), "bang puis ligne (boucle fermée)")


def schedule_from_path(path: EscapePath, params: RobotParams) -> CandidateControl:
    """Horaire équivalent au chemin planifié : virage pendant arc_duration puis ligne droite."""
    tail = _tail_duration(path.total_time)
    arc = path.arc
    if arc is None or path.arc_duration <= 0.0:
        return CandidateControl(((tail, 0.0),), "ligne droite (planificateur)")
    u0 = 1.0 if arc.sweep < 0 else -1.0
    return CandidateControl(((path.arc_duration, u0), (tail, 0.0)), "virage puis ligne (planificateur)")


# ------------------------ Rapports ------------------------

def _build_report(
    times: np.ndarray,
    durations: np.ndarray,
    controls: np.ndarray,
    describe,
    optimal_time: float,
    tolerance: float,
) -> DominanceReport:
    n = len(times)

    def candidate(i: int) -> CandidateControl:
        sched = tuple((float(d), float(u)) for d, u in zip(durations[i], controls[i]) if d > 0)
        return CandidateControl(sched, describe(i), float(times[i]))

    escaped = ~np.isnan(times)
    if escaped.any():
        i_best = int(np.nanargmin(times))
        best_time = float(times[i_best])
        best = candidate(i_best)
    else:
        best_time, best = math.inf, None

    beat = np.flatnonzero(escaped & (times < optimal_time - tolerance))
    order = beat[np.lexsort((beat, times[beat]))]
    violations = tuple(candidate(int(i)) for i in order[:MAX_REPORTED_VIOLATIONS])

    return DominanceReport(
        best_candidate_time=best_time,
        optimal_time=optimal_time,
        margin=best_time - optimal_time,
        n_candidates=n,
        violations=violations,
        tolerance=tolerance,
        n_violations=int(len(beat)),
        best_candidate=best,
    )


def bang_switch_sweep(
    p0: Pose,
    params: RobotParams,
    region: EscapeRegion,
    grid_n: int = 10_000,
    tolerance: float = SWEEP_TOLERANCE,
    path: Optional[EscapePath] = None,
) -> DominanceReport:
    if grid_n < 2:
        raise ContractViolation(f"grid_n doit être ≥ 2 (reçu {grid_n})")
    path = path or plan_escape(p0, params, region)
    t_max = default_max_time(params, region)
    switch = np.linspace(0.0, t_max, grid_n)

    rows_d: List[np.ndarray] = []
    rows_u: List[np.ndarray] = []
    for u0 in (1.0, -1.0):
        rows_d.append(np.column_stack([switch, np.full(grid_n, t_max)]))
        rows_u.append(np.column_stack([np.full(grid_n, u0), np.zeros(grid_n)]))
    # virages purs puis ligne droite pure
    rows_d.append(np.array([[t_max, 0.0], [t_max, 0.0], [t_max, 0.0]]))
    rows_u.append(np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 0.0]]))
    durations = np.vstack(rows_d)
    controls = np.vstack(rows_u)

    def describe(i: int) -> str:
        if i < 2 * grid_n:
            sign = "+1" if i < grid_n else "-1"
            return f"bang {sign} jusqu'à t={switch[i % grid_n]:.6g} puis ligne droite"
        return ("virage +1 pur", "virage -1 pur", "ligne droite pure")[i - 2 * grid_n]

    times = escape_times_batch(p0, durations, controls, params, region)
    report = _build_report(times, durations, controls, describe, path.total_time, tolerance)
    log.debug("balayage bang/commutation : %d candidats, marge %.3e s", report.n_candidates, report.margin)
    return report


def random_schedules(
    rng: np.random.Generator,
    n_samples: int,
    budget: float,
    t_tail: float,
) -> Tuple[np.ndarray, np.ndarray]:
    """Tirage de n_samples horaires (≤ MAX_SEGMENTS segments + queue rectiligne)."""
    k = rng.integers(1, MAX_SEGMENTS + 1, size=n_samples)
    raw = rng.random((n_samples, MAX_SEGMENTS))
    raw[np.arange(MAX_SEGMENTS)[None, :] >= k[:, None]] = 0.0
    total = rng.uniform(0.0, budget, size=n_samples)
    seg = raw / raw.sum(axis=1, keepdims=True) * total[:, None]

    u = rng.uniform(-1.0, 1.0, size=(n_samples, MAX_SEGMENTS))
    snap = rng.random((n_samples, MAX_SEGMENTS)) < 0.3
    u = np.where(snap, np.round(u), u)

    durations = np.column_stack([seg, np.full(n_samples, t_tail)])
    controls = np.column_stack([u, np.zeros(n_samples)])
    return durations, controls


def random_control_dominance(
    p0: Pose,
    params: RobotParams,
    region: EscapeRegion,
    n_samples: int = 1000,
    seed: int = 0,
    tolerance: float = RANDOM_TOLERANCE,
    path: Optional[EscapePath] = None,
) -> DominanceReport:
    if n_samples < 1:
        raise ContractViolation(f"n_samples doit être ≥ 1 (reçu {n_samples})")
    path = path or plan_escape(p0, params, region)
    t_max = default_max_time(params, region)
    rng = np.random.default_rng(seed)
    durations, controls = random_schedules(rng, n_samples, 2.0 * max(path.total_time, 1e-12), t_max)

    def describe(i: int) -> str:
        return f"aléatoire #{i} (seed={seed})"

    times = escape_times_batch(p0, durations, controls, params, region)
    report = _build_report(times, durations, controls, describe, path.total_time, tolerance)
    log.debug("falsification aléatoire : %d candidats, %d violations", report.n_candidates, report.n_violations)
    return report


def candidates_to_arrays(candidates: Sequence[CandidateControl]) -> Tuple[np.ndarray, np.ndarray]:
    """Bourrage à la même longueur pour escape_times_batch."""
    k = max((len(c.schedule) for c in candidates), default=1)
    durations = np.zeros((len(candidates), k))
    controls = np.zeros((len(candidates), k))
    for i, c in enumerate(candidates):
        for j, (d, u) in enumerate(c.schedule):
            durations[i, j] = d
            controls[i, j] = u
    return durations, controls
