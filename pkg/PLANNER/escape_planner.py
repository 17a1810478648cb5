# -*- coding: utf-8 -*-
"""
escape_planner.py - Construction géométrique (sans intégration) du chemin d'évasion.

Étapes de plan_escape() :
  1) cap aligné sur la radiale (ou départ au centre) → une seule droite radiale
  2) sinon, virage dans le sens sign(wrap(θ − φ)) ; un virage à gauche est
     ramené à un virage à droite par symétrie autour de la radiale initiale
  3) point de commutation s = tangence depuis l'origine où le cap de parcours
     pointe vers l'extérieur (θ = φ)
  4) si le cercle de braquage coupe le bord avant s → arc seul, tronqué au bord ;
     sinon arc jusqu'à s puis droite radiale de longueur ρ − √(‖c‖² − ϱ²)

Outils associés : chord_partition / verify_shorter_arc (l'extrémité du chemin
est sur le plus petit des deux arcs découpés par la corde), exit_point_objective
et scan_exit_objective (longueur minimale virage + droite vers un point du bord).
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np

from CORE.dubins_core import (
    TWO_PI,
    EscapeRegion,
    Pose,
    RobotParams,
    to_polar,
    wrap_angle,
)
from FEEDBACK.feedback_law import optimal_control
from PLANNER.circle_geometry import (
    Point,
    TurnDirection,
    TurningCircle,
    boundary_crossing_angles,
    reflect_point,
    tangent_points,
    turning_circle,
)
from UTILS.errors import NoTangentError, PreconditionError

log = logging.getLogger("escape_planner")

# ==== Constantes ====
EPS_BOUNDARY = 1e-12      # relatif à ρ : départ « sur » le bord
ON_BOUNDARY_RTOL = 1e-9   # extrémité considérée sur le bord
ARC_TIE_TOL = 1e-12       # égalité des deux arcs de la corde
ARC_CONTAINS_TOL = 1e-9   # rad


# ------------------------ Segments ------------------------

@dataclass(frozen=True, slots=True)
class Arc:
    """Arc du cercle de braquage ; sweep < 0 en sens horaire."""
    center: Point
    radius: float
    start_angle: float
    sweep: float

    @property
    def length(self) -> float:
        return self.radius * abs(self.sweep)

    @property
    def end_angle(self) -> float:
        return self.start_angle + self.sweep

    def point_at(self, angle: float) -> Point:
        return (self.center[0] + self.radius * math.cos(angle), self.center[1] + self.radius * math.sin(angle))

    @property
    def start(self) -> Point:
        return self.point_at(self.start_angle)

    @property
    def end(self) -> Point:
        return self.point_at(self.end_angle)

    @property
    def end_heading(self) -> float:
        offset = -0.5 * math.pi if self.sweep < 0 else 0.5 * math.pi
        return wrap_angle(self.end_angle + offset)


@dataclass(frozen=True, slots=True)
class Line:
    start: Point
    end: Point
    heading: float

    @property
    def length(self) -> float:
        return math.hypot(self.end[0] - self.start[0], self.end[1] - self.start[1])


Segment = Union[Arc, Line]


@dataclass(frozen=True)
class EscapePath:
    segments: Tuple[Segment, ...]
    total_length: float
    total_time: float

    @property
    def end_point(self) -> Point:
        return self.segments[-1].end

    @property
    def end_heading(self) -> float:
        last = self.segments[-1]
        return last.end_heading if isinstance(last, Arc) else last.heading

    @property
    def classification(self) -> str:
        kinds = tuple(type(s).__name__ for s in self.segments)
        return {("Line",): "line", ("Arc",): "arc", ("Arc", "Line"): "arc+line"}[kinds]

    @property
    def arc(self) -> Optional[Arc]:
        first = self.segments[0]
        return first if isinstance(first, Arc) else None

    @property
    def arc_duration(self) -> float:
        if self.arc is None or self.total_length == 0.0:
            return 0.0
        return self.arc.length / self.total_length * self.total_time

    def sample_points(self, n: int = 200) -> np.ndarray:
        """Points (M, 2) le long du chemin ; n points par arc."""
        pts = []
        for seg in self.segments:
            if isinstance(seg, Arc):
                a = np.linspace(seg.start_angle, seg.end_angle, max(n, 2))
                pts.append(np.column_stack([seg.center[0] + seg.radius * np.cos(a), seg.center[1] + seg.radius * np.sin(a)]))
            else:
                pts.append(np.array([seg.start, seg.end]))
        return np.vstack(pts)


def _make_path(segments: Tuple[Segment, ...], params: RobotParams) -> EscapePath:
    length = sum(s.length for s in segments)
    return EscapePath(segments=segments, total_length=length, total_time=length / params.speed)


def default_max_time(params: RobotParams, region: EscapeRegion) -> float:
    """Borne large : un tour complet plus un diamètre, 2·(2πϱ + ρ)/v."""
    return 2.0 * (TWO_PI * params.turn_radius + region.radius) / params.speed


# ------------------------ Corde et arcs du bord ------------------------

@dataclass(frozen=True, slots=True)
class BoundaryArc:
    """Arc du bord, parcouru dans le sens trigonométrique depuis start_angle."""
    start_angle: float
    sweep: float

    def length(self, rho: float) -> float:
        return rho * self.sweep

    def contains(self, angle: float, tol: float = ARC_CONTAINS_TOL) -> bool:
        rel = (angle - self.start_angle) % TWO_PI
        return rel <= self.sweep + tol or rel >= TWO_PI - tol

    def angles(self, n: int) -> np.ndarray:
        return self.start_angle + np.linspace(0.0, self.sweep, n)


@dataclass(frozen=True, slots=True)
class ChordPartition:
    chord_point: Point
    chord_direction: float
    radius: float
    shorter_arc: BoundaryArc
    longer_arc: BoundaryArc
    is_tie: bool


def chord_partition(p0: Pose, region: EscapeRegion) -> ChordPartition:
    """Corde passant par la position initiale, dirigée selon le cap initial."""
    rho = region.radius
    r0 = to_polar(p0).r
    if r0 >= rho:
        raise PreconditionError(f"départ hors région : r0={r0:.6g} ≥ ρ={rho:.6g}")
    ux, uy = math.cos(p0.theta), math.sin(p0.theta)
    b = p0.x * ux + p0.y * uy
    root = math.sqrt(b * b - (r0 * r0 - rho * rho))
    back = (p0.x + (-b - root) * ux, p0.y + (-b - root) * uy)
    fwd = (p0.x + (-b + root) * ux, p0.y + (-b + root) * uy)
    a_back = math.atan2(back[1], back[0])
    a_fwd = math.atan2(fwd[1], fwd[0])

    left = BoundaryArc(start_angle=a_fwd, sweep=(a_back - a_fwd) % TWO_PI)
    right = BoundaryArc(start_angle=a_back, sweep=(a_fwd - a_back) % TWO_PI)
    tie = abs(left.sweep - right.sweep) <= ARC_TIE_TOL * TWO_PI
    shorter, longer = (left, right) if left.sweep <= right.sweep else (right, left)
    return ChordPartition(
        chord_point=(p0.x, p0.y),
        chord_direction=p0.theta,
        radius=rho,
        shorter_arc=shorter,
        longer_arc=longer,
        is_tie=tie,
    )


def verify_shorter_arc(path: EscapePath, partition: ChordPartition) -> bool:
    ex, ey = path.end_point
    r_end = math.hypot(ex, ey)
    if abs(r_end - partition.radius) > ON_BOUNDARY_RTOL * partition.radius:
        raise PreconditionError(f"extrémité hors du bord (r={r_end:.12g}, ρ={partition.radius:.12g})")
    if partition.is_tie:
        return True
    return partition.shorter_arc.contains(math.atan2(ey, ex))


# ------------------------ Planification ------------------------

def _radial_line(p0: Pose, direction: float, rho: float, params: RobotParams) -> EscapePath:
    end = (rho * math.cos(direction), rho * math.sin(direction))
    return _make_path((Line(start=(p0.x, p0.y), end=end, heading=wrap_angle(direction)),), params)


def _switch_point(circle: TurningCircle) -> Point:
    """Tangence depuis l'origine où le cap de parcours pointe vers l'extérieur."""
    taus = tangent_points((0.0, 0.0), circle)
    if taus is None:
        raise NoTangentError("l'origine est dans le cercle de braquage")
    best = None
    for tau in taus:
        h = circle.heading_at(circle.angle_of(tau))
        dot = tau[0] * math.cos(h) + tau[1] * math.sin(h)
        if best is None or dot > best[0]:
            best = (dot, tau)
    return best[1]


def _plan_clockwise(p: Pose, params: RobotParams, rho: float) -> Tuple[Segment, ...]:
    circle = turning_circle(p, TurnDirection.CLOCKWISE, params)
    rr = circle.radius
    a0 = circle.angle_of((p.x, p.y))

    s = _switch_point(circle)
    a_s = circle.angle_of(s)
    sweep_s = circle.sweep(a0, a_s)

    crossings = [circle.sweep(a0, a) for a in boundary_crossing_angles(circle, rho)]
    crossings = [c for c in crossings if c > 0.0]
    sweep_b = min(crossings) if crossings else math.inf

    if sweep_b <= sweep_s:
        log.debug("arc seul : balayage %.12g rad (commutation à %.12g)", sweep_b, sweep_s)
        return (Arc(center=circle.center, radius=rr, start_angle=a0, sweep=-sweep_b),)

    arc = Arc(center=circle.center, radius=rr, start_angle=a0, sweep=-sweep_s)
    start = arc.end
    r_s = math.hypot(start[0], start[1])
    phi_s = math.atan2(start[1], start[0])
    end = (rho * math.cos(phi_s), rho * math.sin(phi_s))
    log.debug("arc + droite : balayage %.12g rad, droite %.12g m", sweep_s, rho - r_s)
    return (arc, Line(start=start, end=end, heading=wrap_angle(phi_s)))


def _reflect_segments(segments: Tuple[Segment, ...], axis: float) -> Tuple[Segment, ...]:
    out = []
    for seg in segments:
        if isinstance(seg, Arc):
            out.append(Arc(
                center=reflect_point(seg.center, axis),
                radius=seg.radius,
                start_angle=2.0 * axis - seg.start_angle,
                sweep=-seg.sweep,
            ))
        else:
            out.append(Line(
                start=reflect_point(seg.start, axis),
                end=reflect_point(seg.end, axis),
                heading=wrap_angle(2.0 * axis - seg.heading),
            ))
    return tuple(out)


def plan_escape(p0: Pose, params: RobotParams, region: EscapeRegion) -> EscapePath:
    rho = region.radius
    pol = to_polar(p0)
    if pol.r >= rho:
        raise PreconditionError(f"départ hors région : r0={pol.r:.6g} ≥ ρ={rho:.6g}")

    if not pol.azimuth_defined:
        return _radial_line(p0, p0.theta, rho, params)

    delta = wrap_angle(p0.theta - pol.phi)
    if rho - pol.r <= EPS_BOUNDARY * rho and math.cos(delta) >= 0.0:
        return _make_path((Line(start=(p0.x, p0.y), end=(p0.x, p0.y), heading=p0.theta),), params)

    u = optimal_control(p0)
    if u == 0:
        return _radial_line(p0, pol.phi, rho, params)

    if u > 0:
        segments = _plan_clockwise(p0, params, rho)
    else:
        mirrored = Pose(p0.x, p0.y, 2.0 * pol.phi - p0.theta)
        segments = _reflect_segments(_plan_clockwise(mirrored, params, rho), pol.phi)
    return _make_path(segments, params)


# ------------------------ Objectif sur le point de sortie ------------------------

def _engaged_circle(p0: Pose, params: RobotParams) -> TurningCircle:
    u = optimal_control(p0)
    return turning_circle(p0, TurnDirection.from_control(u), params)


def exit_point_objective(p: Point, p0: Pose, params: RobotParams, region: EscapeRegion) -> float:
    """
    Longueur virage + droite de p0 jusqu'au point du bord p :
    ϱ·(angle parcouru jusqu'à τ(p)) + ‖p − τ(p)‖, τ(p) la tangence retenue.
    """
    rho = region.radius
    if abs(math.hypot(p[0], p[1]) - rho) > ON_BOUNDARY_RTOL * rho:
        raise PreconditionError(f"point hors du bord : {p!r}")
    circle = _engaged_circle(p0, params)
    taus = tangent_points(p, circle)
    if taus is None:
        raise NoTangentError(f"le point {p!r} est dans le cercle de braquage")

    a0 = circle.angle_of((p0.x, p0.y))
    best = math.inf
    for tau in taus:
        dx, dy = p[0] - tau[0], p[1] - tau[1]
        a_tau = circle.angle_of(tau)
        h = circle.heading_at(a_tau)
        straight = math.hypot(dx, dy)
        if straight > 0.0 and dx * math.cos(h) + dy * math.sin(h) <= 0.0:
            continue
        best = min(best, circle.radius * circle.sweep(a0, a_tau) + straight)
    if not math.isfinite(best):
        raise NoTangentError(f"aucune tangence parcourable vers {p!r}")
    return best


def scan_exit_objective(
    p0: Pose,
    params: RobotParams,
    region: EscapeRegion,
    n: int = 10_000,
) -> Tuple[np.ndarray, np.ndarray]:
    """Objectif évalué sur n points du plus petit arc ; NaN sans tangence."""
    part = chord_partition(p0, region)
    angles = part.shorter_arc.angles(n)
    rho = region.radius
    lengths = np.full(n, np.nan)
    for i, a in enumerate(angles):
        try:
            lengths[i] = exit_point_objective((rho * math.cos(a), rho * math.sin(a)), p0, params, region)
        except NoTangentError:
            continue
    return angles, lengths
