# -*- coding: utf-8 -*-
"""
Primitives géométriques du planificateur.

Cercle de braquage, points de tangence depuis un point extérieur,
intersections cercle–cercle et droite–cercle. Angles en radians,
points sous forme de tuples (x, y).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import List, Optional, Tuple

from CORE.dubins_core import TWO_PI, Pose, RobotParams, wrap_angle

Point = Tuple[float, float]

# ==== Constantes ====
TANGENCY_RTOL = 1e-9
# un balayage à moins de ça de 2π est un balayage nul (arrondi de atan2)
FULL_TURN_SNAP = 1e-9


class TurnDirection(str, Enum):
    CLOCKWISE = "clockwise"                # u = +1
    COUNTERCLOCKWISE = "counterclockwise"  # u = −1

    @property
    def sign(self) -> int:
        return 1 if self is TurnDirection.CLOCKWISE else -1

    @classmethod
    def from_control(cls, u: int) -> "TurnDirection":
        return cls.COUNTERCLOCKWISE if u < 0 else cls.CLOCKWISE


@dataclass(frozen=True, slots=True)
class TurningCircle:
    center: Point
    radius: float
    direction: TurnDirection

    def angle_of(self, q: Point) -> float:
        return math.atan2(q[1] - self.center[1], q[0] - self.center[0])

    def point_at(self, angle: float) -> Point:
        return (self.center[0] + self.radius * math.cos(angle), self.center[1] + self.radius * math.sin(angle))

    def heading_at(self, angle: float) -> float:
        """Cap de parcours au point d'angle donné, dans le sens de rotation du cercle."""
        if self.direction is TurnDirection.CLOCKWISE:
            return wrap_angle(angle - 0.5 * math.pi)
        return wrap_angle(angle + 0.5 * math.pi)

    def sweep(self, a_from: float, a_to: float) -> float:
        """Angle parcouru (∈ [0, 2π)) pour aller de a_from à a_to dans le sens du cercle."""
        if self.direction is TurnDirection.CLOCKWISE:
            s = (a_from - a_to) % TWO_PI
        else:
            s = (a_to - a_from) % TWO_PI
        return 0.0 if s > TWO_PI - FULL_TURN_SNAP else s


def turning_circle(p: Pose, direction: TurnDirection, params: RobotParams) -> TurningCircle:
    """Centre à ϱ du robot, perpendiculaire au cap, du côté du virage."""
    rr = params.turn_radius
    s, c = math.sin(p.theta), math.cos(p.theta)
    if direction is TurnDirection.CLOCKWISE:
        center = (p.x + rr * s, p.y - rr * c)
    else:
        center = (p.x - rr * s, p.y + rr * c)
    return TurningCircle(center=center, radius=rr, direction=direction)


def tangent_points(p: Point, circle: TurningCircle) -> Optional[Tuple[Point, Point]]:
    """
    Points de contact des deux tangentes issues de p.
    τ = c + (ϱ²/D²)·d ± (ϱ/D²)·√(D² − ϱ²)·q, d = p − c, q = d tourné de +π/2.
    None si p est strictement dans le cercle ; (proj, proj) si p est dessus.
    """
    cx, cy = circle.center
    rr = circle.radius
    dx, dy = p[0] - cx, p[1] - cy
    dist = math.hypot(dx, dy)
    d2 = dist * dist
    r2 = rr * rr
    # D² − ϱ² sous forme factorisée
    excess = (dist - rr) * (dist + rr)
    if abs(excess) <= TANGENCY_RTOL * r2:
        if dist == 0.0:
            return None
        proj = (cx + rr * dx / dist, cy + rr * dy / dist)
        return proj, proj
    if excess < 0.0:
        return None
    k1 = r2 / d2
    k2 = rr * math.sqrt(excess) / d2
    qx, qy = -dy, dx
    t1 = (cx + k1 * dx + k2 * qx, cy + k1 * dy + k2 * qy)
    t2 = (cx + k1 * dx - k2 * qx, cy + k1 * dy - k2 * qy)
    return t1, t2


def boundary_crossing_angles(circle: TurningCircle, rho: float) -> List[float]:
    """
    Angles (sur le cercle de braquage) des intersections avec le bord r = ρ.
    Demi-angle : sin²(γ/2) = (ρ² − (d − ϱ)²)/(4ϱd), points en atan2(−c) ± γ.
    """
    cx, cy = circle.center
    rr = circle.radius
    d = math.hypot(cx, cy)
    if d == 0.0:
        return []
    gap = d - rr
    s2 = (rho - gap) * (rho + gap) / (4.0 * rr * d)
    if s2 < 0.0 or s2 > 1.0:
        return []
    g = 2.0 * math.asin(math.sqrt(s2))
    base = math.atan2(-cy, -cx)
    if g == 0.0:
        return [base]
    return [base + g, base - g]


def line_exit_distance(p: Point, heading: float, rho: float) -> float:
    """Distance le long du cap jusqu'au bord : s = −b + √(b² − (r² − ρ²)), b = p·ê."""
    ux, uy = math.cos(heading), math.sin(heading)
    b = p[0] * ux + p[1] * uy
    c = p[0] * p[0] + p[1] * p[1] - rho * rho
    disc = b * b - c
    if disc < 0.0:
        disc = 0.0
    return -b + math.sqrt(disc)


def reflect_point(q: Point, axis_angle: float) -> Point:
    """Symétrie par rapport à la droite passant par l'origine d'angle axis_angle."""
    c2, s2 = math.cos(2.0 * axis_angle), math.sin(2.0 * axis_angle)
    return (c2 * q[0] + s2 * q[1], s2 * q[0] - c2 * q[1])
