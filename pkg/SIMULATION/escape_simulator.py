# -*- coding: utf-8 -*-
"""
escape_simulator.py - Propagation en boucle fermée jusqu'au bord de la région.

Principe :
  1) commande courante u = optimal_control(p) (constante par morceaux ∈ {−1, 0, +1})
  2) propagation exacte arc/droite (step_exact), pas ≤ dt_max (≤ dtheta_max/ω sur un arc)
  3) après chaque pas, on teste deux événements :
       - sortie        : r ≥ ρ
       - commutation   : u·wrap(θ − φ) ≤ EPS_ALIGN  (arrivée sur la radiale)
     et on localise le premier avec brentq sur g = r − ρ ou g = EPS_ALIGN − u·wrap(θ − φ),
     à eps_event près
  4) commutation → projection θ := φ puis u = 0 (arc singulier) ; sortie → fin

La séquence d'événements est toujours {exit} ou {switch, exit}.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Optional, Tuple

import numpy as np
from scipy.optimize import brentq

from CORE.dubins_core import (
    ControlLike,
    EscapeRegion,
    Pose,
    RobotParams,
    as_control_value,
    to_polar,
)
from FEEDBACK.feedback_law import EPS_ALIGN, heading_error, optimal_control
from PLANNER.escape_planner import default_max_time
from UTILS.errors import ContractViolation, DivergenceError, PreconditionError

log = logging.getLogger("escape_simulator")

# ==== Constantes ====
EPS_EVENT = 1e-10           # s
DT_MAX_FACTOR = 1e-3        # dt_max = facteur · ρ/v
DTHETA_MAX = 0.05           # rad par pas sur un arc


class EventKind(str, Enum):
    SWITCH = "switch-to-singular"
    EXIT = "boundary-exit"


@dataclass(frozen=True, slots=True)
class Event:
    t: float
    kind: EventKind


@dataclass(frozen=True, slots=True)
class Sample:
    """Échantillon : u est la commande appliquée à partir de t (finale pour la sortie)."""
    t: float
    pose: Pose
    u: int
    r: float
    phi: float


@dataclass(frozen=True, slots=True)
class SimOptions:
    """None → valeur par défaut dérivée de (params, region)."""
    dt_max: Optional[float] = None
    eps_event: float = EPS_EVENT
    max_time: Optional[float] = None
    dtheta_max: float = DTHETA_MAX

    def __post_init__(self):
        for name in ("dt_max", "eps_event", "max_time", "dtheta_max"):
            val = getattr(self, name)
            if val is not None and not (math.isfinite(val) and val > 0):
                raise ContractViolation(f"SimOptions.{name} doit être > 0 (reçu {val!r})")

    def resolve(self, params: RobotParams, region: EscapeRegion) -> "SimOptions":
        return SimOptions(
            dt_max=self.dt_max if self.dt_max is not None else DT_MAX_FACTOR * region.radius / params.speed,
            eps_event=self.eps_event,
            max_time=self.max_time if self.max_time is not None else default_max_time(params, region),
            dtheta_max=self.dtheta_max,
        )


@dataclass(frozen=True)
class Trajectory:
    samples: Tuple[Sample, ...]
    exit_time: float
    exit_pose: Pose
    events: Tuple[Event, ...]

    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.samples])

    def headings(self) -> np.ndarray:
        return np.array([s.pose.theta for s in self.samples])

    def positions(self) -> np.ndarray:
        return np.array([[s.pose.x, s.pose.y] for s in self.samples])

    def controls(self) -> np.ndarray:
        return np.array([s.u for s in self.samples], dtype=float)

    @property
    def initial_control(self) -> int:
        return self.samples[0].u

    @property
    def switch_time(self) -> Optional[float]:
        for ev in self.events:
            if ev.kind is EventKind.SWITCH:
                return ev.t
        return None

    @property
    def classification(self) -> str:
        if self.switch_time is not None:
            return "arc+line"
        return "line" if self.initial_control == 0 else "arc"


# ------------------------ Propagation exacte ------------------------

def _sinc(h: float) -> float:
    if abs(h) < 1e-8:
        return 1.0 - h * h / 6.0
    return math.sin(h) / h


def step_exact(p: Pose, u: ControlLike, dt: float, params: RobotParams) -> Pose:
    """
    Avance la pose de dt sous commande constante, en forme close.
    Corde d'un arc : v·dt·sinc(δ/2) dans la direction θ + δ/2, avec δ = −ω u dt.
    """
    uu = as_control_value(u)
    if not (math.isfinite(dt) and dt >= 0):
        raise ContractViolation(f"dt doit être ≥ 0 (reçu {dt!r})")
    v = params.speed
    if uu == 0.0:
        return Pose(p.x + v * dt * math.cos(p.theta), p.y + v * dt * math.sin(p.theta), p.theta)
    d = -params.max_turn_rate * uu * dt
    chord = v * dt * _sinc(0.5 * d)
    mid = p.theta + 0.5 * d
    return Pose(p.x + chord * math.cos(mid), p.y + chord * math.sin(mid), p.theta + d)


def locate_event(g: Callable[[float], float], h: float, eps: float) -> float:
    """
    Premier zéro de g sur (0, h] à eps près, avec g(0) < 0 ≤ g(h).
    L'instant rendu vérifie g ≥ 0 : l'événement a bien eu lieu.
    """
    if g(0.0) >= 0.0:
        return 0.0
    if g(h) == 0.0:
        return h
    tau = brentq(g, 0.0, h, xtol=eps)
    while g(tau) < 0.0 and tau < h:
        tau = min(h, tau + eps)
    return tau


def _sample(t: float, p: Pose, u: int) -> Sample:
    pol = to_polar(p)
    return Sample(t=t, pose=p, u=u, r=pol.r, phi=pol.phi)


# ------------------------ Simulation ------------------------

def simulate(
    p0: Pose,
    params: RobotParams,
    region: EscapeRegion,
    opts: Optional[SimOptions] = None,
) -> Trajectory:
    """Trajectoire en boucle fermée de p0 jusqu'à la première sortie (r = ρ, ṙ ≥ 0)."""
    o = (opts or SimOptions()).resolve(params, region)
    rho = region.radius
    r0 = to_polar(p0).r
    if r0 >= rho:
        raise PreconditionError(f"départ hors région : r0={r0:.6g} ≥ ρ={rho:.6g}")

    dt_line = o.dt_max
    dt_arc = min(o.dt_max, o.dtheta_max / params.max_turn_rate)

    t = 0.0
    p = p0
    u = optimal_control(p0)
    samples = [_sample(t, p, u)]
    events = []

    # fonctions d'événement signées : < 0 avant, ≥ 0 une fois atteint
    def g_exit(q: Pose) -> float:
        return math.hypot(q.x, q.y) - rho

    def g_switch(q: Pose, cur_u: int) -> float:
        return EPS_ALIGN - cur_u * heading_error(q)

    while True:
        h = dt_arc if u != 0 else dt_line
        q = step_exact(p, u, h, params)
        hit_exit = g_exit(q) >= 0.0
        hit_switch = u != 0 and g_switch(q, u) >= 0.0

        if not (hit_exit or hit_switch):
            t += h
            p = q
            samples.append(_sample(t, p, u))
            if t > o.max_time:
                raise DivergenceError(f"pas de sortie avant max_time={o.max_time:.6g} s")
            continue

        cur_p, cur_u = p, u
        t_exit = (
            locate_event(lambda s: g_exit(step_exact(cur_p, cur_u, s, params)), h, o.eps_event)
            if hit_exit else math.inf
        )
        t_switch = (
            locate_event(lambda s: g_switch(step_exact(cur_p, cur_u, s, params), cur_u), h, o.eps_event)
            if hit_switch else math.inf
        )

        if t_switch < t_exit:
            q = step_exact(p, u, t_switch, params)
            t += t_switch
            phi = to_polar(q).phi
            p = Pose(q.x, q.y, phi)
            u = 0
            events.append(Event(t, EventKind.SWITCH))
            samples.append(_sample(t, p, u))
            log.debug("commutation vers l'arc singulier à t=%.12g (φ=%.6f)", t, phi)
            continue

        q = step_exact(p, u, t_exit, params)
        t += t_exit
        events.append(Event(t, EventKind.EXIT))
        samples.append(_sample(t, q, u))
        log.debug("sortie à t=%.12g (r=%.12g)", t, math.hypot(q.x, q.y))
        return Trajectory(samples=tuple(samples), exit_time=t, exit_pose=q, events=tuple(events))
