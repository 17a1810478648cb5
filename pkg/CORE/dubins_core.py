# -*- coding: utf-8 -*-
"""
dubins_core.py - Types de base et cinématique de la voiture de Dubins.

- RobotParams / EscapeRegion / Pose / PolarPose / Control
- Arithmétique d'angles dans (−π, π] (wrap_angle, wrap_angles)
- Conversions cartésien ↔ polaire autour du centre de la région
- Champ de vecteurs : ẋ = v cos θ, ẏ = v sin θ, θ̇ = −ω u
- Vitesse radiale ṙ = v cos(θ − φ)

Toutes les valeurs sont immuables ; les fonctions sont pures.

Dépendances: numpy (wrap vectorisé uniquement)
"""

from __future__ import annotations

import math
import sys
from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from UTILS.errors import ContractViolation, DegenerateInputError, DomainError

# ======================= Constantes =======================
TWO_PI = 2.0 * math.pi
# En dessous de ce rayon (m), l'azimut n'est pas défini
EPS_ORIGIN = 1e-12
# Tolérance de repli −π → π, proportionnelle à |a| (erreur de réduction)
_WRAP_SNAP = 8.0 * sys.float_info.epsilon


# ======================= Angles =======================
def wrap_angle(a: float) -> float:
    """Ramène un angle (rad) dans (−π, π] ; −π devient π."""
    if not math.isfinite(a):
        raise DomainError(f"angle non fini: {a!r}")
    r = math.remainder(a, TWO_PI)
    if r <= -math.pi + _WRAP_SNAP * max(1.0, abs(a)):
        return math.pi
    return r


def wrap_angles(a: np.ndarray) -> np.ndarray:
    """Version vectorisée de wrap_angle (mêmes conventions)."""
    a = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DomainError("angles non finis dans le tableau")
    r = np.remainder(a + math.pi, TWO_PI) - math.pi
    snap = r <= -math.pi + _WRAP_SNAP * np.maximum(1.0, np.abs(a))
    return np.where(snap, math.pi, r)


# ======================= Types =======================
@dataclass(frozen=True, slots=True)
class RobotParams:
    """Vitesse v (m/s) et taux de virage maximal ω (rad/s)."""
    speed: float
    max_turn_rate: float

    def __post_init__(self):
        for name in ("speed", "max_turn_rate"):
            val = getattr(self, name)
            if not (math.isfinite(val) and val > 0):
                raise ContractViolation(f"{name} doit être fini et > 0 (reçu {val!r})")

    @property
    def turn_radius(self) -> float:
        """ϱ = v/ω (m)."""
        return self.speed / self.max_turn_rate


@dataclass(frozen=True, slots=True)
class EscapeRegion:
    """Disque de rayon ρ centré à l'origine."""
    radius: float

    def __post_init__(self):
        if not (math.isfinite(self.radius) and self.radius > 0):
            raise ContractViolation(f"radius doit être fini et > 0 (reçu {self.radius!r})")


@dataclass(frozen=True, slots=True)
class Pose:
    """Position (m) et cap θ (rad), θ replié dans (−π, π] à la construction."""
    x: float
    y: float
    theta: float

    def __post_init__(self):
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise DomainError(f"position non finie: ({self.x!r}, {self.y!r})")
        object.__setattr__(self, "theta", wrap_angle(self.theta))

    @property
    def position(self) -> Tuple[float, float]:
        return (self.x, self.y)

    @property
    def heading_vector(self) -> Tuple[float, float]:
        return (math.cos(self.theta), math.sin(self.theta))


@dataclass(frozen=True, slots=True)
class PolarPose:
    """Vue polaire : portée r, azimut φ, et drapeau azimuth_defined."""
    r: float
    phi: float
    azimuth_defined: bool


@dataclass(frozen=True, slots=True)
class Control:
    """Taux de virage normalisé u ∈ [−1, 1] (u > 0 : virage à droite)."""
    u: float

    def __post_init__(self):
        if not (math.isfinite(self.u) and abs(self.u) <= 1.0):
            raise ContractViolation(f"|u| doit être ≤ 1 (reçu {self.u!r})")

    def __float__(self) -> float:
        return float(self.u)


ControlLike = Union[Control, float, int]


def as_control_value(u: ControlLike) -> float:
    """Accepte Control ou un flottant ; vérifie |u| ≤ 1."""
    val = float(u)
    if not (math.isfinite(val) and abs(val) <= 1.0):
        raise ContractViolation(f"|u| doit être ≤ 1 (reçu {val!r})")
    return val


# ======================= Conversions =======================
def to_polar(p: Pose) -> PolarPose:
    r = math.hypot(p.x, p.y)
    if r <= EPS_ORIGIN:
        return PolarPose(r=r, phi=0.0, azimuth_defined=False)
    return PolarPose(r=r, phi=wrap_angle(math.atan2(p.y, p.x)), azimuth_defined=True)


def from_polar(r: float, phi: float) -> Tuple[float, float]:
    return (r * math.cos(phi), r * math.sin(phi))


# ======================= Cinématique =======================
def dynamics(p: Pose, u: ControlLike, params: RobotParams) -> Tuple[float, float, float]:
    """(ẋ, ẏ, θ̇) = (v cos θ, v sin θ, −ω u)."""
    uu = as_control_value(u)
    v = params.speed
    return (v * math.cos(p.theta), v * math.sin(p.theta), -params.max_turn_rate * uu)


def radial_rate(p: Pose, params: RobotParams) -> float:
    """ṙ = v cos(θ − φ) ; indéfini au centre."""
    pol = to_polar(p)
    if not pol.azimuth_defined:
        raise DegenerateInputError(f"azimut indéfini en r={pol.r:.3e}")
    return params.speed * math.cos(wrap_angle(p.theta - pol.phi))
