# -*- coding: utf-8 -*-
"""
pmp_checks.py - Diagnostics du principe du minimum de Pontryagin.

- hamiltonian()                : H = 1 + λx v cos θ + λy v sin θ − λθ ω u
- reconstruct_costate()        : β, μ, λx, λy (constants) et λθ(t) par intégration rétrograde
                                 de λ̇θ = β sin(θ(t) − φ(T)) depuis λθ(T) = 0
- reduced_hamiltonian_series() : 1 + β cos(θ(t) − φ(T)) − λθ(t) ω u(t), échantillon par échantillon
- check_pmp()                  : rapport (PmpReport) ; un test raté est une donnée, pas une exception

Deux quadratures sur la grille enregistrée :
  • "exact" : le cap est affine entre deux échantillons → intégrale en forme close
  • "rk4"   : pas RK4 classique (Simpson, le second membre ne dépend que de t)
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from CORE.dubins_core import (
    ControlLike,
    EscapeRegion,
    Pose,
    RobotParams,
    as_control_value,
    radial_rate,
    wrap_angle,
    wrap_angles,
)
from SIMULATION.escape_simulator import Trajectory
from UTILS.errors import InvalidExitError, PreconditionError

log = logging.getLogger("pmp_checks")

# ==== Constantes ====
EPS_SIGN = 1e-8
EPS_EXIT_COS = 1e-12
EXIT_RADIUS_RTOL = 1e-6
MONOTONE_TOL = 1e-12

CostateMethod = Literal["exact", "rk4"]


@dataclass(frozen=True, slots=True)
class Costate:
    """Valeur de l'état adjoint à un instant donné."""
    lambda_x: float
    lambda_y: float
    lambda_theta: float
    beta: float


@dataclass(frozen=True, eq=False)
class CostateSeries:
    """λθ aux instants de la trajectoire ; λx, λy, β, μ constants."""
    times: np.ndarray
    lambda_theta: np.ndarray
    lambda_x: float
    lambda_y: float
    beta: float
    mu: float
    phi_exit: float
    method: str

    def at(self, k: int) -> Costate:
        return Costate(self.lambda_x, self.lambda_y, float(self.lambda_theta[k]), self.beta)

    def __len__(self) -> int:
        return len(self.lambda_theta)


@dataclass(frozen=True, slots=True)
class PmpReport:
    max_abs_hamiltonian: float
    sign_match_fraction: float
    terminal_radial_rate: float
    beta: float
    lambda_theta_terminal: float
    n_sign_samples: int
    lambda_theta_monotone: bool
    hamiltonian_minimum_ok: bool

    def is_consistent(self, h_tol: float = 1e-6, min_sign_fraction: float = 0.999) -> bool:
        return (
            self.max_abs_hamiltonian <= h_tol
            and self.beta < 0
            and self.sign_match_fraction >= min_sign_fraction
            and self.hamiltonian_minimum_ok
        )


# ------------------------ Hamiltonien ------------------------

def hamiltonian(p: Pose, u: ControlLike, c: Costate, params: RobotParams) -> float:
    uu = as_control_value(u)
    v = params.speed
    return (
        1.0
        + c.lambda_x * v * math.cos(p.theta)
        + c.lambda_y * v * math.sin(p.theta)
        - c.lambda_theta * params.max_turn_rate * uu
    )


# ------------------------ Reconstruction ------------------------

def _interval_integrals(a: np.ndarray, d: np.ndarray, h: np.ndarray, method: str) -> np.ndarray:
    """∫ sin(a + d·s/h) ds sur [0, h] pour chaque intervalle."""
    if method == "exact":
        half = 0.5 * d
        small = np.abs(half) < 1e-8
        safe = np.where(small, 1.0, half)
        sinc = np.where(small, 1.0 - half * half / 6.0, np.sin(safe) / safe)
        return h * np.sin(a + half) * sinc
    if method == "rk4":
        return h / 6.0 * (np.sin(a) + 4.0 * np.sin(a + 0.5 * d) + np.sin(a + d))
    raise ValueError(f"méthode inconnue: {method!r}")


def reconstruct_costate(
    traj: Trajectory,
    params: RobotParams,
    region: EscapeRegion,
    method: CostateMethod = "exact",
) -> CostateSeries:
    rho = region.radius
    exit_p = traj.exit_pose
    r_t = math.hypot(exit_p.x, exit_p.y)
    if abs(r_t - rho) > EXIT_RADIUS_RTOL * rho:
        raise PreconditionError(f"la trajectoire ne se termine pas sur le bord (r(T)={r_t:.12g}, ρ={rho:.12g})")

    phi_t = math.atan2(exit_p.y, exit_p.x)
    cos_t = math.cos(wrap_angle(exit_p.theta - phi_t))
    if cos_t <= EPS_EXIT_COS:
        raise InvalidExitError(f"cos(θ(T) − φ(T)) = {cos_t:.3e} ≤ 0 : sortie non admissible")

    beta = -1.0 / cos_t
    mu = beta / (params.speed * rho)

    t = traj.times()
    theta = traj.headings()
    a = theta[:-1] - phi_t
    d = wrap_angles(np.diff(theta))
    h = np.diff(t)
    integrals = _interval_integrals(a, d, h, method)

    lam = np.zeros_like(t)
    lam[:-1] = -beta * np.cumsum(integrals[::-1])[::-1]

    log.debug("état adjoint (%s) : β=%.12g, λθ(0)=%.6g", method, beta, lam[0])
    return CostateSeries(
        times=t,
        lambda_theta=lam,
        lambda_x=mu * exit_p.x,
        lambda_y=mu * exit_p.y,
        beta=beta,
        mu=mu,
        phi_exit=phi_t,
        method=method,
    )


def reduced_hamiltonian_series(traj: Trajectory, costates: CostateSeries, params: RobotParams) -> np.ndarray:
    theta = traj.headings()
    u = traj.controls()
    return 1.0 + costates.beta * np.cos(theta - costates.phi_exit) - costates.lambda_theta * params.max_turn_rate * u


# ------------------------ Rapport ------------------------

def check_pmp(
    traj: Trajectory,
    params: RobotParams,
    region: EscapeRegion,
    method: CostateMethod = "exact",
    costates: Optional[CostateSeries] = None,
) -> PmpReport:
    cs = costates if costates is not None else reconstruct_costate(traj, params, region, method=method)
    lam = cs.lambda_theta
    u = traj.controls()

    h_series = reduced_hamiltonian_series(traj, cs, params)

    mask = np.abs(lam) > EPS_SIGN
    n_sign = int(mask.sum())
    sign_frac = float(np.mean(np.sign(lam[mask]) == u[mask])) if n_sign else 1.0

    bang = u[:-1] != 0
    steps = u[:-1] * np.diff(lam)
    monotone = bool(np.all(steps[bang] <= MONOTONE_TOL * max(1.0, float(np.max(np.abs(lam))))))

    minimum_ok = bool(np.all(lam * u >= np.abs(lam) - EPS_SIGN))

    rdot = radial_rate(traj.exit_pose, params)

    return PmpReport(
        max_abs_hamiltonian=float(np.max(np.abs(h_series))),
        sign_match_fraction=sign_frac,
        terminal_radial_rate=rdot,
        beta=cs.beta,
        lambda_theta_terminal=float(lam[-1]),
        n_sign_samples=n_sign,
        lambda_theta_monotone=monotone,
        hamiltonian_minimum_ok=minimum_ok,
    )
