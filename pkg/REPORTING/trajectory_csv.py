# -*- coding: utf-8 -*-
"""
Export CSV d'une trajectoire simulée (pandas).

En-tête exact : t,x,y,theta,u,r,phi,lambda_theta,H
Une ligne par échantillon, la dernière est l'événement de sortie.
Notation décimale, 12 chiffres significatifs.
"""

from __future__ import annotations

import logging
from pathlib import Path

import numpy as np
import pandas as pd

from CORE.dubins_core import RobotParams
from FEEDBACK.pmp_checks import CostateSeries, reduced_hamiltonian_series
from SIMULATION.escape_simulator import Trajectory
from UTILS.errors import ContractViolation

log = logging.getLogger("trajectory_csv")

# ==== Constantes ====
CSV_COLUMNS = ["t", "x", "y", "theta", "u", "r", "phi", "lambda_theta", "H"]
SIGNIFICANT_DIGITS = 12


def format_decimal(x: float) -> str:
    """12 chiffres significatifs, jamais de notation scientifique ; −0 écrit 0."""
    return np.format_float_positional(
        float(x) + 0.0, precision=SIGNIFICANT_DIGITS, unique=False, fractional=False, trim="-"
    )


def trajectory_frame(traj: Trajectory, costates: CostateSeries, params: RobotParams) -> pd.DataFrame:
    if not traj.samples:
        raise ContractViolation("trajectoire vide")
    if len(costates) != len(traj.samples):
        raise ContractViolation("état adjoint et trajectoire de longueurs différentes")
    pos = traj.positions()
    return pd.DataFrame({
        "t": traj.times(),
        "x": pos[:, 0],
        "y": pos[:, 1],
        "theta": traj.headings(),
        "u": traj.controls(),
        "r": np.array([s.r for s in traj.samples]),
        "phi": np.array([s.phi for s in traj.samples]),
        "lambda_theta": costates.lambda_theta,
        "H": reduced_hamiltonian_series(traj, costates, params),
    }, columns=CSV_COLUMNS)


def emit_trajectory_csv(
    traj: Trajectory,
    costates: CostateSeries,
    params: RobotParams,
    path: Path,
) -> Path:
    df = trajectory_frame(traj, costates, params)
    text = df.apply(lambda col: col.map(format_decimal))
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text.to_csv(path, index=False, lineterminator="\n")
    log.debug("CSV écrit : %s (%d lignes)", path, len(df))
    return path


def read_trajectory_csv(path: Path) -> pd.DataFrame:
    return pd.read_csv(path, dtype=float)
