#!/usr/bin/env python3
# -*- coding: utf-8 -*-
"""
Tests de la reconstruction de l'état adjoint et des diagnostics PMP
"""

import dataclasses
import math

import numpy as np
import pytest

from CORE.dubins_core import EscapeRegion, Pose, RobotParams, radial_rate
from FEEDBACK.pmp_checks import (
    check_pmp,
    hamiltonian,
    reconstruct_costate,
    reduced_hamiltonian_series,
)
from SIMULATION.escape_simulator import Event, EventKind, Sample, Trajectory, simulate
from UTILS.errors import InvalidExitError, PreconditionError

UNIT = EscapeRegion(1.0)

CASES = {
    "aligned_line": (Pose(0.5, 0.0, 0.0), RobotParams(1.0, 1.0)),
    "pure_arc": (Pose(0.5, 0.0, math.pi / 2), RobotParams(1.0, 1.0)),
    "arc_then_line": (Pose(0.25, 0.0, math.pi / 2), RobotParams(1.0, math.pi)),
    "turn_back_slow": (Pose(0.25, 0.25, math.pi), RobotParams(1.0, math.pi / 100)),
    "turn_back_pi_6": (Pose(0.25, 0.25, math.pi), RobotParams(1.0, math.pi / 6)),
    "turn_back_pi": (Pose(0.25, 0.25, math.pi), RobotParams(1.0, math.pi)),
    "turn_back_fast": (Pose(0.25, 0.25, math.pi), RobotParams(1.0, 100 * math.pi)),
}


@pytest.fixture(scope="module")
def trajectories():
    return {name: simulate(p0, params, UNIT) for name, (p0, params) in CASES.items()}


def test_pure_arc_beta(trajectories):
    cs = reconstruct_costate(trajectories["pure_arc"], CASES["pure_arc"][1], UNIT)
    assert cs.beta == pytest.approx(-1.0079, abs=1e-3)
    assert cs.mu == pytest.approx(cs.beta)  # v = ρ = 1
    assert cs.lambda_theta[-1] == 0.0
    assert len(cs) == len(trajectories["pure_arc"].samples)


def test_aligned_line_has_unit_beta_and_zero_lambda(trajectories):
    cs = reconstruct_costate(trajectories["aligned_line"], CASES["aligned_line"][1], UNIT)
    assert cs.beta == pytest.approx(-1.0, abs=1e-12)
    assert np.max(np.abs(cs.lambda_theta)) == pytest.approx(0.0, abs=1e-12)


@pytest.mark.parametrize("name", sorted(CASES))
def test_pmp_consistent_on_reference_cases(trajectories, name):
    _, params = CASES[name]
    rep = check_pmp(trajectories[name], params, UNIT)
    assert rep.max_abs_hamiltonian <= 1e-6
    assert rep.beta < 0
    assert rep.sign_match_fraction >= 0.999
    assert rep.hamiltonian_minimum_ok
    assert rep.lambda_theta_monotone
    assert rep.lambda_theta_terminal == 0.0
    assert rep.terminal_radial_rate >= 0.0
    assert rep.is_consistent()


def test_terminal_radial_rate_matches_exit_pose(trajectories):
    traj = trajectories["pure_arc"]
    params = CASES["pure_arc"][1]
    rep = check_pmp(traj, params, UNIT)
    assert rep.terminal_radial_rate == radial_rate(traj.exit_pose, params)
    assert rep.terminal_radial_rate == pytest.approx(0.9921, abs=1e-3)
    assert rep.terminal_radial_rate == pytest.approx(-params.speed / rep.beta, rel=1e-9)


def test_lambda_theta_sign_follows_control_on_bang_phase(trajectories):
    traj = trajectories["arc_then_line"]
    cs = reconstruct_costate(traj, CASES["arc_then_line"][1], UNIT)
    u = traj.controls()
    bang = u != 0
    assert np.all(np.sign(cs.lambda_theta[bang][:-1]) == u[bang][:-1])
    # λθ nul sur la radiale
    assert np.max(np.abs(cs.lambda_theta[~bang])) <= 1e-9


def test_rk4_quadrature_matches_exact(trajectories):
    for name in ("pure_arc", "arc_then_line", "turn_back_pi"):
        _, params = CASES[name]
        exact = reconstruct_costate(trajectories[name], params, UNIT, method="exact")
        rk4 = reconstruct_costate(trajectories[name], params, UNIT, method="rk4")
        np.testing.assert_allclose(rk4.lambda_theta, exact.lambda_theta, atol=1e-8)
        assert rk4.method == "rk4"


def test_unknown_quadrature_rejected(trajectories):
    with pytest.raises(ValueError):
        reconstruct_costate(trajectories["pure_arc"], CASES["pure_arc"][1], UNIT, method="euler")


def test_hamiltonian_matches_series(trajectories):
    traj = trajectories["turn_back_pi_6"]
    _, params = CASES["turn_back_pi_6"]
    cs = reconstruct_costate(traj, params, UNIT)
    series = reduced_hamiltonian_series(traj, cs, params)
    for k in (0, len(traj.samples) // 3, len(traj.samples) - 1):
        s = traj.samples[k]
        assert hamiltonian(s.pose, s.u, cs.at(k), params) == pytest.approx(series[k], abs=1e-8)


def test_perturbed_controls_break_hamiltonian(trajectories):
    traj = trajectories["turn_back_pi"]
    _, params = CASES["turn_back_pi"]
    flipped = tuple(
        dataclasses.replace(s, u=-s.u) if (s.u != 0 and k % 10 == 0) else s
        for k, s in enumerate(traj.samples)
    )
    bad = Trajectory(samples=flipped, exit_time=traj.exit_time, exit_pose=traj.exit_pose, events=traj.events)
    rep = check_pmp(bad, params, UNIT)
    assert rep.max_abs_hamiltonian > 1e-3
    assert rep.sign_match_fraction < 0.999
    assert not rep.is_consistent()


def _synthetic(exit_pose: Pose) -> Trajectory:
    start = Pose(0.5, 0.0, exit_pose.theta)
    samples = (
        Sample(t=0.0, pose=start, u=0, r=0.5, phi=0.0),
        Sample(t=0.5, pose=exit_pose, u=0, r=math.hypot(exit_pose.x, exit_pose.y), phi=0.0),
    )
    return Trajectory(samples=samples, exit_time=0.5, exit_pose=exit_pose, events=(Event(0.5, EventKind.EXIT),))


def test_inward_exit_is_invalid():
    with pytest.raises(InvalidExitError):
        reconstruct_costate(_synthetic(Pose(1.0, 0.0, math.pi)), RobotParams(1.0, 1.0), UNIT)
    with pytest.raises(InvalidExitError):
        reconstruct_costate(_synthetic(Pose(1.0, 0.0, math.pi / 2)), RobotParams(1.0, 1.0), UNIT)


def test_exit_off_boundary_is_precondition_error():
    with pytest.raises(PreconditionError):
        reconstruct_costate(_synthetic(Pose(0.9, 0.0, 0.0)), RobotParams(1.0, 1.0), UNIT)
