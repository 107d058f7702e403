"""Acceptance gate for the package's headline guarantees.

One test per guarantee; each prints a single summary line on success (run
with ``-s`` or ``-rA`` to see them) and carries its own time budget where
the guarantee includes one.
"""

from __future__ import annotations

import dataclasses
import itertools
import math
import time

import numpy as np
import pytest

from beaconpursuit import (
    AgentState,
    ControlParams,
    Scenario,
    beacon_positions,
    compare,
    detect_convergence,
    finite_difference_check,
    frame_from_heading,
    predict,
    preset_prediction,
    preset_scenario,
    residual,
    simulate,
    step_constant,
    unit,
    vec3,
)
from beaconpursuit.cli import run_residual_suite
from beaconpursuit.presets import PRESET_GROUPS, PRESET_NAMES


def report(name: str, detail: str) -> None:
    print(f"acceptance [{name}]: PASS ({detail})")


def by_label(predictions, label):
    matches = [p for p in predictions if p.case_label == label]
    assert len(matches) == 1
    return matches[0]


def agent_at(position, heading) -> AgentState:
    return AgentState(position=vec3(*position), frame=frame_from_heading(vec3(*heading)))


# --- 1: every predicted equilibrium is an equilibrium of the reduced flow ------


def test_equilibrium_residual_grid():
    t0 = time.perf_counter()
    summary = run_residual_suite(None)
    elapsed = time.perf_counter() - t0
    assert summary["checked"] >= 200
    assert summary["failed"] == 0
    assert summary["worst_scaled_residual"] < 1e-9
    assert elapsed < 10.0
    report(
        "residual grid",
        f"{summary['passed']}/{summary['checked']} predictions, worst scaled "
        f"residual {summary['worst_scaled_residual']:.2e}, {elapsed:.1f}s",
    )


# --- 2: reduced dynamics match the full simulation at second order --------------


def random_agents(rng, n_agents: int, b: float, config_type: str) -> list[AgentState]:
    agents: list[AgentState] = []
    beacons = beacon_positions(config_type, b)
    while len(agents) < n_agents:
        pos = rng.uniform(-6.0, 6.0, size=3)
        if min(np.linalg.norm(pos - bp) for bp in beacons) < 2.0:
            continue
        if agents and np.linalg.norm(pos - agents[0].position) < 2.0:
            continue
        heading = unit(rng.normal(size=3))
        agents.append(AgentState(position=pos, frame=frame_from_heading(heading)))
    return agents


def random_params(rng, config_type: str) -> ControlParams:
    mu = float(rng.uniform(0.5, 2.0))
    lam = float(rng.uniform(0.2, 0.8))
    if config_type == "I":
        return ControlParams(
            mu=mu,
            lam=lam,
            ab1=float(rng.uniform(-0.9, 0.9)),
            ab2=float(rng.uniform(-0.9, 0.9)),
            b=float(rng.uniform(1.0, 3.0)),
        )
    b = 0.0 if config_type == "II" else float(rng.uniform(1.0, 3.0))
    return ControlParams(
        mu=mu,
        lam=lam,
        a=float(rng.uniform(-0.9, 0.9)),
        a0=float(rng.uniform(-0.9, 0.9)),
        b=b,
    )


def test_shape_reduction_matches_simulation_at_second_order():
    # The reduced right-hand side must agree with centered differences of
    # the extracted shape series, and halving the step must shrink the
    # disagreement at the difference scheme's own second order.
    t0 = time.perf_counter()
    rng = np.random.default_rng(20240817)
    ratios = []
    for config_type in ("I", "II", "III"):
        n_agents = 1 if config_type == "I" else 2
        for _ in range(20):
            params = random_params(rng, config_type)
            agents = random_agents(rng, n_agents, params.b, config_type)
            errs = {}
            for dt in (1e-3, 2e-3):
                s = Scenario(
                    config_type=config_type,
                    params=params,
                    agents=agents,
                    dt=dt,
                    t_final=0.2,
                )
                errs[dt] = finite_difference_check(simulate(s)).max_abs_error
            assert errs[1e-3] < 1e-5
            ratio = errs[2e-3] / errs[1e-3]
            assert ratio > 2.5
            ratios.append(ratio)
    elapsed = time.perf_counter() - t0
    assert float(np.median(ratios)) > 3.4
    assert elapsed < 60.0
    report(
        "shape reduction",
        f"60 scenarios, median error ratio {np.median(ratios):.2f} "
        f"(4.0 is ideal second order), {elapsed:.1f}s",
    )


# --- 3: kinematic invariants of the integrator ----------------------------------


def test_kinematic_invariants():
    single = Scenario(
        config_type="I",
        params=ControlParams(mu=1.0, lam=0.4, ab1=-0.5, ab2=-0.2, b=2.0),
        agents=[agent_at((5, 1, 0.5), (0, 1, 0))],
        t_final=60.0,
    )
    pair = Scenario(
        config_type="III",
        params=ControlParams(mu=1.0, lam=0.5, a=-0.5, a0=-0.3, b=2.0),
        agents=[agent_at((6, 0, 1), (0, 1, 0)), agent_at((-6, 0, -1), (0, -1, 0))],
        t_final=60.0,
    )
    worst_speed = 0.0
    worst_orth = 0.0
    for s in (single, pair):
        traj = simulate(s)
        assert not traj.aborted
        frames = traj.states[:, :, 1:, :]
        speeds = np.linalg.norm(traj.states[:, :, 1, :], axis=-1)
        worst_speed = max(worst_speed, float(np.max(np.abs(speeds - 1.0))))
        gram = np.einsum("knia,knja->knij", frames, frames)
        worst_orth = max(worst_orth, float(np.max(np.abs(gram - np.eye(3)))))
    assert worst_speed < 1e-9
    assert worst_orth < 1e-9

    # Two-beacon loop closure: baseline plus the two beacon rays and the
    # inter-agent vector cancel exactly, so any residue is pure roundoff.
    traj = simulate(pair)
    b = pair.params.b
    r1 = traj.states[:, 0, 0, :]
    r2 = traj.states[:, 1, 0, :]
    bhat = np.array([0.0, 0.0, 2.0 * b])
    r1b1 = r1 - np.array([0.0, 0.0, -b])
    r2b2 = r2 - np.array([0.0, 0.0, b])
    gap = bhat + r2b2 + (r1 - r2) - r1b1
    closure = float(np.max(np.linalg.norm(gap, axis=1)))
    assert closure < 1e-10

    # Constant unit turn rate traces a unit circle; one full period must
    # return the particle to its start.
    n = 6283
    dt = 2.0 * math.pi / n
    agents = [agent_at((0, 0, 0), (1, 0, 0))]
    start = agents[0].position.copy()
    heading0 = agents[0].heading.copy()
    for _ in range(n):
        agents = step_constant(agents, u=1.0, v=0.0, dt=dt)
    circle_gap = max(
        float(np.linalg.norm(agents[0].position - start)),
        float(np.linalg.norm(agents[0].heading - heading0)),
    )
    assert circle_gap < 1e-6
    report(
        "kinematic invariants",
        f"speed {worst_speed:.1e}, orthonormality {worst_orth:.1e}, "
        f"closure {closure:.1e}, circle gap {circle_gap:.1e}",
    )


# --- 4: the shipped presets converge onto their predicted steady states ----------


def test_presets_reach_their_predicted_equilibria():
    t0 = time.perf_counter()
    outcomes = {}
    for name in PRESET_NAMES:
        pred = preset_prediction(name)
        scenario = preset_scenario(name)
        for ag in scenario.agents:
            start_radius = float(np.hypot(ag.position[0], ag.position[1]))
            assert abs(start_radius - pred.radius) / pred.radius <= 0.05 + 1e-12
        traj = simulate(scenario)
        assert not traj.aborted, name
        conv = detect_convergence(traj, window=20.0, tol=1e-4)
        ok = conv.converged
        if ok:
            ok = compare(traj, pred, tol=0.01).passed
        outcomes[name] = ok
    assert all(outcomes.values()), outcomes
    for group, members in PRESET_GROUPS.items():
        assert any(outcomes[m] for m in members), group
    elapsed = time.perf_counter() - t0
    assert elapsed < 300.0
    report(
        "preset convergence",
        f"{sum(outcomes.values())}/{len(outcomes)} presets converged and "
        f"matched within 1%, {elapsed:.1f}s",
    )


# --- 5: the two single-agent cases agree at their shared boundary ----------------


def test_equal_weight_boundary_continuity():
    mu, lam, ab2, b = 1.0, 0.5, -0.2, 3.0
    at = ControlParams(mu=mu, lam=lam, ab1=(1 - lam) * ab2 / lam, ab2=ab2, b=b)
    just_off = ControlParams(
        mu=mu, lam=lam, ab1=((1 - lam) * ab2 - 1e-6) / lam, ab2=ab2, b=b
    )
    mid = by_label(predict("I", at), "P3.1a")
    off = by_label(predict("I", just_off), "P3.1b")
    assert mid.exists and off.exists
    worst = 0.0
    for name in ("rho_1b1", "rho_1b2", "radius", "vertical_offset"):
        ref = getattr(mid, name)
        val = getattr(off, name)
        rel = abs(val - ref) / abs(ref)
        worst = max(worst, rel)
        assert rel < 1e-4, name
    report("boundary continuity", f"worst relative gap {worst:.1e} at 1e-6 offset")


# --- 6: branch structure of the pair equilibria -----------------------------------


def test_pair_alignment_is_exactly_binary():
    lams = (0.2, 0.5, 0.8)
    targets = (-0.9, -0.3, 0.0, 0.3, 0.9)
    n_existing = 0
    for lam, a, a0, mu, b in itertools.product(
        lams, targets, targets, (0.5, 2.0), (2.0, 10.0)
    ):
        p = ControlParams(mu=mu, lam=lam, a=a, a0=a0, b=b)
        for pred in predict("III", p):
            if not pred.exists:
                continue
            assert pred.xtilde in (-1.0, 1.0)
            n_existing += 1
    assert n_existing >= 100
    report(
        "alignment dichotomy",
        f"{n_existing} existing pair predictions, all exactly aligned or opposed",
    )


def test_collinear_case_distance_form():
    # Two printed forms of the collinear-case separation disagree by a
    # factor of the attention weight; only one zeroes the reduced flow.
    p = ControlParams(mu=1.0, lam=0.4, a=0.5, a0=-0.9, b=0.0)
    pred = by_label(predict("II", p), "P4.2a")
    adopted = residual(pred)
    assert adopted.passed
    q_bad = p.lam * pred.rho_1b1
    variant = dataclasses.replace(pred, rho=2.0 * q_bad, rho_1b1=q_bad, rho_2b2=q_bad)
    rejected = residual(variant)
    assert not rejected.passed
    assert rejected.max_abs_derivative > 1e-3
    report(
        "collinear distance form",
        f"adopted form residual {adopted.max_abs_derivative:.1e}, "
        f"weighted variant {rejected.max_abs_derivative:.1e}",
    )
