import dataclasses
import math

import numpy as np
import pytest

from beaconpursuit import (
    AgentState,
    ControlParams,
    Scenario,
    ShapeStateI,
    ShapeStateII_III,
    constraint_dots,
    extract_shape_I,
    extract_shape_II_III,
    finite_difference_check,
    frame_from_heading,
    law_of_cosines_dot,
    shape_names,
    shape_rhs_I,
    shape_rhs_II_III,
    simulate,
    vec3,
)
from beaconpursuit.dynamics import derivative, pack_states, unpack_states
from beaconpursuit.errors import (
    ConstraintViolation,
    DegenerateVector,
    ParameterError,
    TooShort,
)
from beaconpursuit.shape_space import (
    extract_series_pair,
    extract_series_single,
    shape_rhs_series,
)


def agent_at(position, heading) -> AgentState:
    return AgentState(position=vec3(*position), frame=frame_from_heading(vec3(*heading)))


def random_agent(rng, lo=2.0, hi=8.0) -> AgentState:
    pos = rng.uniform(-hi, hi, size=3)
    if np.linalg.norm(pos) < lo:
        pos = pos + lo * np.sign(pos + 0.1)
    heading = rng.normal(size=3)
    return agent_at(pos, heading)


# --- law of cosines ---------------------------------------------------------


def test_law_of_cosines_values():
    assert law_of_cosines_dot(6.0, 5.0, 2.0) == pytest.approx(0.75, abs=1e-15)
    # 3-4-5 right triangle: rays at a right angle.
    assert law_of_cosines_dot(3.0, 4.0, 2.5) == pytest.approx(0.0, abs=1e-15)


def test_law_of_cosines_rejects_degenerate_triangles():
    with pytest.raises(ConstraintViolation):
        law_of_cosines_dot(10.0, 10.0, 0.0)  # coincident beacons, rays aligned
    with pytest.raises(ConstraintViolation):
        law_of_cosines_dot(1.0, 1.0, 5.0)  # triangle inequality violated
    with pytest.raises(ConstraintViolation):
        law_of_cosines_dot(0.0, 1.0, 1.0)
    with pytest.raises(ConstraintViolation):
        law_of_cosines_dot(1.0, 1.0, -1.0)


# --- extraction -------------------------------------------------------------


def test_extract_single_on_axis():
    sh = extract_shape_I(agent_at((0, 0, 5), (1, 0, 0)), b=1.0)
    assert sh.rho_1b1 == pytest.approx(6.0, abs=1e-15)
    assert sh.rho_1b2 == pytest.approx(4.0, abs=1e-15)
    assert sh.xbar_1b1 == pytest.approx(0.0, abs=1e-15)
    assert sh.xbar_1b2 == pytest.approx(0.0, abs=1e-15)
    assert sh.collinear


def test_extract_single_between_beacons_is_collinear():
    assert extract_shape_I(agent_at((0, 0, 0.3), (1, 0, 0)), b=1.0).collinear


def test_extract_single_off_axis():
    sh = extract_shape_I(agent_at((3, 0, 0), (0, 0, 1)), b=2.0)
    q = math.sqrt(13.0)
    assert sh.rho_1b1 == pytest.approx(q, abs=1e-15)
    assert sh.rho_1b2 == pytest.approx(q, abs=1e-15)
    assert sh.xbar_1b1 == pytest.approx(2.0 / q, abs=1e-15)
    assert sh.xbar_1b2 == pytest.approx(-2.0 / q, abs=1e-15)
    assert not sh.collinear


def test_extract_single_at_beacon_rejected():
    with pytest.raises(DegenerateVector):
        extract_shape_I(agent_at((0, 0, -2), (1, 0, 0)), b=2.0)


def test_extract_pair_coincident_beacons():
    agents = [agent_at((5, 0, 0), (0, 1, 0)), agent_at((0, 3, 0), (0, 0, 1))]
    sh = extract_shape_II_III(agents, b=0.0)
    rho = math.sqrt(34.0)
    assert sh.rho == pytest.approx(rho, abs=1e-15)
    assert sh.rho_1b1 == pytest.approx(5.0, abs=1e-15)
    assert sh.rho_2b2 == pytest.approx(3.0, abs=1e-15)
    assert sh.xbar1 == pytest.approx(-3.0 / rho, abs=1e-15)
    assert sh.xbar2 == pytest.approx(0.0, abs=1e-15)
    assert sh.xbar_1b1 == pytest.approx(0.0, abs=1e-15)
    assert sh.xbar_2b2 == pytest.approx(0.0, abs=1e-15)
    assert sh.xtilde == pytest.approx(0.0, abs=1e-15)
    for name in ("rhat1", "rhat2", "xhat1", "xhat2"):
        assert getattr(sh, name) == 0.0


def test_extract_pair_separated_beacons():
    agents = [agent_at((3, 0, -1), (0, 1, 0)), agent_at((0, 4, 2), (1, 0, 0))]
    sh = extract_shape_II_III(agents, b=2.0)
    rho = math.sqrt(34.0)
    assert sh.rho == pytest.approx(rho, abs=1e-15)
    assert sh.rho_1b1 == pytest.approx(math.sqrt(10.0), abs=1e-15)
    assert sh.rho_2b2 == pytest.approx(4.0, abs=1e-15)
    assert sh.xbar1 == pytest.approx(-4.0 / rho, abs=1e-15)
    assert sh.xbar2 == pytest.approx(-3.0 / rho, abs=1e-15)
    assert sh.xbar_1b1 == pytest.approx(0.0, abs=1e-15)
    assert sh.xbar_2b2 == pytest.approx(0.0, abs=1e-15)
    assert sh.xtilde == pytest.approx(0.0, abs=1e-15)
    assert sh.rhat1 == pytest.approx(-4.0, abs=1e-15)
    assert sh.rhat2 == pytest.approx(8.0, abs=1e-15)
    assert sh.xhat1 == pytest.approx(0.0, abs=1e-15)
    assert sh.xhat2 == pytest.approx(0.0, abs=1e-15)


def test_extract_pair_needs_two_agents():
    with pytest.raises(ParameterError):
        extract_shape_II_III([agent_at((5, 0, 0), (0, 1, 0))], b=1.0)


def test_shape_names():
    assert len(shape_names("I")) == 4
    assert len(shape_names("II")) == 12
    assert shape_names("II") == shape_names("III")
    with pytest.raises(ParameterError):
        shape_names("IV")


# --- substituted dot products ----------------------------------------------


def test_constraint_dots_match_geometry():
    # The four substituted dot products must reproduce the directly
    # computed values: they follow algebraically from the closure identity.
    rng = np.random.default_rng(7)
    for _ in range(50):
        b = rng.uniform(0.5, 3.0)
        a1 = random_agent(rng)
        a2 = random_agent(rng)
        sh = extract_shape_II_III([a1, a2], b)
        d20, d21, d22, d23 = constraint_dots(sh)
        r1b1 = a1.position + np.array([0.0, 0.0, b])
        r2b2 = a2.position - np.array([0.0, 0.0, b])
        r = a1.position - a2.position
        u1 = r1b1 / np.linalg.norm(r1b1)
        u2 = r2b2 / np.linalg.norm(r2b2)
        ur = r / np.linalg.norm(r)
        assert d20 == pytest.approx(float(np.dot(a2.heading, u1)), abs=1e-12)
        assert d21 == pytest.approx(float(np.dot(a1.heading, u2)), abs=1e-12)
        assert d22 == pytest.approx(float(np.dot(u1, ur)), abs=1e-12)
        assert d23 == pytest.approx(float(np.dot(u2, ur)), abs=1e-12)


# --- reduced right-hand sides ----------------------------------------------


def shape_flow_fd(agents, config_type, p, eps=1e-6):
    """Chain-rule derivative of the extraction along the full-state flow.

    Central difference of the extraction along the state derivative; the
    only inputs are the extraction map and the full-state vector field,
    so agreement with the reduced rhs is an independent consistency check.
    """
    S = pack_states(agents)
    dS = derivative(agents, config_type, p)
    if config_type == "I":
        hi = extract_series_single((S + eps * dS)[None], p.b)[0]
        lo = extract_series_single((S - eps * dS)[None], p.b)[0]
    else:
        hi = extract_series_pair((S + eps * dS)[None], p.b)[0]
        lo = extract_series_pair((S - eps * dS)[None], p.b)[0]
    return (hi - lo) / (2.0 * eps)


def test_rhs_single_matches_flow():
    rng = np.random.default_rng(11)
    p = ControlParams(mu=1.3, lam=0.4, ab1=-0.3, ab2=-0.5, b=1.5)
    checked = 0
    while checked < 25:
        ag = random_agent(rng)
        sh = extract_shape_I(ag, p.b)
        if sh.collinear:
            continue
        rates = shape_rhs_I(sh, p).as_array()
        fd = shape_flow_fd([ag], "I", p)
        assert np.max(np.abs(rates - fd)) < 1e-8
        checked += 1


@pytest.mark.parametrize("config_type,b", [("II", 0.0), ("III", 2.0)])
def test_rhs_pair_matches_flow(config_type, b):
    rng = np.random.default_rng(13)
    p = ControlParams(mu=0.8, lam=0.35, a=-0.6, a0=-0.2, b=b)
    for _ in range(25):
        agents = [random_agent(rng), random_agent(rng)]
        sh = extract_shape_II_III(agents, b)
        rates = shape_rhs_II_III(sh, p).as_array()
        fd = shape_flow_fd(agents, config_type, p)
        assert np.max(np.abs(rates - fd)) < 1e-8


def test_rhs_trivial_relations():
    rng = np.random.default_rng(17)
    p = ControlParams(mu=1.0, lam=0.5, a=-0.5, a0=-0.3, b=2.0)
    agents = [random_agent(rng), random_agent(rng)]
    sh = extract_shape_II_III(agents, p.b)
    rates = shape_rhs_II_III(sh, p)
    assert rates.rho == pytest.approx(sh.xbar1 + sh.xbar2, abs=1e-15)
    assert rates.rho_1b1 == pytest.approx(sh.xbar_1b1, abs=1e-15)
    assert rates.rho_2b2 == pytest.approx(sh.xbar_2b2, abs=1e-15)
    assert rates.rhat1 == pytest.approx(sh.xhat1, abs=1e-15)
    assert rates.rhat2 == pytest.approx(sh.xhat2, abs=1e-15)


def test_rhs_rejects_collinear_single():
    sh = extract_shape_I(agent_at((0, 0, 5), (1, 0, 0)), b=1.0)
    p = ControlParams(mu=1.0, lam=0.5, ab1=-0.3, ab2=-0.5, b=1.0)
    with pytest.raises(ConstraintViolation):
        shape_rhs_I(sh, p)


def test_rhs_rejects_impossible_pair_shape():
    # Per-field ranges are fine but no geometry realizes these values: the
    # first substituted dot product comes out far above 1.
    sh = ShapeStateII_III(
        xbar1=0.0,
        xbar2=-1.0,
        xbar_1b1=0.0,
        xbar_2b2=1.0,
        xtilde=0.0,
        rho=1.0,
        rho_1b1=1.0,
        rho_2b2=1.0,
        rhat1=0.0,
        rhat2=0.0,
        xhat1=0.0,
        xhat2=2.0,
    )
    p = ControlParams(mu=1.0, lam=0.5, a=-0.5, a0=-0.3, b=1.0)
    with pytest.raises(ConstraintViolation):
        shape_rhs_II_III(sh, p)


def test_shape_state_validation():
    with pytest.raises(ConstraintViolation):
        ShapeStateI(xbar_1b1=1.5, xbar_1b2=0.0, rho_1b1=1.0, rho_1b2=1.0)
    with pytest.raises(ConstraintViolation):
        ShapeStateI(xbar_1b1=0.0, xbar_1b2=0.0, rho_1b1=-1.0, rho_1b2=1.0)
    with pytest.raises(ParameterError):
        ShapeStateI.from_array(np.zeros(3))
    with pytest.raises(ParameterError):
        ShapeStateII_III.from_array(np.zeros(4))


def test_shape_rhs_series_unknown_config():
    with pytest.raises(ParameterError):
        shape_rhs_series(np.zeros((1, 12)), "X", ControlParams(mu=1.0, lam=0.5))


# --- finite-difference consistency ------------------------------------------


def make_scenario(**kw) -> Scenario:
    defaults = dict(
        config_type="III",
        params=ControlParams(mu=1.0, lam=0.5, a=-0.5, a0=-0.3, b=2.0),
        agents=[agent_at((6, 0, 1), (0, 1, 0)), agent_at((-6, 0, -1), (0, -1, 0))],
        dt=1e-3,
        t_final=1.0,
    )
    defaults.update(kw)
    return Scenario(**defaults)


def test_simulate_shapes_match_reextraction():
    traj = simulate(make_scenario())
    again = extract_series_pair(traj.states, 2.0)
    assert np.array_equal(traj.shapes, again)


def test_finite_difference_check_small_error():
    report = finite_difference_check(simulate(make_scenario()))
    assert report.h == pytest.approx(1e-3, abs=1e-15)
    assert report.max_abs_error < 1e-4
    assert set(report.per_component) == set(shape_names("III"))


def test_finite_difference_check_second_order():
    e1 = finite_difference_check(simulate(make_scenario(dt=2e-3))).max_abs_error
    e2 = finite_difference_check(simulate(make_scenario(dt=1e-3))).max_abs_error
    assert e1 / e2 > 3.0


def test_finite_difference_check_single_agent():
    s = make_scenario(
        config_type="I",
        params=ControlParams(mu=1.0, lam=0.5, ab1=-0.156, ab2=-0.156, b=10.0),
        agents=[agent_at((9, 0, 4), (0, 1, 0))],
    )
    report = finite_difference_check(simulate(s))
    assert report.max_abs_error < 1e-4


def test_finite_difference_check_needs_three_snapshots():
    with pytest.raises(TooShort):
        finite_difference_check(simulate(make_scenario(t_final=1e-3)))


def test_finite_difference_check_rejects_nonuniform_times():
    traj = simulate(make_scenario(t_final=4e-3))
    bent = dataclasses.replace(
        traj, times=np.array([0.0, 1e-3, 3e-3, 4e-3, 5e-3])
    )
    with pytest.raises(ParameterError):
        finite_difference_check(bent)
