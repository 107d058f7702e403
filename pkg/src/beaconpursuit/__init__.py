"""Beacon-referenced constant-bearing pursuit in three dimensions.

Simulates one or two unit-speed agents steering by blended
constant-bearing feedback toward a partner and fixed beacons, reduces
trajectories to relative shape coordinates, predicts circling
equilibria in closed form, and checks predictions against both the
shape dynamics and full simulations.
"""

from .control_laws import (
    ControlParams,
    SteeringCommand,
    beacon_referenced_control,
    cb_control,
    two_beacon_control,
)
from .dynamics import (
    Scenario,
    Trajectory,
    beacon_positions,
    controls,
    derivative,
    simulate,
    step,
    step_constant,
)
from .equilibria import (
    CASE_LABELS,
    EquilibriumPrediction,
    ResidualReport,
    predict,
    predict_config_I,
    predict_config_II,
    predict_config_III,
    residual,
)
from .errors import (
    BeaconPursuitError,
    ConstraintViolation,
    DegenerateFrame,
    DegenerateVector,
    NotConverged,
    ParameterError,
    SingularityAbort,
    TooShort,
)
from .geometry import AgentState, Frame, frame_from_heading, orthonormalize, unit, vec3
from .harness import (
    ComparisonReport,
    ConvergenceReport,
    cb_cost,
    cb_cost_series,
    compare,
    detect_convergence,
    equilibrium_states,
)
from .presets import PRESET_GROUPS, PRESET_NAMES, preset_prediction, preset_scenario
from .scenario_io import (
    load_scenario,
    read_trajectory_csv,
    save_scenario,
    scenario_from_dict,
    scenario_to_dict,
    shapes_from_positions_headings,
    write_trajectory_csv,
)
from .shape_space import (
    FiniteDifferenceReport,
    ShapeRatesI,
    ShapeRatesII_III,
    ShapeStateI,
    ShapeStateII_III,
    constraint_dots,
    extract_shape_I,
    extract_shape_II_III,
    extract_series_pair,
    extract_series_single,
    finite_difference_check,
    law_of_cosines_dot,
    shape_names,
    shape_rhs_I,
    shape_rhs_II_III,
    shape_rhs_series,
)

__version__ = "0.1.0"

__all__ = [
    "AgentState",
    "BeaconPursuitError",
    "CASE_LABELS",
    "ComparisonReport",
    "ConstraintViolation",
    "ControlParams",
    "ConvergenceReport",
    "DegenerateFrame",
    "DegenerateVector",
    "EquilibriumPrediction",
    "FiniteDifferenceReport",
    "Frame",
    "NotConverged",
    "PRESET_GROUPS",
    "PRESET_NAMES",
    "ParameterError",
    "ResidualReport",
    "Scenario",
    "ShapeRatesI",
    "ShapeRatesII_III",
    "ShapeStateI",
    "ShapeStateII_III",
    "SingularityAbort",
    "SteeringCommand",
    "TooShort",
    "Trajectory",
    "beacon_positions",
    "beacon_referenced_control",
    "cb_control",
    "cb_cost",
    "cb_cost_series",
    "compare",
    "constraint_dots",
    "controls",
    "derivative",
    "detect_convergence",
    "equilibrium_states",
    "extract_series_pair",
    "extract_series_single",
    "extract_shape_I",
    "extract_shape_II_III",
    "finite_difference_check",
    "frame_from_heading",
    "law_of_cosines_dot",
    "load_scenario",
    "orthonormalize",
    "predict",
    "predict_config_I",
    "predict_config_II",
    "predict_config_III",
    "preset_prediction",
    "preset_scenario",
    "read_trajectory_csv",
    "residual",
    "save_scenario",
    "scenario_from_dict",
    "scenario_to_dict",
    "shape_names",
    "shape_rhs_I",
    "shape_rhs_II_III",
    "shape_rhs_series",
    "shapes_from_positions_headings",
    "simulate",
    "step",
    "step_constant",
    "two_beacon_control",
    "unit",
    "vec3",
    "write_trajectory_csv",
]
