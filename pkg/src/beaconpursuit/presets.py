"""Shipped scenario presets.

One preset per published figure parameter set. The sources give no
initial conditions, so each preset starts slightly off the predicted
circling equilibrium (circle radius inflated 2%, heights shrunk 2%) and
documents that choice: the presets reproduce steady states, not
transients. ``write_preset_files`` regenerates the JSON copies shipped
under ``presets/``; the builders here are the canonical definitions.
"""

from __future__ import annotations

from pathlib import Path

from .control_laws import ControlParams
from .dynamics import Scenario
from .equilibria import EquilibriumPrediction, predict
from .errors import ParameterError
from .harness import equilibrium_states

RADIAL_SCALE = 1.02
VERTICAL_SCALE = 0.98

# name -> (config_type, params, case_label, t_final, radial, vertical, note).
# t_final gives each transient room to settle well inside the convergence
# window; the scales displace the ICs a couple of percent off the predicted
# circle. fig4 is the exception: at its parameters the circling family's
# common-height mode is weakly oscillatorily unstable (growth rate ~3e-3),
# so any transverse perturbation rings up instead of settling. That preset
# starts exactly on a family member displaced along the neutral vertical
# direction, demonstrating the family rather than transverse attraction.
_PRESETS: dict[str, tuple[str, ControlParams, str, float, float, float, str]] = {
    "fig2_left": (
        "I",
        ControlParams(mu=1.0, lam=0.45, ab1=-0.156, ab2=-0.187, b=10.0),
        "P3.1b",
        600.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "single agent, two beacons, distinct bearing targets",
    ),
    "fig2_right": (
        "I",
        ControlParams(mu=1.0, lam=0.5, ab1=-0.156, ab2=-0.156, b=10.0),
        "P3.1a",
        200.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "single agent, two beacons, matched weighted targets",
    ),
    "fig3": (
        "II",
        ControlParams(mu=1.0, lam=0.5, a=-0.7071, a0=0.0, b=0.0),
        "P4.1",
        200.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "mutual pursuit with coincident beacons, antipodal circling family",
    ),
    "fig4": (
        "III",
        ControlParams(mu=1.0, lam=0.57, a=-0.771, a0=0.0, b=10.0),
        "P5.1",
        200.0,
        1.0,
        VERTICAL_SCALE,
        "separated beacons with pure mutual bearing targets; starts on a "
        "family member because the common-height mode is not attracting here",
    ),
    "fig5_plus": (
        "III",
        ControlParams(mu=0.9, lam=0.6, a=0.707, a0=-0.707, b=2.0),
        "P5.2b_plus",
        300.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "aligned-heading pair, larger-separation member",
    ),
    "fig5_minus": (
        "III",
        ControlParams(mu=0.9, lam=0.6, a=0.707, a0=-0.707, b=2.0),
        "P5.2b_minus",
        300.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "aligned-heading pair, smaller-separation member",
    ),
    "fig6_left": (
        "III",
        ControlParams(mu=1.0, lam=0.5, a=-0.707, a0=-0.707, b=10.0),
        "P5.2c",
        400.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "equal weighted targets, mirror-symmetric circling",
    ),
    "fig6_right": (
        "III",
        ControlParams(mu=1.0, lam=0.35, a=-0.588, a0=0.707, b=10.0),
        "P5.2d",
        400.0,
        RADIAL_SCALE,
        VERTICAL_SCALE,
        "mixed-sign targets, asymmetric beacon distances",
    ),
}

PRESET_NAMES = tuple(_PRESETS)

# Figure sets sharing one parameter family, for at-least-one-converges checks.
PRESET_GROUPS: dict[str, tuple[str, ...]] = {
    "fig2": ("fig2_left", "fig2_right"),
    "fig3": ("fig3",),
    "fig4": ("fig4",),
    "fig5": ("fig5_plus", "fig5_minus"),
    "fig6": ("fig6_left", "fig6_right"),
}


def preset_prediction(name: str) -> EquilibriumPrediction:
    """The equilibrium prediction a preset is built around."""
    if name not in _PRESETS:
        raise ParameterError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        )
    config, params, label = _PRESETS[name][:3]
    for pred in predict(config, params):
        if pred.case_label == label:
            if not pred.exists:
                raise ParameterError(f"preset {name!r} case {label} does not exist")
            return pred
    raise ParameterError(f"case {label} not produced for preset {name!r}")


def preset_scenario(name: str) -> Scenario:
    """Build a preset scenario with ICs slightly off the predicted circle."""
    pred = preset_prediction(name)
    config, params, label, t_final, radial, vertical, note = _PRESETS[name]
    agents = equilibrium_states(pred, radial_scale=radial, vertical_scale=vertical)
    return Scenario(
        config_type=config,
        params=params,
        agents=agents,
        t_final=t_final,
        description=(
            f"{name}: {note} (case {label}). Initial conditions scaled "
            f"{radial:g}x radial / {vertical:g}x vertical off the predicted "
            "equilibrium; reproduces the steady state, not the unspecified "
            "transient."
        ),
    )


def preset_dir() -> Path:
    return Path(__file__).resolve().parent / "presets"


def write_preset_files(directory: str | Path | None = None) -> list[Path]:
    """Regenerate the shipped preset JSON files from the builders."""
    from .scenario_io import save_scenario

    target = Path(directory) if directory is not None else preset_dir()
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for name in PRESET_NAMES:
        path = target / f"{name}.json"
        save_scenario(preset_scenario(name), path)
        written.append(path)
    return written
