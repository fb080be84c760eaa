"""Photonic spin Hall shifts of a probe beam reflected from a bilayer-graphene
optomechanical nanocavity."""

from .errors import (
    ConfigError,
    DegenerateDenominator,
    DegenerateInput,
    DegenerateLayer,
    FlatCurve,
    NonConvergence,
    NoUnimodalMinimum,
    QuadratureNonConvergence,
    StepCollision,
    SweepFailure,
)
from .optomech import ProbeResponse, SteadyState, probe_response, response_spectrum, solve_steady_state
from .params import SystemParams, drive_amplitudes, gmc_from_geometry, load_config, validate
from .spinhall import BeamSpec, ShiftResult, centroid_oracle, drp_dtheta, shift_closed_form
from .sweep import SweepResult, SweepSpec, find_brewster, find_shift_extrema, find_transparency_windows, run_map
from .tmm import Layer, LayerStack, ReflectionPair, kz, layer_matrix, reflection, stack_matrix

__version__ = "0.1.0"
