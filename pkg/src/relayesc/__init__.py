"""Stochastic relay-based multivariable extremum-seeking control.

A model-free optimizer for multi-input single-output systems: each input
channel is steered by a relay whose direction opposes the estimated cost
gradient, with per-sample randomized relay gains making the gradient
identifiable from the multivariable chain rule. Includes static-map and
dynamic (hold-time + RLS) variants, an adaptive-gain extension, quadratic
and Hammerstein test plants, a closed-loop simulation harness and a CLI.
"""

from ._kernel import HAVE_COMPILED, backend_name, get_backend
from .controller import (
    ControllerOutput,
    ControllerState,
    EscConfig,
    Mode,
    RelayState,
    controller_init,
    controller_step,
    draw_gains,
    expected_oscillation,
    switching_frequency,
)
from .errors import (
    ConfigFileError,
    InsufficientSamplesError,
    InvalidConfigError,
    InvalidParameterError,
    RelayEscError,
)
from .estimator import (
    GradientEstimate,
    RegressorSample,
    RlsState,
    batch_ls,
    rls_init,
    rls_update,
)
from .harness import (
    RunMetrics,
    Scenario,
    TrajectoryRecord,
    compare_runs,
    convergence_band,
    median_metrics,
    run_ensemble,
    run_scenario,
)
from .plants import (
    FirstOrderState,
    HammersteinPlant,
    QuadraticMap,
    StaticPlant,
    dynamic_plant,
    map_eval,
    map_gradient,
    plant_step,
    static_plant,
)
from .presets import PRESETS, get_preset

__version__ = "0.1.0"

__all__ = [
    "ConfigFileError",
    "ControllerOutput",
    "ControllerState",
    "EscConfig",
    "FirstOrderState",
    "GradientEstimate",
    "HammersteinPlant",
    "HAVE_COMPILED",
    "InsufficientSamplesError",
    "InvalidConfigError",
    "InvalidParameterError",
    "Mode",
    "PRESETS",
    "QuadraticMap",
    "RegressorSample",
    "RelayEscError",
    "RelayState",
    "RlsState",
    "RunMetrics",
    "Scenario",
    "StaticPlant",
    "TrajectoryRecord",
    "backend_name",
    "batch_ls",
    "compare_runs",
    "controller_init",
    "controller_step",
    "convergence_band",
    "draw_gains",
    "dynamic_plant",
    "expected_oscillation",
    "get_backend",
    "get_preset",
    "map_eval",
    "map_gradient",
    "median_metrics",
    "plant_step",
    "rls_init",
    "rls_update",
    "run_ensemble",
    "run_scenario",
    "static_plant",
    "switching_frequency",
]
