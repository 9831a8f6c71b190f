"""Built-in experiment scenarios.

Three two-channel benchmarks on the symmetric quadratic surface with the
optimum stepped from [0.2, 0.7] to [0.8, 0.3] mid-run:

* static-fig4: memoryless plant, K0 = 0.01, hold time of two samples.
* dynamic-fig5: first-order plant (tau_s = 10 s), hold time 10 s, RLS
  forgetting exp(-0.1), K0 = 0.01.
* adaptive-fig6: the dynamic setup with gradient-scaled gains
  (zeta = 0.001, K0 = 0.0035 nominal).

Durations leave every segment's final quarter well past convergence for
all gains swept in the comparison experiments.
"""

from __future__ import annotations

from .controller import EscConfig, Mode
from .harness import Scenario

THETA_START = (0.2, 0.7)
THETA_STEPPED = (0.8, 0.3)


def static_fig4(seed: int = 1) -> Scenario:
    config = EscConfig(
        p=2,
        k0=(0.01, 0.01),
        dt=1.0,
        mode=Mode.STATIC,
        gamma=100.0,
        seed=seed,
        theta_init=THETA_START,
    )
    return Scenario(
        config=config,
        plant_kind="static",
        theta_star_schedule=((0.0, THETA_START), (1500.0, THETA_STEPPED)),
        duration=3000.0,
    )


def dynamic_fig5(seed: int = 1) -> Scenario:
    config = EscConfig(
        p=2,
        k0=(0.01, 0.01),
        dt=1.0,
        t_hold=10.0,
        mode=Mode.DYNAMIC,
        gamma=100.0,
        seed=seed,
        theta_init=THETA_START,
    )
    return Scenario(
        config=config,
        plant_kind="hammerstein",
        tau_s=10.0,
        theta_star_schedule=((0.0, THETA_START), (1000.0, THETA_STEPPED)),
        duration=2000.0,
    )


def adaptive_fig6(seed: int = 1) -> Scenario:
    base = dynamic_fig5(seed)
    config = EscConfig(
        p=2,
        k0=(0.0035, 0.0035),
        dt=1.0,
        t_hold=10.0,
        mode=Mode.DYNAMIC,
        gamma=100.0,
        adaptive=True,
        zeta=0.001,
        seed=seed,
        theta_init=THETA_START,
    )
    return Scenario(
        config=config,
        plant_kind=base.plant_kind,
        tau_s=base.tau_s,
        theta_star_schedule=base.theta_star_schedule,
        duration=base.duration,
    )


PRESETS = {
    "static-fig4": static_fig4,
    "dynamic-fig5": dynamic_fig5,
    "adaptive-fig6": adaptive_fig6,
}

PRESET_SUMMARIES = {
    "static-fig4": "static quadratic map, p=2, K0=0.01, hold 2 samples, optimum stepped mid-run",
    "dynamic-fig5": "first-order plant tau_s=10, K0=0.01, hold 10 s, RLS forgetting exp(-0.1)",
    "adaptive-fig6": "dynamic scenario with gradient-scaled gains, K0=0.0035, zeta=0.001",
}


def get_preset(name: str, seed: int = 1) -> Scenario:
    try:
        factory = PRESETS[name]
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; available: {', '.join(sorted(PRESETS))}") from None
    return factory(seed)
