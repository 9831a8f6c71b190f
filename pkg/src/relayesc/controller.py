"""Relay extremum-seeking control block.

Each input channel is driven through an integrator by a relay direction
(+/-1) times a stochastic gain. Directions flip to oppose the sign of the
estimated cost gradient, but only after a minimum hold time T_d; gains are
redrawn every sample around nominal values so the gradient stays
identifiable. Static mode estimates the gradient from an exact solve over
the last p samples; dynamic mode runs forgetting-factor RLS and relies on
the hold time for time-scale separation from the plant.

The per-sample arithmetic lives in relayesc._kernel (shared with the fused
simulation loop); this module owns configuration, validation and the
public step API.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from ._kernel import pyloop
from .errors import InvalidConfigError, InvalidParameterError
from .estimator import GradientEstimate

_REL_TOL = 1e-9
# slack when checking a user-supplied forgetting factor against
# exp(-dt/t_hold); people type rounded values like 0.9048
_LAMBDA_RTOL = 1e-6


class Mode(enum.Enum):
    STATIC = "static"
    DYNAMIC = "dynamic"


@dataclass(frozen=True)
class EscConfig:
    """Complete controller configuration.

    t_hold and lam may be omitted: static mode derives t_hold = p*dt (the
    window-fill requirement), dynamic mode derives lam = exp(-dt/t_hold)
    with t_hold playing the role of the dominant plant time constant.
    """

    p: int
    k0: tuple[float, ...]
    dt: float
    t_hold: float | None = None
    lam: float | None = None
    gamma: float = 100.0
    mode: Mode = Mode.STATIC
    adaptive: bool = False
    zeta: float = 0.0
    seed: int = 0
    theta_init: tuple[float, ...] | None = None
    eps_init: tuple[int, ...] | None = None
    minimize: bool = True

    def __post_init__(self):
        violations = []
        set_ = object.__setattr__

        mode = self.mode
        if isinstance(mode, str):
            try:
                mode = Mode(mode.lower())
            except ValueError:
                violations.append(f"mode must be 'static' or 'dynamic', got {self.mode!r}")
                mode = Mode.STATIC
        set_(self, "mode", mode)

        if not isinstance(self.p, (int, np.integer)) or self.p < 1:
            violations.append(f"p must be a positive integer, got {self.p!r}")
            raise InvalidConfigError(violations)
        p = int(self.p)
        set_(self, "p", p)

        try:
            k0 = tuple(float(v) for v in self.k0)
        except TypeError:
            k0 = (float(self.k0),) * p
        set_(self, "k0", k0)
        if len(k0) != p:
            violations.append(f"k0 must have {p} entries, got {len(k0)}")
        if any(v < 0.0 for v in k0):
            violations.append("k0 entries must be nonnegative")

        dt = float(self.dt)
        set_(self, "dt", dt)
        if not dt > 0.0:
            violations.append(f"dt must be > 0, got {dt}")

        t_hold = self.t_hold
        if t_hold is None:
            if self.mode is Mode.STATIC and dt > 0.0:
                t_hold = p * dt
            else:
                violations.append("t_hold is required in dynamic mode")
                t_hold = float("nan")
        t_hold = float(t_hold)
        set_(self, "t_hold", t_hold)
        if not t_hold > 0.0:
            violations.append(f"t_hold must be > 0, got {t_hold}")
        elif dt > 0.0:
            if self.mode is Mode.STATIC:
                if abs(t_hold - p * dt) > _REL_TOL * max(t_hold, p * dt):
                    violations.append(
                        f"static mode requires t_hold = p*dt = {p * dt}, got {t_hold}"
                    )
            else:
                if dt > t_hold / p * (1.0 + _REL_TOL):
                    violations.append(
                        f"dynamic mode requires dt <= t_hold/p = {t_hold / p}, got dt={dt}"
                    )

        lam = self.lam
        if lam is None:
            lam = math.exp(-dt / t_hold) if (self.mode is Mode.DYNAMIC and t_hold > 0.0) else 1.0
        lam = float(lam)
        set_(self, "lam", lam)
        if not 0.0 < lam <= 1.0:
            violations.append(f"forgetting factor must lie in (0, 1], got {lam}")
        elif self.mode is Mode.DYNAMIC and t_hold > 0.0 and dt > 0.0:
            expected = math.exp(-dt / t_hold)
            if abs(lam - expected) > _LAMBDA_RTOL * expected:
                violations.append(
                    f"dynamic mode requires lambda = exp(-dt/t_hold) = {expected:.9f}, got {lam}"
                )

        set_(self, "gamma", float(self.gamma))
        if not self.gamma > 0.0:
            violations.append(f"gamma must be > 0, got {self.gamma}")

        set_(self, "zeta", float(self.zeta))
        if self.zeta < 0.0:
            violations.append(f"zeta must be >= 0, got {self.zeta}")

        theta_init = self.theta_init
        theta_init = (0.0,) * p if theta_init is None else tuple(float(v) for v in theta_init)
        set_(self, "theta_init", theta_init)
        if len(theta_init) != p:
            violations.append(f"theta_init must have {p} entries, got {len(theta_init)}")

        eps_init = self.eps_init
        eps_init = (1,) * p if eps_init is None else tuple(int(v) for v in eps_init)
        set_(self, "eps_init", eps_init)
        if len(eps_init) != p:
            violations.append(f"eps_init must have {p} entries, got {len(eps_init)}")
        elif any(e not in (-1, 1) for e in eps_init):
            violations.append("eps_init entries must be -1 or +1")

        set_(self, "adaptive", bool(self.adaptive))
        set_(self, "minimize", bool(self.minimize))
        set_(self, "seed", int(self.seed))

        if violations:
            raise InvalidConfigError(violations)

    @property
    def hold_steps(self) -> int:
        """Hold time as a sample count; the T >= T_d guard compares counts
        so float accumulation can never miss the boundary."""
        return int(math.ceil(self.t_hold / self.dt - 1e-9))


@dataclass
class RelayState:
    """Snapshot of the relay bank: directions, applied gains, hold timer."""

    epsilon: np.ndarray
    k_applied: np.ndarray
    timer: float


@dataclass
class ControllerOutput:
    """Immutable per-sample snapshot handed to loggers and the harness."""

    theta: np.ndarray
    theta_dot: np.ndarray
    g_hat: GradientEstimate
    relay: RelayState
    switched: bool = False


class ControllerState:
    """Exclusive-owner state for one control loop (not thread-shared)."""

    def __init__(self, config: EscConfig, core, rng):
        self.config = config
        self.core = core
        self.rng = rng
        self.step_idx = 0

    @property
    def theta(self) -> np.ndarray:
        return np.array(self.core.theta)

    @property
    def theta_dot(self) -> np.ndarray:
        return np.array(self.core.x)

    @property
    def g_hat(self) -> np.ndarray:
        return np.array(self.core.ghat)


def controller_init(config: EscConfig, rng=None) -> ControllerState:
    """Set up relays (all +1 unless configured), RLS/window estimator and
    the first stochastic gains; theta starts at config.theta_init."""
    if rng is None:
        rng = np.random.default_rng(config.seed)
    draw_row = [float(v) for v in rng.random(config.p)]
    core = pyloop.core_init(
        config.p,
        config.mode is Mode.STATIC,
        config.adaptive,
        config.minimize,
        config.dt,
        config.hold_steps,
        config.lam,
        config.gamma,
        config.zeta,
        config.k0,
        config.theta_init,
        [float(e) for e in config.eps_init],
        draw_row,
    )
    return ControllerState(config, core, rng)


def _snapshot(state: ControllerState, switched: bool, degenerate: bool) -> ControllerOutput:
    core = state.core
    cfg = state.config
    if cfg.mode is Mode.DYNAMIC:
        trace = 0.0
        for j in range(cfg.p):
            trace += core.p_mat[j][j]
    else:
        trace = math.nan
    est = GradientEstimate(
        g_hat=np.array(core.ghat), degenerate=degenerate, covariance_trace=trace
    )
    relay = RelayState(
        epsilon=np.array([int(e) for e in core.eps]),
        k_applied=np.array(core.k),
        timer=core.hold_count * cfg.dt,
    )
    return ControllerOutput(
        theta=np.array(core.theta),
        theta_dot=np.array(core.x),
        g_hat=est,
        relay=relay,
        switched=switched,
    )


def controller_step(state: ControllerState, y_measured: float, rng=None):
    """Advance one sample period with the latest cost measurement.

    Protocol: after each call the caller applies out.theta_dot for one
    period, so the next measurement belongs to out.theta + dt*out.theta_dot;
    feed that measurement to the next call, which catches theta up across
    the elapsed period before using it. The first call only registers y at
    the initial inputs and returns the init snapshot (there is no previous
    measurement to difference, so the estimator cannot update and no
    randomness is consumed). Every later call differences the measurement
    into dy/dt, updates the gradient estimate against the previous rate
    vector, applies the hold-time switch rule, draws fresh gains and
    reports the new rates. Estimator degeneracy never aborts the loop; it
    is flagged on the returned estimate while the last valid gradient is
    held.
    """
    if rng is None:
        rng = state.rng
    core = state.core
    if not core.primed:
        pyloop.core_prime(core, float(y_measured))
        return state, _snapshot(state, switched=False, degenerate=False)
    pyloop.core_advance(core)
    draw_row = [float(v) for v in rng.random(state.config.p)]
    switched, degen = pyloop.core_update(core, float(y_measured), draw_row)
    state.step_idx += 1
    return state, _snapshot(state, switched=bool(switched), degenerate=bool(degen))


def draw_gains(config: EscConfig, g_hat, rng) -> np.ndarray:
    """Stochastic relay gains for one sample.

    Non-adaptive: k = 2 k0 delta with delta uniform in [0, 1), so the mean
    applied gain equals the nominal k0. Adaptive: k = 2 k0 (1 + |g_hat| +
    zeta delta), large while the estimated gradient is large, shrinking to
    the 2 k0 floor at the optimum while zeta keeps a little excitation.
    """
    delta = rng.random(config.p)
    k0 = np.asarray(config.k0, dtype=float)
    if config.adaptive:
        return 2.0 * k0 * (1.0 + np.abs(np.asarray(g_hat, dtype=float)) + config.zeta * delta)
    return 2.0 * k0 * delta


def switching_frequency(t_hold: float) -> float:
    """Steady oscillation frequency implied by the hold time: 1/(2 T_d)."""
    if not t_hold > 0.0:
        raise InvalidParameterError(f"t_hold must be > 0, got {t_hold}")
    return 1.0 / (2.0 * t_hold)


def expected_oscillation(k0, t_hold: float) -> np.ndarray:
    """Expected steady-state input fluctuation around the optimum, k0 * T_d
    per channel; the harness scales its convergence bands from this."""
    return np.asarray(k0, dtype=float) * float(t_hold)
