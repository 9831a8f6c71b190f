"""Simulated systems under optimization.

Two plant flavors close the loop with the controller:

* a memoryless quadratic cost surface Q(theta) = 0.5 (theta - theta*)' H
  (theta - theta*), measured directly, and
* a Hammerstein arrangement where that scalar cost feeds a first-order lag
  x' = (Q - x)/tau_s, y = x, so the measurement trails the true cost.

Both are exposed behind a single ``measure(theta, dt) -> y`` contract so
the harness does not care which one it drives. The first-order step uses
the exact zero-order-hold discretization (closed form), not an Euler
approximation, so plant error never pollutes closed-loop tolerances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidParameterError


@dataclass(frozen=True, eq=False)
class QuadraticMap:
    """Quadratic cost surface with minimum theta_star and Hessian h_matrix."""

    theta_star: np.ndarray
    h_matrix: np.ndarray

    def __post_init__(self):
        theta_star = np.asarray(self.theta_star, dtype=float)
        h = np.asarray(self.h_matrix, dtype=float)
        object.__setattr__(self, "theta_star", theta_star)
        object.__setattr__(self, "h_matrix", h)
        p = theta_star.shape[0]
        if theta_star.ndim != 1:
            raise InvalidParameterError("theta_star must be a 1-D vector")
        if h.shape != (p, p):
            raise InvalidParameterError(f"h_matrix must be {p}x{p}, got {h.shape}")
        if not np.array_equal(h, h.T):
            raise InvalidParameterError("h_matrix must be exactly symmetric")
        try:
            np.linalg.cholesky(h)
        except np.linalg.LinAlgError:
            raise InvalidParameterError("h_matrix must be positive definite") from None

    @classmethod
    def identity(cls, theta_star) -> "QuadraticMap":
        theta_star = np.asarray(theta_star, dtype=float)
        return cls(theta_star=theta_star, h_matrix=np.eye(theta_star.shape[0]))

    @property
    def dim(self) -> int:
        return self.theta_star.shape[0]


def map_eval(qmap: QuadraticMap, theta) -> float:
    """Cost at theta; zero exactly at theta_star, positive elsewhere."""
    d = np.asarray(theta, dtype=float) - qmap.theta_star
    return float(0.5 * d @ (qmap.h_matrix @ d))


def map_gradient(qmap: QuadraticMap, theta) -> np.ndarray:
    """Analytic gradient H (theta - theta*). Test oracle only; the
    controller never sees it outside oracle-gradient runs."""
    d = np.asarray(theta, dtype=float) - qmap.theta_star
    return qmap.h_matrix @ d


@dataclass
class FirstOrderState:
    """Scalar first-order lag state with time constant tau_s."""

    x: float
    tau_s: float

    def __post_init__(self):
        if not self.tau_s > 0.0:
            raise InvalidParameterError(f"tau_s must be > 0, got {self.tau_s}")


def plant_step(state: FirstOrderState, q_in: float, dt: float) -> tuple[FirstOrderState, float]:
    """Exact ZOH step of x' = (q_in - x)/tau_s over dt; returns (state, y).

    x+ = a x + (1 - a) q_in with a = exp(-dt/tau_s); y samples the updated
    state, so the output reflects the input applied during the elapsed
    period.
    """
    if not dt > 0.0:
        raise InvalidParameterError(f"dt must be > 0, got {dt}")
    a = math.exp(-dt / state.tau_s)
    x_new = a * state.x + (1.0 - a) * q_in
    return FirstOrderState(x=x_new, tau_s=state.tau_s), x_new


def static_plant(qmap: QuadraticMap, theta) -> float:
    """Memoryless measurement: y = Q(theta)."""
    return map_eval(qmap, theta)


def dynamic_plant(
    qmap: QuadraticMap, state: FirstOrderState, theta, dt: float
) -> tuple[FirstOrderState, float]:
    """Hammerstein measurement: the static cost feeds the first-order lag."""
    q = map_eval(qmap, theta)
    return plant_step(state, q, dt)


class StaticPlant:
    """Stateful wrapper over the memoryless map (trivial state)."""

    def __init__(self, qmap: QuadraticMap):
        self.qmap = qmap

    def measure(self, theta, dt: float) -> float:
        return static_plant(self.qmap, theta)


class HammersteinPlant:
    """Quadratic map feeding a first-order lag.

    With x0 omitted the filter starts at equilibrium for the first theta it
    sees (x(0) = Q(theta(0))): the first measure() call initializes and
    returns that value without stepping, every later call advances the lag
    by one ZOH step.
    """

    def __init__(self, qmap: QuadraticMap, tau_s: float, x0: float | None = None):
        if not tau_s > 0.0:
            raise InvalidParameterError(f"tau_s must be > 0, got {tau_s}")
        self.qmap = qmap
        self.tau_s = float(tau_s)
        self.state = None if x0 is None else FirstOrderState(x=float(x0), tau_s=float(tau_s))

    def measure(self, theta, dt: float) -> float:
        q = map_eval(self.qmap, theta)
        if self.state is None:
            self.state = FirstOrderState(x=q, tau_s=self.tau_s)
            return q
        self.state, y = plant_step(self.state, q, dt)
        return y
