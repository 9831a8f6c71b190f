"""Cost-gradient estimation from relay excitation data.

A multivariable static map y = Q(theta) satisfies the chain rule
dy/dt = g . dtheta/dt with g the gradient at the current operating point.
When the input rates x = dtheta/dt are known (relay directions times
stochastic gains) and dy/dt is measured, g is identifiable from a sequence
of (x, dy/dt) pairs taken at different times, provided the rows differ,
which the gain randomization guarantees.

Two estimators are provided:

* ``rls_update``: recursive least squares with exponential forgetting,
  the form used inside the dynamic-mode control loop.
* ``batch_ls``: normal-equations solve over an explicit window, used for
  static-mode windows and as the reference the RLS is tested against.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InsufficientSamplesError, InvalidParameterError

# Condition number of X'X above which the window is treated as singular
# (double precision working limit).
COND_LIMIT = 1e12


@dataclass
class RegressorSample:
    """One observation: channel rates ``x`` and the measured cost rate."""

    x: np.ndarray
    dy_dt: float
    timestamp: float = 0.0

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        if self.x.ndim != 1:
            raise InvalidParameterError("regressor x must be a 1-D vector")


@dataclass
class GradientEstimate:
    """Estimated gradient plus estimator health.

    When ``degenerate`` is true the solve failed (rank-deficient window or
    collapsed covariance) and ``g_hat`` holds the last valid estimate
    rather than garbage or NaN.
    """

    g_hat: np.ndarray
    degenerate: bool = False
    covariance_trace: float = math.nan


@dataclass
class RlsState:
    """Recursive least-squares state.

    ``p_matrix`` is the inverse-covariance proxy P, kept symmetric positive
    definite by explicit symmetrization after every update. ``forgetting``
    is the exponential forgetting factor in (0, 1]; ``gamma`` the initial
    diagonal scale of P.
    """

    p_matrix: np.ndarray
    g: np.ndarray
    forgetting: float
    gamma: float

    @property
    def dim(self) -> int:
        return self.g.shape[0]


def rls_init(p: int, forgetting: float, gamma: float) -> RlsState:
    """Create a fresh RLS state: P = gamma * I, g = 0."""
    if not isinstance(p, (int, np.integer)) or p < 1:
        raise InvalidParameterError(f"channel count must be a positive integer, got {p!r}")
    if not 0.0 < forgetting <= 1.0:
        raise InvalidParameterError(f"forgetting factor must lie in (0, 1], got {forgetting}")
    if not gamma > 0.0:
        raise InvalidParameterError(f"initial covariance scale must be > 0, got {gamma}")
    return RlsState(
        p_matrix=float(gamma) * np.eye(p),
        g=np.zeros(p),
        forgetting=float(forgetting),
        gamma=float(gamma),
    )


def rls_update(state: RlsState, sample: RegressorSample) -> tuple[RlsState, GradientEstimate]:
    """One forgetting-factor RLS step.

    Computes the gain vector d = P x / (lambda + x' P x), the covariance
    update P <- (P - d x' P) / lambda (then symmetrized), the prediction
    error e = dy/dt - x' g and the coefficient update g <- g + e d.

    If the denominator has collapsed to zero (pathological covariance) the
    state is returned unchanged and the estimate is flagged degenerate.
    """
    x = np.asarray(sample.x, dtype=float)
    if x.shape != (state.dim,):
        raise InvalidParameterError(
            f"sample dimension {x.shape} does not match state dimension ({state.dim},)"
        )
    lam = state.forgetting
    p_mat = state.p_matrix
    px = p_mat @ x
    denom = lam + float(x @ px)
    if not denom > 0.0:
        return state, GradientEstimate(
            g_hat=state.g.copy(), degenerate=True, covariance_trace=float(np.trace(p_mat))
        )
    d = px / denom
    p_new = (p_mat - np.outer(d, x @ p_mat)) / lam
    p_new = 0.5 * (p_new + p_new.T)
    e = float(sample.dy_dt) - float(x @ state.g)
    g_new = state.g + e * d
    new_state = RlsState(p_matrix=p_new, g=g_new, forgetting=lam, gamma=state.gamma)
    est = GradientEstimate(
        g_hat=g_new.copy(), degenerate=False, covariance_trace=float(np.trace(p_new))
    )
    return new_state, est


def batch_ls(samples: list[RegressorSample]) -> GradientEstimate:
    """Solve the normal equations g = (X'X)^-1 X'Y over a sample window.

    Flags the estimate degenerate (g_hat = 0, trace = inf) when X'X is
    singular to working precision instead of returning garbage.
    """
    if len(samples) == 0:
        raise InsufficientSamplesError("batch_ls needs at least one sample")
    x_mat = np.vstack([np.asarray(s.x, dtype=float) for s in samples])
    p = x_mat.shape[1]
    if len(samples) < p:
        raise InsufficientSamplesError(
            f"batch_ls needs at least {p} samples for {p} channels, got {len(samples)}"
        )
    y = np.array([float(s.dy_dt) for s in samples])
    a = x_mat.T @ x_mat
    cond = np.linalg.cond(a)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        return GradientEstimate(g_hat=np.zeros(p), degenerate=True, covariance_trace=math.inf)
    g = np.linalg.solve(a, x_mat.T @ y)
    return GradientEstimate(
        g_hat=g, degenerate=False, covariance_trace=float(np.trace(np.linalg.inv(a)))
    )
