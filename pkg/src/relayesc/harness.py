"""Closed-loop experiment harness.

Wires a controller configuration to a plant (quadratic map, optionally
behind a first-order lag), runs the loop with a scheduled optimum that can
step mid-run, and reduces the trajectory to convergence and oscillation
metrics. Runs are deterministic given (scenario, seed) and the engine
backend is selectable (compiled or pure Python, identical results).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._kernel import get_backend
from .controller import EscConfig, Mode
from .errors import InvalidParameterError
from .plants import QuadraticMap

PLANT_KINDS = ("static", "hammerstein")


@dataclass(frozen=True)
class Scenario:
    """One experiment: controller config, plant, optimum schedule, length.

    theta_star_schedule is a sequence of (time, theta_star) entries with
    strictly increasing times starting at 0; each entry retargets the
    plant optimum from that time on. h_matrix None means the identity
    Hessian. gradient_oracle replaces the estimated gradient with the
    analytic one (test mode for the descent property).
    """

    config: EscConfig
    plant_kind: str
    theta_star_schedule: tuple[tuple[float, tuple[float, ...]], ...]
    duration: float
    tau_s: float | None = None
    h_matrix: tuple[tuple[float, ...], ...] | None = None
    gradient_oracle: bool = False

    def __post_init__(self):
        set_ = object.__setattr__
        p = self.config.p
        if self.plant_kind not in PLANT_KINDS:
            raise InvalidParameterError(
                f"plant_kind must be one of {PLANT_KINDS}, got {self.plant_kind!r}"
            )
        if self.plant_kind == "hammerstein":
            if self.tau_s is None or not float(self.tau_s) > 0.0:
                raise InvalidParameterError("hammerstein plant requires tau_s > 0")
            set_(self, "tau_s", float(self.tau_s))
        else:
            set_(self, "tau_s", None)

        sched = tuple(
            (float(t), tuple(float(v) for v in vec)) for t, vec in self.theta_star_schedule
        )
        set_(self, "theta_star_schedule", sched)
        if len(sched) == 0:
            raise InvalidParameterError("theta_star_schedule must not be empty")
        if sched[0][0] != 0.0:
            raise InvalidParameterError("first schedule entry must be at time 0")
        times = [t for t, _ in sched]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise InvalidParameterError("schedule times must be strictly increasing")
        if any(len(vec) != p for _, vec in sched):
            raise InvalidParameterError(f"every scheduled theta_star needs {p} entries")

        set_(self, "duration", float(self.duration))
        if not self.duration > 0.0:
            raise InvalidParameterError(f"duration must be > 0, got {self.duration}")

        if self.h_matrix is not None:
            h = tuple(tuple(float(v) for v in row) for row in self.h_matrix)
            set_(self, "h_matrix", h)
            QuadraticMap(theta_star=np.zeros(p), h_matrix=np.array(h))  # validates SPD

        set_(self, "gradient_oracle", bool(self.gradient_oracle))

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.config.dt))

    def hessian(self) -> np.ndarray:
        p = self.config.p
        return np.eye(p) if self.h_matrix is None else np.array(self.h_matrix, dtype=float)

    def quadratic_map(self, segment: int = -1) -> QuadraticMap:
        """Plant map for a schedule segment (default: the final one)."""
        return QuadraticMap(
            theta_star=np.array(self.theta_star_schedule[segment][1]), h_matrix=self.hessian()
        )


@dataclass
class TrajectoryRecord:
    """One closed-loop sample. q_true is the instantaneous cost at theta;
    y is what the controller measured (lagged for hammerstein plants)."""

    t: float
    theta: np.ndarray
    y: float
    q_true: float
    g_hat: np.ndarray
    epsilon: np.ndarray
    k_applied: np.ndarray
    switched: bool
    degenerate: bool = False


@dataclass
class RunMetrics:
    """Per-run summary.

    convergence_time[s] is the time after segment s starts until theta
    first enters the band (3x the expected steady gain times t_hold, per
    channel) and stays inside it for at least one full hold period; inf if
    that never happens. Settling is judged on sustained entry rather than
    the supremum over the whole remaining segment because the stochastic
    gain law has heavy-tailed oscillation peaks (occasional ill-conditioned
    estimation windows hold a wrong direction for a few periods), so some
    band exits keep occurring at steady state; the steady_mae metrics are
    what police that regime. steady_mae[s][j] is the mean
    |theta_j - theta*_j| over the final quarter of segment s.
    mean_switch_period averages the spacing of switch events inside those
    steady windows. final_cost_mean is the mean true cost over the last
    segment's steady window.
    """

    seed: int
    convergence_time: list[float]
    steady_mae: list[list[float]]
    mean_switch_period: float
    final_cost_mean: float
    n_steady_switches: int = 0
    degenerate_steps: int = 0


def convergence_band(config: EscConfig) -> np.ndarray:
    """Per-channel settling band: three times the expected steady-state
    oscillation. The adaptive law's gain at a vanishing gradient floors at
    2 k0 (1 + zeta/2) instead of k0, so its band scales accordingly."""
    k0 = np.asarray(config.k0, dtype=float)
    steady_gain = 2.0 * k0 * (1.0 + 0.5 * config.zeta) if config.adaptive else k0
    return 3.0 * steady_gain * config.t_hold


def _segment_bounds(seg_idx: np.ndarray) -> list[tuple[int, int]]:
    bounds = []
    start = 0
    for i in range(1, len(seg_idx)):
        if seg_idx[i] != seg_idx[i - 1]:
            bounds.append((start, i))
            start = i
    bounds.append((start, len(seg_idx)))
    return bounds


def _sustained_entry(within: np.ndarray, persist: int) -> int | None:
    """First index whose next `persist` samples (or all remaining ones)
    are all in-band; None if no such index."""
    n = len(within)
    ext = np.concatenate([within, np.ones(persist - 1, dtype=bool)]) if persist > 1 else within
    counts = np.convolve(ext.astype(np.int64), np.ones(persist, dtype=np.int64), mode="valid")
    hits = np.flatnonzero(counts == persist)
    return int(hits[0]) if hits.size else None


def compute_metrics(theta, q_true, switched, degenerate, seg_idx, theta_stars,
                    dt, band, hold_steps, seed) -> RunMetrics:
    """Reduce trajectory arrays to RunMetrics (see that class for meaning)."""
    bounds = _segment_bounds(seg_idx)
    persist = int(hold_steps) + 1  # samples spanning one full hold period
    conv_times: list[float] = []
    maes: list[list[float]] = []
    gap_samples: list[int] = []
    n_steady_switches = 0
    last_window = slice(0, 0)

    for (i0, i1) in bounds:
        seg = int(seg_idx[i0])
        target = theta_stars[seg]
        block = theta[i0:i1]
        within = np.all(np.abs(block - target) <= band, axis=1)
        entry = _sustained_entry(within, persist)
        conv_times.append(math.inf if entry is None else float(entry) * dt)

        seg_len = i1 - i0
        q_len = max(1, seg_len // 4)
        window = slice(i1 - q_len, i1)
        last_window = window
        maes.append(list(np.mean(np.abs(theta[window] - target), axis=0)))

        sw_idx = np.flatnonzero(switched[window])
        n_steady_switches += int(sw_idx.size)
        if sw_idx.size >= 2:
            gap_samples.extend(np.diff(sw_idx).tolist())

    mean_period = float(np.mean(gap_samples)) * dt if gap_samples else math.inf
    return RunMetrics(
        seed=seed,
        convergence_time=conv_times,
        steady_mae=maes,
        mean_switch_period=mean_period,
        final_cost_mean=float(np.mean(q_true[last_window])),
        n_steady_switches=n_steady_switches,
        degenerate_steps=int(np.sum(degenerate)),
    )


def engine_inputs(scenario: Scenario, seed: int | None = None):
    """Positional argument tuple for a backend's run_loop plus the output
    arrays it fills, keyed by record field. Split out of run_scenario so
    benchmarks can time the raw kernels."""
    cfg = scenario.config
    p = cfg.p
    dt = cfg.dt
    if seed is None:
        seed = cfg.seed
    n_steps = scenario.n_steps
    if n_steps < 1:
        raise InvalidParameterError("duration must cover at least one sample period")

    times = np.array([t for t, _ in scenario.theta_star_schedule])
    theta_stars = np.ascontiguousarray(
        [vec for _, vec in scenario.theta_star_schedule], dtype=np.float64
    )
    t_grid = np.arange(n_steps + 1) * dt
    seg_idx = np.ascontiguousarray(
        np.searchsorted(times, t_grid + 1e-9, side="right") - 1, dtype=np.int64
    )

    draws = np.random.default_rng(seed).random((n_steps + 1, p))
    dynamic_plant = scenario.plant_kind == "hammerstein"
    if dynamic_plant:
        a_filt = math.exp(-dt / scenario.tau_s)
        b_filt = 1.0 - a_filt
    else:
        a_filt = 0.0
        b_filt = 0.0

    outs = {
        "theta": np.empty((n_steps + 1, p)),
        "y": np.empty(n_steps + 1),
        "q": np.empty(n_steps + 1),
        "ghat": np.empty((n_steps + 1, p)),
        "eps": np.empty((n_steps + 1, p)),
        "k": np.empty((n_steps + 1, p)),
        "switched": np.zeros(n_steps + 1, dtype=np.uint8),
        "degenerate": np.zeros(n_steps + 1, dtype=np.uint8),
    }
    args = (
        p, n_steps,
        cfg.mode is Mode.STATIC, cfg.adaptive, cfg.minimize,
        scenario.gradient_oracle, dynamic_plant,
        dt, cfg.hold_steps, cfg.lam, cfg.gamma, cfg.zeta, a_filt, b_filt,
        np.ascontiguousarray(cfg.k0, dtype=np.float64),
        np.ascontiguousarray(cfg.theta_init, dtype=np.float64),
        np.ascontiguousarray(cfg.eps_init, dtype=np.float64),
        np.ascontiguousarray(scenario.hessian(), dtype=np.float64),
        theta_stars, seg_idx, np.ascontiguousarray(draws),
        outs["theta"], outs["y"], outs["q"], outs["ghat"], outs["eps"],
        outs["k"], outs["switched"], outs["degenerate"],
    )
    return args, outs, (t_grid, seg_idx, theta_stars, seed)


def run_scenario(scenario: Scenario, seed: int | None = None, backend: str | None = None):
    """Run one closed-loop experiment.

    Returns (records, metrics). Deterministic given (scenario, seed);
    estimator degeneracy is flagged on the affected records, never raised.
    """
    cfg = scenario.config
    args, outs, (t_grid, seg_idx, theta_stars, seed) = engine_inputs(scenario, seed)
    engine = get_backend(backend)
    engine.run_loop(*args)
    out_theta = outs["theta"]
    out_y = outs["y"]
    out_q = outs["q"]
    out_ghat = outs["ghat"]
    out_eps = outs["eps"]
    out_k = outs["k"]
    out_switched = outs["switched"]
    out_degenerate = outs["degenerate"]
    n_steps = scenario.n_steps
    dt = cfg.dt

    records = [
        TrajectoryRecord(
            t=float(t_grid[i]),
            theta=out_theta[i].copy(),
            y=float(out_y[i]),
            q_true=float(out_q[i]),
            g_hat=out_ghat[i].copy(),
            epsilon=out_eps[i].astype(int),
            k_applied=out_k[i].copy(),
            switched=bool(out_switched[i]),
            degenerate=bool(out_degenerate[i]),
        )
        for i in range(n_steps + 1)
    ]
    metrics = compute_metrics(
        out_theta, out_q, out_switched, out_degenerate, seg_idx, theta_stars,
        dt, convergence_band(cfg), cfg.hold_steps, seed,
    )
    return records, metrics


def run_ensemble(scenario: Scenario, seeds, backend: str | None = None) -> list[RunMetrics]:
    """Run the scenario over a seed list; metrics in seed order."""
    return [run_scenario(scenario, seed=s, backend=backend)[1] for s in seeds]


def median_metrics(metrics_list: list[RunMetrics]) -> dict:
    """Seed-ensemble medians, segment and channel structure preserved."""
    conv = np.median([m.convergence_time for m in metrics_list], axis=0)
    mae = np.median([m.steady_mae for m in metrics_list], axis=0)
    period = float(np.median([m.mean_switch_period for m in metrics_list]))
    cost = float(np.median([m.final_cost_mean for m in metrics_list]))
    return {
        "convergence_time": conv.tolist(),
        "steady_mae": mae.tolist(),
        "mean_switch_period": period,
        "final_cost_mean": cost,
    }


def compare_runs(metrics_list, labels=None) -> list[dict]:
    """Order runs by final-segment convergence time to expose the speed vs
    oscillation trade-off; needs at least two runs of the same scenario."""
    if len(metrics_list) < 2:
        raise InvalidParameterError("compare_runs needs at least two runs")
    if labels is None:
        labels = [f"run{i}" for i in range(len(metrics_list))]
    rows = []
    for label, m in zip(labels, metrics_list):
        rows.append(
            {
                "label": label,
                "convergence_time": m.convergence_time[-1],
                "steady_mae": list(m.steady_mae[-1]),
                "mean_switch_period": m.mean_switch_period,
                "final_cost_mean": m.final_cost_mean,
            }
        )
    rows.sort(key=lambda r: (r["convergence_time"], r["label"]))
    return rows


def format_comparison(rows: list[dict]) -> str:
    lines = [f"{'run':<18} {'conv_time':>12} {'steady_mae':>24} {'switch_period':>14}"]
    for r in rows:
        mae = ", ".join(f"{v:.5f}" for v in r["steady_mae"])
        lines.append(
            f"{r['label']:<18} {r['convergence_time']:>12.2f} {mae:>24} "
            f"{r['mean_switch_period']:>14.2f}"
        )
    return "\n".join(lines)
