"""Scenario config files and run outputs.

Config files are INI-style text with two sections. Vectors are
comma-separated decimals; the optimum schedule is semicolon-separated
"time: vector" entries::

    [controller]
    p = 2
    k0 = 0.01, 0.01
    dt = 1.0
    t_hold = 2.0
    mode = static
    ...

    [scenario]
    plant = static
    theta_star_schedule = 0.0: 0.2, 0.7; 1500.0: 0.8, 0.3
    duration = 3000.0

Unknown keys or sections are errors (catches typos). Floats are written
with repr so a file written by write_config parses back to an identical
Scenario. Fields outside the file schema (custom Hessian, eps_init,
gradient_oracle) are library-only and are not serialized.

Trajectory CSV columns, in order:
t, theta_1..p, y, q_true, ghat_1..p, eps_1..p, k_1..p, switched
with full-double-precision decimals and newline line endings.
"""

from __future__ import annotations

import configparser
import csv
import json
import math
from pathlib import Path

from .controller import EscConfig, Mode
from .errors import ConfigFileError
from .harness import RunMetrics, Scenario, TrajectoryRecord

_CONTROLLER_KEYS = {
    "p", "k0", "dt", "t_hold", "lambda", "gamma", "mode", "adaptive",
    "zeta", "seed", "theta_init", "minimize",
}
_SCENARIO_KEYS = {"plant", "tau_s", "theta_star_schedule", "duration"}
_BOOL_VALUES = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


def _parse_float(section, key, raw):
    try:
        return float(raw)
    except ValueError:
        raise ConfigFileError(f"[{section}] {key}: cannot parse {raw!r} as a number") from None


def _parse_int(section, key, raw):
    try:
        return int(raw)
    except ValueError:
        raise ConfigFileError(f"[{section}] {key}: cannot parse {raw!r} as an integer") from None


def _parse_bool(section, key, raw):
    try:
        return _BOOL_VALUES[raw.strip().lower()]
    except KeyError:
        raise ConfigFileError(f"[{section}] {key}: cannot parse {raw!r} as a boolean") from None


def _parse_vector(section, key, raw):
    try:
        return tuple(float(tok) for tok in raw.split(","))
    except ValueError:
        raise ConfigFileError(f"[{section}] {key}: cannot parse {raw!r} as a vector") from None


def _parse_schedule(raw):
    entries = []
    for chunk in raw.split(";"):
        chunk = chunk.strip()
        if not chunk:
            continue
        if ":" not in chunk:
            raise ConfigFileError(
                f"[scenario] theta_star_schedule: entry {chunk!r} is not 'time: vector'"
            )
        t_str, vec_str = chunk.split(":", 1)
        entries.append(
            (
                _parse_float("scenario", "theta_star_schedule", t_str.strip()),
                _parse_vector("scenario", "theta_star_schedule", vec_str),
            )
        )
    if not entries:
        raise ConfigFileError("[scenario] theta_star_schedule is empty")
    return tuple(entries)


def load_scenario(path) -> Scenario:
    """Parse a config file into a Scenario.

    Raises ConfigFileError for file/syntax/key problems; invariant
    violations surface as InvalidConfigError / InvalidParameterError from
    the underlying types.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigFileError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        with open(path, encoding="utf-8") as fh:
            parser.read_file(fh)
    except configparser.Error as exc:
        raise ConfigFileError(f"cannot parse {path}: {exc}") from None

    unknown_sections = set(parser.sections()) - {"controller", "scenario"}
    if unknown_sections:
        raise ConfigFileError(f"unknown sections: {', '.join(sorted(unknown_sections))}")
    for section, allowed in (("controller", _CONTROLLER_KEYS), ("scenario", _SCENARIO_KEYS)):
        if not parser.has_section(section):
            raise ConfigFileError(f"missing [{section}] section")
        unknown = set(parser[section]) - allowed
        if unknown:
            raise ConfigFileError(
                f"unknown keys in [{section}]: {', '.join(sorted(unknown))}"
            )

    ctrl = parser["controller"]
    for key in ("p", "k0", "dt", "mode"):
        if key not in ctrl:
            raise ConfigFileError(f"[controller] missing required key {key!r}")
    scen = parser["scenario"]
    for key in ("plant", "theta_star_schedule", "duration"):
        if key not in scen:
            raise ConfigFileError(f"[scenario] missing required key {key!r}")

    mode_raw = ctrl["mode"].strip().lower()
    if mode_raw not in ("static", "dynamic"):
        raise ConfigFileError(f"[controller] mode must be 'static' or 'dynamic', got {mode_raw!r}")

    config = EscConfig(
        p=_parse_int("controller", "p", ctrl["p"]),
        k0=_parse_vector("controller", "k0", ctrl["k0"]),
        dt=_parse_float("controller", "dt", ctrl["dt"]),
        t_hold=_parse_float("controller", "t_hold", ctrl["t_hold"]) if "t_hold" in ctrl else None,
        lam=_parse_float("controller", "lambda", ctrl["lambda"]) if "lambda" in ctrl else None,
        gamma=_parse_float("controller", "gamma", ctrl["gamma"]) if "gamma" in ctrl else 100.0,
        mode=Mode(mode_raw),
        adaptive=_parse_bool("controller", "adaptive", ctrl["adaptive"])
        if "adaptive" in ctrl else False,
        zeta=_parse_float("controller", "zeta", ctrl["zeta"]) if "zeta" in ctrl else 0.0,
        seed=_parse_int("controller", "seed", ctrl["seed"]) if "seed" in ctrl else 0,
        theta_init=_parse_vector("controller", "theta_init", ctrl["theta_init"])
        if "theta_init" in ctrl else None,
        minimize=_parse_bool("controller", "minimize", ctrl["minimize"])
        if "minimize" in ctrl else True,
    )

    plant = scen["plant"].strip().lower()
    return Scenario(
        config=config,
        plant_kind=plant,
        tau_s=_parse_float("scenario", "tau_s", scen["tau_s"]) if "tau_s" in scen else None,
        theta_star_schedule=_parse_schedule(scen["theta_star_schedule"]),
        duration=_parse_float("scenario", "duration", scen["duration"]),
    )


def _fmt_vector(vec) -> str:
    return ", ".join(repr(float(v)) for v in vec)


def write_config(scenario: Scenario, path) -> None:
    """Write a Scenario as a config file (inverse of load_scenario)."""
    cfg = scenario.config
    parser = configparser.ConfigParser(interpolation=None)
    parser["controller"] = {
        "p": str(cfg.p),
        "k0": _fmt_vector(cfg.k0),
        "dt": repr(cfg.dt),
        "t_hold": repr(cfg.t_hold),
        "lambda": repr(cfg.lam),
        "gamma": repr(cfg.gamma),
        "mode": cfg.mode.value,
        "adaptive": "true" if cfg.adaptive else "false",
        "zeta": repr(cfg.zeta),
        "seed": str(cfg.seed),
        "theta_init": _fmt_vector(cfg.theta_init),
        "minimize": "true" if cfg.minimize else "false",
    }
    scen = {
        "plant": scenario.plant_kind,
        "theta_star_schedule": "; ".join(
            f"{t!r}: {_fmt_vector(vec)}" for t, vec in scenario.theta_star_schedule
        ),
        "duration": repr(scenario.duration),
    }
    if scenario.tau_s is not None:
        scen["tau_s"] = repr(scenario.tau_s)
    parser["scenario"] = scen
    with open(path, "w", encoding="utf-8") as fh:
        parser.write(fh)


def csv_header(p: int) -> list[str]:
    cols = ["t"]
    cols += [f"theta_{j}" for j in range(1, p + 1)]
    cols += ["y", "q_true"]
    cols += [f"ghat_{j}" for j in range(1, p + 1)]
    cols += [f"eps_{j}" for j in range(1, p + 1)]
    cols += [f"k_{j}" for j in range(1, p + 1)]
    cols.append("switched")
    return cols


def write_trajectory_csv(records: list[TrajectoryRecord], path) -> None:
    """Write records with the fixed column set, repr-precision decimals."""
    if not records:
        raise ConfigFileError("no records to write")
    p = len(records[0].theta)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(csv_header(p))
        for r in records:
            row = [repr(float(r.t))]
            row += [repr(float(v)) for v in r.theta]
            row += [repr(float(r.y)), repr(float(r.q_true))]
            row += [repr(float(v)) for v in r.g_hat]
            row += [str(int(v)) for v in r.epsilon]
            row += [repr(float(v)) for v in r.k_applied]
            row.append("1" if r.switched else "0")
            writer.writerow(row)


def _finite_or_none(v: float):
    return None if (v is None or not math.isfinite(v)) else float(v)


def metrics_to_dict(metrics: RunMetrics) -> dict:
    """JSON-ready view of RunMetrics (non-converged segments become null)."""
    return {
        "seed": metrics.seed,
        "convergence_time": [_finite_or_none(v) for v in metrics.convergence_time],
        "steady_mae": [[float(v) for v in seg] for seg in metrics.steady_mae],
        "mean_switch_period": _finite_or_none(metrics.mean_switch_period),
        "final_cost_mean": float(metrics.final_cost_mean),
    }


def write_metrics_json(metrics: RunMetrics, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(metrics_to_dict(metrics), fh, indent=2, sort_keys=True)
        fh.write("\n")
