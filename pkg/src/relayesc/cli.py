"""Command-line front end.

    relayesc run <config-or-preset> [--seed N] [--out DIR] [--backend B]
    relayesc sweep <config-or-preset> --param NAME --values V1,V2,...
                   [--seeds N] [--out DIR] [--backend B]
    relayesc presets [--write DIR]

``run`` writes trajectory.csv and metrics.json into the output directory.
``sweep`` reruns the scenario across parameter values and seeds, printing
and saving a median table (sweep.json). Exit codes: 0 success, 2 config
parse error, 3 invariant violation, 4 I/O failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

import numpy as np

from .controller import Mode
from .errors import ConfigFileError, InvalidConfigError, InvalidParameterError
from .harness import Scenario, median_metrics, run_scenario
from .presets import PRESET_SUMMARIES, PRESETS, get_preset
from .runio import load_scenario, metrics_to_dict, write_config, write_metrics_json, \
    write_trajectory_csv

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

SWEEP_PARAMS = ("k0", "t_hold", "zeta", "dt")


def _resolve_scenario(spec: str) -> Scenario:
    if spec in PRESETS:
        return get_preset(spec)
    return load_scenario(spec)


def _apply_param(scenario: Scenario, param: str, value: float) -> Scenario:
    """Rebuild the scenario with one swept parameter.

    Derived quantities follow: sweeping t_hold (dynamic) rederives the
    forgetting factor, sweeping dt in static mode rederives t_hold = p*dt.
    """
    cfg = scenario.config
    if param == "k0":
        new_cfg = dataclasses.replace(cfg, k0=(float(value),) * cfg.p)
    elif param == "zeta":
        new_cfg = dataclasses.replace(cfg, zeta=float(value))
    elif param == "t_hold":
        new_cfg = dataclasses.replace(cfg, t_hold=float(value), lam=None)
    elif param == "dt":
        if cfg.mode is Mode.STATIC:
            new_cfg = dataclasses.replace(cfg, dt=float(value), t_hold=None, lam=None)
        else:
            new_cfg = dataclasses.replace(cfg, dt=float(value), lam=None)
    else:
        raise InvalidParameterError(f"cannot sweep parameter {param!r}")
    return dataclasses.replace(scenario, config=new_cfg)


def cmd_run(args) -> int:
    scenario = _resolve_scenario(args.config)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    records, metrics = run_scenario(scenario, seed=args.seed, backend=args.backend)
    write_trajectory_csv(records, out_dir / "trajectory.csv")
    write_metrics_json(metrics, out_dir / "metrics.json")
    summary = metrics_to_dict(metrics)
    print(f"wrote {out_dir / 'trajectory.csv'} ({len(records)} samples)")
    print(f"wrote {out_dir / 'metrics.json'}")
    print(f"convergence_time: {summary['convergence_time']}")
    print(f"steady_mae:       {summary['steady_mae']}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    scenario = _resolve_scenario(args.config)
    try:
        values = [float(tok) for tok in args.values.split(",") if tok.strip()]
    except ValueError:
        raise ConfigFileError(f"--values: cannot parse {args.values!r}") from None
    if not values:
        raise ConfigFileError("--values is empty")
    base_seed = scenario.config.seed
    seeds = [base_seed + i for i in range(args.seeds)]

    rows = []
    medians = []
    for value in values:
        variant = _apply_param(scenario, args.param, value)
        per_seed = []
        for seed in seeds:
            _, metrics = run_scenario(variant, seed=seed, backend=args.backend)
            per_seed.append(metrics)
            rows.append({"param": args.param, "value": value, **metrics_to_dict(metrics)})
        med = median_metrics(per_seed)
        medians.append({"param": args.param, "value": value, **med})

    header = (
        f"{args.param:>10} {'conv_time':>12} {'steady_mae (final seg)':>26} "
        f"{'switch_period':>14} {'final_cost':>12}"
    )
    print(header)
    for med in medians:
        mae = ", ".join(f"{v:.5f}" for v in med["steady_mae"][-1])
        conv = med["convergence_time"][-1]
        conv_s = f"{conv:.2f}" if np.isfinite(conv) else "never"
        period = med["mean_switch_period"]
        period_s = f"{period:.2f}" if np.isfinite(period) else "n/a"
        print(
            f"{med['value']:>10g} {conv_s:>12} {mae:>26} {period_s:>14} "
            f"{med['final_cost_mean']:>12.3e}"
        )

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    sweep_path = out_dir / "sweep.json"
    with open(sweep_path, "w", encoding="utf-8") as fh:
        json.dump(
            {
                "param": args.param,
                "values": values,
                "seeds": seeds,
                "rows": rows,
                "medians": [
                    {
                        **m,
                        "convergence_time": [
                            None if not np.isfinite(v) else v for v in m["convergence_time"]
                        ],
                        "mean_switch_period": None
                        if not np.isfinite(m["mean_switch_period"])
                        else m["mean_switch_period"],
                    }
                    for m in medians
                ],
            },
            fh,
            indent=2,
            sort_keys=True,
        )
        fh.write("\n")
    print(f"wrote {sweep_path}")
    return EXIT_OK


def cmd_presets(args) -> int:
    for name in sorted(PRESETS):
        print(f"{name:<16} {PRESET_SUMMARIES[name]}")
    if args.write is not None:
        out_dir = Path(args.write)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name in sorted(PRESETS):
            path = out_dir / f"{name}.cfg"
            write_config(get_preset(name), path)
            print(f"wrote {path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="relayesc",
        description="Relay-based multivariable extremum-seeking simulation harness",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario, write trajectory.csv + metrics.json")
    p_run.add_argument("config", help="config file path or preset name")
    p_run.add_argument("--seed", type=int, default=None, help="override the config seed")
    p_run.add_argument("--out", default=".", help="output directory (default: current)")
    p_run.add_argument("--backend", choices=("auto", "python", "cython"), default=None)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="rerun a scenario across parameter values and seeds")
    p_sweep.add_argument("config", help="config file path or preset name")
    p_sweep.add_argument("--param", required=True, choices=SWEEP_PARAMS)
    p_sweep.add_argument("--values", required=True, help="comma-separated values")
    p_sweep.add_argument("--seeds", type=int, default=1, help="number of seeds (default 1)")
    p_sweep.add_argument("--out", default=".", help="output directory (default: current)")
    p_sweep.add_argument("--backend", choices=("auto", "python", "cython"), default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_presets = sub.add_parser("presets", help="list built-in scenarios")
    p_presets.add_argument("--write", default=None, help="also write preset config files here")
    p_presets.set_defaults(func=cmd_presets)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigFileError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (InvalidConfigError, InvalidParameterError) as exc:
        print(f"invalid configuration: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
