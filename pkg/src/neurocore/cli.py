"""Command-line entry point.

Subcommands:

    regimes            run the six firing-regime demonstrations on both
                       backends; write voltage traces and a detection report
    errt               spike-timing accuracy of the fixed-point backend
                       against the float reference (RS and FS)
    gonogo             run the three dopamine conditions of the Go/No-Go
                       network; write rasters, CSVs and a rates summary
    validate-schedule  check a block schedule against the one-state-word rule

Exit codes: 0 success, 1 runtime or check failure, 2 usage/config errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

from . import analysis, regimes
from .bg import CONDITIONS, DELTA_DOP_BY_CONDITION, run_network_condition
from .config import default_config_text, load_default_config, parse_config
from .network import ConfigError
from .neuron import DT_MS, SimulationError
from .schedule import (
    ScheduleError,
    izhikevich_schedule,
    parse_schedule,
    validate_schedule,
)

ENV_SEED = "NEUROCORE_SEED"
ENV_OUT = "NEUROCORE_OUT"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neurocore",
        description="Fixed-point neurocore emulator and Go/No-Go experiment runner.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_reg = sub.add_parser("regimes", help="run the firing-regime demonstrations")
    p_reg.add_argument("--duration-ms", type=float, default=1000.0)
    p_reg.add_argument("--out", default=None, help="output directory")
    p_reg.set_defaults(func=cmd_regimes)

    p_errt = sub.add_parser("errt", help="spike-timing accuracy, fixed vs float")
    p_errt.add_argument("--duration-ms", type=float, default=1000.0)
    p_errt.set_defaults(func=cmd_errt)

    p_go = sub.add_parser("gonogo", help="run the Go/No-Go dopamine conditions")
    p_go.add_argument("--config", default=None, help="network config file")
    p_go.add_argument("--seed", type=int, default=None)
    p_go.add_argument("--backend", choices=("fixed", "float"), default=None)
    p_go.add_argument("--duration-ms", type=float, default=None)
    p_go.add_argument("--threads", type=int, default=None)
    p_go.add_argument("--out", default=None, help="output directory")
    p_go.set_defaults(func=cmd_gonogo)

    p_val = sub.add_parser("validate-schedule", help="validate a block schedule")
    p_val.add_argument("--schedule", default=None, help="schedule file (default: shipped)")
    p_val.set_defaults(func=cmd_validate_schedule)

    p_cfg = sub.add_parser("print-config", help="print the shipped default config")
    p_cfg.set_defaults(func=cmd_print_config)
    return parser


def _out_dir(flag_value: str | None) -> Path:
    out = Path(flag_value or os.environ.get(ENV_OUT, "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_regimes(args) -> int:
    out = _out_dir(args.out)
    all_passed = True
    report_lines = []
    for backend in ("float", "fixed"):
        runs = regimes.run_demonstrations(backend, args.duration_ms)
        for name, run in runs.items():
            trace_path = out / f"regime_{name.lower()}_{backend}.csv"
            lines = ["step,time_ms,v_mv"]
            lines.extend(
                f"{t},{t * DT_MS:g},{v:.6f}" for t, v in enumerate(run.v_mv)
            )
            trace_path.write_text("\n".join(lines) + "\n", newline="\n")
        for check in regimes.classify_runs(runs, backend):
            status = "PASS" if check.passed else "FAIL"
            report_lines.append(f"{status}  {check.regime:8s} [{backend}]  {check.detail}")
            all_passed &= check.passed
    report = "\n".join(report_lines) + "\n"
    (out / "regimes_report.txt").write_text(report, newline="\n")
    print(report, end="")
    print(f"traces and report written to {out}")
    return 0 if all_passed else 1


def cmd_errt(args) -> int:
    print("spike-timing accuracy (reference: float backend)")
    print(f"stimulus: constant I={regimes.DEMO_CURRENT:g}, "
          f"{args.duration_ms:g} ms, dt = {DT_MS} ms")
    for name, (ref, test) in regimes.timing_comparison(args.duration_ms).items():
        value = analysis.errt(ref, test)
        gap_ref, gap_test = ref.intervals()[0], test.intervals()[0]
        print(f"{name}: {value:.3f}%   (first interval {gap_ref:g} ms float, "
              f"{gap_test:g} ms fixed)")
    return 0


def cmd_gonogo(args) -> int:
    config = parse_config(args.config) if args.config else load_default_config()
    seed = args.seed
    if seed is None and ENV_SEED in os.environ:
        try:
            seed = int(os.environ[ENV_SEED])
        except ValueError as exc:
            raise ConfigError(f"{ENV_SEED}={os.environ[ENV_SEED]!r} is not an integer") from exc
    if seed is not None:
        config.seed = seed
    if args.backend is not None:
        config.backend = args.backend
    if args.duration_ms is not None:
        config.duration_ms = args.duration_ms
    if args.threads is not None:
        config.threads = args.threads
    out = Path(args.out or os.environ.get(ENV_OUT) or config.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    populations = config.population_specs()
    connections = config.connection_specs()
    sizes = {name: size for name, (size, _) in config.populations.items()}
    recorded = list(config.record) if config.record else list(config.populations)

    summary = {
        "metadata": {
            "seed": config.seed,
            "backend": config.backend,
            "duration_ms": config.duration_ms,
            "settle_ms": config.settle_ms,
        },
        "conditions": {},
    }
    t0 = time.perf_counter()
    total_steps = 0
    for condition in CONDITIONS:
        result = run_network_condition(
            populations,
            connections,
            condition,
            DELTA_DOP_BY_CONDITION[condition],
            seed=config.seed,
            backend=config.backend,
            duration_ms=config.duration_ms,
            settle_ms=config.settle_ms,
            threads=config.threads,
            record=config.record,
        )
        total_steps += round(config.duration_ms / DT_MS)
        analysis.export_raster_csv(result.record, out / f"raster_{condition}.csv")
        analysis.export_raster_svg(
            result.record,
            out / f"raster_{condition}.svg",
            populations=recorded,
            population_sizes={n: sizes[n] for n in recorded if n in sizes},
        )
        summary["conditions"][condition] = {
            "delta_dop": result.delta_dop,
            "populations": {
                pop: {
                    "mean_rate_hz": result.rates[pop],
                    "spike_count": result.spike_counts[pop],
                }
                for pop in result.rates
            },
        }
        shown = ", ".join(f"{p}={r:.2f}" for p, r in result.rates.items())
        print(f"{condition} (delta_dop={result.delta_dop:+g}): {shown} Hz")
    elapsed = time.perf_counter() - t0
    summary["metadata"]["steps_per_second"] = round(total_steps / elapsed, 1)
    (out / "rates_summary.json").write_text(
        json.dumps(summary, indent=2, sort_keys=True) + "\n", newline="\n"
    )
    print(f"throughput: {total_steps / elapsed:.0f} steps/s")
    print(f"outputs written to {out}")
    return 0


def cmd_validate_schedule(args) -> int:
    if args.schedule:
        schedule = parse_schedule(Path(args.schedule).read_text())
        origin = args.schedule
    else:
        schedule = izhikevich_schedule()
        origin = "shipped izhikevich-core schedule"
    violations = validate_schedule(schedule)
    if not violations:
        print(f"{origin}: OK ({len(schedule.blocks)} blocks, one state word per block)")
        return 0
    for v in violations:
        print(f"{origin}: {v.describe()}")
    return 1


def cmd_print_config(_args) -> int:
    print(default_config_text(), end="")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ScheduleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (SimulationError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
