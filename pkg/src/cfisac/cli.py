"""Command-line interface: sweeps, diagnostics and CSV summaries."""

import argparse
import sys

from . import harness


def _add_common(p):
    p.add_argument("--out", default=None, help="output CSV path")
    p.add_argument("--drops", type=int, default=None, help="number of drops")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--preset", choices=["desk", "paper"], default="desk")
    p.add_argument("--values", type=float, nargs="+", default=None,
                   help="axis values (dBm for power, dB for comm SINR)")
    p.add_argument("--schemes", nargs="+", default=list(harness.SCHEMES),
                   choices=list(harness.SCHEMES))


def _preset_base(name):
    return harness.desk_config() if name == "desk" else harness.paper_config()


def _default_drops(name):
    return 20 if name == "desk" else 50


def _run_sweep(args, axis, default_values):
    base = _preset_base(args.preset)
    exp = harness.ExperimentConfig(
        base=base,
        axis=axis,
        values=tuple(args.values if args.values is not None else default_values),
        schemes=tuple(args.schemes),
        drops=args.drops if args.drops is not None else _default_drops(args.preset),
        seed=args.seed,
        output=args.out or f"sweep_{axis}_{args.preset}.csv",
    )
    total = exp.drops * len(exp.values) * len(exp.schemes)
    rows = harness.run_experiment(
        exp, progress=lambda n: print(f"\r{n}/{total} rows", end="", flush=True))
    print(f"\rwrote {len(rows)} rows to {exp.output}")
    return 0


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog="cfisac",
        description="Cell-free ISAC joint space-time filtering and beamforming sweeps")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment from a JSON config")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", default=None, help="override the config's output CSV")

    p_pow = sub.add_parser("sweep-power", help="radar SINR versus transmit power")
    _add_common(p_pow)
    p_gam = sub.add_parser("sweep-gamma", help="radar SINR versus comm SINR target")
    _add_common(p_gam)

    p_val = sub.add_parser("validate", help="run the cross-module oracle checks")
    p_val.add_argument("--preset", choices=["desk", "paper"], default="desk")
    p_val.add_argument("--seed", type=int, default=7)

    p_sum = sub.add_parser("summarize", help="per-scheme means from a results CSV")
    p_sum.add_argument("--csv", required=True)
    p_sum.add_argument("--json", action="store_true",
                       help="emit full-precision JSON instead of a table")

    args = parser.parse_args(argv)

    if args.command == "run":
        exp = harness.load_experiment_config(args.config)
        if args.out:
            from dataclasses import replace
            exp = replace(exp, output=args.out)
        total = exp.drops * len(exp.values) * len(exp.schemes)
        rows = harness.run_experiment(
            exp, progress=lambda n: print(f"\r{n}/{total} rows", end="", flush=True))
        print(f"\rwrote {len(rows)} rows to {exp.output}")
        return 0
    if args.command == "sweep-power":
        return _run_sweep(args, "power", (25.0, 30.0, 35.0, 40.0))
    if args.command == "sweep-gamma":
        return _run_sweep(args, "comm_sinr", (-10.0, -5.0, 0.0))
    if args.command == "validate":
        checks = harness.validate(_preset_base(args.preset), seed=args.seed)
        for c in checks:
            print(c)
        return 0 if all(c.passed for c in checks) else 1
    if args.command == "summarize":
        table = harness.summarize(args.csv)
        if args.json:
            import dataclasses
            import json
            print(json.dumps([dataclasses.asdict(r) for r in table]))
            return 0
        print(f"{'scheme':<12}{'P_dBm':>8}{'Gamma_dB':>10}{'mean_dB':>12}"
              f"{'std_dB':>10}{'rows':>10}")
        for r in table:
            print(f"{r.scheme:<12}{r.P_dBm:>8.2f}{r.Gamma_dB:>10.2f}"
                  f"{r.mean_radar_sinr_dB:>12.4f}{r.std_radar_sinr_dB:>10.4f}"
                  f"{r.converged_rows:>5}/{r.total_rows:<4}")
        return 0
    return 2


if __name__ == "__main__":
    sys.exit(main())
