"""Command-line entry point.

Four subcommands cover the workflows the library supports:

* ``run``    — integrate one configured simulation, write its trajectory,
  fit summary, config snapshot (and figures with ``--plots``), and print a
  delimited digest to stdout.
* ``oracle`` — evolve a configuration's initial data under the exact
  linearised flow and check the algebraic decay floors against it.
* ``sweep``  — run a family of configurations into per-name directories
  with a shared summary table.
* ``fit``    — re-fit a decay exponent from a previously written
  trajectory file.

Exit codes: 0 on success, 1 when a run breaks down at runtime or a checked
inequality fails, 2 when the configuration or the theory's hypotheses are
violated (bad keys, out-of-regime parameters, degenerate data).
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from .config import RunConfig, load_config
from .errors import (
    DegenerateInputError,
    ParameterError,
    StabilityError,
    VacuumError,
)
from .experiments import (
    predicted_decay_exponent,
    fit_decay_exponent,
    run_from_config,
    sweep,
    write_experiment_report,
)
from .oracle import verify_lower_bound
from .reporting import (
    pair_norm_column,
    read_trajectory_csv,
    write_json,
    write_table_csv,
)

__all__ = ["main", "build_parser"]

_CONFIG_ERRORS = (ParameterError, DegenerateInputError, VacuumError, StabilityError)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hypocns",
        description=(
            "Pseudo-spectral simulation and decay verification for 1D "
            "isentropic flow with fractional velocity dissipation."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="integrate one configured simulation")
    run_p.add_argument("--config", required=True, help="YAML run configuration")
    run_p.add_argument(
        "--out", default=None,
        help="output directory (default: <config stem>_out next to the cwd)",
    )
    run_p.add_argument(
        "--tolerance", type=float, default=0.10,
        help="relative tolerance for flagging fitted decay exponents",
    )
    run_p.add_argument(
        "--plots", action="store_true", help="render decay figures as SVG"
    )

    oracle_p = sub.add_parser(
        "oracle", help="check decay floors on the exactly solved linear flow"
    )
    oracle_p.add_argument("--config", required=True, help="YAML run configuration")
    oracle_p.add_argument(
        "--times", type=float, nargs="*", default=None,
        help="check times (omitted: report the floor constant only)",
    )
    oracle_p.add_argument(
        "--order", type=float, default=0.0, help="derivative order of the norm"
    )
    oracle_p.add_argument(
        "--threshold", type=float, default=0.95,
        help="smallest acceptable achieved/floor energy ratio",
    )
    oracle_p.add_argument(
        "--out", default=None,
        help="optional directory for oracle.json and linear_trajectory.csv",
    )

    sweep_p = sub.add_parser("sweep", help="run a family of configurations")
    sweep_p.add_argument(
        "--config", required=True,
        help="YAML with 'runs: {name: overrides}' plus optional 'defaults:'",
    )
    sweep_p.add_argument("--out", default=None, help="output directory")
    sweep_p.add_argument("--workers", type=int, default=1)
    sweep_p.add_argument("--plots", action="store_true")
    sweep_p.add_argument("--tolerance", type=float, default=0.10)

    fit_p = sub.add_parser("fit", help="re-fit a decay exponent from a trajectory")
    fit_p.add_argument("--input", required=True, help="trajectory.csv path")
    fit_p.add_argument("--order", type=float, default=0.0)
    fit_p.add_argument("--t-min", type=float, default=None)
    fit_p.add_argument("--t-max", type=float, default=None)
    fit_p.add_argument(
        "--expected", type=float, default=None,
        help="fail (exit 1) when the exponent misses this by --tolerance",
    )
    fit_p.add_argument("--tolerance", type=float, default=0.10)
    return parser


def _emit(key, *values) -> None:
    print(",".join([str(key)] + [str(v) for v in values]))


def _default_out(config_path: str, suffix: str) -> Path:
    return Path.cwd() / (Path(config_path).stem + suffix)


def _cmd_run(args) -> int:
    config = load_config(args.config)
    out_dir = Path(args.out) if args.out else _default_out(args.config, "_out")
    exp = run_from_config(config)
    payload = write_experiment_report(
        exp, out_dir, plots=args.plots, tolerance=args.tolerance,
        title=Path(args.config).stem,
    )

    _emit("status", exp.result.status)
    if exp.result.message:
        _emit("message", exp.result.message)
    for warning in exp.result.warnings:
        _emit("warning", warning)
    _emit("dt", f"{exp.result.dt:.17g}")
    _emit("samples", len(exp.samples))
    _emit("out_dir", out_dir)
    for key, value in sorted(payload["datum"].items()):
        _emit(f"datum_{key}", f"{value:.6g}")
    for order, fit in sorted(exp.fits.items()):
        predicted = predicted_decay_exponent(exp.params, order)
        _emit(f"exponent_{order:g}", f"{fit.exponent:.6g}")
        _emit(f"predicted_{order:g}", f"{predicted:.6g}")
        _emit(
            f"within_tolerance_{order:g}",
            payload["norms"][f"{order:g}"]["within_tolerance"],
        )
    failed = []
    for name, report in sorted(exp.verifications.items()):
        _emit(f"verify_{name}", "pass" if report.satisfied else "fail")
        if not report.satisfied:
            failed.append(name)
    if exp.result.status != "completed" or failed:
        return 1
    return 0


def _cmd_oracle(args) -> int:
    config = load_config(args.config)
    grid = config.build_grid()
    params = config.build_params()
    from .experiments import InitialDataSpec, generate_initial_data
    from .oracle import datum_band_constants, lower_bound_constant

    try:
        spec = InitialDataSpec(**config.initial_data)
    except TypeError as exc:
        raise ParameterError(f"bad initial_data entry: {exc}") from exc
    state0 = generate_initial_data(grid, spec)

    if not args.times:  # constant-only report
        c0, eta = datum_band_constants(state0, params)
        constant = lower_bound_constant(c0, eta, args.order, params.beta)
        _emit("band_amplitude", f"{c0:.17g}")
        _emit("band_edge", f"{eta:.17g}")
        _emit("order", f"{args.order:g}")
        _emit("constant", f"{constant:.17g}")
        _emit("constant_sq", f"{constant**2:.17g}")
        if args.out:
            out_dir = Path(args.out)
            out_dir.mkdir(parents=True, exist_ok=True)
            write_json(
                out_dir / "oracle.json",
                {"c0": c0, "eta": eta, "s1": args.order, "constant": constant},
            )
        return 0

    report = verify_lower_bound(
        state0, params, args.times, s1=args.order, threshold=args.threshold
    )
    _emit("constant", f"{report.constant:.17g}")
    _emit("constant_sq", f"{report.constant**2:.17g}")
    _emit("band_amplitude", f"{report.c0:.17g}")
    _emit("band_edge", f"{report.eta:.17g}")
    _emit("order", f"{report.s1:g}")
    for t, ratio in zip(report.times, report.ratios):
        _emit("ratio", f"{t:.17g}", f"{ratio:.17g}")
    _emit("min_ratio", f"{report.min_ratio:.17g}")
    _emit("floor_respected", report.satisfied)
    failing = [
        (t, ratio)
        for t, ratio in zip(report.times, report.ratios)
        if ratio < report.threshold
    ]
    for t, ratio in failing:
        _emit("failing_time", f"{t:.17g}", f"{ratio:.17g}")
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        exponent = (1.0 + 2.0 * report.s1) / (2.0 * params.beta)
        rows = []
        for t, ratio in zip(report.times, report.ratios):
            floor_sq = report.constant**2 * (1.0 + t) ** (-exponent)
            rows.append((t, floor_sq * ratio, floor_sq, ratio))
        write_table_csv(
            out_dir / "linear_trajectory.csv",
            ("time", "achieved_sq", "floor_sq", "ratio"),
            rows,
        )
        write_json(
            out_dir / "oracle.json",
            {
                "constant": report.constant,
                "c0": report.c0,
                "eta": report.eta,
                "s1": report.s1,
                "threshold": report.threshold,
                "times": list(report.times),
                "ratios": list(report.ratios),
                "min_ratio": report.min_ratio,
                "satisfied": report.satisfied,
            },
        )
    return 0 if report.satisfied else 1


def _cmd_sweep(args) -> int:
    try:
        data = yaml.safe_load(Path(args.config).read_text())
    except yaml.YAMLError as exc:
        raise ParameterError(f"malformed YAML in {args.config}: {exc}") from exc
    if not isinstance(data, dict) or not isinstance(data.get("runs"), dict):
        raise ParameterError(
            "sweep configuration needs a 'runs' mapping of name -> overrides"
        )
    if not data["runs"]:
        raise ParameterError("sweep configuration lists no runs")
    base = data.get("defaults", {})
    if not isinstance(base, dict):
        raise ParameterError("'defaults' must be a mapping when present")
    unknown = sorted(set(data) - {"runs", "defaults"})
    if unknown:
        raise ParameterError(f"unknown sweep keys: {unknown}")

    named: dict[str, RunConfig] = {}
    for name, overrides in data["runs"].items():
        if overrides is None:
            overrides = {}
        if not isinstance(overrides, dict):
            raise ParameterError(f"overrides for run {name!r} must be a mapping")
        named[str(name)] = RunConfig.from_mapping({**base, **overrides})

    out_dir = Path(args.out) if args.out else _default_out(args.config, "_sweep")
    rows = sweep(
        named, out_dir, workers=args.workers, plots=args.plots,
        tolerance=args.tolerance,
    )
    ok = True
    for row in rows:
        parts = [row.get("status"), row.get("all_satisfied")]
        if "s1" in row:
            parts += [
                f"s1={row['s1']:g}",
                f"fitted={row['fitted_exponent']:.6g}",
                f"predicted={row['predicted_exponent']:.6g}",
                f"gap_ok={row['within_tolerance']}",
            ]
        _emit(row["name"], *parts)
        ok = ok and row.get("status") == "completed" and bool(
            row.get("all_satisfied")
        )
        if "within_tolerance" in row:
            ok = ok and bool(row["within_tolerance"])
    _emit("out_dir", out_dir)
    return 0 if ok else 1


def _cmd_fit(args) -> int:
    data = read_trajectory_csv(args.input)
    column = pair_norm_column(args.order)
    if column not in data:
        raise ParameterError(
            f"{args.input} has no column {column!r}; available: "
            f"{sorted(data)}"
        )
    times = data["time"]
    t_lo = times.min() if args.t_min is None else args.t_min
    t_hi = times.max() if args.t_max is None else args.t_max
    fit = fit_decay_exponent(times, data[column], (t_lo, t_hi))
    _emit("exponent", f"{fit.exponent:.17g}")
    _emit("amplitude", f"{fit.amplitude:.17g}")
    _emit("residual_rms", f"{fit.residual_rms:.17g}")
    _emit("r_squared", f"{fit.r_squared:.17g}")
    _emit("window", f"{fit.window[0]:.17g}", f"{fit.window[1]:.17g}")
    _emit("points", fit.n_points)
    if args.expected is not None:
        deviation = abs(fit.exponent - args.expected) / abs(args.expected)
        within = deviation <= args.tolerance
        _emit("expected", f"{args.expected:.17g}")
        _emit("relative_deviation", f"{deviation:.6g}")
        _emit("within_tolerance", within)
        if not within:
            return 1
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "run": _cmd_run,
        "oracle": _cmd_oracle,
        "sweep": _cmd_sweep,
        "fit": _cmd_fit,
    }
    try:
        return handlers[args.command](args)
    except _CONFIG_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
