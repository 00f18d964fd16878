#!/usr/bin/env python3
"""
Command Line Interface for weakflow
"""

import argparse
import logging
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import pandas as pd

# Add current directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from data_sources.csv_loader import export_csv
from data_sources.water_table import PROPERTIES, load_builtin_water
from perturb.experiment import (build_manifest, loss_curve_frame, prepare_problem, report_row,
                                run_experiment)
from perturb.sweep import SLOPE_ENVELOPE, epsilon_sweep
from report.figures import plot_loss_curves
from report.pdf_generator import ParameterTableReport
from report.tables import NOISE_LEVELS, format_report, summarize
from report.writers import provenance_header, write_csv, write_run_outputs
from utils.config import RunConfig
from utils.errors import (EXIT_CONFIG, EXIT_FAILURE, EXIT_INTERRUPTED, EXIT_NUMERICAL_FLOOR, EXIT_OK,
                          AcceptanceError, ConfigurationError, WeakFlowError)
from utils.helpers import (config_hash, format_number, get_library_versions, get_system_info,
                           load_manifest, run_directory, save_manifest)

logger = logging.getLogger("weakflow")

DEFAULT_EPSILONS = (1e-4, 3e-4, 1e-3, 3e-3, 1e-2)
CURVE_LEVELS = (0.0, 0.01, 0.05)


def configure_logging(verbose=False, quiet=False):
    level = logging.DEBUG if verbose else logging.ERROR if quiet else logging.WARNING
    logging.basicConfig(level=level, format="%(levelname)s %(name)s: %(message)s",
                        stream=sys.stderr, force=True)


def build_config(args):
    """Defaults < --replay manifest < --config file < flags."""
    config = RunConfig()
    if getattr(args, "replay", None):
        config = RunConfig.from_json(args.replay, config)
    if getattr(args, "config", None):
        config = RunConfig.from_json(args.config, config)
    return RunConfig.from_args(args, config).validate()


def replayed_list(args, *keys):
    """A list stored in the replayed manifest under the nested keys, if any."""
    if not getattr(args, "replay", None):
        return None
    value = load_manifest(args.replay)
    for key in keys:
        value = value.get(key) if isinstance(value, dict) else None
    return list(value) if isinstance(value, list) else None


def cmd_run(config):
    """Run the algorithm once and write manifest.json, result.csv and trajectory.csv."""
    print(f"Running {config.property if not config.csv_path else config.csv_path} "
          f"(degree {config.degree}, eps={config.epsilon:g}, noise={config.noise_level:g})...")
    problem, result = run_experiment(config)
    run_dir = run_directory(config.resolved_output_dir(), config.config_hash())
    manifest = build_manifest(problem, result, extra={"command": "run"})
    paths = write_run_outputs(run_dir, problem, result, manifest)

    row = report_row(problem, result)
    print(f"✓ theta* = {', '.join(format_number(row[f'theta_star_{j}']) for j in range(1, problem.model.p + 1))}")
    print(f"✓ residual std = {format_number(row['residual_std'])} "
          f"(gradient-flow terminus: {format_number(row['residual_std_theta0_T'])})")
    print(f"  Delta train = {format_number(row['delta_train'])}, Delta val = {format_number(row['delta_val'])}")
    print(f"  expansion residual = {format_number(row['expansion_residual'])}, "
          f"duality gap = {format_number(row['duality_gap'])}")
    print(f"\n✓ Results written to {run_dir}")
    for name, path in paths.items():
        print(f"  {name}: {os.path.basename(path)}")
    return EXIT_OK


def _table_run(config):
    problem, result = run_experiment(config)
    return report_row(problem, result)


def cmd_reproduce_tables(config, seeds=None, pdf=False, workers=1):
    """Parameter tables for every property at 1% and 5% noise, optionally across seeds."""
    if config.csv_path:
        raise ConfigurationError("csv_path", "reproduce-tables runs on the built-in water table")
    seeds = list(seeds) if seeds else None
    configs = []
    for level in NOISE_LEVELS:
        for prop in PROPERTIES:
            base = RunConfig.from_dict({"property": prop, "noise_level": level}, config)
            if seeds:
                configs.extend(base.with_seed(s).validate() for s in seeds)
            else:
                configs.append(base.validate())

    print(f"Reproducing parameter tables: {len(configs)} runs...")
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(_table_run, configs))
    else:
        rows = [_table_run(c) for c in configs]

    summary = summarize(rows)
    digest = config_hash({"config": config.to_dict(), "seeds": seeds})
    out_dir = run_directory(config.resolved_output_dir(), digest, prefix="tables")
    meta = {"config_hash": digest, "seeds": " ".join(str(s) for s in seeds) if seeds else
            f"split_seed={config.split_seed} noise_seed={config.noise_seed}"}
    write_csv(pd.DataFrame(rows), os.path.join(out_dir, "runs.csv"), meta)
    write_csv(summary, os.path.join(out_dir, "tables.csv"), meta)
    text = format_report(summary, seeds)
    with open(os.path.join(out_dir, "tables.txt"), "w", encoding="utf-8", newline="\n") as f:
        f.write(text)
    save_manifest(os.path.join(out_dir, "manifest.json"), {
        "command": "reproduce-tables",
        "config": config.to_dict(),
        "config_hash": digest,
        "seeds": seeds,
        "run_config_hashes": [c.config_hash() for c in configs],
        "versions": get_library_versions(),
    })
    if pdf:
        ParameterTableReport(os.path.join(out_dir, "tables.pdf")).generate_report(
            summary, seeds=seeds, config_hash=digest)

    print(text)
    print(f"✓ Tables written to {out_dir}")
    return EXIT_OK


def cmd_loss_curves(config, plot=False, levels=CURVE_LEVELS):
    """Training/validation loss along theta0(t) with theta0(T) and theta* markers, per noise level."""
    frames = []
    hashes = []
    for level in levels:
        level_config = RunConfig.from_dict({"noise_level": float(level)}, config).validate()
        problem, result = run_experiment(level_config)
        frames.append(loss_curve_frame(problem, result))
        hashes.append(level_config.config_hash())
        print(f"✓ {level * 100:g}% noise: val loss {format_number(result.J_val_0 * problem.loss_scale)} "
              f"-> {format_number(result.J_val_star * problem.loss_scale)}")
    frame = pd.concat(frames, ignore_index=True)

    digest = config_hash({"config": config.to_dict(), "levels": [float(v) for v in levels]})
    out_dir = run_directory(config.resolved_output_dir(), digest, prefix="curves")
    meta = provenance_header(config)
    meta["config_hash"] = digest
    csv_path = write_csv(frame, os.path.join(out_dir, "loss_curves.csv"), meta)
    save_manifest(os.path.join(out_dir, "manifest.json"), {
        "command": "loss-curves",
        "config": config.to_dict(),
        "config_hash": digest,
        "seeds": config.seeds(),
        "levels": [float(v) for v in levels],
        "run_config_hashes": hashes,
        "versions": get_library_versions(),
    })
    print(f"✓ Loss curves written to {csv_path}")
    if plot:
        png = plot_loss_curves(frame, os.path.join(out_dir, "loss_curves.png"),
                               title=f"{config.property}: training vs validation loss")
        print(f"✓ Figure written to {png}")
    return EXIT_OK


def cmd_sweep(config, epsilons=None, workers=1):
    """Expansion residual over several eps; exit status reflects the fitted log-log slope."""
    epsilons = list(epsilons or DEFAULT_EPSILONS)
    problem = prepare_problem(config)
    sweep = epsilon_sweep(problem.system, problem.grid, problem.control_set, epsilons, problem.theta_init,
                          epsilon_max=config.epsilon_max, tie_tol=config.tie_tol,
                          adjoint_mode=config.adjoint_mode, interpolation=config.interpolation,
                          workers=workers)

    digest = config_hash({"config": config.to_dict(), "epsilons": epsilons})
    out_dir = run_directory(config.resolved_output_dir(), digest, prefix="sweep")
    meta = provenance_header(config)
    write_csv(sweep.to_frame(), os.path.join(out_dir, "sweep.csv"), meta)
    summary = sweep.summary()
    summary["epsilons"] = epsilons
    summary["slope_range"] = list(SLOPE_ENVELOPE)
    summary["proxy"] = ("the residual of the first-order cost expansion under the frozen zeroth-order "
                        "control; it differs from the optimally controlled cost by O(eps^2)")
    save_manifest(os.path.join(out_dir, "manifest.json"),
                  build_manifest(problem, extra={"command": "sweep", "sweep": summary,
                                                 "sweep_hash": digest}))

    for row in sweep.rows:
        print(f"  eps={row.epsilon:<8g} r={format_number(row.residual)}")
    print(f"✓ Sweep written to {out_dir}")
    if sweep.at_floor:
        print("Expansion residuals are at the numerical floor; slope undefined.")
        return EXIT_NUMERICAL_FLOOR
    print(f"  fitted slope: {sweep.slope:.4f}")
    if not sweep.in_envelope(*SLOPE_ENVELOPE):
        raise AcceptanceError(f"fitted slope {sweep.slope:.4f} outside [{SLOPE_ENVELOPE[0]}, {SLOPE_ENVELOPE[1]}]")
    print(f"✓ slope within [{SLOPE_ENVELOPE[0]}, {SLOPE_ENVELOPE[1]}]")
    return EXIT_OK


def cmd_export_data(property_name, output):
    data = load_builtin_water(property_name)
    export_csv(data, output, x_column="T", y_column="value")
    print(f"✓ Exported {data.size} rows of {data.name} to {output}")
    return EXIT_OK


def add_config_arguments(parser):
    """Flags mirroring RunConfig fields. Unset flags stay None so they never override a config file."""
    group = parser.add_argument_group("run configuration")
    group.add_argument('--config', help='JSON file with RunConfig fields')
    group.add_argument('--replay', help='Rerun the config stored in a manifest.json')
    group.add_argument('--property', help=f'Built-in water property: {", ".join(PROPERTIES)}')
    group.add_argument('--csv', dest='csv_path', help='CSV dataset instead of the built-in table')
    group.add_argument('--x-column', dest='x_column', help='CSV input column (default: T)')
    group.add_argument('--y-column', dest='y_column', help='CSV target column (default: value)')
    group.add_argument('--degree', type=int, help='Polynomial degree (default: 2)')
    group.add_argument('--m1', type=int, help='Training split size (default: 18)')
    group.add_argument('--m2', type=int, help='Validation split size (default: 6)')
    group.add_argument('--split-mode', dest='split_mode',
                       choices=['without_replacement', 'with_replacement'])
    group.add_argument('--split-seed', dest='split_seed', type=int)
    group.add_argument('--noise-level', dest='noise_level', type=float, help='Dither level (default: 0.01)')
    group.add_argument('--noise-seed', dest='noise_seed', type=int)
    group.add_argument('--noise-scale', dest='noise_scale', choices=['variance', 'std'])
    group.add_argument('--epsilon', type=float, help='Small parameter (default: 0.001)')
    group.add_argument('--epsilon-max', dest='epsilon_max', type=float)
    group.add_argument('--T', dest='T', type=float, help='Final time of the gradient flow (default: 50)')
    group.add_argument('--n-steps', dest='n_steps', type=int, help='RK4 steps (default: 2000)')
    group.add_argument('--u-min', dest='u_min', type=float)
    group.add_argument('--u-max', dest='u_max', type=float)
    group.add_argument('--tie-tol', dest='tie_tol', type=float)
    group.add_argument('--theta0', type=float, nargs='+', help='Initial parameters, raw coefficients')
    group.add_argument('--no-standardize', dest='standardize', action='store_const', const=False,
                       default=None, help='Run the flows on raw data')
    group.add_argument('--adjoint-mode', dest='adjoint_mode', choices=['corrected', 'paper_literal'])
    group.add_argument('--interpolation', choices=['stage', 'linear'])
    group.add_argument('--output-dir', '-o', dest='output_dir',
                       help='Output root (default: $WEAKFLOW_OUTPUT_DIR or ./reports)')


def build_parser():
    parser = argparse.ArgumentParser(
        prog="weakflow",
        description="Perturbation solution of a weakly-controlled gradient-flow learning problem",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  # Default density run (m1=18, m2=6, 1% noise, eps=0.001)
  weakflow run

  # Specific heat, 5% noise, custom output directory
  weakflow run --property cp --noise-level 0.05 -o results

  # Parameter tables across 20 seeds, with PDF
  weakflow reproduce-tables --seeds $(seq 1 20) --pdf

  # Loss-curve data and figure
  weakflow loss-curves --plot

  # Expansion-residual convergence rate
  weakflow sweep --epsilons 1e-4 3e-4 1e-3 3e-3 1e-2

  # Rerun a stored manifest
  weakflow run --replay reports/run-0123456789ab/manifest.json
        """
    )
    parser.add_argument('--system-info', action='store_true',
                        help='Display system information and exit')
    parser.add_argument('--verbose', '-v', action='store_true', help='Debug logging')
    parser.add_argument('--quiet', '-q', action='store_true', help='Errors only')

    sub = parser.add_subparsers(dest='command')

    run = sub.add_parser('run', help='Run the algorithm once')
    add_config_arguments(run)

    tables = sub.add_parser('reproduce-tables', help='Parameter tables for all properties at 1%% and 5%% noise')
    add_config_arguments(tables)
    tables.add_argument('--seeds', type=int, nargs='+', help='Repeat per seed and report mean ± std')
    tables.add_argument('--pdf', action='store_true', help='Also render tables.pdf')
    tables.add_argument('--workers', type=int, default=1)

    curves = sub.add_parser('loss-curves', help='Loss-curve data for 0%%, 1%% and 5%% noise')
    add_config_arguments(curves)
    curves.add_argument('--plot', action='store_true', help='Also render loss_curves.png')

    sweep = sub.add_parser('sweep', help='Expansion residual over eps and its log-log slope')
    add_config_arguments(sweep)
    sweep.add_argument('--epsilons', type=float, nargs='+', help='At least 4 values spanning 2 decades')
    sweep.add_argument('--workers', type=int, default=1)

    export = sub.add_parser('export-data', help='Write a built-in water property table as CSV')
    export.add_argument('--property', default='density')
    export.add_argument('--output', '-o', required=True, help='Output CSV path')

    return parser


def dispatch(args):
    if args.command == 'export-data':
        return cmd_export_data(args.property, args.output)

    config = build_config(args)
    if args.command == 'run':
        return cmd_run(config)
    if args.command == 'reproduce-tables':
        seeds = args.seeds or replayed_list(args, "seeds")
        return cmd_reproduce_tables(config, seeds=seeds, pdf=args.pdf, workers=args.workers)
    if args.command == 'loss-curves':
        return cmd_loss_curves(config, plot=args.plot)
    if args.command == 'sweep':
        epsilons = args.epsilons or replayed_list(args, "sweep", "epsilons")
        return cmd_sweep(config, epsilons=epsilons, workers=args.workers)
    raise ConfigurationError("command", f"unknown command {args.command!r}")


def main(argv=None):
    """Main CLI function."""
    parser = build_parser()
    args = parser.parse_args(argv)
    configure_logging(args.verbose, args.quiet)

    # Display system info if requested
    if args.system_info:
        system_info = get_system_info()
        print("System Information:")
        for key, value in system_info.items():
            print(f"  {key}: {value}")
        return EXIT_OK

    if not args.command:
        parser.print_help()
        return EXIT_CONFIG

    try:
        return dispatch(args)
    except WeakFlowError as e:
        print(f"Error: {e}")
        return e.exit_code
    except KeyboardInterrupt:
        print("\nOperation cancelled by user.")
        return EXIT_INTERRUPTED
    except Exception as e:
        logger.debug("unexpected failure", exc_info=True)
        print(f"\nError: {e}")
        return EXIT_FAILURE


if __name__ == "__main__":
    sys.exit(main())
