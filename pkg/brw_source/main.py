"""Command-line entry point: python -m brw_source.main [global flags] <command>."""
import argparse
import logging
import os
import sys
from typing import List, Optional

import pandas as pd
from pydantic import ValidationError

from brw_source.config import Config
from brw_source.excel_service import ExcelExportService
from brw_source.exceptions import EXIT_CONFIG_ERROR, EXIT_OK, BRWError, ConfigError
from brw_source.schemas import RunConfig, config_with_stack, dump_config, load_config
from brw_source.services.optimizer import DesignSpace, GASettings, SphereObjective, run_ga
from brw_source.services.pipeline import Pipeline, sensitivity_scan
from brw_source.services.wdm import channels_above
from brw_source.utils import setup_logging, write_csv

logger = logging.getLogger(__name__)

JSA_COLUMNS = ["lambda_signal_nm", "re_phi", "im_phi", "jsi"]
PROFILE_COLUMNS = ["position_nm", "re_u", "im_u"]


def _print_frame(frame: pd.DataFrame) -> None:
    if frame.empty:
        print("(no rows)")
        return
    print(frame.to_string(index=False, float_format=lambda value: f"{value:.9g}"))


def _deltas(text: str) -> List[float]:
    try:
        return [float(item) for item in text.split(",") if item.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"deltas must be comma-separated numbers: {e}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brw_source",
        description="Type-II SPDC in AlGaAs Bragg reflection waveguides",
    )
    parser.add_argument("--config", default=Config.DEFAULT_CONFIG, help="YAML run configuration")
    parser.add_argument("--out", default=None, help="output directory")
    parser.add_argument("--seed", type=int, default=None, help="random seed (optimize)")
    parser.add_argument("--threads", type=int, default=Config.THREADS, help="worker processes")
    parser.add_argument("--log-level", default=Config.LOG_LEVEL)

    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("modes", help="solve pump, signal and idler modes")
    commands.add_parser("jsa", help="joint spectral amplitude and FWHM")

    channels = commands.add_parser("channels", help="per-channel entanglement report")
    channels.add_argument("--xlsx", action="store_true", help="also write a styled workbook")

    commands.add_parser("rate", help="emission rate, overlap and fiber coupling")

    optimize = commands.add_parser("optimize", help="genetic-algorithm design search")
    optimize.add_argument("--sphere", action="store_true", help="run the sphere benchmark instead")
    optimize.add_argument("--population", type=int, default=None)
    optimize.add_argument("--generations", type=int, default=None)

    sensitivity = commands.add_parser("sensitivity", help="fabrication sensitivity scan")
    sensitivity.add_argument("--parameter", required=True)
    sensitivity.add_argument("--deltas", type=_deltas, default=[-0.1, -0.05, 0.0, 0.05, 0.1])
    return parser


def _load(args) -> RunConfig:
    if not args.config:
        raise ConfigError("No configuration given (use --config or BRW_CONFIG)")
    return load_config(args.config)


def _output_dir(args, config: Optional[RunConfig]) -> str:
    out = args.out or (config.output_dir if config else None) or Config.OUTPUT_DIR
    os.makedirs(out, exist_ok=True)
    return out


def cmd_modes(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    pipeline = Pipeline(config, workers=args.threads)
    summary = pipeline.mode_summary()
    _print_frame(summary)
    write_csv(summary, os.path.join(out, "modes.csv"))
    for role, mode in pipeline.modes.items():
        vertical = mode.vertical
        profile = pd.DataFrame({"position_nm": vertical.position_nm, "re_u": vertical.field, "im_u": 0.0})
        write_csv(profile, os.path.join(out, f"profile_{role}.csv"), PROFILE_COLUMNS)
    return EXIT_OK


def cmd_jsa(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    pipeline = Pipeline(config, workers=args.threads)
    jsa = pipeline.jsa
    frame = pd.DataFrame({
        "lambda_signal_nm": jsa.signal_wavelength_nm,
        "re_phi": jsa.phi.real,
        "im_phi": jsa.phi.imag,
        "jsi": jsa.jsi,
    })
    write_csv(frame, os.path.join(out, "jsa.csv"), JSA_COLUMNS)
    write_csv(pipeline.signal_table.to_frame(), os.path.join(out, "dispersion_signal.csv"))
    write_csv(pipeline.idler_table.to_frame(), os.path.join(out, "dispersion_idler.csv"))

    ivg_s, ivg_i = pipeline.group_velocities()
    print(f"pump_wavelength_nm {pipeline.pump_wavelength_um * 1e3:.9g}")
    print(f"delta_k0_rad_per_m {pipeline.delta_k0():.9g}")
    print(f"inv_vg_signal_ns_per_m {ivg_s:.9g}")
    print(f"inv_vg_idler_ns_per_m {ivg_i:.9g}")
    print(f"fwhm_nm {pipeline.fwhm_nm():.9g}")
    return EXIT_OK


def cmd_channels(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    pipeline = Pipeline(config, workers=args.threads)
    with_rates = config.channels.n_max > 0
    report = pipeline.channel_report(with_rates=with_rates)
    write_csv(report.to_frame(), os.path.join(out, "channels.csv"))

    counts = [channels_above(report, threshold) for threshold in config.channels.thresholds]
    _print_frame(pd.DataFrame([count.model_dump() for count in counts], columns=["threshold", "contiguous", "total"]))
    if args.xlsx:
        ExcelExportService(out).export_channel_report(report, counts)
    return EXIT_OK


def cmd_rate(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    summary = Pipeline(config, workers=args.threads).rate_summary()
    _print_frame(summary)
    write_csv(summary, os.path.join(out, "rate.csv"))
    return EXIT_OK


def cmd_optimize(args) -> int:
    config = None if args.sphere and not args.config else _load(args)
    out = _output_dir(args, config)
    seed = args.seed if args.seed is not None else (config.seed if config else Config.SEED)

    if config is not None:
        opt = config.optimizer.model_copy(update={
            key: value for key, value in (("population", args.population), ("generations", args.generations))
            if value is not None
        })
        settings = opt.ga_settings(seed, args.threads)
    else:
        opt = None
        settings = GASettings(
            population=args.population or 32, generations=args.generations or 100, seed=seed,
            workers=args.threads,
        )

    if args.sphere:
        space = DesignSpace(bounds={"a": (-1.0, 1.0), "b": (-1.0, 1.0), "c": (-1.0, 1.0)})
        result = run_ga(space, settings, objective=SphereObjective())
        write_csv(pd.DataFrame([result.best_genes]), os.path.join(out, "sphere_best.csv"))
    else:
        stack = config.layer_stack()
        space = opt.design_space(stack, config.pump.wavelength_nm * 1e-3)
        result = run_ga(space, settings, weights=opt.weights, material=config.material,
                        solver_settings=config.solver)
        best_path = os.path.join(out, "best_design.yaml")
        with open(best_path, "w") as handle:
            handle.write(dump_config(config_with_stack(config, result.best_stack)))
        logger.info(f"Best design written to {best_path}")

    write_csv(result.trace, os.path.join(out, "convergence.csv"))
    print(f"best_fitness {result.best_fitness.score:.9g}")
    for name, value in result.best_genes.items():
        print(f"{name} {value:.9g}")
    return EXIT_OK


def cmd_sensitivity(args) -> int:
    config = _load(args)
    out = _output_dir(args, config)
    table = sensitivity_scan(config, args.parameter, args.deltas, workers=args.threads)
    _print_frame(table)
    write_csv(table, os.path.join(out, "sensitivity.csv"))
    return EXIT_OK


COMMANDS = {
    "modes": cmd_modes,
    "jsa": cmd_jsa,
    "channels": cmd_channels,
    "rate": cmd_rate,
    "optimize": cmd_optimize,
    "sensitivity": cmd_sensitivity,
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        # --help exits with 0; usage errors map onto the configuration exit code
        return EXIT_OK if e.code in (0, None) else EXIT_CONFIG_ERROR
    try:
        setup_logging(args.log_level)
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG_ERROR

    try:
        return COMMANDS[args.command](args)
    except (ConfigError, ValidationError) as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_CONFIG_ERROR
    except BRWError as e:
        logger.error(f"{args.command} failed: {e}")
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
