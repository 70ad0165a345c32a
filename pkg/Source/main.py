import argparse
import logging
import sys
from dataclasses import fields
from pathlib import Path
from typing import Dict, List, Optional, Sequence

from Core.pipeline import ARTIFACT_VERSION, AnalysisConfig, run_pipeline, run_realizations, save_bundle
from Core.reproduce import FIGURES, reproduce_figure
from Core.simulators import WilsonCowanSimulator, create_simulator, preset_names
from Core.sweeps import SWEEPS, run_sweep, summarize_sweep
from Core.timeseries import NoiseConfig, TimeSeries, add_observational_noise
from Utils.csv_io import load_csv, save_csv, save_table_csv
from Utils.errors import CmcError, InvalidArgumentError
from Utils.log_setup import setup_logging
from Utils.workers import worker_count


def add_analysis_arguments(parser: argparse.ArgumentParser) -> None:
    """Flags named after the AnalysisConfig fields they override"""
    group = parser.add_argument_group("analysis")
    group.add_argument("--config", type=Path, help="AnalysisConfig JSON; flags below override it")
    group.add_argument("--dimension", type=int, help="Embedding dimension E")
    group.add_argument("--delay", type=int, help="Embedding delay tau in samples")
    group.add_argument("--segment-length", type=int, help="Welch segment length in samples")
    group.add_argument("--overlap-fraction", type=float)
    group.add_argument("--window", help="Welch taper, e.g. hann")
    group.add_argument("--min-shift", type=int)
    group.add_argument("--max-shift", type=int)
    group.add_argument("--step", type=int)
    group.add_argument("--library-lengths", type=int, nargs="+")
    group.add_argument("--normalization", action="store_true", default=None,
                       help="Read strength from band-normalized surfaces")
    group.add_argument("--realizations", type=int)
    group.add_argument("--seed", type=int)
    group.add_argument("--neighbors", type=int, help="k nearest neighbours (default E+1)")
    group.add_argument("--exclusion-radius", type=int)
    group.add_argument("--max-delay", type=int, help="Causal side threshold in samples (default E*step)")
    group.add_argument("--coordinate", type=int, help="Predicted delay coordinate (0 = newest)")


def build_config(args: argparse.Namespace) -> AnalysisConfig:
    data = AnalysisConfig.load(args.config).to_dict() if args.config else AnalysisConfig().to_dict()
    nested = {
        "dimension": "embedding", "delay": "embedding",
        "segment_length": "spectral", "overlap_fraction": "spectral", "window": "spectral",
        "min_shift": "shift_range", "max_shift": "shift_range", "step": "shift_range",
    }
    top_level = {f.name for f in fields(AnalysisConfig)}
    for key, value in vars(args).items():
        if value is None:
            continue
        if key in nested:
            data[nested[key]][key] = value
        elif key in top_level:
            data[key] = value
    return AnalysisConfig.from_dict(data)


def simulate_command(args: argparse.Namespace) -> int:
    overrides = {}
    if args.length is not None:
        overrides["length" if args.preset.startswith("logistic") else "steps"] = args.length
    if args.seed is not None:
        overrides["seed"] = args.seed
    if args.record_every is not None:
        overrides["record_every"] = args.record_every

    simulator = create_simulator(args.preset, args.weights, **overrides)
    series = simulator.simulate()
    if isinstance(simulator, WilsonCowanSimulator) and simulator.config.areas:
        series = series + simulator.area_signals(series)
    if args.snr is not None:
        base = args.seed or 0
        series = [add_observational_noise(s, NoiseConfig(args.snr, base + i)) for i, s in enumerate(series)]

    provenance = {"preset": args.preset, "seed": "" if args.seed is None else args.seed, "version": ARTIFACT_VERSION}
    path = save_csv(args.output, series, provenance)
    logging.info(f"Wrote {len(series)} series of {len(series[0])} samples to {path}")
    return 0


def _select_pairs(series: Sequence[TimeSeries], cfg: AnalysisConfig,
                  x_name: Optional[str], y_name: Optional[str]) -> List[List[TimeSeries]]:
    by_name: Dict[str, TimeSeries] = {s.name: s for s in series}
    if cfg.realizations > 1:
        if len(series) != 2 * cfg.realizations:
            raise InvalidArgumentError(
                f"{cfg.realizations} realizations need {2 * cfg.realizations} columns (x, y per realization), "
                f"found {len(series)}")
        return [[series[2 * i], series[2 * i + 1]] for i in range(cfg.realizations)]

    if x_name or y_name:
        missing = [n for n in (x_name, y_name) if n and n not in by_name]
        if missing:
            raise InvalidArgumentError(f"Unknown column(s) {missing}; file has {list(by_name)}")
        return [[by_name[x_name] if x_name else series[0], by_name[y_name] if y_name else series[1]]]
    if len(series) < 2:
        raise InvalidArgumentError(f"Analysis needs two columns, found {len(series)}")
    return [[series[0], series[1]]]


def analyze_command(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    pairs = _select_pairs(load_csv(args.input), cfg, args.x, args.y)
    workers = worker_count()
    if len(pairs) == 1:
        bundle = run_pipeline(cfg, pairs[0][0], pairs[0][1], workers)
    else:
        bundle = run_realizations(cfg, [tuple(p) for p in pairs], workers)
    save_bundle(bundle, args.output)
    for label, strength in bundle.summary().items():
        logging.info(f"{label}: mean causal strength {strength:.4f}")
    return 0


def reproduce_command(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    reproduce_figure(args.figure, args.output, cfg, args.weights, worker_count())
    return 0


def sweep_command(args: argparse.Namespace) -> int:
    cfg = build_config(args)
    points = run_sweep(args.sweep, cfg, worker_count())
    for point in points:
        save_bundle(point.bundle, args.output, prefix=f"{point.parameter}_{point.value:g}_")
    summary = summarize_sweep(points)
    save_table_csv(Path(args.output) / "summary.csv", [points[0].parameter, "forward_mean_strength",
                                                       "backward_mean_strength"], summary,
                   points[0].bundle.provenance)
    for value, forward, backward in summary:
        logging.info(f"{points[0].parameter}={value:g}: forward {forward:.4f}, backward {backward:.4f}")
    return 0


def create_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="cmc", description="Cross-mapping coherence causal analysis")
    parser.add_argument("-v", "--verbose", action="store_true", help="Log per-shift details")
    parser.add_argument("--log-dir", type=Path, help="Also write cmc.log into this directory")
    commands = parser.add_subparsers(dest="command", required=True)

    simulate = commands.add_parser("simulate", help="Generate a benchmark system to CSV")
    simulate.add_argument("preset", choices=preset_names())
    simulate.add_argument("--output", type=Path, required=True, help="CSV file to write")
    simulate.add_argument("--length", type=int, help="Samples (logistic) or integration steps")
    simulate.add_argument("--seed", type=int)
    simulate.add_argument("--record-every", type=int, help="Keep every n-th integration step")
    simulate.add_argument("--snr", type=float, help="Add observation noise at this power ratio")
    simulate.add_argument("--weights", type=Path, help="Wilson-Cowan weight file")
    simulate.set_defaults(handler=simulate_command)

    analyze = commands.add_parser("analyze", help="Bidirectional CCM/CMC analysis of a CSV file")
    analyze.add_argument("input", type=Path)
    analyze.add_argument("--output", type=Path, required=True, help="Directory for result CSVs")
    analyze.add_argument("--x", help="Column name of the first series")
    analyze.add_argument("--y", help="Column name of the second series")
    add_analysis_arguments(analyze)
    analyze.set_defaults(handler=analyze_command)

    reproduce = commands.add_parser("reproduce", help="Write the result files behind one figure")
    reproduce.add_argument("figure", choices=FIGURES)
    reproduce.add_argument("--output", type=Path, required=True)
    reproduce.add_argument("--weights", type=Path, help="Wilson-Cowan weight file (fig8)")
    add_analysis_arguments(reproduce)
    reproduce.set_defaults(handler=reproduce_command)

    sweep = commands.add_parser("sweep", help="Length, coupling, noise or embedding robustness sweep")
    sweep.add_argument("sweep", choices=sorted(SWEEPS))
    sweep.add_argument("--output", type=Path, required=True)
    add_analysis_arguments(sweep)
    sweep.set_defaults(handler=sweep_command)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = create_parser().parse_args(argv)
    setup_logging(args.log_dir, args.verbose)
    try:
        return args.handler(args)
    except CmcError as e:
        logging.error(f"{type(e).__name__}: {e}")
        return e.exit_code


if __name__ == "__main__":
    # Add the parent directory to sys.path to allow imports to work when run directly
    import os
    sys.path.insert(0, os.path.abspath(os.path.join(os.path.dirname(__file__), '..')))
    sys.exit(main())
