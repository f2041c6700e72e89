"""
Command-line entry point: generate, detect, evaluate, optimize and stats.

Exit status is 0 on success, 2 on a usage error, 3 on a data error, 4 on a rule
compile error and 1 on anything else; failures print one line on stderr.
"""
import argparse
import os
import sys
from typing import List, Optional

from soccerevents import __version__
from soccerevents.components.event_evaluation import render_report
from soccerevents.constant import detection_pipeline
from soccerevents.entity.config_entity import DetectorConfig, EvaluationConfig, GenerationConfig, RunConfig
from soccerevents.exception.exception import DataFileNotFound, SoccerEventsException
from soccerevents.logging.logger import logging, set_verbosity
from soccerevents.pipeline.detection_pipeline import DetectionPipeline, evaluate_files, event_durations
from soccerevents.pipeline.generation_pipeline import GenerationPipeline
from soccerevents.pipeline.optimization_pipeline import OptimizationPipeline, load_optimizer_config

PROG = "soccerevents"


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog=PROG, description="Soccer event detection from positional data.")
    parser.add_argument("--version", action="version", version=f"{PROG} {__version__}")
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("-v", "--verbose", action="store_true", help="log debug messages")
    verbosity.add_argument("-q", "--quiet", action="store_true", help="log warnings and errors only")
    commands = parser.add_subparsers(dest="subcommand", metavar="command")
    commands.required = True

    generate = commands.add_parser("generate", help="synthesize a match and its ground truth from a script")
    generate.add_argument("script", help="scenario script (JSON or YAML)")
    generate.add_argument("-o", "--output", help="output directory for trace.csv and truth.jsonl")
    generate.add_argument("--seed", type=int, help="override the script's seed")

    detect = commands.add_parser("detect", help="detect atomic and complex events in a positional CSV")
    detect.add_argument("trace", help="positional CSV")
    detect.add_argument("--params", help="rule parameter file (JSON or YAML)")
    detect.add_argument("--rules", help="complex rule file replacing the shipped rules")
    detect.add_argument("--truth", help="ground truth to score the detection against")
    detect.add_argument("--smooth", type=int, default=detection_pipeline.FEATURE_SMOOTHING_WINDOW,
                        help="moving-average window applied to positions (1 = off)")
    detect.add_argument("--speed-span", type=int, default=detection_pipeline.FEATURE_SPEED_SPAN_FRAMES,
                        help="frames each speed is measured over")
    detect.add_argument("--strike-radius", type=int, default=detection_pipeline.ATOMIC_STRIKE_RADIUS_FRAMES,
                        help="frames within which kicks or deflections of one player collapse (0 = off)")
    detect.add_argument("-o", "--output", help="detected events (JSONL)")

    evaluate = commands.add_parser("evaluate", help="score detected events against ground truth")
    evaluate.add_argument("detected", help="detected events (JSONL)")
    evaluate.add_argument("truth", help="ground-truth events (JSONL)")
    evaluate.add_argument("--tolerance", type=int, default=detection_pipeline.EVALUATION_ATOMIC_TOLERANCE_FRAMES,
                          help="atomic matching tolerance in frames")
    evaluate.add_argument("--iou", type=float, default=detection_pipeline.EVALUATION_INTERVAL_IOU_THRESHOLD,
                          help="interval overlap needed for a complex match")
    evaluate.add_argument("-o", "--output", help="report file (.json for JSON, otherwise a text table)")

    optimize = commands.add_parser("optimize", help="search atomic rule parameters with SPEA2")
    optimize.add_argument("config", help="optimizer settings (JSON or YAML)")
    optimize.add_argument("train_dir", help="directory of positional CSVs with ground truth")
    optimize.add_argument("--seed", type=int, help="override the configured seed")
    optimize.add_argument("-o", "--output", help="archive file (JSON); telemetry is written next to it")

    stats = commands.add_parser("stats", help="duration summary of the complex events of a file")
    stats.add_argument("events", help="events (JSONL)")
    stats.add_argument("--fps", type=float, default=detection_pipeline.TRACE_FPS, help="frame rate")
    stats.add_argument("-o", "--output", help="summary CSV")
    return parser


def parse_run_config(args: argparse.Namespace) -> RunConfig:
    inputs = {
        "generate": ("script",),
        "detect": ("trace",),
        "evaluate": ("detected", "truth"),
        "optimize": ("train_dir",),
        "stats": ("events",),
    }[args.subcommand]
    return RunConfig(
        subcommand=args.subcommand,
        inputs=tuple(getattr(args, name) for name in inputs),
        output=args.output,
        rules_path=getattr(args, "rules", None),
        params_path=getattr(args, "params", None),
        config_path=getattr(args, "config", None),
        seed=getattr(args, "seed", None),
        verbosity=1 if args.verbose else -1 if args.quiet else 0,
    )


def _check_inputs(run: RunConfig) -> None:
    for path in run.inputs + tuple(p for p in (run.rules_path, run.params_path, run.config_path) if p):
        if not os.path.exists(path):
            raise DataFileNotFound(path)


def run(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exit_:
        return int(exit_.code or 0)

    run_config = parse_run_config(args)
    set_verbosity(run_config.verbosity)
    logging.info(f"Command: {run_config}")
    try:
        _check_inputs(run_config)
        if run_config.subcommand == "generate":
            config = GenerationConfig(output_dir=run_config.output) if run_config.output else None
            artifact = GenerationPipeline(config, run_config.seed).run_pipeline(run_config.inputs[0])
            print(f"{artifact.trace_file_path}: {artifact.frames} frames; {artifact.truth_file_path}: "
                  f"{artifact.atomic_count} atomic, {artifact.complex_count} complex events")

        elif run_config.subcommand == "detect":
            pipeline = DetectionPipeline(detector_config=DetectorConfig(smoothing_window=args.smooth,
                                                                        speed_span=args.speed_span,
                                                                        strike_radius=args.strike_radius,
                                                                        rules_path=run_config.rules_path))
            artifact = pipeline.run_pipeline(run_config.inputs[0], run_config.params_path, args.truth,
                                             run_config.output)
            print(f"{artifact.events_file_path}: {artifact.atomic_count} atomic, "
                  f"{artifact.complex_count} complex events")

        elif run_config.subcommand == "evaluate":
            report = evaluate_files(run_config.inputs[0], run_config.inputs[1], run_config.output,
                                    EvaluationConfig(args.tolerance, args.iou))
            sys.stdout.write(render_report(report))

        elif run_config.subcommand == "optimize":
            config = load_optimizer_config(run_config.config_path, run_config.seed)
            artifact = OptimizationPipeline(config, archive_path=run_config.output).run_pipeline(
                run_config.inputs[0])
            print(f"{artifact.archive_file_path}: best macro F {artifact.best_macro_f:.3f}")

        elif run_config.subcommand == "stats":
            table = event_durations(run_config.inputs[0], args.fps, run_config.output)
            sys.stdout.write(table.to_string(index=False, float_format=lambda v: f"{v:.2f}") + "\n")
        return 0

    except SoccerEventsException as e:
        logging.error(str(e))
        print(f"{PROG}: error: {e.diagnostic}", file=sys.stderr)
        return e.exit_code
    except KeyboardInterrupt:
        return 130


def main() -> None:
    sys.exit(run())
