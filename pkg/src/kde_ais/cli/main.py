"""Command-line entry point: ``python -m kde_ais {run,replicate,truth,tv}``.

Exit codes: 0 success, 2 configuration error, 3 numerical fault, 4 I/O error.
"""

import argparse
import logging
import os
import sys
from pathlib import Path

from dotenv import load_dotenv

# Define project root and add `src` to sys.path
project_root = os.path.abspath(os.path.join(os.path.dirname(__file__), "../../.."))
src_root = os.path.join(project_root, "src")
if src_root not in sys.path:
    sys.path.insert(0, src_root)

# Load .env
load_dotenv(os.path.join(project_root, ".env"))

from kde_ais.cli.config import parse_config, with_overrides
from kde_ais.cli.trace_io import TRUTH_FILE, write_json, write_replications, write_trace, write_tv_curve
from kde_ais.driver import (
    RunStreams,
    dense_mc_ground_truth,
    run_kde_ais,
    run_replications,
    run_two_stage_is_baseline,
    tv_curve,
)
from kde_ais.utils.config import configure_logging
from kde_ais.utils.errors import KdeAisError, NumericalFaultError

logger = logging.getLogger("kde_ais.cli")

METHODS = {"kde_ais": run_kde_ais, "two_stage": run_two_stage_is_baseline}


def _u64(value: str) -> int:
    seed = int(value)
    if not 0 <= seed < 2 ** 64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return seed


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="kde_ais", description="Rare-event failure probability estimation.")
    sub = parser.add_subparsers(dest="command", required=True)

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", required=True, help="experiment file (JSON)")
    common.add_argument("--out", required=True, help="output directory")
    common.add_argument("--seed", type=_u64, default=None, help="overrides the config seed")
    common.add_argument("--log-level", default=None, help="overrides KDE_AIS_LOG_LEVEL")

    run = sub.add_parser("run", parents=[common], help="single run")
    run.add_argument("--method", choices=sorted(METHODS), default="kde_ais")
    run.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")

    rep = sub.add_parser("replicate", parents=[common], help="R runs with seeds seed + i")
    rep.add_argument("--method", choices=sorted(METHODS), default="kde_ais")
    rep.add_argument("--replications", type=int, default=None)
    rep.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")

    truth = sub.add_parser("truth", parents=[common], help="dense Monte Carlo ground truth")
    truth.add_argument("--samples", type=int, default=500_000)
    truth.add_argument("--repeats", type=int, default=100)

    tv = sub.add_parser("tv", parents=[common], help="TV distance to the optimal density per iteration (d <= 2)")
    tv.add_argument("--grid", type=int, default=200)
    tv.add_argument("--no-timing", action="store_true", help="write wall_ms as 0")
    return parser


def _run(args, config, density) -> int:
    runner = METHODS[args.method]
    trace = runner(config, input_density=density, record_timing=not args.no_timing)
    write_trace(trace, args.out)
    if not trace.completed:
        logger.error("[cli] Run aborted: %s", trace.error)
        return NumericalFaultError.exit_code
    return 0


def _replicate(args, config, density) -> int:
    method = METHODS[args.method]
    timing = not args.no_timing

    def runner(cfg):
        return method(cfg, input_density=density, record_timing=timing)

    summary = run_replications(config, replications=args.replications, runner=runner)
    write_replications(summary, args.out)
    return NumericalFaultError.exit_code if summary.partial else 0


def _truth(args, config, density) -> int:
    mean, stderr = dense_mc_ground_truth(
        config.benchmark, config.threshold, n=args.samples, repeats=args.repeats,
        streams=RunStreams(config.seed), input_density=density,
    )
    write_json(Path(args.out) / TRUTH_FILE, {
        "benchmark": config.benchmark,
        "threshold": config.threshold,
        "samples": args.samples,
        "repeats": args.repeats,
        "seed": config.seed,
        "p_f": mean,
        "stderr": stderr,
    })
    return 0


def _tv(args, config, density) -> int:
    trace = run_kde_ais(config, input_density=density, record_timing=not args.no_timing)
    write_trace(trace, args.out)
    write_tv_curve(tv_curve(trace, args.grid), args.out)
    return 0 if trace.completed else NumericalFaultError.exit_code


COMMANDS = {"run": _run, "replicate": _replicate, "truth": _truth, "tv": _tv}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.log_level)
    try:
        config, density = parse_config(args.config)
        config = with_overrides(config, seed=args.seed, replications=getattr(args, "replications", None))
        return COMMANDS[args.command](args, config, density)
    except KdeAisError as e:
        logger.error("[cli] %s: %s", type(e).__name__, e)
        return e.exit_code


if __name__ == "__main__":
    sys.exit(main())
