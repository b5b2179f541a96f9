"""
Experiment Runner
=================
Usage:
    python run_experiments.py validate    data/experiments/memory_scem.json
    python run_experiments.py dump-gadget data/experiments/teleport_ls_scem.json --out trees/teleport.json
    python run_experiments.py run         data/experiments/memory_scem.json --shots 20000 --workers 4
    python run_experiments.py run         data/experiments/teleport_abaqus.json --seed 3 --format json
    python run_experiments.py fit         results/memory-simultaneous-scem-1a2b3c4d5e6f.csv --p-max 1e-3
    python run_experiments.py footprint   results/memory-simultaneous-scem-1a2b3c4d5e6f.csv --target 1e-9
    python run_experiments.py export-dem  data/experiments/memory_scem.json --out dem/memory.dem

Exit codes:
    0  success
    1  validation failure (tree validation or schedule audit)
    2  configuration error (bad or missing config / result file)
"""

import argparse
import logging
import sys
from pathlib import Path

from pydantic import ValidationError

from circuits.serialization import dump_tree
from decoders.dem import export_dem
from decoders.fault_enum import zero_path
from engine.errors import ConfigError, ValidationFailure
from services.analysis_service import AnalysisService
from services.config import load_config
from services.experiment_service import ExperimentService
from services.results_service import ResultsService


# === Logging Setup ============================================================
#
# Two handlers:
#   StreamHandler → terminal  (clean, no timestamp)
#   FileHandler   → logs/experiments.log  (full timestamp + level)

LOG_DIR  = Path(__file__).parent / "logs"
LOG_DIR.mkdir(exist_ok=True)
LOG_FILE = LOG_DIR / "experiments.log"

_terminal_handler = logging.StreamHandler(sys.stdout)
_terminal_handler.setLevel(logging.INFO)
_terminal_handler.setFormatter(logging.Formatter("%(message)s"))

_file_handler = logging.FileHandler(LOG_FILE, encoding="utf-8")
_file_handler.setLevel(logging.DEBUG)
_file_handler.setFormatter(
    logging.Formatter("%(asctime)s  %(levelname)-8s  %(message)s",
                      datefmt="%Y-%m-%d %H:%M:%S")
)

logging.basicConfig(level=logging.DEBUG, handlers=[_terminal_handler, _file_handler])
logger = logging.getLogger("experiments")


# === Exit codes ===============================================================
EXIT_OK         = 0
EXIT_VALIDATION = 1
EXIT_CONFIG     = ConfigError.exit_code


# ── Helpers ───────────────────────────────────────────────────────────────────

def load(args):
    """Config file plus the command-line overrides."""
    config = load_config(args.config)
    return config.with_overrides(seed=args.seed, shots=args.shots, workers=args.workers,
                                 format=getattr(args, "format", None))


# ── Subcommands ───────────────────────────────────────────────────────────────

def cmd_validate(args):
    service = ExperimentService(load(args))
    reports = service.validate()
    failed  = [state for state, report in reports.items() if not report.ok]
    for state, report in reports.items():
        logger.info(f"{'✅' if report.ok else '❌'} {service.tree(state).name}: {report}")
    illegal = [report for report in service.audit() if not report.ok]
    for report in illegal:
        logger.error(str(report))
    return EXIT_VALIDATION if failed or illegal else EXIT_OK


def cmd_dump_gadget(args):
    config = load(args)
    tree   = ExperimentService(config).tree(config.run_states[0])
    text   = dump_tree(tree, args.out)
    if args.out is None:
        sys.stdout.write(text)
    else:
        logger.info(f"💾 Tree '{tree.name}' written to {args.out}")
    return EXIT_OK


def cmd_run(args):
    config = load(args)
    result = ExperimentService(config).run_experiment()
    path   = ResultsService(config.output).emit_results(result, config.format, args.out)

    logger.info("\n" + "=" * 60)
    for point in result.points:
        low, high = point.interval
        logger.info(f"   {result.parameter}={point.value:<10g} {point.state:<4} p_L={point.p_l:.3e} "
                    f"[{low:.2e}, {high:.2e}]  discards={point.discards}/{point.shots}")
    logger.info(f"   💾 {path}")
    logger.info("=" * 60)
    return EXIT_OK


def cmd_fit(args):
    result   = ResultsService.parse_results(args.results)
    analysis = AnalysisService()
    curve    = result.curve(args.state)
    fit      = analysis.fit_slope(curve, p_max=args.p_max)
    logger.info(f"📊 slope: {fit}")
    if result.parameter == "p":
        threshold = analysis.pseudo_threshold(curve)
        logger.info(f"📊 pseudo-threshold: {'none in sweep' if threshold is None else f'{threshold:.3e}'}")
    return EXIT_OK


def cmd_footprint(args):
    result   = ResultsService.parse_results(args.results)
    analysis = AnalysisService()
    for p, p_l in result.curve(args.state):
        logger.info(f"📊 {analysis.footprint({args.distance: p_l}, p, args.target)}")
    return EXIT_OK


def cmd_export_dem(args):
    config  = load(args)
    service = ExperimentService(config)
    tree    = service.tree(config.run_states[0])
    value   = config.noise.points[args.point]
    noise   = service.noise_model(value)
    terminal = args.terminal
    if terminal is None and tree.is_branching:
        terminal = zero_path(tree)[-1]
    model = export_dem(tree, noise, args.out, terminal=terminal)
    if args.out is None:
        sys.stdout.write(str(model) + "\n")
    return EXIT_OK


COMMANDS = {
    "validate":    cmd_validate,
    "dump-gadget": cmd_dump_gadget,
    "run":         cmd_run,
    "fit":         cmd_fit,
    "footprint":   cmd_footprint,
    "export-dem":  cmd_export_dem,
}


# ── Main ──────────────────────────────────────────────────────────────────────

def build_parser():
    parser = argparse.ArgumentParser(description="🧪 Color-code QEC experiment runner")
    sub    = parser.add_subparsers(dest="command", required=True)

    overrides = argparse.ArgumentParser(add_help=False)
    overrides.add_argument("config", help="Experiment config (JSON)")
    overrides.add_argument("--seed",    type=int, default=None, help="Override the config seed")
    overrides.add_argument("--shots",   type=int, default=None, help="Override shots per point")
    overrides.add_argument("--workers", "-w", type=int, default=None, help="Worker processes per point")

    sub.add_parser("validate", parents=[overrides], help="Noiseless tree validation")

    dump = sub.add_parser("dump-gadget", parents=[overrides], help="Serialise the gadget tree")
    dump.add_argument("--out", default=None, help="Output file (stdout when omitted)")

    run = sub.add_parser("run", parents=[overrides], help="Run the configured sweep")
    run.add_argument("--format", choices=("csv", "json"), default=None, help="Override the result format")
    run.add_argument("--out", default=None, help="Explicit result file")

    for name, help_text in (("fit", "Log-log slope of a result file"), ("footprint", "Qubit footprint per point")):
        analysis = sub.add_parser(name, help=help_text)
        analysis.add_argument("results", help="Result file written by 'run'")
        analysis.add_argument("--state", default=None, help="Input state rows (default: avg, else the only state)")
    sub.choices["fit"].add_argument("--p-max", type=float, default=None, help="Low-p regime cut-off")
    sub.choices["footprint"].add_argument("--target", type=float, required=True, help="Target logical error rate")
    sub.choices["footprint"].add_argument("--distance", type=int, default=3, help="Distance the results were run at")

    dem = sub.add_parser("export-dem", parents=[overrides], help="Detector error model of one sweep point")
    dem.add_argument("--point", type=int, default=0, help="Index into the sweep")
    dem.add_argument("--terminal", default=None, help="Terminal of a branching tree (default: fault-free path)")
    dem.add_argument("--out", default=None, help="Output file (stdout when omitted)")
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logger.debug(f"Log file: {LOG_FILE}")
    try:
        return COMMANDS[args.command](args)
    except ValidationFailure as error:
        logger.error(str(error))
        return EXIT_VALIDATION
    except (ConfigError, ValidationError, FileNotFoundError) as error:
        logger.error(f"❌ Configuration error: {error}")
        return EXIT_CONFIG
    except ValueError as error:
        logger.error(str(error))
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
