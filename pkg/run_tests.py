"""
Simulator Test Runner
=====================
Runs the pytest suite of the color-code simulator and builds the Allure report.

Usage:
    python run_tests.py                         # Whole suite + Allure report
    python run_tests.py -t engine               # tests/test_engine.py only
    python run_tests.py -t decoders -t codes    # Several modules
    python run_tests.py -m smoke                # Instant structural checks
    python run_tests.py -m "certificate or statistical"
    python run_tests.py --slow --stat-shots 200000
    python run_tests.py --no-report             # Skip the Allure HTML report

Parallel execution (pytest-xdist):
    python run_tests.py -w 4                    # 4 worker processes
    python run_tests.py -w auto                 # 1 worker per CPU core

The Monte Carlo tests fix their seeds, so the worker count never changes a
result.  The statistical knobs reach the tests as QEC_SLOW / QEC_STAT_SHOTS
and are written to the report's environment panel.
"""

import argparse
import configparser
import logging
import os
import re
import shutil
import subprocess
import sys
import time
import webbrowser
from importlib import metadata
from pathlib import Path


# === Logging Setup ============================================================
#
# Two handlers:
#   StreamHandler → terminal  (plain messages)
#   FileHandler   → logs/runner.log  (timestamp + level for CI)

LOG_DIR  = Path(__file__).parent / "logs"
LOG_DIR.mkdir(exist_ok=True)
LOG_FILE = LOG_DIR / "runner.log"

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
logger = logging.getLogger("runner")


# === Configuration ============================================================
PROJECT_DIR    = Path(__file__).parent
ALLURE_RESULTS = PROJECT_DIR / "allure-results"
ALLURE_REPORT  = PROJECT_DIR / "allure-report"
TESTS_DIR      = PROJECT_DIR / "tests"
PYTEST_INI     = PROJECT_DIR / "pytest.ini"
ALLURE_CMD     = shutil.which("allure") or "allure"

REPORTED_PACKAGES = ("numpy", "scipy", "networkx", "pydantic", "stim", "pytest")

# pytest exit codes worth a sentence in the summary
EXIT_MEANING = {
    0: "all tests passed",
    1: "some tests failed",
    2: "run interrupted",
    3: "pytest internal error",
    4: "pytest usage error",
    5: "no tests collected (check the marker expression)",
}


# ── Discovery ─────────────────────────────────────────────────────────────────

def available_modules() -> list[str]:
    """Short names of the test modules (``test_engine.py`` → ``engine``)."""
    return sorted(f.stem.removeprefix("test_") for f in TESTS_DIR.glob("test_*.py"))


def registered_markers() -> set[str]:
    """Marker names declared in pytest.ini."""
    ini = configparser.ConfigParser()
    ini.read(PYTEST_INI, encoding="utf-8")
    lines = ini.get("pytest", "markers", fallback="").splitlines()
    return {line.split(":", 1)[0].strip() for line in lines if line.strip()}


def check_marker_expression(expression: str) -> None:
    """Reject expressions naming markers pytest.ini does not register."""
    names   = set(re.findall(r"[A-Za-z_]\w*", expression)) - {"and", "or", "not"}
    unknown = names - registered_markers()
    if unknown:
        logger.error("   ❌ Unknown marker(s): %s", ", ".join(sorted(unknown)))
        logger.info("   Registered: %s", ", ".join(sorted(registered_markers())))
        sys.exit(4)


# ── Command builders ──────────────────────────────────────────────────────────

def build_pytest_command(args) -> list[str]:
    cmd = [sys.executable, "-m", "pytest"]
    if args.test:
        cmd.extend(str(TESTS_DIR / f"test_{name}.py") for name in args.test)
        logger.info("🎯 Modules: %s", ", ".join(args.test))
    else:
        cmd.append(str(TESTS_DIR))

    if args.marker:
        check_marker_expression(args.marker)
        cmd.extend(["-m", args.marker])
        logger.info("🏷️  Marker expression: %s", args.marker)

    cmd.extend(parallel_args(args.workers))
    return cmd


def parallel_args(workers: str | None) -> list[str]:
    """pytest-xdist arguments; anything below two workers runs in-process."""
    if workers is None:
        return []
    if workers == "auto":
        logger.info("⚡ Parallel mode: auto (1 worker per CPU core)")
        return ["-n", "auto"]
    try:
        n = int(workers)
    except ValueError:
        logger.warning("⚠️  Invalid workers value '%s', running sequentially", workers)
        return []
    if n < 2:
        return []
    logger.info("⚡ Parallel mode: %d workers", n)
    return ["-n", str(n)]


def build_env(args) -> dict[str, str]:
    """Process environment carrying the statistical knobs to every xdist worker."""
    env = dict(os.environ)
    if args.slow:
        env["QEC_SLOW"] = "1"
        logger.info("🐢 Long statistical sweeps: ENABLED")
    if args.stat_shots:
        env["QEC_STAT_SHOTS"] = str(args.stat_shots)
        logger.info("📊 Statistical tests: %d shots per point", args.stat_shots)
    return env


# ── Allure ────────────────────────────────────────────────────────────────────

def clean_previous_results() -> None:
    logger.info("\n🧹 Cleaning previous results...")
    for folder in (ALLURE_RESULTS, ALLURE_REPORT):
        if folder.exists():
            shutil.rmtree(folder)
            logger.info("   🗑️  Removed %s/", folder.name)


def write_environment(env: dict[str, str]) -> None:
    """Allure's environment panel: statistical knobs and numerical-stack versions."""
    ALLURE_RESULTS.mkdir(exist_ok=True)
    rows = {
        "python":         sys.version.split()[0],
        "QEC_SLOW":       env.get("QEC_SLOW", "unset"),
        "QEC_STAT_SHOTS": env.get("QEC_STAT_SHOTS", "default"),
    }
    for package in REPORTED_PACKAGES:
        try:
            rows[package] = metadata.version(package)
        except metadata.PackageNotFoundError:
            rows[package] = "missing"
    lines = [f"{key}={value}" for key, value in rows.items()]
    (ALLURE_RESULTS / "environment.properties").write_text("\n".join(lines) + "\n", encoding="utf-8")
    logger.debug("Allure environment: %s", rows)


def generate_report() -> bool:
    logger.info("\n📊 Generating Allure HTML report...")
    try:
        result = subprocess.run(
            [ALLURE_CMD, "generate", str(ALLURE_RESULTS), "--clean", "-o", str(ALLURE_REPORT)],
            cwd=str(PROJECT_DIR), capture_output=True, text=True,
        )
    except FileNotFoundError:
        logger.warning("   ⚠️  Allure CLI not found, raw results kept in %s/", ALLURE_RESULTS.name)
        return False
    if result.returncode != 0:
        logger.error("   ❌ Failed to generate report: %s", result.stderr)
        return False
    logger.info("   ✅ Report generated in %s/", ALLURE_REPORT.name)
    return True


def open_report() -> None:
    logger.info("\n🌐 Opening Allure report...")
    try:
        subprocess.Popen([ALLURE_CMD, "open", str(ALLURE_REPORT)], cwd=str(PROJECT_DIR),
                         stdout=subprocess.DEVNULL, stderr=subprocess.DEVNULL)
    except FileNotFoundError:
        webbrowser.open((ALLURE_REPORT / "index.html").as_uri())


# ── Main ──────────────────────────────────────────────────────────────────────

def main() -> int:
    parser = argparse.ArgumentParser(description="🧪 Simulator test runner with Allure reporting")
    parser.add_argument("--test", "-t", action="append", choices=available_modules(),
                        help="Test module to run (repeatable)")
    parser.add_argument("--marker", "-m", help="Marker expression, e.g. 'smoke' or 'certificate or statistical'")
    parser.add_argument("--slow", action="store_true", help="Include the long statistical sweeps")
    parser.add_argument("--stat-shots", type=int, default=None, help="Shots per statistical point")
    parser.add_argument("--workers", "-w", default=None, help="Parallel workers (e.g. 2, 4, auto)")
    parser.add_argument("--no-report", action="store_true", help="Skip the Allure HTML report")
    args = parser.parse_args()

    logger.info("=" * 60)
    logger.info("   🧪 Color-code simulator test suite")
    logger.info("=" * 60)
    logger.debug("Log file: %s", LOG_FILE)

    if not args.no_report:
        clean_previous_results()

    cmd = build_pytest_command(args)
    env = build_env(args)

    logger.info("\n🧪 Running tests...")
    logger.debug("   Command: %s", " ".join(cmd))
    started   = time.perf_counter()
    exit_code = subprocess.run(cmd, cwd=str(PROJECT_DIR), env=env).returncode
    elapsed   = time.perf_counter() - started

    logger.info("\n" + "=" * 60)
    meaning = EXIT_MEANING.get(exit_code, f"exit code {exit_code}")
    if exit_code == 0:
        logger.info("   ✅ %s in %.1f s", meaning.upper(), elapsed)
    else:
        logger.warning("   ⚠️  %s (exit %d) after %.1f s", meaning.upper(), exit_code, elapsed)
    logger.info("=" * 60)

    if not args.no_report:
        write_environment(env)
        if generate_report():
            open_report()

    return exit_code


if __name__ == "__main__":
    sys.exit(main())
