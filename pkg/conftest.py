"""
Pytest configuration and shared fixtures
"""

import json
import logging
import os
from datetime import datetime
from pathlib import Path

import allure
import pytest
from dotenv import load_dotenv

# Statistical-scale knobs (QEC_STAT_SHOTS, QEC_SLOW) may come from a .env file
load_dotenv()

DATA_DIR           = Path(__file__).parent / "data"
DEFAULT_STAT_SHOTS = 20_000


# Configure logging
def setup_logging():
    """Setup logging configuration (worker-safe for parallel execution)"""
    os.makedirs("logs", exist_ok=True)

    # Include xdist worker ID in log filename to avoid file conflicts
    worker_id    = os.environ.get("PYTEST_XDIST_WORKER", "master")
    timestamp    = datetime.now().strftime("%Y%m%d_%H%M%S")
    log_filename = f"logs/test_run_{timestamp}_{worker_id}.log"

    logging.basicConfig(
        level=logging.INFO,
        format=f"%(asctime)s - [{worker_id}] %(name)s - %(levelname)s - %(message)s",
        handlers=[
            logging.FileHandler(log_filename, encoding="utf-8"),
            logging.StreamHandler(),
        ],
    )

    return logging.getLogger(__name__)


# Setup logging at module level
logger = setup_logging()


def _load_json(name: str) -> dict:
    path = DATA_DIR / name
    logger.info(f"📂 Loading {path.name}")
    with open(path, "r", encoding="utf-8") as f:
        return json.load(f)


# ============================================================================
# SESSION SCOPE FIXTURES - Run once per test session
# ============================================================================

@pytest.fixture(scope="session")
def timing_data():
    """Raw timing-scenario table (durations, excitations, heating and cooling rates)."""
    return _load_json("timing_scenarios.json")


@pytest.fixture(scope="session")
def noise_parameters():
    """Raw multi-channel noise-parameter table."""
    return _load_json("noise_parameters.json")


@pytest.fixture(scope="session")
def architecture_data():
    """Raw zone layouts of the three trap architectures."""
    return _load_json("architectures.json")


@pytest.fixture(scope="session")
def code_d3():
    """The d=3 hexagonal color code."""
    from codes.color_code import build_hex_color_code

    code = build_hex_color_code(3)
    logger.info(f"✅ d=3 color code built: n={code.n}")
    return code


@pytest.fixture(scope="session")
def published_table():
    """The published flag-aware lookup table."""
    from decoders.lookup import published_table

    return published_table()


@pytest.fixture(scope="session")
def stat_shots(request):
    """
    Shots per Monte Carlo point.
    Priority: --stat-shots option > QEC_STAT_SHOTS env var > desk-scale default
    """
    option = request.config.getoption("--stat-shots")
    shots  = int(option or os.getenv("QEC_STAT_SHOTS", DEFAULT_STAT_SHOTS))
    logger.info(f"📊 Statistical tests use {shots} shots per point")
    return shots


@pytest.fixture(scope="session")
def results_dir(tmp_path_factory):
    return tmp_path_factory.mktemp("results")


# ============================================================================
# FAILURE CONTEXT FIXTURE
# ============================================================================

@pytest.fixture(scope="function", autouse=True)
def failure_context(request):
    """
    Attach the statistical knobs to the Allure report when a test fails
    Scope: function, autouse=True (runs automatically)
    """
    yield

    if hasattr(request.node, "rep_call") and request.node.rep_call.failed:
        knobs = {k: os.getenv(k) for k in ("QEC_STAT_SHOTS", "QEC_SLOW", "PYTEST_XDIST_WORKER")}
        logger.error(f"❌ FAILED {request.node.nodeid} with {knobs}")
        allure.attach(
            json.dumps(knobs, indent=2),
            name=f"FAILED_{request.node.name}_context",
            attachment_type=allure.attachment_type.JSON,
        )


@pytest.hookimpl(tryfirst=True, hookwrapper=True)
def pytest_runtest_makereport(item, call):
    """
    Hook to capture test result for the failure_context fixture
    """
    outcome = yield
    rep = outcome.get_result()
    setattr(item, f"rep_{rep.when}", rep)


# ============================================================================
# TEST MARKERS
# ============================================================================

def pytest_configure(config):
    """Register custom markers"""
    config.addinivalue_line("markers", "smoke: Instant structural checks")
    config.addinivalue_line("markers", "regression: Full regression suite")
    config.addinivalue_line("markers", "certificate: Exhaustive single-fault certificates")
    config.addinivalue_line("markers", "statistical: Monte Carlo checks with fixed seeds")
    config.addinivalue_line("markers", "slow: Long sweeps, run only with QEC_SLOW=1")


def pytest_collection_modifyitems(config, items):
    """Skip slow sweeps unless QEC_SLOW is set"""
    if os.getenv("QEC_SLOW", "").lower() in ("1", "true", "yes"):
        return
    skip_slow = pytest.mark.skip(reason="long sweep: set QEC_SLOW=1 to run")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


# ============================================================================
# CLI OPTIONS
# ============================================================================

def pytest_addoption(parser):
    """Add custom command line options"""
    parser.addoption(
        "--stat-shots",
        action="store",
        default=None,
        help="Shots per point for statistical tests (overrides QEC_STAT_SHOTS)",
    )
