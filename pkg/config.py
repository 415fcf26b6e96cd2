"""
Configuration management for recoverlab
"""
import os
from pathlib import Path
from dotenv import load_dotenv
import logging

# Load environment variables
load_dotenv()

logger = logging.getLogger(__name__)

# Base directories
BASE_DIR = Path(__file__).parent
REPORT_DIR = Path(os.getenv("RECOVERLAB_REPORT_DIR", str(BASE_DIR / "reports")))

# Reproducibility
SPEC_REVISION = os.getenv("RECOVERLAB_SPEC_REVISION", "recoverlab-1")
RNG_NAME = "numpy.Philox4x64-10"
DEFAULT_SEED = int(os.getenv("RECOVERLAB_SEED", "7"))

# Numerical tolerances (relative to the operator scale unless noted)
HERM_TOL = float(os.getenv("HERM_TOL", "1e-9"))
PSD_TOL = float(os.getenv("PSD_TOL", "1e-9"))
RANK_TOL = float(os.getenv("RANK_TOL", "1e-10"))
EIG_TOL = float(os.getenv("EIG_TOL", "1e-12"))
TRACE_TOL = float(os.getenv("TRACE_TOL", "1e-9"))
CPTP_TOL = float(os.getenv("CPTP_TOL", "1e-7"))

# Interior-point solver
SDP_GAP_TOL = float(os.getenv("SDP_GAP_TOL", "1e-8"))
SDP_FEAS_TOL = float(os.getenv("SDP_FEAS_TOL", "1e-8"))
SDP_MAX_ITER = int(os.getenv("SDP_MAX_ITER", "200"))
SDP_STEP_FRACTION = float(os.getenv("SDP_STEP_FRACTION", "0.98"))
SDP_DEBUG = os.getenv("SDP_DEBUG", "").lower() in ("1", "true", "yes")
SDP_DEBUG_DUMP = os.getenv("SDP_DEBUG_DUMP", "")  # path for JSON-lines iterate dump
CERT_TOL = float(os.getenv("CERT_TOL", "1e-6"))
# Stalled solves within this gap and residual are accepted as near-optimal
SDP_NEAR_TOL = float(os.getenv("SDP_NEAR_TOL", "1e-6"))

# Recovery programs
MAX_PRODUCT_BLOCK = int(os.getenv("MAX_PRODUCT_BLOCK", "512"))  # real dimension

# Sweeps
SWEEP_WORKERS = int(os.getenv("SWEEP_WORKERS", "1"))

# Logging
LOG_LEVEL = os.getenv("LOG_LEVEL", "INFO")
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def validate_config():
    """Validate numerical configuration"""
    errors = []

    tolerances = {
        "HERM_TOL": HERM_TOL,
        "PSD_TOL": PSD_TOL,
        "RANK_TOL": RANK_TOL,
        "EIG_TOL": EIG_TOL,
        "TRACE_TOL": TRACE_TOL,
        "CPTP_TOL": CPTP_TOL,
        "SDP_GAP_TOL": SDP_GAP_TOL,
        "SDP_FEAS_TOL": SDP_FEAS_TOL,
        "CERT_TOL": CERT_TOL,
        "SDP_NEAR_TOL": SDP_NEAR_TOL,
    }
    for name, value in tolerances.items():
        if not value > 0:
            errors.append(f"{name} must be positive")

    if SDP_MAX_ITER < 1:
        errors.append("SDP_MAX_ITER must be at least 1")
    if not 0 < SDP_STEP_FRACTION < 1:
        errors.append("SDP_STEP_FRACTION must lie in (0, 1)")
    if MAX_PRODUCT_BLOCK < 2:
        errors.append("MAX_PRODUCT_BLOCK must be at least 2")
    if SWEEP_WORKERS < 1:
        errors.append("SWEEP_WORKERS must be at least 1")
    if LOG_LEVEL.upper() not in ("DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"):
        errors.append(f"LOG_LEVEL {LOG_LEVEL!r} is not a logging level")

    if errors:
        raise ValueError(f"Configuration errors: {', '.join(errors)}")

    if SDP_DEBUG_DUMP:
        logger.info(f"Solver iterates will be dumped to {SDP_DEBUG_DUMP}")

    return True
