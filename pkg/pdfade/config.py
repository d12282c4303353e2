"""
pdfade Configuration
"""

import os

from dotenv import load_dotenv

BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Optional overrides from <repo>/.env
load_dotenv(os.path.join(BASE_DIR, ".env"))

# ============================================================================
# PATHS
# ============================================================================

DATA_DIR = os.path.join(BASE_DIR, "data")
GOLDEN_DIR = os.path.join(DATA_DIR, "golden")
GOLDEN_FILE = os.path.join(GOLDEN_DIR, "golden_records.csv")
DERIVED_FILE = os.path.join(GOLDEN_DIR, "derived_records.csv")

# ============================================================================
# SYSTEM DEFAULTS
# ============================================================================

# Decoding margin, c = 2(1 + EPSILON)
EPSILON = 0.05

# l_f should stay well below T; warn above this fraction of T
FADE_LENGTH_WARN_FRACTION = 0.01

# Relative slack when snapping float rates onto integer fade/packet counts
INTEGER_SNAP_RTOL = 1e-9

# ============================================================================
# QUADRATURE
# ============================================================================

QUAD_ABS_TOL = 1e-12
QUAD_REL_TOL = 1e-10
QUAD_MAX_SUBDIVISIONS = 200

# ============================================================================
# MONTE CARLO
# ============================================================================

MC_TRIALS = 1_000_000
MC_SEED = 20160523

# Random draws generated per block (trials * fades * packets)
MC_BLOCK_DRAWS = int(os.environ.get("PDFADE_MC_BLOCK_DRAWS", 2_000_000))
MC_WORKERS = int(os.environ.get("PDFADE_MC_WORKERS", os.cpu_count() or 1))

# |Approx - MC| <= 3 * std_err + MC_TOLERANCE
MC_TOLERANCE = 0.03

# Monte Carlo inside the optimizer needs at least this many trials per point
MC_OPTIMIZER_MIN_TRIALS = 100_000

# ============================================================================
# SWEEPS
# ============================================================================

SWEEP_RATE_MIN = 0.01
SWEEP_POINTS = 30
POWER_DB_VALUES = [float(d) for d in range(1, 11)]

# ============================================================================
# OUTPUT
# ============================================================================

CSV_SIGNIFICANT_DIGITS = 12

# ============================================================================
# LOGGING
# ============================================================================

VERBOSE = os.environ.get("PDFADE_VERBOSE", "1").lower() not in ("0", "false", "no")


def log(message):
    """Console status line, silenced when VERBOSE is off"""
    if VERBOSE:
        print(message)
