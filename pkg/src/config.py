"""
Configuration module for the multiresolution distribution toolkit.
Defines numerical tolerances, default grids, and environment settings.
"""
import os
from pathlib import Path
from dotenv import load_dotenv

# Load .env from project root
_project_root = Path(__file__).resolve().parent.parent
load_dotenv(_project_root / ".env", override=False)

# --- Scaling Functions ---
DEFAULT_DEPTH = 10
CASCADE_ITERATIONS = 60
TOL_CASCADE = 1e-8
TOL_POU = 1e-6
TOL_ORTHONORMALITY = 1e-6
FILTER_TOL = 1e-12

BUILTIN_FILTERS = {
    "haar": "haar",
    "d4": "db2",
    "d6": "db3",
    "d8": "db4",
}

CERTIFIED_REGULARITY = {
    "haar": 0,
    "d4": 0,
    "d6": 1,
    "d8": 1,
}

# --- Quadrature ---
QUAD_EPSREL = 1e-9
QUAD_EPSABS = 1e-13
QUAD_MAX_EVALUATIONS = 2 ** 20
GAUSS_ORDER = 8
GRADED_LEVELS = 60
CANTOR_LEVEL = 16
MASS_CELLS = 256

# --- Seminorms ---
BOUNDARY_RATIO = 1e-3
SEMINORM_POINTS = 4001
MAX_GRID_DOUBLINGS = 4

# --- Certificates & Fits ---
SLACK_MARGIN = 0.1
SLOPE_TOL = 0.05
DEGREE_MARGIN = 0.05
LIMIT_TAIL = 3
AGREEMENT_RTOL = 5e-2
AGREEMENT_ATOL = 1e-12
VANISH_TOL = 1e-6
MIN_SCALES = 4
MIN_FIT_SCALES = 6
MIN_BATTERY = 4
RANDOM_STATE = 42

# --- Pipeline Verdicts ---
CONVERGE_TOL = 1e-3
SETTLE_ATOL = 1e-12
PATH_TOL = 1e-8
POISSON_RTOL = 2e-2
ALPHA_TOL = 0.02
COUNTEREXAMPLE_TOL = 0.05
RESIDUAL_TOL = 0.1
RATIO_TOL = 1e-10
DISPERSION_TOL = 0.5
REPRODUCTION_TOL = 1e-5

# --- Runtime ---
MRDIST_THREADS = max(1, int(os.getenv("MRDIST_THREADS", "1")))
OUTPUT_DIR = os.getenv("MRDIST_OUTPUT_DIR", os.path.join(str(_project_root), "results"))
METRICS_FILE = os.getenv("MRDIST_METRICS_FILE", "")
LOG_LEVEL = os.getenv("MRDIST_LOG_LEVEL", "INFO")

# --- W&B ---
WANDB_API_KEY = os.getenv("WANDB_API_KEY", "")
WANDB_PROJECT = os.getenv("WANDB_PROJECT", "mrdist-experiments")

# --- Output ---
FLOAT_FORMAT = "%.12g"
SCHEMA_VERSION = 1
