"""
Configuration file for the semantic scheduling simulator
"""
import os
from pathlib import Path

# Project root directory
PROJECT_ROOT = Path(__file__).parent.parent

# Bundled experiment configs and parameter grids
CONFIGS_DIR = PROJECT_ROOT / "configs"
STABLE_CONFIG = CONFIGS_DIR / "stable.json"
UNSTABLE_CONFIG = CONFIGS_DIR / "unstable.json"
SINGLE_SENSOR_CONFIG = CONFIGS_DIR / "single_sensor.json"
GRIDS_DIR = CONFIGS_DIR / "grids"

# Output paths (created on first write, not at import)
OUTPUT_DIR = Path(os.getenv("SEMSCHED_OUTPUT_DIR", PROJECT_ROOT / "output"))

# Channel parameters used throughout the numerical study
DEFAULT_DELTA = 1.0
DEFAULT_EPSILON = 0.05

# Simulation parameters
DEFAULT_NUM_PACKETS = 100_000
DEFAULT_NUM_BATCHES = 20
DEFAULT_WARMUP_FRACTION = 0.0

# Sweep parameters
DEFAULT_NUM_SEEDS = 5
GRID_SIZE_CAP = 10_000
DEFAULT_WORKERS = int(os.getenv("SEMSCHED_WORKERS", "1"))
DEFAULT_ALPHAS = tuple(round(0.1 * i, 1) for i in range(1, 10))

# Numerical tolerances
CONDITION_LIMIT = 1e10
RECONSTRUCTION_TOL = 1e-8
INVERSE_TOL = 1e-10
RESONANCE_TOL = 1e-10
IMAGINARY_TOL = 1e-8
CLAMP_TOL = 1e-10
STABILITY_TOL = 1e-12
DENOMINATOR_TOL = 1e-12
SYMMETRY_TOL = 1e-12
PSD_TOL = 1e-10
WEIGHT_SUM_TOL = 1e-9

# Trajectory oracle defaults
STEPS_PER_DELTA = 50
CHOLESKY_JITTER = 1e-12

# Logging
LOG_LEVEL = os.getenv("SEMSCHED_LOG_LEVEL", "WARNING")
