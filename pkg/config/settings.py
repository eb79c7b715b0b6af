"""
Configuration settings for the hardy-plaplace toolkit
"""

import os
from dotenv import load_dotenv


load_dotenv()


def _int_env(name, default):
    value = os.getenv(name)
    return int(value) if value not in (None, '') else default


def _float_env(name, default):
    value = os.getenv(name)
    return float(value) if value not in (None, '') else default


# Runtime
THREADS = _int_env('HARDY_PLAPLACE_THREADS', os.cpu_count() or 1)
LOG_LEVEL = os.getenv('HARDY_PLAPLACE_LOG_LEVEL', 'WARNING').upper()
SEED = _int_env('HARDY_PLAPLACE_SEED', 0)

# File Paths
DATA_DIR = 'data'
OUTPUT_DIR = os.getenv('HARDY_PLAPLACE_OUTPUT_DIR', 'outputs')

# Numerical kernel tolerances
ROOT_TOL = _float_env('HARDY_PLAPLACE_ROOT_TOL', 1e-14)
ODE_RTOL = _float_env('HARDY_PLAPLACE_ODE_RTOL', 1e-10)
ODE_ATOL = _float_env('HARDY_PLAPLACE_ODE_ATOL', 1e-12)
QUAD_TOL = _float_env('HARDY_PLAPLACE_QUAD_TOL', 1e-12)
QUAD_LIMIT = 200

# Generalized sine table
GENSINE_NODES = _int_env('HARDY_PLAPLACE_GENSINE_NODES', 2048)
GENSINE_TOL = 1e-9

# Exponent algebra
DOUBLE_ROOT_TOL = 1e-12

# Barrier sign classification
SIGN_TOL = 1e-13
THRESHOLD_SCAN = (2, 12)
BARRIER_SAMPLES = 400

# Prufer runs
DEFAULT_T_END = 25.0
LONG_T_END = 1e4
FIT_SAMPLES = 400

# Hardy checks
RAYLEIGH_GRID = 512
RAYLEIGH_MAX_ITER = 5000
RANDOM_DRAWS = 100

# CSV contracts
SCHEMA_VERSION = 1


# Validation
def validate_config():
    """Validate configuration settings"""
    ok = True
    if THREADS < 1:
        print("WARNING: HARDY_PLAPLACE_THREADS must be at least 1")
        ok = False
    for name, value in (('ROOT_TOL', ROOT_TOL), ('ODE_RTOL', ODE_RTOL),
                        ('ODE_ATOL', ODE_ATOL), ('QUAD_TOL', QUAD_TOL)):
        if not value > 0:
            print(f"WARNING: {name} must be positive, got {value}")
            ok = False
    if GENSINE_NODES < 16:
        print(f"WARNING: GENSINE_NODES too small: {GENSINE_NODES}")
        ok = False
    if THRESHOLD_SCAN[0] > THRESHOLD_SCAN[1]:
        print("WARNING: THRESHOLD_SCAN range is empty")
        ok = False
    return ok


if __name__ == "__main__":
    validate_config()
