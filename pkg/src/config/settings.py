"""Runtime settings for the laguerre-cz project."""

import os
from pathlib import Path

import environ

env = environ.Env()

BASE_DIR = Path(__file__).resolve().parent.parent
PROJECT_ROOT = BASE_DIR.parent
environ.Env.read_env(PROJECT_ROOT / ".env")

# Quadrature
PI_NODES = env.int("PI_NODES", default=64)
T_PANELS = env.int("T_PANELS", default=48)
T_PANEL_POINTS = env.int("T_PANEL_POINTS", default=8)
ADAPTIVE_MAX_INTERVALS = env.int("ADAPTIVE_MAX_INTERVALS", default=4000)
GRADED_LEVELS = env.int("GRADED_LEVELS", default=36)
GRADED_POINTS = env.int("GRADED_POINTS", default=8)

# Spectral truncation
SPECTRAL_K_MAX = env.int("SPECTRAL_K_MAX", default=100)
OPERATOR_K_MAX = env.int("OPERATOR_K_MAX", default=32)

# Banach norms and t-windows
HEAT_MAX_GRID_POINTS = env.int("HEAT_MAX_GRID_POINTS", default=200)
HEAT_MAX_T_MIN = env.float("HEAT_MAX_T_MIN", default=1e-4)
HEAT_MAX_T_MAX = env.float("HEAT_MAX_T_MAX", default=20.0)
ENVELOPE_CUTOFF = env.float("ENVELOPE_CUTOFF", default=1e-18)

# Finite differences; unset FD_STEP picks the step from the derivative order
FD_STEP = env.float("FD_STEP", default=None)
FD_LEVELS = env.int("FD_LEVELS", default=2)

# Sweeps
SWEEP_THREADS = env.int("SWEEP_THREADS", default=os.cpu_count() or 1)
REFINEMENT_GROWTH_LIMIT = env.float("REFINEMENT_GROWTH_LIMIT", default=0.10)
CONFIG_SCHEMA_VERSION = 1

LOG_LEVEL = env("LOG_LEVEL", default="INFO")

LOGGING = {
    "version": 1,
    "disable_existing_loggers": False,
    "formatters": {
        "verbose": {
            "format": "%(asctime)s %(levelname)s %(name)s: %(message)s",
        },
    },
    "handlers": {
        "console": {
            "class": "logging.StreamHandler",
            "formatter": "verbose",
            "stream": "ext://sys.stderr",
        },
    },
    "root": {
        "handlers": ["console"],
        "level": LOG_LEVEL,
    },
}
