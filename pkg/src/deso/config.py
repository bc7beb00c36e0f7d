"""Central configuration for descriptor observers."""

from __future__ import annotations

# Tolerances
RANK_TOL = 1e-9
RESIDUAL_TOL = 1e-8
SCHUR_MARGIN = 1e-6

# Pencil rank probing
PENCIL_PROBE_SEED = 1_618_033
REGULARITY_PROBE = complex(0.7853981633974483, 0.5436563656918091)
CIRCLE_GRID_POINTS = 720
CIRCLE_GRID_RADII = (1.0, 1.25)

# Data collection
MAX_PE_RETRIES = 10
DEFAULT_INPUT_LOW = -5.0
DEFAULT_INPUT_HIGH = 5.0
DEFAULT_SINUSOID_AMPLITUDE = 4.0
Z1_INIT_LOW = 0.0
Z1_INIT_HIGH = 2.0

# Test phase
DEFAULT_TEST_STEPS = 200
XHAT_INIT_LOW = 0.0
XHAT_INIT_HIGH = 2.0

# Random plants
MC_MIN_STATES = 2
MC_MAX_STATES = 4
MC_MIN_INPUTS = 1
MC_MAX_INPUTS = 2
MC_UNKNOWN_INPUTS = 1
MC_STABLE_RADIUS = 0.95
MC_UNSTABLE_RADIUS_LOW = 1.05
MC_UNSTABLE_RADIUS_HIGH = 1.3
MC_EIGENVALUE_GAP = 0.05
MC_SCALE_LOW = 0.5
MC_SCALE_HIGH = 1.5
MC_DEFAULT_TRIALS = 50
MC_DEFAULT_SEED = 2024
MC_WORKERS = 1

# Oracles
LEMMA1_TRIALS = 100
TN_MAX_DRAWS = 20

# Experiments
DEFAULT_SEED = 7
DEFAULT_DRIVER = "noncausal"
REFERENCE_EXAMPLES = (1, 2, 4)

# Reference spectral radii (annotations only, data dependent)
REFERENCE_RADIUS = {1: 0.2083, 2: 0.4628, 4: 0.7426}

# Reproduction acceptance
RECURSION_RESIDUAL_LIMIT = 1e-8
DECOUPLING_LIMIT = 1e-9
DRIVER_AGREEMENT_LIMIT = 1e-10
UIO_DECAY_RATIO = 1e-2
# example -> (error bound, within steps)
CONVERGENCE_TARGETS = {1: (1e-6, 50), 4: (1e-5, 100)}

# Output files
DATASET_FILE = "dataset.csv"
META_FILE = "meta.json"
GAINS_FILE = "gains.json"
REPORT_FILE = "report.json"
RUN_FILE = "run.csv"
CHECKS_FILE = "checks.json"
SUMMARY_FILE = "summary.json"
CONFIG_FILE = "config.json"
CSV_FLOAT_FORMAT = "%.17g"

# Exit codes
EXIT_OK = 0
EXIT_PARSE = 1
EXIT_INFEASIBLE = 2
EXIT_PE_EXHAUSTED = 3
EXIT_IO = 4

# Logging
LOG_LEVEL = "INFO"
