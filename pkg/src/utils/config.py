import os

VERSION = "0.1.0"

# Base directory of the project
BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))

# Shipped figure recipes
RECIPES_DIR = os.path.join(BASE_DIR, "recipes")

# Where the CLI writes when --out-dir is not given
DEFAULT_OUT_DIR = os.path.join(os.getcwd(), "runs")

# HCN spectroscopic constants (external data, used for reporting only)
HCN_ROTATIONAL_CONSTANT_GHZ = 44.316
HCN_DIPOLE_DEBYE = 2.985

# Field synthesis
WINDOW_N_SIGMA = 6.0
WINDOW_EDGE_TOLERANCE = 1e-7
QUADRATURE_POINTS_PER_PERIOD = 40
QUADRATURE_RTOL = 1e-6
QUADRATURE_MAX_REFINEMENTS = 6
SPECTRAL_AGREEMENT_RTOL = 1e-5
OVERLAP_THRESHOLD = 1e-3

# Propagation
STEPS_PER_PERIOD = 200
NORM_TOLERANCE = 1e-10
PROPAGATION_BLOCK_SIZE = 512

# Observables
REVIVAL_GRID_POINTS = 4096
REVIVAL_TIME_TOLERANCE = 1e-8
PHASE_POPULATION_THRESHOLD = 1e-4
SMALL_THETA12 = 1e-4

# Sweeps
SWEEP_CHUNK_SIZE = 64
SWEEP_MAX_WORKERS = 4
