"""
Constants used throughout the application
"""

# Config files must declare this version
CONFIG_VERSION = 1

# Fluid diffusion
DIFFUSION_RATE_FLOOR = 1e-6
CSCH_CUTOFF = 1e-12
PROBABILITY_FLOOR = 1e-12
HEAT_SIGMA_FLOOR = 1e-12

# Soft manifold
MAX_BALL_RADIUS = 1.0 - 1e-6
RANDOM_BALL_RADIUS = 0.5
PHI_STAR_FLOOR = 1e-12

# Component regions: centres on a ring; region radius is REGION_FILL times half the gap between neighboring centres
REGION_RING_RADIUS = 0.5
REGION_FILL = 1.0 / 3.0
# share of the region radius spanned by a component's initial layout and by its graph diameter
REGION_SPREAD = 0.5

# Step control: a step raising a component's loss is undone and its step size halved
STEP_GROWTH = 1.25
STEP_SHRINK = 0.5

# Embedding defaults
DEFAULT_KAPPA = 1.0
DEFAULT_EPS_D = 1e-8
DEFAULT_EPS_G = 1e-8
FD_STEP = 1e-5

# Geodesic oracle
GEODESIC_SEGMENTS = 64
GEODESIC_MIN_SEGMENTS = 8
GEODESIC_TOLERANCE = 1e-6
GEODESIC_PATIENCE = 100
GEODESIC_MAX_ITERATIONS = 5000
GEODESIC_DISK_RADIUS = 1.0 - 1e-9

# Out-of-sample placement of held-out nodes
HOLDOUT_PLACEMENT_STEPS = 200

# Evaluation
DEFAULT_K_VOTE = 5
SUPPORTED_METRICS = ("map", "ad")
