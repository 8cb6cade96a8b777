# API Versioning
API_VERSION = "v1"  # Current API version
API_VERSION_PREFIX = f"/{API_VERSION}"  # URL prefix for current version

# Pagination defaults
DEFAULT_PAGE_SIZE = 100
MAX_PAGE_SIZE = 100
MIN_PAGE_SIZE = 1

# Database connection pool settings (ignored for SQLite)
DB_POOL_SIZE = 10  # Number of connections to maintain in the pool
DB_MAX_OVERFLOW = 20  # Maximum number of connections beyond pool_size
DB_POOL_RECYCLE_SECONDS = 3600  # Recycle connections after 1 hour (in seconds)

# Linear programming
LP_TOLERANCE = 1e-9  # Pivot and feasibility tolerance of the dense simplex
LP_MAX_PIVOTS = 50_000  # Hard stop; Bland's rule terminates long before this

# Geometry
NORMAL_TOLERANCE = 1e-12  # Stored halfspace normals have norm 1 within this
MEMBERSHIP_TOLERANCE = 1e-9  # Slack allowed when testing z in C
FIBER_GUARD = 10_000  # Maximum number of integer fibers brute force will enumerate

# Bit oracle encoding
SIGN_BIT_INDEX = 64  # Index of the sign bit
MIN_BIT_INDEX = -64  # Lowest fraction bit
MAX_BIT_INDEX = 64

# Vector recovery
ORTHONORMAL_TOLERANCE = 1e-12  # Re-orthogonalize frames whose columns drift past this

# Centerpoint solver
DEFAULT_CENTERPOINT_SAMPLES = 10_000  # Rejection samples per iteration (split across fibers)
DEFAULT_CENTERPOINT_DIRECTIONS = 64  # Unit directions tried when ranking candidates
MIN_ACCEPTANCE_RATE = 0.05  # Recompute a fiber bounding box by LP below this acceptance
EPS_PRIME_DIVISOR = 6  # eps' = eps / 6

# Adversary construction
FIBER_SLOPE_FACTOR = 3.0  # Off-fiber slope is 3MR per integer coordinate
TRUNCATION_RADIUS = 1.0 / 3.0  # Off-fiber points beyond this are truncated to OPT

# Inexact interface
TILT_TOLERANCE = 1e-9  # Convergence tolerance of the cone projection
PROJECTION_TOLERANCE = 1e-10  # Convergence tolerance of polytope projection
PROJECTION_MAX_SWEEPS = 20_000
CAP_CONSTANT = 2.0 * 6.0**0.5  # Cap-diameter constant of the projection error recursion
AFFINE_TOLERANCE = 1e-12  # Slack when checking that an affine cuts off a support value

# Experiments
CSV_FLOAT_FORMAT = "{:.12g}"
