"""Central numeric defaults for OrliczLab.

Only put small, stable primitives here. Runtime overrides live in
config/default_config.json and are validated by ``LabSettings``.
"""

# Default absolute tolerance for norms, conjugates and checks
DEFAULT_TOL: float = 1e-9

# Ratio of consecutive points on geometric probe grids
GRID_RATIO: float = 1.05

# Large-t probe point for the asymptotic slope of phi
SLOPE_PROBE_T: float = 1e6

# Relative margin above the slope estimate before a conjugate is declared infinite
SLOPE_MARGIN: float = 1e-6

# Hard cap for every bracket expansion
BRACKET_CAP: float = 1e300

# Delta2 probe
DELTA2_FAIL_THRESHOLD: float = 1e6
DELTA2_TREND_RTOL: float = 1e-9
DELTA2_ZERO_T0_SPAN: float = 1e-9

# KR probe
KR_T_MIN: float = 1e-6

# Order-boundedness verdicts
BOUNDED_GROWTH_EPS: float = 0.05
DIVERGENCE_SLOPE: float = 0.05

# Pointwise tolerance for the Cesaro supremum inequality (relative to max(1, |rhs|))
SUP_CES_VALUE_TOL: float = 1e-12

# Counterexample construction
SEARCH_RATIO: float = 1.05
SEARCH_MAX_STEPS: int = 2000
SEARCH_START: float = 1.0
D0_NUMERATOR: int = 1
D0_DENOMINATOR: int = 4
LPHI2_SLACK: float = 1e-12
MIN_TAIL_SHARE: float = 0.05
PREMISE_EPS: float = 0.1

# Monte Carlo
MC_MAX_DIMENSION: int = 20
MC_MIN_SAMPLES: int = 10_000
MC_CHUNK_SIZE: int = 8192
MC_MIXTURE: float = 0.5

# Eligible sequences and the b-table
STAB_TOL: float = 1e-6
WEAK_NULL_EPS: float = 0.05
FLAT_TREND_RTOL: float = 0.05
DIVERGENCE_FLOOR: float = 0.05
CONVERGENCE_EXPONENT: float = 1.1
MONOTONE_SLACK: float = 1e-12
MAX_DENOMINATOR: int = 10**9

# Exit codes of the command line
EXIT_OK: int = 0
EXIT_VERDICT_FAILURE: int = 2
EXIT_INPUT_ERROR: int = 3
EXIT_NUMERICAL_ERROR: int = 4

# Lower end of the validation grid, relative to t_max
VALIDATION_GRID_SPAN: float = 1e-6
