APP_VERSION = "0.1.0"

# Quadrature
GAUSS_LEGENDRE_ORDER = 20
RS_INITIAL_CELLS = 64
REPAIR_SAMPLE_EXPONENTS = range(20, 51)

# Second mean value theorem
BISECTION_STEPS = 200
SECOND_MVT_RESIDUAL = 1e-8

# Extremum refinement
EXTREMUM_CANDIDATES = 8

# Laplace transform
CONE_ANGLES = 33

# CSV output
SIGNIFICANT_DIGITS = 17

# Convergence lab batteries
BUMP_CENTERS = (-10.0, -5.0, -2.0, 0.0, 2.0, 5.0, 10.0)
BUMP_WIDTHS = (0.5, 1.0, 2.0, 4.0)
WIDE_BUMP = (0.0, 20.0)
WINDOW_CENTER_FRACTIONS = (0.2, 0.35, 0.5, 0.65, 0.8)
WINDOW_WIDTH_FRACTIONS = (0.05, 0.1, 0.15)
TREND_TAIL = 5
EPSILON_LADDER = (1.0, 0.1, 0.01)
N_LADDER = (1, 2, 4, 8, 16)

# Poisson boundary gap samples
GAP_SAMPLES = 61
