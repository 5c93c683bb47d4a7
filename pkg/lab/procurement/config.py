"""
Numerical defaults for the procurement lab.

Every value here can be overridden per call through keyword arguments
and from the command line.
"""

import os

# --- Monte Carlo ---
DEFAULT_SEED = 0
DEFAULT_MC_N = 1_000_000
MC_BLOCK = 65_536  # draws per stream block

# --- Quadrature ---
TRUNCATION_SIGMAS = 10.0
QUAD_EPSABS = 1e-9
QUAD_INNER_EPSABS = 1e-10
QUAD_LIMIT = 200

# --- Grid search ---
# Search window of the synthetic experiments: A in [-1.9, 3], B in [-4.9, 0], mesh 0.1
STANDARD_GRID = dict(a_min=-1.9, a_max=3.0, b_min=-4.9, b_max=0.0, mesh=0.1)

# Backtest window is centred on (0, 0) with half-width HEDGE_WINDOW_SIGMAS * max(sigma1, sigma2)
HEDGE_WINDOW_SIGMAS = 5.0
HEDGE_ZOOM_MESHES = (0.25, 0.05, 0.01)

MAX_WORKERS = max(1, os.cpu_count() - 1) if os.cpu_count() else 4

# --- Reporting ---
YEN_QUANTUM = "0.01"
