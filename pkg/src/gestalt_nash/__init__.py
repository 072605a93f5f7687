"""Security-investment games with limited-attention players.

Investment equilibria, sparse attention networks via accelerated proximal
gradient, and the alternating solver for their joint equilibrium.
"""

from .cognition import ApgConfig, apg_convex, apg_nonconvex, calibrate_alpha, solve_cognition
from .engine import (
    GneConfig,
    GneOutcome,
    detect_phenomena,
    gne_solve,
    homogeneous_closed_form,
    verify_gne,
)
from .equilibrium import BrSolverConfig, brne_direct, brne_iterate, effective_system, rational_ne
from .game import SecurityGame, perceived_cost, rbp, true_cost, validate_game
from .prox import build_lambda, eval_Q, grad_f1, proj_box, prox_f2_plus_f3, soft_threshold

__version__ = "0.1.0"
