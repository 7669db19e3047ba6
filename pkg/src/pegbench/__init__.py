"""Extrapolated proximal gradient solvers for monotone variational
inequalities and composite minimization, plus a benchmark harness."""

__version__ = "0.1.0"

from .core import (CompositeProblem, Counters, MonotoneMap, SolverConfig,
                   SolverState, VIProblem, affine_extrapolated_value,
                   ergodic_point, ergodic_update, extrapolate, init_lambda0)
from .prox import (BoxBounds, ProxFriendly, ball_prox, box_prox, l1_prox,
                   product_prox, project_ball, project_box, project_simplex,
                   prox_product, simplex_prox, soft_threshold, zero_prox)
from .solvers import (IterationTrace, LinesearchError, LinesearchOutcome,
                      SolveReport, alg1_linesearch, alg1_solve,
                      alg2_linesearch, alg2_solve, alg3_linesearch,
                      alg3_solve, fixed_step_solve, max_feasible_lambda)
from .baselines import (BacktrackConfig, PDConfig, cp_pd_solve, fbf_solve,
                        fista_solve, pgm_solve, spectral_norm)
from .metrics import (GapReport, ergodic_bound_rhs, lyapunov_energy,
                      matrix_game_gap, natural_residual, psi)
from .problems import (ProblemInstance, RngSpec, finite_diff_grad,
                       make_analytic_center, make_cons_min, make_geo_prog,
                       make_lp_min, make_matrix_game, make_sun)
