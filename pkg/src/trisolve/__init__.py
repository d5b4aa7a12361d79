"""Iterative solvers for ``Ax = b``, the normal equation ``A^T A x = A^T b``,
minimum-norm solutions, and LP feasibility, for dense and sparse matrices of
arbitrary rank.

Two solver families are provided.  The *centering* family drives the residual
``r = b - Ax`` to zero through steps ``r <- r - sum_i alpha_i H^i r`` whose
coefficients solve a small moment system; ``H`` is either ``A`` itself
(symmetric PSD input) or the Gram operator ``A A^T`` applied implicitly.  The
*triangle* family tests membership of ``b`` in the ellipsoid
``{Ax : ||x|| <= rho}`` through pivot steps, yielding approximate solutions,
infeasibility witnesses with certified lower bounds on ``||x*||``, and
minimum-norm solutions by bisection on ``rho``.
"""

from .results import (
    APPROX_SOLUTION,
    FEASIBLE,
    INCONCLUSIVE,
    ITERATION_CAP,
    MIN_NORM_SOLUTION,
    NORMAL_EQ_SOLUTION,
    NUMERICAL_FAILURE,
    WITNESS,
    SolveResult,
    Trace,
)
from .linalg import HOperator, GramProduct, matvec, matvec_transpose, norm2
from .centering import CenteringOptions, centering_solve
from .triangle import min_norm_solve, solve_adaptive, solve_in_ball
from .feasibility import nonnegative_feasibility
from .hybrid import HybridOptions, hybrid_solve
from . import dynamics, gallery, mmio

__all__ = [
    "APPROX_SOLUTION",
    "FEASIBLE",
    "INCONCLUSIVE",
    "ITERATION_CAP",
    "MIN_NORM_SOLUTION",
    "NORMAL_EQ_SOLUTION",
    "NUMERICAL_FAILURE",
    "WITNESS",
    "SolveResult",
    "Trace",
    "HOperator",
    "GramProduct",
    "matvec",
    "matvec_transpose",
    "norm2",
    "CenteringOptions",
    "centering_solve",
    "solve_in_ball",
    "solve_adaptive",
    "min_norm_solve",
    "nonnegative_feasibility",
    "HybridOptions",
    "hybrid_solve",
    "dynamics",
    "gallery",
    "mmio",
]

__version__ = "0.1.0"
