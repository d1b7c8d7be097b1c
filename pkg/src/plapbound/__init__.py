"""Comparison lower bounds for first p-Laplacian eigenvalues on Kähler manifolds.

The bounds are first eigenvalues of one-dimensional weighted p-Laplacian
problems. :mod:`plapbound.eigensolve1d` computes them by shooting,
:mod:`plapbound.oracle` checks them against brute-force computations on the
flat torus, and :mod:`plapbound.cli` exposes both on the command line.
"""

from .eigensolve1d import (
    EigenResult,
    ProblemKind,
    SolverConfig,
    SpectralParams,
    closed_form_bound,
    rayleigh_oracle,
    solve,
    solve_dirichlet,
    solve_neumann,
)
from .errors import (
    BracketError,
    ConvergenceError,
    DomainError,
    FocalPointError,
    IntegrationError,
    PoleError,
    SolverError,
    StabilityError,
)
from .reports import BoundReport, Provenance, Status
from .specfun import big_c, c_kappa, pi_p, t_kappa, t_kappa_lambda

__version__ = "0.1.0"
