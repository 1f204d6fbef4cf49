"""Feasible-interior-point solver for mixed nonlinear complementarity problems.

The problem: find z with z_i >= 0 and r_i(z) >= 0 for every complementarity
pair i, z_i r_i(z) = 0 on those pairs, and r_j(z) = 0 on the remaining
equality rows.  In "mncp" mode only a designated subset of pairs is
complementary; in "ncp" mode every row is.

The iteration is Newton's method on H(z) = (z_i r_i on pairs, r_j elsewhere)
with a centering perturbation on the complementarity rows, an
interiority-preserving backtracking line search, and Armijo decrease on the
merit function S = 0.5 ||H||^2.  Every accepted iterate is strictly interior.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from combust.bandmat import BandedMatrix

MNCP = "mncp"
NCP = "ncp"

_STEP_FLOOR = 1e-12


class SolverError(RuntimeError):
    """Base class for solver failures; carries the last iterate and report."""

    def __init__(self, message: str, iterate=None, report=None):
        super().__init__(message)
        self.iterate = iterate
        self.report = report


class InfeasibleStart(SolverError):
    pass


class SingularJacobian(SolverError):
    pass


class LineSearchStall(SolverError):
    pass


class MaxIterations(SolverError):
    pass


@dataclass
class SolverOptions:
    tol: float = 1e-8               # stopping tolerance on max|H|
    max_iter: int = 200
    sigma_c: float = 0.5            # centering fraction
    eta_armijo: float = 0.1         # sufficient-decrease fraction
    nu_backtrack: float = 0.8       # step contraction factor
    eps_interior: float = 1e-6      # initial interiority floor
    max_restore: int = 60           # doubling cap in feasibility restoration

    def __post_init__(self) -> None:
        if not 0.0 < self.sigma_c < 1.0:
            raise ValueError(f"sigma_c must be in (0, 1), got {self.sigma_c}")
        if not 0.0 < self.nu_backtrack < 1.0:
            raise ValueError(f"nu_backtrack must be in (0, 1), got {self.nu_backtrack}")
        if not self.tol > 0.0:
            raise ValueError(f"tol must be positive, got {self.tol}")


@dataclass
class MncpProblem:
    """Evaluation contract for one complementarity problem.

    residual maps z to the full residual vector; jacobian maps z to its
    derivative, either a dense ndarray or a BandedMatrix.  comp_index lists
    the rows/variables forming complementarity pairs (pair i couples z_i
    with residual row i); it defaults to the first n1 indices in mncp mode
    and to all indices in ncp mode.
    """

    n1: int
    n2: int
    residual: Callable[[np.ndarray], np.ndarray]
    jacobian: Callable[[np.ndarray], object]
    mode: str = MNCP
    comp_index: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        if self.mode not in (MNCP, NCP):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.comp_index is None:
            n_pairs = self.n1 if self.mode == MNCP else self.n1 + self.n2
            self.comp_index = np.arange(n_pairs)
        self.comp_index = np.asarray(self.comp_index, dtype=int)

    @property
    def size(self) -> int:
        return self.n1 + self.n2


@dataclass
class SolverReport:
    converged: bool = False
    iterations: int = 0
    s_evals: int = 0       # merit evaluations, line-search probes included
    js_evals: int = 0      # Jacobian builds / factorizations
    last_step: float = 1.0
    h_inf: float = np.inf
    wall_time: float = 0.0


def merit_vector(z: np.ndarray, r: np.ndarray, problem: MncpProblem) -> np.ndarray:
    """H(z): complementarity products on pair rows, raw residual elsewhere."""
    h = r.copy()
    ci = problem.comp_index
    h[ci] = z[ci] * r[ci]
    return h


def natural_residual(z: np.ndarray, r: np.ndarray, problem: MncpProblem) -> float:
    """max_i min(z_i, r_i) over complementarity pairs.

    A scale-aware complementarity measure: the product z_i r_i can fall
    under any tolerance when both factors are merely small, while
    min(z_i, r_i) only does when one of them is genuinely near zero.
    """
    ci = problem.comp_index
    if ci.size == 0:
        return 0.0
    return float(np.max(np.minimum(z[ci], r[ci])))


def merit(z: np.ndarray, problem: MncpProblem):
    """Merit value S = 0.5 ||H||^2 together with the vector H."""
    r = problem.residual(z)
    h = merit_vector(z, r, problem)
    return 0.5 * float(h @ h), h


def _newton_matrix(z, r, jac, problem):
    """Jacobian of H: pair rows get z_i * (dr_i/dz) + e_i r_i, others dr_j/dz."""
    ci = problem.comp_index
    n = problem.size
    scale = np.ones(n)
    scale[ci] = z[ci]
    diag_add = np.zeros(n)
    diag_add[ci] = r[ci]
    if isinstance(jac, BandedMatrix):
        jh = jac.copy()
        jh.scale_rows(scale)
        jh.add_diagonal(diag_add)
        return jh
    jh = np.asarray(jac, dtype=float) * scale[:, None]
    jh[np.arange(n), np.arange(n)] += diag_add
    return jh


def _solve_linear(jh, rhs):
    if isinstance(jh, BandedMatrix):
        return jh.solve(rhs)
    return np.linalg.solve(jh, rhs)


def _matvec(jh, x):
    if isinstance(jh, BandedMatrix):
        return jh.matvec(x)
    return jh @ x


def _perturb_diagonal(jh):
    if isinstance(jh, BandedMatrix):
        diag = jh.diagonal()
        jh.add_diagonal(1e-12 * (1.0 + np.abs(diag)))
        return jh
    n = jh.shape[0]
    idx = np.arange(n)
    jh[idx, idx] += 1e-12 * (1.0 + np.abs(jh[idx, idx]))
    return jh


def direction(z: np.ndarray, problem: MncpProblem, opts: SolverOptions, r=None):
    """Feasible descent direction: solve J_H d = -H + rho w.

    w is 1 on complementarity rows and 0 on equality rows;
    rho = sigma_c min(1, ||H||_2) ||H||_2 / sqrt(n_pairs), which guarantees
    grad(S)^T d <= -(1 - sigma_c) ||H||^2 while fading the centering away
    near the solution so the tail of the iteration is an undamped Newton
    step (quadratic local convergence).
    Returns (d, grad_S_dot_d).
    """
    if r is None:
        r = problem.residual(z)
    h = merit_vector(z, r, problem)
    jh = _newton_matrix(z, r, problem.jacobian(z), problem)
    ci = problem.comp_index
    norm_h = float(np.linalg.norm(h))
    rho_c = opts.sigma_c * min(1.0, norm_h) * norm_h / np.sqrt(ci.size)
    rhs = -h
    rhs[ci] += rho_c
    try:
        d = _solve_linear(jh, rhs)
        if not np.all(np.isfinite(d)):
            raise np.linalg.LinAlgError("non-finite direction")
    except np.linalg.LinAlgError:
        jh = _perturb_diagonal(jh)
        try:
            d = _solve_linear(jh, rhs)
        except np.linalg.LinAlgError as err:
            raise SingularJacobian("Newton matrix is singular", iterate=z) from err
        if not np.all(np.isfinite(d)):
            raise SingularJacobian("Newton matrix is singular", iterate=z)
    g_dot_d = float(h @ _matvec(jh, d))
    return d, g_dot_d


def line_search(z, d, g_dot_d, s0, problem: MncpProblem, opts: SolverOptions):
    """Backtracking on the ladder {1, nu, nu^2, ...}.

    Accepts the largest t keeping z + t d strictly interior (positive pair
    variables and positive pair residuals) with Armijo decrease on S.
    Returns (t, z_next, r_next, h_next, s_next, n_merit_evals).
    """
    ci = problem.comp_index
    t = 1.0
    n_evals = 0
    while t >= _STEP_FLOOR:
        z_t = z + t * d
        if np.all(z_t[ci] > 0.0):
            r_t = problem.residual(z_t)
            h_t = merit_vector(z_t, r_t, problem)
            s_t = 0.5 * float(h_t @ h_t)
            n_evals += 1
            if np.all(r_t[ci] > 0.0) and s_t <= s0 + opts.eta_armijo * t * g_dot_d:
                return t, z_t, r_t, h_t, s_t, n_evals
        t *= opts.nu_backtrack
    raise LineSearchStall(f"line search stalled below t={_STEP_FLOOR} (S={s0:.3e})", iterate=z)


def restore_feasibility(z0, problem: MncpProblem, opts: SolverOptions):
    """Move a warm start into the strict interior.

    Clamp pair variables to eps_interior, then add a doubling shift delta to
    them until every pair residual is strictly positive.
    Returns (z, r, n_residual_evals).
    """
    ci = problem.comp_index
    z = np.array(z0, dtype=float)
    z[ci] = np.maximum(z[ci], opts.eps_interior)
    r = problem.residual(z)
    n_evals = 1
    delta = opts.eps_interior
    doublings = 0
    while np.any(r[ci] <= 0.0):
        if doublings >= opts.max_restore:
            bad = [int(i) for i in problem.comp_index[r[ci] <= 0.0]]
            raise InfeasibleStart(f"could not restore interiority; violated rows {bad}", iterate=z)
        z[ci] += delta
        r = problem.residual(z)
        n_evals += 1
        delta *= 2.0
        doublings += 1
    return z, r, n_evals


def solve(problem: MncpProblem, z0: np.ndarray, opts: Optional[SolverOptions] = None):
    """Run the feasible-interior-point iteration from z0.

    Returns (z_star, SolverReport) on convergence (max|H| <= tol); raises a
    SolverError subclass carrying the last iterate and report otherwise.
    """
    opts = opts if opts is not None else SolverOptions()
    report = SolverReport()
    t_start = time.perf_counter()
    try:
        z, r, n_evals = restore_feasibility(z0, problem, opts)
    except InfeasibleStart as err:
        report.wall_time = time.perf_counter() - t_start
        err.report = report
        raise
    report.s_evals += n_evals
    h = merit_vector(z, r, problem)
    s = 0.5 * float(h @ h)

    while True:
        report.h_inf = float(np.max(np.abs(h)))
        # Stop on max|H| <= tol, sharpened by the natural residual so tiny
        # variables cannot mask large raw residuals on their pair rows.
        if report.h_inf <= opts.tol and natural_residual(z, r, problem) <= opts.tol:
            report.converged = True
            report.wall_time = time.perf_counter() - t_start
            return z, report
        if report.iterations >= opts.max_iter:
            report.wall_time = time.perf_counter() - t_start
            raise MaxIterations(
                f"no convergence in {opts.max_iter} iterations (max|H|={report.h_inf:.3e})",
                iterate=z, report=report,
            )
        try:
            d, g_dot_d = direction(z, problem, opts, r=r)
            report.js_evals += 1
            t, z, r, h, s, n_evals = line_search(z, d, g_dot_d, s, problem, opts)
        except SolverError as err:
            report.wall_time = time.perf_counter() - t_start
            err.report = report
            raise
        report.s_evals += n_evals
        report.iterations += 1
        report.last_step = t
