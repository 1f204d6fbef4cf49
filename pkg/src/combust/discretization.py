"""Crank-Nicolson discretization of the combustion system.

Interior nodes m = 1..M carry the unknowns; node 0 is Dirichlet
(theta = 0, eta = 1) and node M gets the Neumann mirror F_{M+1} = F_{M-1}.
One time step solves, in the unknowns (theta, eta) at level n+1,

    G = A theta + lambda_s P(theta) - 2k Phi(theta, eta) - LD   (complementarity)
    Q = 2 eta - k Phi(theta, eta) - LDQ                          (equality)

where LD = B theta^n - lambda_s P^n + 2k Phi^n + UR and
LDQ = 2 eta^n + k Phi^n are frozen at level n.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from combust.bandmat import BandedMatrix
from combust.model import DimensionlessParams, flux, flux_d, phi, phi_deta, phi_dtheta


class NumericError(RuntimeError):
    """Non-finite value produced during residual evaluation."""

    def __init__(self, message: str, node: int):
        super().__init__(message)
        self.node = node


@dataclass(frozen=True)
class Grid:
    """Uniform space-time grid. M interior unknown nodes, spacing h = length/M."""

    length: float
    m: int
    k: float
    n_steps: int

    def __post_init__(self) -> None:
        if self.m < 2:
            raise ValueError(f"need at least 2 interior nodes, got m={self.m}")
        if self.length <= 0.0 or self.k <= 0.0:
            raise ValueError("grid length and time step must be positive")
        if self.n_steps < 0:
            raise ValueError("n_steps must be nonnegative")

    @property
    def h(self) -> float:
        return self.length / self.m

    @property
    def lambda_s(self) -> float:
        """Scheme coefficient k/h multiplying the flux differences."""
        return self.k / self.h

    @property
    def mu(self) -> float:
        return self.k / self.h**2

    def x_nodes(self) -> np.ndarray:
        """Coordinates of nodes 0..M (boundary included)."""
        return np.linspace(0.0, self.length, self.m + 1)


@dataclass
class State:
    """Interior-node fields at one time level plus the fixed boundary values."""

    theta: np.ndarray
    eta: np.ndarray
    theta_b: float = 0.0
    eta_b: float = 1.0
    n: int = 0

    def validate(self) -> None:
        if self.theta.shape != self.eta.shape:
            raise ValueError("theta and eta must have the same shape")
        if np.any(self.theta < 0.0):
            raise ValueError("theta must be nonnegative")
        if np.any(self.eta < 0.0) or np.any(self.eta > 1.0 + 1e-8):
            raise ValueError("eta must lie in [0, 1 + 1e-8]")

    def copy(self) -> "State":
        return State(self.theta.copy(), self.eta.copy(), self.theta_b, self.eta_b, self.n)


@dataclass
class SchemeCache:
    """Immutable per-run algebra: the tridiagonal matrices A, B and the UR vector.

    A and B are stored as (sub, diag, sup) arrays of length M; sub[0] and
    sup[M-1] are unused and kept at zero.
    """

    a_sub: np.ndarray
    a_diag: np.ndarray
    a_sup: np.ndarray
    b_sub: np.ndarray
    b_diag: np.ndarray
    b_sup: np.ndarray
    ur: np.ndarray
    grid: Grid
    params: DimensionlessParams
    theta_b: float = 0.0
    eta_b: float = 1.0

    def a_matvec(self, x: np.ndarray) -> np.ndarray:
        return _tri_matvec(self.a_sub, self.a_diag, self.a_sup, x)

    def b_matvec(self, x: np.ndarray) -> np.ndarray:
        return _tri_matvec(self.b_sub, self.b_diag, self.b_sup, x)

    def a_dense(self) -> np.ndarray:
        return _tri_dense(self.a_sub, self.a_diag, self.a_sup)

    def b_dense(self) -> np.ndarray:
        return _tri_dense(self.b_sub, self.b_diag, self.b_sup)


@dataclass
class StepResiduals:
    g: np.ndarray
    q: np.ndarray


def _tri_matvec(sub, diag, sup, x):
    y = diag * x
    y[1:] += sub[1:] * x[:-1]
    y[:-1] += sup[:-1] * x[1:]
    return y


def _tri_dense(sub, diag, sup):
    m = diag.size
    dense = np.diag(diag)
    dense[np.arange(1, m), np.arange(m - 1)] = sub[1:]
    dense[np.arange(m - 1), np.arange(1, m)] = sup[:-1]
    return dense


def assemble_matrices(
    grid: Grid,
    params: DimensionlessParams,
    theta_b: float = 0.0,
    eta_b: float = 1.0,
) -> SchemeCache:
    """Build A, B and UR for the Crank-Nicolson step.

    A is tridiagonal with diagonal 4 + 4 mu H and off-diagonals -2 mu H,
    except the last row whose sub-diagonal is -4 mu H (Neumann mirror);
    B mirrors A with the mu H terms sign-flipped, so A + B = 8 I exactly.
    """
    m = grid.m
    muh = grid.mu * params.h_diff

    a_diag = np.full(m, 4.0 + 4.0 * muh)
    a_sub = np.full(m, -2.0 * muh)
    a_sup = np.full(m, -2.0 * muh)
    a_sub[0] = 0.0
    a_sup[m - 1] = 0.0
    a_sub[m - 1] = -4.0 * muh

    b_diag = np.full(m, 4.0 - 4.0 * muh)
    b_sub = np.full(m, 2.0 * muh)
    b_sup = np.full(m, 2.0 * muh)
    b_sub[0] = 0.0
    b_sup[m - 1] = 0.0
    b_sub[m - 1] = 4.0 * muh

    ur = np.zeros(m)
    ur[0] = 4.0 * muh * theta_b

    return SchemeCache(
        a_sub=a_sub, a_diag=a_diag, a_sup=a_sup,
        b_sub=b_sub, b_diag=b_diag, b_sup=b_sup,
        ur=ur, grid=grid, params=params, theta_b=theta_b, eta_b=eta_b,
    )


def assemble_P(theta: np.ndarray, theta_b: float, params: DimensionlessParams) -> np.ndarray:
    """Centered flux differences: row m = F(theta_{m+1}) - F(theta_{m-1}).

    Row 1 uses the boundary value; row M is identically zero because the
    Neumann mirror makes F_{M+1} = F_{M-1} cancel.
    """
    m = theta.size
    full = np.empty(m + 1)
    full[0] = theta_b
    full[1:] = theta
    f = flux(full, params)
    p_vec = np.zeros(m)
    p_vec[: m - 1] = f[2:] - f[: m - 1]
    return p_vec


def assemble_LD(state: State, cache: SchemeCache) -> np.ndarray:
    """Level-n data of the complementarity residual:
    LD = B theta^n - lambda_s P^n + 2k Phi^n + UR."""
    grid = cache.grid
    phi_n = phi(state.theta, state.eta, cache.params)
    return (
        cache.b_matvec(state.theta)
        - grid.lambda_s * assemble_P(state.theta, cache.theta_b, cache.params)
        + 2.0 * grid.k * phi_n
        + cache.ur
    )


def assemble_LDQ(state: State, grid: Grid, params: DimensionlessParams) -> np.ndarray:
    """Level-n data of the equality residual: LDQ = 2 eta^n + k Phi^n."""
    return 2.0 * state.eta + grid.k * phi(state.theta, state.eta, params)


def residual(
    theta_next: np.ndarray,
    eta_next: np.ndarray,
    cache: SchemeCache,
    ld: np.ndarray,
    ldq: np.ndarray,
) -> StepResiduals:
    """Evaluate the step residuals G and Q at a candidate level-(n+1) point."""
    grid = cache.grid
    phi_next = phi(theta_next, eta_next, cache.params)
    g = (
        cache.a_matvec(theta_next)
        + grid.lambda_s * assemble_P(theta_next, cache.theta_b, cache.params)
        - 2.0 * grid.k * phi_next
        - ld
    )
    q = 2.0 * eta_next - grid.k * phi_next - ldq
    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(q))):
        bad = np.flatnonzero(~(np.isfinite(g) & np.isfinite(q)))
        raise NumericError(f"non-finite residual at node {bad[0] + 1}", node=int(bad[0] + 1))
    return StepResiduals(g=g, q=q)


def jacobian(theta_next: np.ndarray, eta_next: np.ndarray, cache: SchemeCache) -> BandedMatrix:
    """Analytic Jacobian of (G, Q) in interleaved ordering.

    Unknowns and rows are ordered (theta_1, eta_1, theta_2, eta_2, ...), so
    the matrix has bandwidth 2 on each side:
        dG/dtheta = A + lambda_s dP/dtheta - 2k diag(phi_theta)
        dG/deta   = -2k diag(phi_eta)
        dQ/dtheta = -k diag(phi_theta)
        dQ/deta   = 2 I - k diag(phi_eta)
    with dP/dtheta row m holding +F'(theta_{m+1}) and -F'(theta_{m-1})
    (row M zero, boundary column dropped).
    """
    grid = cache.grid
    p = cache.params
    m = grid.m
    k = grid.k
    lam = grid.lambda_s

    pt = phi_dtheta(theta_next, eta_next, p)
    pe = phi_deta(theta_next, p)
    fd = flux_d(theta_next, p)

    dgdt_diag = cache.a_diag - 2.0 * k * pt
    # entry (row im, col im+1), im = 0..m-2; rows 1..M-1 of dP/dtheta are live
    dgdt_sup = cache.a_sup[: m - 1] + lam * fd[1:]
    # entry (row im, col im-1), im = 1..m-1; last row has no flux contribution
    dgdt_sub = cache.a_sub[1:].copy()
    dgdt_sub[: m - 2] -= lam * fd[: m - 2]

    dgde_diag = -2.0 * k * pe
    dqdt_diag = -k * pt
    dqde_diag = 2.0 - k * pe

    n = 2 * m
    ab = np.zeros((5, n))
    ab[2, 0::2] = dgdt_diag
    ab[2, 1::2] = dqde_diag
    ab[1, 1::2] = dgde_diag              # (theta-row, eta-col) same node
    ab[3, 0::2] = dqdt_diag              # (eta-row, theta-col) same node
    ab[0, 2::2] = dgdt_sup               # theta-theta super-diagonal
    ab[4, 0 : n - 2 : 2] = dgdt_sub      # theta-theta sub-diagonal
    return BandedMatrix(ab, lower=2, upper=2)
