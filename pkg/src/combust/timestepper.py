"""Outer time loop: advance the combustion state one complementarity solve per step."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from combust.discretization import (
    Grid,
    SchemeCache,
    State,
    assemble_LD,
    assemble_LDQ,
    assemble_matrices,
    jacobian,
    residual,
)
from combust.mncp import MNCP, NCP, MncpProblem, SolverError, SolverOptions, solve
from combust.model import DimensionlessParams


@dataclass
class RunConfig:
    grid: Grid
    params: DimensionlessParams
    method: str = MNCP
    solver_opts: SolverOptions = field(default_factory=SolverOptions)
    record_times: tuple = ()


@dataclass
class StepStats:
    time: float
    time_index: int
    iterations: int
    last_step: float
    s_evals: int
    js_evals: int
    wall_time: float


@dataclass
class TimeSeries:
    snapshots: list          # (time, State) pairs, times strictly increasing
    per_step: list           # StepStats per completed step


class StepFailed(RuntimeError):
    """A per-step complementarity solve failed; carries the time index."""

    def __init__(self, message: str, time_index: int, cause: SolverError, partial=None):
        super().__init__(message)
        self.time_index = time_index
        self.cause = cause
        self.partial = partial


def initial_state(grid: Grid) -> State:
    """Reservoir start: theta = 0 and eta = 0 everywhere, injection boundary eta = 1."""
    m = grid.m
    return State(theta=np.zeros(m), eta=np.zeros(m), theta_b=0.0, eta_b=1.0, n=0)


def build_step_problem(state: State, cache: SchemeCache, method: str):
    """Wrap one time step as an MncpProblem on the interleaved unknowns.

    z = (theta_1, eta_1, theta_2, eta_2, ...); in mncp mode the theta
    entries (even indices) are the complementarity pairs against G, in ncp
    mode every entry is a pair.
    """
    m = cache.grid.m
    ld = assemble_LD(state, cache)
    ldq = assemble_LDQ(state, cache.grid, cache.params)

    def eval_residual(z):
        res = residual(z[0::2], z[1::2], cache, ld, ldq)
        out = np.empty(2 * m)
        out[0::2] = res.g
        out[1::2] = res.q
        return out

    def eval_jacobian(z):
        return jacobian(z[0::2], z[1::2], cache)

    if method == MNCP:
        problem = MncpProblem(
            n1=m, n2=m, residual=eval_residual, jacobian=eval_jacobian,
            mode=MNCP, comp_index=np.arange(0, 2 * m, 2),
        )
    elif method == NCP:
        problem = MncpProblem(
            n1=2 * m, n2=0, residual=eval_residual, jacobian=eval_jacobian, mode=NCP,
        )
    else:
        raise ValueError(f"unknown method {method!r}")

    z0 = np.empty(2 * m)
    z0[0::2] = state.theta
    z0[1::2] = state.eta
    return problem, z0


def step(state: State, cache: SchemeCache, config: RunConfig):
    """Advance one time level; returns (next_state, StepStats)."""
    problem, z0 = build_step_problem(state, cache, config.method)
    t_start = time.perf_counter()
    try:
        z, report = solve(problem, z0, config.solver_opts)
    except SolverError as err:
        raise StepFailed(
            f"solver failed at time step {state.n}: {err}", time_index=state.n, cause=err
        ) from err
    wall = time.perf_counter() - t_start
    next_state = State(
        theta=z[0::2].copy(), eta=z[1::2].copy(),
        theta_b=state.theta_b, eta_b=state.eta_b, n=state.n + 1,
    )
    stats = StepStats(
        time=(state.n + 1) * cache.grid.k,
        time_index=state.n + 1,
        iterations=report.iterations,
        last_step=report.last_step,
        s_evals=report.s_evals,
        js_evals=report.js_evals,
        wall_time=wall,
    )
    return next_state, stats


def snapshot_indices(grid: Grid, record_times) -> dict:
    """Map each requested time to the nearest step index (ties to the lower step)."""
    out = {}
    for t in record_times:
        n_lo = int(np.floor(t / grid.k))
        n_lo = min(max(n_lo, 0), grid.n_steps)
        n_hi = min(n_lo + 1, grid.n_steps)
        n = n_lo if (t - n_lo * grid.k) <= (n_hi * grid.k - t) else n_hi
        out.setdefault(n, t)
    return out


def run(config: RunConfig, initial: Optional[State] = None) -> TimeSeries:
    """Run the full time loop, snapshotting at the requested record times.

    A custom initial state may be supplied (used by verification runs);
    by default the reservoir initial condition is used.
    """
    grid = config.grid
    cache = assemble_matrices(grid, config.params)
    state = initial.copy() if initial is not None else initial_state(grid)
    snap_at = snapshot_indices(grid, config.record_times)

    snapshots = []
    per_step = []
    if 0 in snap_at:
        snapshots.append((0.0, state.copy()))
    for n in range(grid.n_steps):
        try:
            state, stats = step(state, cache, config)
        except StepFailed as err:
            err.partial = TimeSeries(snapshots=snapshots, per_step=per_step)
            raise
        per_step.append(stats)
        if state.n in snap_at:
            snapshots.append((state.n * grid.k, state.copy()))
    return TimeSeries(snapshots=snapshots, per_step=per_step)
