"""Experiment drivers: method comparison, iteration statistics, refinement errors."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass

import numpy as np

from combust.discretization import Grid, State
from combust.mncp import MNCP, NCP
from combust.timestepper import RunConfig, TimeSeries, run


@dataclass
class DiffRow:
    time: float
    theta_max: float
    theta_l2: float
    eta_max: float
    eta_l2: float


@dataclass
class DiffReport:
    """Per-snapshot differences between two runs on the same grid."""

    rows: list


@dataclass
class ErrorRow:
    time: float
    variable: str            # "theta" or "eta"
    e_h: float
    e_h2: float
    e_h4: float
    ratio1: float            # e_h / e_h2, nan when undefined
    ratio2: float            # e_h2 / e_h4, nan when undefined


@dataclass
class ErrorTable:
    rows: list


@dataclass
class BenchRow:
    time: float
    wall_time: float
    iterations: int
    last_step: float
    s_evals: int
    js_evals: int
    method: str
    m: int


def diff_series(a: TimeSeries, b: TimeSeries) -> DiffReport:
    """Node-wise differences between two time series on the same grid."""
    rows = []
    for (ta, sa), (tb, sb) in zip(a.snapshots, b.snapshots):
        dt_theta = sa.theta - sb.theta
        dt_eta = sa.eta - sb.eta
        rows.append(DiffRow(
            time=ta,
            theta_max=float(np.max(np.abs(dt_theta))),
            theta_l2=float(np.linalg.norm(dt_theta)),
            eta_max=float(np.max(np.abs(dt_eta))),
            eta_l2=float(np.linalg.norm(dt_eta)),
        ))
    return DiffReport(rows=rows)


def compare_methods(config: RunConfig) -> DiffReport:
    """Run the same configuration under both methods and diff the snapshots."""
    ts_mncp = run(dataclasses.replace(config, method=MNCP))
    ts_ncp = run(dataclasses.replace(config, method=NCP))
    return diff_series(ts_mncp, ts_ncp)


def restrict(fine: State, fine_grid: Grid, coarse_grid: Grid) -> State:
    """Sample a fine-grid state at the coincident nodes of a half-resolution grid."""
    if fine_grid.m != 2 * coarse_grid.m or fine_grid.length != coarse_grid.length:
        raise ValueError(
            f"incompatible grids: fine m={fine_grid.m}, coarse m={coarse_grid.m}, "
            f"lengths {fine_grid.length} vs {coarse_grid.length}"
        )
    return State(
        theta=fine.theta[1::2].copy(),
        eta=fine.eta[1::2].copy(),
        theta_b=fine.theta_b,
        eta_b=fine.eta_b,
        n=fine.n,
    )


def _relative_error(coarse_vec: np.ndarray, ref_vec: np.ndarray) -> float:
    denom = float(np.linalg.norm(ref_vec))
    if denom == 0.0:
        return float("nan")
    return float(np.linalg.norm(coarse_vec - ref_vec)) / denom


def refine_errors(base_config: RunConfig, times) -> ErrorTable:
    """Self-convergence study on grids M, 2M, 4M, 8M with the time step fixed.

    E at level L is the relative L2 distance between the level-L solution
    and the next-finer solution restricted to the level-L grid.
    """
    times = tuple(times)
    base_grid = base_config.grid
    grids = []
    series = []
    for factor in (1, 2, 4, 8):
        grid = dataclasses.replace(base_grid, m=base_grid.m * factor)
        cfg = dataclasses.replace(base_config, grid=grid, record_times=times)
        grids.append(grid)
        series.append(run(cfg))

    rows = []
    for i_t, t in enumerate(times):
        errors = {"theta": [], "eta": []}
        for level in range(3):
            coarse = series[level].snapshots[i_t][1]
            fine = series[level + 1].snapshots[i_t][1]
            ref = restrict(fine, grids[level + 1], grids[level])
            errors["theta"].append(_relative_error(coarse.theta, ref.theta))
            errors["eta"].append(_relative_error(coarse.eta, ref.eta))
        for var in ("theta", "eta"):
            e_h, e_h2, e_h4 = errors[var]
            rows.append(ErrorRow(
                time=t, variable=var, e_h=e_h, e_h2=e_h2, e_h4=e_h4,
                ratio1=e_h / e_h2 if e_h2 > 0.0 else float("nan"),
                ratio2=e_h2 / e_h4 if e_h4 > 0.0 else float("nan"),
            ))
    return ErrorTable(rows=rows)


def bench(configs) -> list:
    """Per-snapshot iteration statistics for each configuration under both methods."""
    rows = []
    for config in configs:
        for method in (MNCP, NCP):
            ts = run(dataclasses.replace(config, method=method))
            stats_by_index = {s.time_index: s for s in ts.per_step}
            for t_snap, state in ts.snapshots:
                stats = stats_by_index.get(state.n)
                if stats is None:
                    continue
                rows.append(BenchRow(
                    time=t_snap,
                    wall_time=stats.wall_time,
                    iterations=stats.iterations,
                    last_step=stats.last_step,
                    s_evals=stats.s_evals,
                    js_evals=stats.js_evals,
                    method=method,
                    m=config.grid.m,
                ))
    return rows
