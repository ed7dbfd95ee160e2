"""Lagged fiscal transfers, crisis depth, and the policy-response sweep."""

from __future__ import annotations

from dataclasses import dataclass

from .params import Calibration, PolicySpec, Scenario


def transfer_at(t: float, p: PolicySpec) -> float:
    """Effective transfer rate at time ``t``: 0 before activation, ``tau`` after.

    Activation is ``start_time + lag``: transfers respond to conditions
    observed ``lag`` years earlier, so a program started at ``start_time``
    only reaches households after the implementation lag.
    """
    if t < p.start_time + p.lag:
        return 0.0
    return p.tau


def crisis_depth(traj: "Trajectory", p: PolicySpec) -> float:  # noqa: F821
    """Maximal unmitigated labor-share decline over a trajectory.

    ``max_t max(0, (s_L0 - s_L(t)) - transfer_at(t))``: zero exactly when
    the lagged transfer covers the decline pointwise at every recorded step.
    """
    s0 = traj.points[0].s_L
    depth = 0.0
    for pt in traj.points:
        gap = (s0 - pt.s_L) - transfer_at(pt.t, p)
        if gap > depth:
            depth = gap
    return depth


@dataclass(frozen=True)
class PolicyGrid:
    """Sweep grid: ascending lags x ascending transfer magnitudes over a base scenario."""

    lags: tuple[float, ...]
    taus: tuple[float, ...]
    base: Scenario

    def __post_init__(self) -> None:
        if not self.lags or not self.taus:
            raise ValueError("policy grid needs at least one lag and one tau")
        if list(self.lags) != sorted(self.lags) or list(self.taus) != sorted(self.taus):
            raise ValueError("policy grid lags and taus must be ascending")


@dataclass(frozen=True)
class SweepCell:
    lag: float
    tau: float
    depth: float
    s_L_final: float
    consumption_decline_pct: float


def _run_cell(args: tuple[float, float, Scenario, Calibration]) -> SweepCell:
    import dataclasses

    from . import monetary
    from .dynamics import simulate_path

    lag, tau, base, c = args
    policy = PolicySpec(tau=tau, lag=lag, start_time=base.policy.start_time)
    scenario = dataclasses.replace(base, name=f"{base.name}_l{lag}_t{tau}", policy=policy)
    traj = simulate_path(scenario, c)
    return SweepCell(
        lag=lag,
        tau=tau,
        depth=crisis_depth(traj, policy),
        s_L_final=traj.points[-1].s_L,
        consumption_decline_pct=100.0 * monetary.cumulative_consumption_decline(traj, c),
    )


def policy_sweep(grid: PolicyGrid, c: Calibration, jobs: int = 1) -> list[SweepCell]:
    """One simulation per (lag, tau) cell, in deterministic row-major order.

    Cells are independent; ``jobs > 1`` maps them over worker processes with
    output order unchanged.
    """
    tasks = [(lag, tau, grid.base, c) for lag in grid.lags for tau in grid.taus]
    if jobs > 1 and len(tasks) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=min(jobs, len(tasks))) as pool:
            return list(pool.map(_run_cell, tasks))
    return [_run_cell(t) for t in tasks]
