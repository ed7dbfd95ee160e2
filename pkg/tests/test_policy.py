import random

import pytest

from macrostress.dynamics import simulate_path
from macrostress.params import PolicySpec, Scenario, default_calibration, with_updates
from macrostress.policy import PolicyGrid, crisis_depth, policy_sweep, transfer_at

C = default_calibration()


# --- transfer activation -----------------------------------------------------

def test_transfer_inactive_before_lag():
    p = PolicySpec(tau=0.10, lag=0.5)
    assert transfer_at(0.0, p) == 0.0
    assert transfer_at(0.49, p) == 0.0


def test_transfer_active_after_lag():
    p = PolicySpec(tau=0.10, lag=0.5)
    assert transfer_at(1.0, p) == 0.10


def test_transfer_zero_magnitude():
    p = PolicySpec(tau=0.0, lag=0.0)
    for t in (0.0, 1.0, 50.0):
        assert transfer_at(t, p) == 0.0


def test_transfer_respects_start_time():
    p = PolicySpec(tau=0.05, lag=1.0, start_time=2.0)
    assert transfer_at(2.5, p) == 0.0
    assert transfer_at(3.0, p) == 0.05


# --- crisis depth ------------------------------------------------------------

def test_depth_zero_on_constant_trajectory():
    c = with_updates(C, g_A=0.0, d_bar=1e-300, rho0=0.0, eta=0.0)
    traj = simulate_path(Scenario(name="still", g_A_override=0.0), c)
    assert crisis_depth(traj, PolicySpec()) == 0.0


def test_depth_zero_when_transfer_covers_decline():
    traj = simulate_path(Scenario(name="rapid", g_A_override=0.20), C)
    max_decline = max(C.s_L0 - p.s_L for p in traj.points)
    p = PolicySpec(tau=max_decline + 0.01, lag=0.0)
    assert crisis_depth(traj, p) == 0.0


def test_depth_unmitigated_rapid_run_exceeds_040():
    traj = simulate_path(Scenario(name="rapid", g_A_override=0.20), C)
    assert crisis_depth(traj, PolicySpec()) > 0.40


# --- sweep -------------------------------------------------------------------

def test_grid_validation():
    base = Scenario(name="rapid", g_A_override=0.20)
    with pytest.raises(ValueError):
        PolicyGrid(lags=(), taus=(0.1,), base=base)
    with pytest.raises(ValueError):
        PolicyGrid(lags=(1.0, 0.5), taus=(0.1,), base=base)


def _sweep(lags, taus, horizon=10.0, dt=0.02):
    base = Scenario(name="rapid", g_A_override=0.20, horizon=horizon, dt=dt)
    return policy_sweep(PolicyGrid(lags=lags, taus=taus, base=base), C)


def test_sweep_zero_tau_depth_equals_unmitigated_at_any_lag():
    cells = _sweep((0.0, 1.0, 3.0), (0.0,))
    traj = simulate_path(
        Scenario(name="rapid", g_A_override=0.20, horizon=10.0, dt=0.02), C
    )
    unmitigated = max(C.s_L0 - p.s_L for p in traj.points)
    for cell in cells:
        assert cell.depth == pytest.approx(unmitigated, rel=1e-12)


def test_sweep_fast_large_policy_stabilizes():
    cells = _sweep((0.5,), (0.10,), dt=0.01)
    assert cells[0].s_L_final >= 0.40
    assert cells[0].depth == pytest.approx(0.0, abs=1e-9)


def test_sweep_small_late_transfer_loses_to_fast_large():
    # a small transfer arriving after the spiral ignited leaves positive depth
    cells = _sweep((0.5, 4.0), (0.03, 0.10), dt=0.01)
    by_key = {(c.lag, c.tau): c for c in cells}
    assert by_key[(4.0, 0.03)].depth > by_key[(0.5, 0.10)].depth


def test_sweep_monotone_comparative_statics():
    lags = (0.0, 1.0, 2.0, 4.0, 6.0)
    taus = (0.0, 0.03, 0.10)
    cells = _sweep(lags, taus)
    by_key = {(c.lag, c.tau): c for c in cells}
    tol = 1e-9
    for tau in taus:
        for a, b in zip(lags, lags[1:]):
            assert by_key[(b, tau)].depth >= by_key[(a, tau)].depth - tol
    for lag in lags:
        for a, b in zip(taus, taus[1:]):
            assert by_key[(lag, b)].depth <= by_key[(lag, a)].depth + tol


def test_sweep_depth_monotone_in_growth_rate():
    depths = []
    for g in (0.05, 0.20, 0.40):
        base = Scenario(name="x", g_A_override=g, horizon=10.0, dt=0.02)
        cells = policy_sweep(PolicyGrid(lags=(1.0,), taus=(0.03,), base=base), C)
        depths.append(cells[0].depth)
    assert depths[0] <= depths[1] <= depths[2]


def test_sweep_row_order_deterministic():
    cells = _sweep((0.0, 1.0), (0.03, 0.10))
    assert [(c.lag, c.tau) for c in cells] == [
        (0.0, 0.03), (0.0, 0.10), (1.0, 0.03), (1.0, 0.10)
    ]


def test_sweep_worker_count_invariant():
    base = Scenario(name="rapid", g_A_override=0.20, horizon=5.0, dt=0.05)
    grid = PolicyGrid(lags=(0.0, 1.0), taus=(0.03, 0.10), base=base)
    serial = policy_sweep(grid, C, jobs=1)
    parallel = policy_sweep(grid, C, jobs=2)
    assert serial == parallel


# --- avertance equivalence ---------------------------------------------------

def test_depth_zero_iff_pointwise_transfer_covers_gap():
    # 200 random (trajectory, policy) pairs; depth == 0 exactly when the
    # lagged transfer covers the labor-share gap at every recorded step
    rng = random.Random(4242)
    checked_zero = checked_positive = 0
    for _ in range(200):
        g_A = 0.02 + 0.48 * rng.random()
        tau = rng.choice([0.0, 0.01, 0.05, 0.1, 0.3, 0.6])
        lag = 4.0 * rng.random()
        c = with_updates(
            C,
            rho0=0.006 * rng.random(),
            eta=0.009 * rng.random(),
            t0_diffusion=0.5 + 3.0 * rng.random(),
        )
        policy = PolicySpec(tau=tau, lag=lag)
        traj = simulate_path(
            Scenario(name="r", g_A_override=g_A, horizon=5.0, dt=0.05, policy=policy), c
        )
        depth = crisis_depth(traj, policy)
        covered = all(
            transfer_at(p.t, policy) >= (c.s_L0 - p.s_L) for p in traj.points
        )
        assert (depth == 0.0) == covered
        if covered:
            checked_zero += 1
        else:
            checked_positive += 1
    assert checked_zero > 10 and checked_positive > 10  # both branches exercised
