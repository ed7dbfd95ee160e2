"""Labor-share displacement dynamics.

The state variable is the labor share of income ``s_L``. Its drift combines
four flows, per year:

    ds_L/dt = -d(t) * f_slope * g_A        (adoption-weighted substitution)
              - beta * pi(s_L)             (demand-shortfall feedback)
              + rho(A_t)                   (new-task reinstatement)
              + transfer(t)                (fiscal stabilizer, lagged)

``d(t)`` is a logistic adoption curve, ``rho`` grows with the capability
index at diminishing returns, and ``pi`` is margin pressure from demand
falling short of the no-displacement benchmark (clamped at zero when the
labor share is at or above its initial value). The transfer flow is active
only after the policy lag elapses and only while the labor share sits below
its initial value; transfers replace displaced labor income, they do not
push the labor share past its baseline.

Integration is fixed-step classical Runge-Kutta (RK4). The dynamics are
non-stiff in the stable regime, and collapse detection wants uniform time
resolution rather than adaptivity. State is hard-clamped to [0, 1]; a
collapse sentinel records the first time the labor share falls to 1% of
income, below which the model is outside its domain.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .params import Calibration, PolicySpec, Scenario, validate, validate_scenario
from .policy import transfer_at
from . import monetary

S_FLOOR = 0.01   # collapse sentinel: labor share below 1% is outside the model's domain
_EXP_CAP = 700.0  # math.exp overflow guard


class IntegrationError(RuntimeError):
    """Non-finite state during integration; message names t and the offending term."""


def capability(t: float, c: Calibration) -> float:
    """Capability index A0 * exp(g_A * t)."""
    x = c.g_A * t
    if x > _EXP_CAP:
        raise IntegrationError(f"capability index overflows at t={t:g} (g_A*t={x:g})")
    return c.A0 * math.exp(x)


def ai_cost(t: float, c: Calibration) -> float:
    """Deployment cost index exp(-g_c * t), normalized to 1 at t = 0."""
    return math.exp(-c.g_c * t)


def diffusion(t: float, c: Calibration) -> float:
    """Logistic adoption fraction d_bar / (1 + exp(-kappa * (t - t0)))."""
    e = -c.kappa * (t - c.t0_diffusion)
    if e > 40.0:   # tail below 4e-18 of d_bar; avoids exp overflow
        return 0.0
    if e < -40.0:
        return c.d_bar
    return c.d_bar / (1.0 + math.exp(e))


def reinstatement_rate(A: float, c: Calibration) -> float:
    """New-task creation rate rho0 + eta * A**alpha_rho; concave in A."""
    return c.rho0 + c.eta * A ** c.alpha_rho


def margin_pressure(s_L: float, c: Calibration) -> float:
    """Demand shortfall vs. the no-displacement benchmark, as a fraction of it.

    Expected demand holds the labor share at its initial value, so the
    pressure is linear in the decline and zero once s_L >= s_L0.
    """
    shortfall = (2.0 * c.mpc_labor - 1.0) * (c.s_L0 - s_L)
    if shortfall <= 0.0:
        return 0.0
    norm = c.mpc_labor * c.s_L0 + (1.0 - c.mpc_labor) * (1.0 - c.s_L0)
    return shortfall / norm


def labor_share_derivative(t: float, s_L: float, c: Calibration, p: PolicySpec) -> float:
    """Net labor-share drift at (t, s_L); absorbing at both edges of [0, 1]."""
    stabilizer = transfer_at(t, p) if s_L < c.s_L0 else 0.0
    raw = (
        -diffusion(t, c) * c.f_slope * c.g_A
        - c.beta_feedback * margin_pressure(s_L, c)
        + reinstatement_rate(capability(t, c), c)
        + stabilizer
    )
    if s_L <= 0.0 and raw < 0.0:
        return 0.0
    if s_L >= 1.0 and raw > 0.0:
        return 0.0
    return raw


@dataclass(frozen=True)
class TrajectoryPoint:
    t: float
    s_L: float
    d_t: float
    A_t: float
    rho_t: float
    pi_t: float
    velocity: float
    consumption_ratio: float
    tau_effective: float


@dataclass(frozen=True)
class Trajectory:
    """Time-indexed state of one scenario run."""

    scenario: str
    points: tuple[TrajectoryPoint, ...]
    collapse_time: float | None

    CSV_HEADER = "t,s_L,d_t,A_t,rho_t,pi_t,velocity,consumption_ratio,tau_effective"

    def to_csv(self) -> str:
        rows = [self.CSV_HEADER]
        for p in self.points:
            rows.append(
                ",".join(
                    f"{v:.9g}"
                    for v in (
                        p.t, p.s_L, p.d_t, p.A_t, p.rho_t, p.pi_t,
                        p.velocity, p.consumption_ratio, p.tau_effective,
                    )
                )
            )
        return "\n".join(rows) + "\n"


def _effective_calibration(s: Scenario, c: Calibration) -> Calibration:
    if s.g_A_override is None:
        return c
    import dataclasses

    return dataclasses.replace(c, g_A=s.g_A_override)


def integrate_labor_share(
    c: Calibration,
    p: PolicySpec,
    horizon: float,
    dt: float,
    record: list[tuple[float, float]] | None = None,
    s_init: float | None = None,
) -> tuple[float, float | None]:
    """RK4-integrate the labor share from (0, s_init or s_L0) to the horizon.

    Returns (final labor share, collapse time or None). When ``record`` is
    given, (t, s_L) pairs are appended at every grid point including t = 0.
    ``s_init`` supports perturbation experiments; the feedback stays anchored
    at the calibration's s_L0. The inner loop inlines the derivative for
    speed; it must stay numerically equivalent to
    :func:`labor_share_derivative` (the integrator tests pin the agreement).
    """
    # Hoisted constants; the exponential terms are the only per-stage cost.
    d_bar, kappa, t0 = c.d_bar, c.kappa, c.t0_diffusion
    disp_scale = c.f_slope * c.g_A
    rho0, eta = c.rho0, c.eta
    rho_exp = c.alpha_rho * c.g_A          # A(t)**alpha = A0**alpha * exp(alpha*g_A*t)
    a0_alpha = c.A0 ** c.alpha_rho
    beta = c.beta_feedback
    s0 = c.s_L0
    two_c_minus_1 = 2.0 * c.mpc_labor - 1.0
    norm = c.mpc_labor * s0 + (1.0 - c.mpc_labor) * (1.0 - s0)
    k_pi = two_c_minus_1 / norm
    tau, activation = p.tau, p.start_time + p.lag
    exp = math.exp

    def deriv(t: float, s: float) -> float:
        e = -kappa * (t - t0)
        if e > 40.0:
            d = 0.0
        elif e < -40.0:
            d = d_bar
        else:
            d = d_bar / (1.0 + exp(e))
        x = rho_exp * t
        if x > _EXP_CAP:
            raise IntegrationError(
                f"reinstatement term overflows at t={t:g} (alpha_rho*g_A*t={x:g})"
            )
        rho = rho0 + eta * a0_alpha * exp(x)
        gap = s0 - s
        pi = k_pi * gap if gap > 0.0 else 0.0
        stab = tau if (s < s0 and t >= activation) else 0.0
        raw = -d * disp_scale - beta * pi + rho + stab
        if s <= 0.0 and raw < 0.0:
            return 0.0
        if s >= 1.0 and raw > 0.0:
            return 0.0
        return raw

    n_steps = round(horizon / dt)
    s = s0 if s_init is None else s_init
    t = 0.0
    collapse: float | None = 0.0 if s <= S_FLOOR else None
    if record is not None:
        record.append((0.0, s))
    half = dt / 2.0
    sixth = dt / 6.0
    for i in range(n_steps):
        t = i * dt
        k1 = deriv(t, s)
        k2 = deriv(t + half, s + half * k1)
        k3 = deriv(t + half, s + half * k2)
        k4 = deriv(t + dt, s + dt * k3)
        s = s + sixth * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        if not math.isfinite(s):
            raise IntegrationError(
                f"labor share became non-finite at t={t + dt:g}; "
                f"stage derivatives k1={k1:g} k2={k2:g} k3={k3:g} k4={k4:g}"
            )
        if s < 0.0:
            s = 0.0
        elif s > 1.0:
            s = 1.0
        t = (i + 1) * dt
        if collapse is None and s <= S_FLOOR:
            collapse = t
        if record is not None:
            record.append((t, s))
    return s, collapse


def simulate_path(s: Scenario, c: Calibration) -> Trajectory:
    """Integrate a scenario and record the full per-step state.

    Each point carries the adoption fraction, capability index,
    reinstatement rate, margin pressure, velocity, consumption ratio, and
    the transfer actually flowing at that step.
    """
    problems = validate(c) + validate_scenario(s)
    if problems:
        raise ValueError("; ".join(problems))
    ce = _effective_calibration(s, c)
    raw: list[tuple[float, float]] = []
    _, collapse = integrate_labor_share(ce, s.policy, s.horizon, s.dt, record=raw)
    points = []
    for t, s_L in raw:
        # Transfers flow only while the labor share sits below baseline.
        tau_eff = transfer_at(t, s.policy) if s_L < ce.s_L0 else 0.0
        A_t = capability(t, ce)
        points.append(
            TrajectoryPoint(
                t=t,
                s_L=s_L,
                d_t=diffusion(t, ce),
                A_t=A_t,
                rho_t=reinstatement_rate(A_t, ce),
                pi_t=margin_pressure(s_L, ce),
                velocity=monetary.velocity(s_L, tau_eff, ce),
                consumption_ratio=monetary.consumption_ratio(s_L, ce),
                tau_effective=tau_eff,
            )
        )
    return Trajectory(scenario=s.name, points=tuple(points), collapse_time=collapse)


def explosive_threshold(rho: float, c: Calibration) -> float:
    """Critical capability growth rate above which displacement is self-reinforcing.

    ``g*(rho) = g*_0 * (1 + rho / (d_bar * f_slope))`` with
    ``g*_0 = ((1 - beta*c) / (beta*c)) * f_slope``; strictly increasing in
    the reinstatement rate.
    """
    bc = c.beta_feedback * c.mpc_labor
    g_star_0 = (1.0 - bc) / bc * c.f_slope
    return g_star_0 * (1.0 + rho / (c.d_bar * c.f_slope))


class RegimeKind(enum.Enum):
    REINSTATEMENT_DOMINATED = "reinstatement-dominated"
    STABLE_DISPLACEMENT = "stable displacement"
    EXPLOSIVE_DISPLACEMENT = "explosive displacement"


@dataclass(frozen=True)
class Regime:
    kind: RegimeKind
    threshold: float  # rho-adjusted critical growth rate


def classify_regime(c: Calibration) -> Regime:
    """Classify at the adoption ceiling (worst case) using rho evaluated at A0."""
    rho = reinstatement_rate(c.A0, c)
    threshold = explosive_threshold(rho, c)
    if rho > c.d_bar * c.f_slope * c.g_A:
        kind = RegimeKind.REINSTATEMENT_DOMINATED
    elif c.g_A > threshold:
        kind = RegimeKind.EXPLOSIVE_DISPLACEMENT
    else:
        kind = RegimeKind.STABLE_DISPLACEMENT
    return Regime(kind=kind, threshold=threshold)
