"""Calibration vector, scenario definitions, validation, and config loading.

Every other module consumes numeric constants only through the
:class:`Calibration` dataclass, so a single config file (or a single
``dataclasses.replace``) controls the whole engine.

The config file format is flat ``key = value`` lines with ``#`` comments.
Scenario blocks are introduced by ``[scenario.<name>]`` headers; keys inside
a block mirror :class:`Scenario` / :class:`PolicySpec` field names.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path


class ConfigError(ValueError):
    """Raised on unparseable or invalid configuration input."""


@dataclass(frozen=True)
class PolicySpec:
    """Fiscal transfer policy: magnitude ``tau`` activated ``lag`` years after ``start_time``."""

    tau: float = 0.0
    lag: float = 0.0
    start_time: float = 0.0


@dataclass(frozen=True)
class Calibration:
    """Full parameter vector for the stress-test engine.

    Defaults are the published 2025 calibration: labor share and MPCs from
    BLS/consumption studies, adoption and reinstatement parameters from the
    technology-diffusion literature, and M2 velocity from FRED. Parameters
    the calibration leaves numerically open (``t0_diffusion``, ``A0``, the
    intermediation block, ``sigma_r``) carry engine defaults documented in
    the README; all are plain config keys.
    """

    # Labor market
    s_L0: float = 0.56          # initial labor share of income
    mpc_labor: float = 0.85     # marginal propensity to consume, labor income
    mpc_capital: float = 0.15000000000000002  # fixed to 1 - mpc_labor
    # Consumption concentration
    chi_top: float = 0.59       # top-quintile consumption share
    # AI capability / adoption
    g_A: float = 0.05           # capability growth rate, per year
    g_c: float = 0.30           # deployment cost decline rate, per year
    d_bar: float = 0.80         # adoption ceiling
    kappa: float = 2.0          # adoption speed
    t0_diffusion: float = 2.8   # adoption inflection year; frozen against the scenario bands
    A0: float = 1.0             # capability index normalized at t = 0
    # Reinstatement
    rho0: float = 0.002         # baseline new-task creation rate, per year
    eta: float = 0.003          # complementarity coefficient
    alpha_rho: float = 0.50     # diminishing-returns exponent
    # Demand feedback
    beta_feedback: float = 0.30  # margin-pressure feedback coefficient
    f_slope: float = 0.15        # direct substitution sensitivity
    # Monetary
    V_obs: float = 1.41          # observed M2 velocity anchor (2025)
    # Intermediation
    m0: float = 0.02             # infrastructure margin floor, fraction of transaction value
    gamma_m: float = 0.5         # friction-margin sensitivity
    phi0: float = 1.0            # pre-AI friction index
    gamma_phi: float = 0.5       # friction reduction rate per capability unit
    phi_min: float = 0.1         # regulatory/institutional friction floor
    # Credit
    sigma_r: float = 0.20        # borrower income volatility
    # Task automation ceiling
    sbar: float = 0.60           # long-run automatable task share
    sbar_eff: float = 0.48       # effective ceiling, fixed to d_bar * sbar
    # CES elasticity; stored for config completeness, not consumed by the
    # reduced-form dynamics.
    sigma_ces: float = 1.0


@dataclass(frozen=True)
class Scenario:
    """A named run: growth-rate override, policy, horizon, and step size."""

    name: str
    g_A_override: float | None = None
    horizon: float = 10.0
    dt: float = 0.01
    policy: PolicySpec = field(default_factory=PolicySpec)
    quintiles: str | None = None  # optional path to a quintile-profile CSV


def default_calibration() -> Calibration:
    """The shipped calibration vector (see Calibration field comments)."""
    return Calibration()


def default_scenarios() -> list[Scenario]:
    """The three shipped adoption scenarios: baseline, rapid, extreme."""
    return [
        Scenario(name="baseline", g_A_override=0.05),
        Scenario(name="rapid", g_A_override=0.20),
        Scenario(name="extreme", g_A_override=0.40),
    ]


def with_updates(c: Calibration, **overrides: float) -> Calibration:
    """Replace fields on a calibration, recomputing derived fields.

    ``mpc_capital`` and ``sbar_eff`` are tied to ``mpc_labor`` and
    ``d_bar * sbar`` unless the caller pins them explicitly.
    """
    out = dataclasses.replace(c, **overrides)
    if "mpc_labor" in overrides and "mpc_capital" not in overrides:
        out = dataclasses.replace(out, mpc_capital=1.0 - out.mpc_labor)
    if ("d_bar" in overrides or "sbar" in overrides) and "sbar_eff" not in overrides:
        out = dataclasses.replace(out, sbar_eff=out.d_bar * out.sbar)
    return out


def validate(c: Calibration) -> list[str]:
    """Return a list of invariant violations; empty means the calibration is usable."""
    v: list[str] = []
    if not 0.0 < c.s_L0 < 1.0:
        v.append("s_L0 must be in (0, 1)")
    if c.mpc_labor <= 0.5:
        v.append("mpc_labor must exceed 0.5")
    if c.mpc_labor >= 1.0:
        v.append("mpc_labor must be below 1")
    if c.mpc_labor + c.mpc_capital != 1.0:
        v.append("mpc_labor + mpc_capital must equal 1 exactly")
    if not 0.0 <= c.chi_top <= 1.0:
        v.append("chi_top must be in [0, 1]")
    if not 0.0 < c.d_bar <= 1.0:
        v.append("d_bar must be in (0, 1]")
    if c.kappa <= 0.0:
        v.append("kappa must be positive")
    if c.rho0 < 0.0:
        v.append("rho0 must be >= 0")
    if c.eta < 0.0:
        v.append("eta must be >= 0")
    if not 0.0 < c.alpha_rho < 1.0:
        v.append("alpha_rho must be in (0, 1)")
    if c.beta_feedback <= 0.0:
        v.append("beta_feedback must be positive")
    if c.f_slope <= 0.0:
        v.append("f_slope must be positive")
    if c.A0 <= 0.0:
        v.append("A0 must be positive")
    if c.phi_min > c.phi0:
        v.append("phi_min must not exceed phi0")
    if c.phi_min < 0.0:
        v.append("phi_min must be >= 0")
    if c.m0 < 0.0:
        v.append("m0 must be >= 0")
    if c.gamma_m < 0.0:
        v.append("gamma_m must be >= 0")
    if c.gamma_phi < 0.0:
        v.append("gamma_phi must be >= 0")
    if c.sigma_r <= 0.0:
        v.append("sigma_r must be positive")
    if not 0.0 <= c.sbar <= 1.0:
        v.append("sbar must be in [0, 1]")
    if abs(c.sbar_eff - c.d_bar * c.sbar) > 1e-12:
        v.append("sbar_eff must equal d_bar * sbar within 1e-12")
    return v


def validate_scenario(s: Scenario) -> list[str]:
    v: list[str] = []
    if s.horizon <= 0.0:
        v.append(f"scenario {s.name}: horizon must be positive")
    if s.dt <= 0.0:
        v.append(f"scenario {s.name}: dt must be positive")
    if s.dt > s.horizon:
        v.append(f"scenario {s.name}: dt must not exceed horizon")
    if s.dt > 0.05:
        v.append(f"scenario {s.name}: dt must not exceed 0.05 (integration stability guard)")
    if s.g_A_override is not None and s.g_A_override < 0.0:
        v.append(f"scenario {s.name}: g_A_override must be >= 0")
    if s.policy.tau < 0.0:
        v.append(f"scenario {s.name}: tau must be >= 0")
    if s.policy.lag < 0.0:
        v.append(f"scenario {s.name}: lag must be >= 0")
    if s.policy.start_time < 0.0:
        v.append(f"scenario {s.name}: start_time must be >= 0")
    return v


_CALIBRATION_KEYS = {f.name for f in dataclasses.fields(Calibration)}
_SCENARIO_KEYS = {"g_A_override", "horizon", "dt", "tau", "lag", "start_time", "quintiles"}


def _parse_float(raw: str, key: str, lineno: int) -> float:
    try:
        return float(raw)
    except ValueError:
        raise ConfigError(f"line {lineno}: value for '{key}' is not a number: {raw!r}") from None


def load_config(path: str | Path) -> tuple[Calibration, list[Scenario]]:
    """Parse a config file into a calibration plus scenarios, in file order.

    Keys absent from the file inherit defaults. Raises :class:`ConfigError`
    with a line number on parse problems, or naming the violated invariant
    on validation problems.
    """
    text = Path(path).read_text(encoding="utf-8")
    overrides: dict[str, float] = {}
    scenario_blocks: list[tuple[str, dict[str, object]]] = []
    current: dict[str, object] | None = None

    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not (line.endswith("]") and line.startswith("[scenario.")):
                raise ConfigError(f"line {lineno}: malformed section header: {raw_line.strip()!r}")
            name = line[len("[scenario."):-1].strip()
            if not name:
                raise ConfigError(f"line {lineno}: scenario section needs a name")
            current = {}
            scenario_blocks.append((name, current))
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value': {raw_line.strip()!r}")
        key, _, raw_value = line.partition("=")
        key = key.strip()
        raw_value = raw_value.strip()
        if current is None:
            if key not in _CALIBRATION_KEYS:
                raise ConfigError(f"line {lineno}: unknown calibration key '{key}'")
            overrides[key] = _parse_float(raw_value, key, lineno)
        else:
            if key not in _SCENARIO_KEYS:
                raise ConfigError(f"line {lineno}: unknown scenario key '{key}'")
            if key == "quintiles":
                current[key] = raw_value
            else:
                current[key] = _parse_float(raw_value, key, lineno)

    calib = with_updates(default_calibration(), **overrides)
    violations = validate(calib)
    if violations:
        raise ConfigError("; ".join(violations))

    scenarios: list[Scenario] = []
    for name, block in scenario_blocks:
        policy = PolicySpec(
            tau=float(block.get("tau", 0.0)),
            lag=float(block.get("lag", 0.0)),
            start_time=float(block.get("start_time", 0.0)),
        )
        scenario = Scenario(
            name=name,
            g_A_override=(
                float(block["g_A_override"]) if "g_A_override" in block else None
            ),
            horizon=float(block.get("horizon", 10.0)),
            dt=float(block.get("dt", 0.01)),
            policy=policy,
            quintiles=block.get("quintiles"),  # type: ignore[arg-type]
        )
        s_violations = validate_scenario(scenario)
        if s_violations:
            raise ConfigError("; ".join(s_violations))
        scenarios.append(scenario)
    return calib, scenarios


def serialize_config(c: Calibration, scenarios: list[Scenario] | None = None) -> str:
    """Render a calibration (and scenarios) back to config-file text.

    Floats are written with ``repr`` so a load/serialize/load cycle is
    field-wise exact.
    """
    lines = []
    for f in dataclasses.fields(Calibration):
        lines.append(f"{f.name} = {getattr(c, f.name)!r}")
    for s in scenarios or []:
        lines.append("")
        lines.append(f"[scenario.{s.name}]")
        if s.g_A_override is not None:
            lines.append(f"g_A_override = {s.g_A_override!r}")
        lines.append(f"horizon = {s.horizon!r}")
        lines.append(f"dt = {s.dt!r}")
        lines.append(f"tau = {s.policy.tau!r}")
        lines.append(f"lag = {s.policy.lag!r}")
        lines.append(f"start_time = {s.policy.start_time!r}")
        if s.quintiles is not None:
            lines.append(f"quintiles = {s.quintiles}")
    return "\n".join(lines) + "\n"
