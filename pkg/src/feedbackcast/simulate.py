"""Monte Carlo engine that plays the feedback game end to end.

Draws (theta, x, eps) from explicit specs, forms forecasts under a scenario's
rule, applies the DM reaction, realizes outcomes, and summarizes the sample
(OLS of outcome on forecast, OLS of error on state, MSE split). Sample
statistics exist to be compared against the closed forms in
:mod:`feedbackcast.model`; the engine never substitutes a formula where the
game can be played.

Determinism: every run derives three independent substreams (theta, x, eps)
from its single seed via ``numpy.random.SeedSequence.spawn``, so identical
(run, seed) reproduce bit-identical records no matter what else has been
sampled in the process.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple

import numpy as np
from scipy import optimize, special

from . import kernels
from .errors import (
    DegenerateConjecture,
    InsufficientData,
    MomentMatchInfeasible,
    ZeroVariance,
)
from .model import (
    TAYLOR_RULE,
    BiasLine,
    LinearRule,
    ModelParams,
    MZLine,
    optimal_forecast,
    solve_equilibria,
)

__all__ = [
    "PolicyShockSpec",
    "StateNoiseSpec",
    "SimulationRun",
    "SimulationSummary",
    "SimulationOutput",
    "MzFit",
    "BiasFit",
    "BestResponseTrace",
    "sample_policy_shock",
    "play_game",
    "ols_mz",
    "best_response_iteration",
]

SCENARIOS = (
    "conjecture_rule",
    "equilibrium",
    "taylor_rule",
    "conditional",
    "constrained_menu",
)

_FAMILIES = ("beta_scaled", "truncated_normal", "degenerate")


def _finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PolicyShockSpec:
    """Distribution of the DM's reaction strength x, matched to (mean, var).

    Families: ``beta_scaled`` (Beta rescaled to a bounded support, default
    (0, 1)), ``truncated_normal`` (normal truncated to [lo, hi), default
    (0, inf), parent parameters solved numerically), and ``degenerate``
    (point mass, requires zero variance). Draws are strictly positive in all
    families, as the game requires.

    Feasibility that can be checked in closed form is checked here:
    beta_scaled needs target_var < (mean-lo)(hi-mean) and truncated_normal
    the same bound (coefficient-of-variation limit when hi is infinite).
    """

    family: str
    target_mean: float
    target_var: float
    support: tuple[float, float] | None = None

    def __post_init__(self):
        if self.family not in _FAMILIES:
            raise ValueError(f"family must be one of {_FAMILIES}, got {self.family!r}")
        object.__setattr__(self, "target_mean", _finite("target_mean", self.target_mean))
        tv = float(self.target_var)
        if not math.isfinite(tv) or tv < 0.0:
            raise ValueError(f"target_var must be finite and >= 0, got {self.target_var!r}")
        object.__setattr__(self, "target_var", tv)
        if self.target_mean <= 0.0:
            raise ValueError(f"target_mean must be positive, got {self.target_mean}")

        if self.family == "degenerate":
            if tv != 0.0:
                raise ValueError("degenerate family requires target_var = 0")
            if self.support is not None:
                lo, hi = self.support
                if not (lo < self.target_mean < hi):
                    raise ValueError("support does not contain the point mass")
            return

        if tv == 0.0:
            raise ValueError(
                f"{self.family} requires target_var > 0; use the degenerate family"
            )
        lo, hi = self.bounds
        if not lo >= 0.0:
            raise ValueError(f"support lower bound must be >= 0, got {lo}")
        if not lo < hi:
            raise ValueError(f"support must satisfy lo < hi, got ({lo}, {hi})")
        if self.family == "beta_scaled" and not math.isfinite(hi):
            raise ValueError("beta_scaled requires a finite upper bound")
        if not (lo < self.target_mean < hi):
            raise ValueError(
                f"target_mean {self.target_mean} outside support ({lo}, {hi})"
            )
        # Bhatia-Davis bound on any distribution over (lo, hi); for the
        # half-line it degenerates to the CV < 1 limit var < (mean - lo)^2.
        if math.isfinite(hi):
            cap = (self.target_mean - lo) * (hi - self.target_mean)
        else:
            cap = (self.target_mean - lo) ** 2
        if tv >= cap:
            raise MomentMatchInfeasible(
                f"target_var {tv} not attainable on ({lo}, {hi}) "
                f"with mean {self.target_mean} (bound {cap:.6g})"
            )

    @property
    def bounds(self) -> tuple[float, float]:
        if self.support is not None:
            return float(self.support[0]), float(self.support[1])
        if self.family == "truncated_normal":
            return 0.0, math.inf
        return 0.0, 1.0


def _beta_shape(mean: float, var: float, lo: float, hi: float) -> tuple[float, float]:
    width = hi - lo
    m = (mean - lo) / width
    v = var / (width * width)
    if not (0.0 < m < 1.0) or v >= m * (1.0 - m):
        raise MomentMatchInfeasible(
            f"no Beta on ({lo}, {hi}) has mean {mean} and variance {var}"
        )
    nu = m * (1.0 - m) / v - 1.0
    return m * nu, (1.0 - m) * nu


def _phi(z: float) -> float:
    return math.exp(-0.5 * z * z) / math.sqrt(2.0 * math.pi)


def _truncnorm_moments(m: float, s: float, lo: float, hi: float) -> tuple[float, float]:
    alpha = (lo - m) / s
    if math.isinf(hi):
        beta = math.inf
        pb = 1.0
        phi_b = 0.0
        tb = 0.0
    else:
        beta = (hi - m) / s
        pb = float(special.ndtr(beta))
        phi_b = _phi(beta)
        tb = beta * phi_b
    pa = float(special.ndtr(alpha))
    z = pb - pa
    if z <= 0.0:
        return math.nan, math.nan
    phi_a = _phi(alpha)
    ratio = (phi_a - phi_b) / z
    mean = m + s * ratio
    var = s * s * (1.0 + (alpha * phi_a - tb) / z - ratio * ratio)
    return mean, var


@lru_cache(maxsize=128)
def _truncnorm_parent(
    mean: float, var: float, lo: float, hi: float
) -> tuple[float, float]:
    """Parent (m, s) of the truncated normal matching (mean, var) on [lo, hi)."""
    sd = math.sqrt(var)

    def residual(p):
        m, log_s = p
        mo, vo = _truncnorm_moments(m, math.exp(log_s), lo, hi)
        if not (math.isfinite(mo) and math.isfinite(vo)):
            return [1e6, 1e6]
        return [mo - mean, vo - var]

    starts = [
        (mean, math.log(sd)),
        (mean - sd, math.log(sd)),
        (mean + sd, math.log(sd)),
        (mean, math.log(sd) - math.log(2.0)),
        (mean, math.log(sd) + math.log(2.0)),
    ]
    for x0 in starts:
        sol = optimize.root(residual, x0, method="hybr")
        if sol.success:
            res = residual(sol.x)
            if max(abs(res[0]), abs(res[1])) < 1e-9 * max(1.0, mean, var):
                return float(sol.x[0]), float(math.exp(sol.x[1]))
    raise MomentMatchInfeasible(
        f"truncated normal on ({lo}, {hi}) cannot match mean {mean}, var {var}"
    )


def sample_policy_shock(spec: PolicyShockSpec, n: int, seed) -> np.ndarray:
    """Draw ``n`` strictly positive reaction strengths from ``spec``.

    ``seed`` may be an integer or a ``numpy.random.SeedSequence``.
    """
    n = int(n)
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    rng = np.random.default_rng(seed)
    if spec.family == "degenerate":
        return np.full(n, spec.target_mean)
    lo, hi = spec.bounds
    if spec.family == "beta_scaled":
        a, b = _beta_shape(spec.target_mean, spec.target_var, lo, hi)
        draws = lo + (hi - lo) * rng.beta(a, b, n)
        return np.clip(draws, np.nextafter(lo, hi), np.nextafter(hi, lo))
    m, s = _truncnorm_parent(spec.target_mean, spec.target_var, lo, hi)
    p_lo = float(special.ndtr((lo - m) / s))
    p_hi = 1.0 if math.isinf(hi) else float(special.ndtr((hi - m) / s))
    u = rng.random(n)
    p = np.clip(p_lo + u * (p_hi - p_lo), np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    draws = m + s * special.ndtri(p)
    upper = hi if math.isinf(hi) else np.nextafter(hi, lo)
    return np.clip(draws, np.nextafter(lo, math.inf), upper)


@dataclass(frozen=True)
class StateNoiseSpec:
    """Distributions of the state theta ~ Normal(theta_mean, theta_var) and
    the outcome noise eps ~ Normal(0, noise_var); theta, eps, and x are drawn
    mutually independently."""

    theta_mean: float = 0.0
    theta_var: float = 1.0
    noise_var: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta_mean", _finite("theta_mean", self.theta_mean))
        tv = _finite("theta_var", self.theta_var)
        if tv < 0.0:
            raise ValueError(f"theta_var must be >= 0, got {tv}")
        object.__setattr__(self, "theta_var", tv)
        nv = _finite("noise_var", self.noise_var)
        if nv <= 0.0:
            raise ValueError(f"noise_var must be > 0, got {nv}")
        object.__setattr__(self, "noise_var", nv)


@dataclass(frozen=True)
class SimulationRun:
    """What to play and how many times.

    Scenarios:

    conjecture_rule
        Forecaster best-responds to ``conjecture``; DM reacts through it.
    equilibrium
        Self-confirming rule (root ``equilibrium_index``, default the
        selected first root) on both sides.
    taylor_rule
        DM conjectures f = theta (b=0, c=1); forecaster best-responds.
    conditional
        Published forecast is theta + assumed_action. With
        ``dm_applies_assumed`` the DM carries out that action; otherwise the
        DM reacts through ``conjecture`` as usual.
    constrained_menu
        Forecaster announces theta + a for both menu actions; each DM picks
        the cheaper one under its own cost t = 1/x - 1 and the recorded
        forecast is the one matching the chosen action.
    """

    draw_count: int
    seed: int
    scenario: str
    conjecture: LinearRule | None = None
    equilibrium_index: int | None = None
    assumed_action: float | None = None
    dm_applies_assumed: bool = False
    menu: tuple[float, float] | None = None

    def __post_init__(self):
        if int(self.draw_count) != self.draw_count or self.draw_count < 1:
            raise InsufficientData(
                f"draw_count must be a positive integer, got {self.draw_count}"
            )
        object.__setattr__(self, "draw_count", int(self.draw_count))
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))
        if self.scenario not in SCENARIOS:
            raise ValueError(f"scenario must be one of {SCENARIOS}, got {self.scenario!r}")

        needs_conjecture = self.scenario == "conjecture_rule" or (
            self.scenario == "conditional" and not self.dm_applies_assumed
        )
        if needs_conjecture:
            if self.conjecture is None:
                raise ValueError(f"scenario {self.scenario!r} requires a conjecture")
            if self.conjecture.slope == 0.0:
                raise DegenerateConjecture("conjectured slope is zero")
        if self.scenario == "equilibrium" and self.equilibrium_index is not None:
            if self.equilibrium_index not in (1, 2):
                raise ValueError(
                    f"equilibrium_index must be 1 or 2, got {self.equilibrium_index}"
                )
        if self.scenario == "conditional" and self.assumed_action is None:
            raise ValueError("scenario 'conditional' requires assumed_action")
        if self.assumed_action is not None:
            object.__setattr__(
                self, "assumed_action", _finite("assumed_action", self.assumed_action)
            )
        if self.scenario == "constrained_menu":
            if self.menu is None:
                raise ValueError("scenario 'constrained_menu' requires a menu")
            menu = (_finite("menu[0]", self.menu[0]), _finite("menu[1]", self.menu[1]))
            object.__setattr__(self, "menu", menu)


class MzFit(NamedTuple):
    """Sample regression of outcome on forecast."""

    line: MZLine
    stderrs: tuple[float, float]
    r_squared: float


class BiasFit(NamedTuple):
    """Sample regression of forecast error on the state."""

    line: BiasLine
    stderrs: tuple[float, float]
    r_squared: float


@dataclass(frozen=True)
class SimulationSummary:
    draw_count: int
    mean_error: float
    mse: float
    variance_component: float
    bias_sq_component: float
    mz: MzFit | None
    bias_fit: BiasFit | None


@dataclass
class SimulationOutput:
    """Per-draw records plus their summary; records fully determine the
    summary (nothing is computed that could not be recomputed from them)."""

    theta: np.ndarray
    x: np.ndarray
    forecast: np.ndarray
    action: np.ndarray
    outcome: np.ndarray
    error: np.ndarray
    summary: SimulationSummary
    run: SimulationRun


def _full_ols(xs: np.ndarray, ys: np.ndarray):
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    ys = np.ascontiguousarray(ys, dtype=np.float64)
    if xs.ndim != 1 or xs.shape != ys.shape:
        raise ValueError("inputs must be 1-D arrays of equal length")
    n = xs.shape[0]
    if n < 3:
        raise InsufficientData(f"need at least 3 observations, got {n}")
    intercept, slope, i_se, s_se, r2, _, flat = kernels.rolling_ols(xs, ys, n)
    if flat[0]:
        raise ZeroVariance("regressor is constant; OLS line is undefined")
    return (
        float(intercept[0]),
        float(slope[0]),
        float(i_se[0]),
        float(s_se[0]),
        float(r2[0]),
    )


def ols_mz(forecasts, outcomes) -> MzFit:
    """Least-squares line of outcomes on forecasts with classical standard
    errors; the full-sample case of the rolling fit (same arithmetic, so the
    two agree exactly when the window spans the sample)."""
    intercept, slope, i_se, s_se, r2 = _full_ols(np.asarray(forecasts), np.asarray(outcomes))
    return MzFit(MZLine(intercept=intercept, slope=slope), (i_se, s_se), r2)


def _summarize(theta, forecast, outcome, error, run: SimulationRun) -> SimulationSummary:
    mean_error = float(np.mean(error))
    mse = float(np.mean(error * error))
    try:
        mz = ols_mz(forecast, outcome)
    except (InsufficientData, ZeroVariance):
        mz = None
    try:
        ti, ts, tise, tsse, tr2 = _full_ols(theta, error)
        bias_fit = BiasFit(BiasLine(coef_theta=ts, coef_const=ti), (tise, tsse), tr2)
    except (InsufficientData, ZeroVariance):
        bias_fit = None
    return SimulationSummary(
        draw_count=run.draw_count,
        mean_error=mean_error,
        mse=mse,
        variance_component=float(np.var(error)),
        bias_sq_component=mean_error * mean_error,
        mz=mz,
        bias_fit=bias_fit,
    )


def play_game(
    run: SimulationRun,
    shock: PolicyShockSpec,
    sn: StateNoiseSpec,
    params: ModelParams,
) -> SimulationOutput:
    """Play ``run.draw_count`` independent rounds of the game.

    The shock spec must target the same (mu, tau2) the forecaster optimizes
    against; a mismatch would silently decouple the DM from the model being
    verified, so it is rejected.
    """
    if not math.isclose(shock.target_mean, params.mu, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"shock mean {shock.target_mean} does not match params.mu {params.mu}"
        )
    if not math.isclose(shock.target_var, params.tau2, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"shock variance {shock.target_var} does not match params.tau2 {params.tau2}"
        )

    n = run.draw_count
    seed_theta, seed_x, seed_eps = np.random.SeedSequence(run.seed).spawn(3)
    theta = np.random.default_rng(seed_theta).normal(
        sn.theta_mean, math.sqrt(sn.theta_var), n
    )
    x = sample_policy_shock(shock, n, seed_x)
    eps = np.random.default_rng(seed_eps).normal(0.0, math.sqrt(sn.noise_var), n)

    if run.scenario == "conjecture_rule":
        cj = run.conjecture
        rule = optimal_forecast(cj, params)
        forecast, action, outcome, error = kernels.react_play(
            theta, x, eps, rule.intercept, rule.slope, cj.intercept, cj.slope, params.y_target
        )
    elif run.scenario == "taylor_rule":
        cj = TAYLOR_RULE
        rule = optimal_forecast(cj, params)
        forecast, action, outcome, error = kernels.react_play(
            theta, x, eps, rule.intercept, rule.slope, cj.intercept, cj.slope, params.y_target
        )
    elif run.scenario == "equilibrium":
        rule = solve_equilibria(params).rule(run.equilibrium_index)
        forecast, action, outcome, error = kernels.react_play(
            theta, x, eps, rule.intercept, rule.slope, rule.intercept, rule.slope, params.y_target
        )
    elif run.scenario == "conditional":
        a0 = run.assumed_action
        if run.dm_applies_assumed:
            forecast = theta + a0
            action = np.full(n, float(a0))
            outcome = forecast + eps
            error = outcome - forecast
        else:
            cj = run.conjecture
            forecast, action, outcome, error = kernels.react_play(
                theta, x, eps, a0, 1.0, cj.intercept, cj.slope, params.y_target
            )
    else:  # constrained_menu
        a0, a1 = run.menu
        forecast, action, outcome, error = kernels.menu_play(
            theta, x, eps, a0, a1, params.y_target
        )

    return SimulationOutput(
        theta=theta,
        x=x,
        forecast=forecast,
        action=action,
        outcome=outcome,
        error=error,
        summary=_summarize(theta, forecast, outcome, error, run),
        run=run,
    )


@dataclass
class BestResponseTrace:
    """Iterates of repeated best-responding, excluding the starting rule."""

    start: LinearRule
    rules: list[LinearRule]
    residuals: list[float]
    status: str  # "fixed_point" | "zero_slope" | "max_iter"

    @property
    def converged(self) -> bool:
        return self.status == "fixed_point"


def best_response_iteration(
    start: LinearRule,
    params: ModelParams,
    max_iter: int = 100,
    tol: float = 1e-12,
) -> BestResponseTrace:
    """Repeatedly apply the optimal-forecast map and record the iterates.

    Diagnostic only: convergence toward the first self-confirming rule is an
    empirical observation, not a guarantee. Stops at a fixed point (sup-norm
    residual below ``tol``), at a zero-slope iterate (the next application
    would be undefined), or after ``max_iter`` steps.
    """
    if max_iter < 1:
        raise ValueError(f"max_iter must be >= 1, got {max_iter}")
    rules: list[LinearRule] = []
    residuals: list[float] = []
    status = "max_iter"
    current = start
    for _ in range(max_iter):
        nxt = optimal_forecast(current, params)
        resid = max(
            abs(nxt.intercept - current.intercept), abs(nxt.slope - current.slope)
        )
        rules.append(nxt)
        residuals.append(resid)
        if resid < tol:
            status = "fixed_point"
            break
        if nxt.slope == 0.0:
            status = "zero_slope"
            break
        current = nxt
    return BestResponseTrace(start=start, rules=rules, residuals=residuals, status=status)
