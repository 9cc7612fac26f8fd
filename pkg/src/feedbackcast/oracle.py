"""Brute-force minimizers that cross-check the closed forms.

None of these reuse the optimal-forecast formula as the answer: the exact
oracle solves the first-order condition numerically from MSE evaluations, the
Monte Carlo oracle golden-sections a simulated objective, and the action
oracle grid-searches the DM problem. The closed form only supplies the pilot
point around which the stochastic search brackets.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import BracketFailure, DegenerateConjecture, SingularDenominator
from .model import LinearRule, ModelParams, mse_decomposition, optimal_forecast
from .simulate import PolicyShockSpec, sample_policy_shock

__all__ = [
    "OracleConfig",
    "exact_mse_minimizer",
    "mc_mse_minimizer",
    "grid_action_minimizer",
]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
_MAX_GOLDEN_ITER = 200


@dataclass(frozen=True)
class OracleConfig:
    """Knobs for the stochastic oracle.

    bracket_halfwidth of None means auto: max(1, 10 * |pilot|) around the
    pilot point, wide enough that the truth is always interior.
    """

    sample_count: int = 100_000
    bracket_halfwidth: float | None = None
    tolerance: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if int(self.sample_count) != self.sample_count or self.sample_count < 10_000:
            raise ValueError(
                f"sample_count must be an integer >= 10000, got {self.sample_count}"
            )
        object.__setattr__(self, "sample_count", int(self.sample_count))
        if self.bracket_halfwidth is not None:
            hw = float(self.bracket_halfwidth)
            if not math.isfinite(hw) or hw <= 0.0:
                raise ValueError(f"bracket_halfwidth must be positive, got {hw}")
            object.__setattr__(self, "bracket_halfwidth", hw)
        tol = float(self.tolerance)
        if not math.isfinite(tol) or tol <= 0.0:
            raise ValueError(f"tolerance must be positive, got {tol}")
        object.__setattr__(self, "tolerance", tol)
        if int(self.seed) != self.seed or self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")
        object.__setattr__(self, "seed", int(self.seed))


def _mse_total(f: float, theta: float, conjecture: LinearRule, params: ModelParams) -> float:
    variance_term, bias_sq_term = mse_decomposition(f, theta, conjecture, params)
    return variance_term + bias_sq_term


def exact_mse_minimizer(theta: float, conjecture: LinearRule, params: ModelParams) -> float:
    """Minimize the exact conditional MSE in f by solving its linear FOC
    numerically.

    The objective is quadratic, so three evaluations pin down the vertex; two
    Newton re-centerings (central differences with unit step are exact for
    quadratics) then remove the cancellation error the first fit picks up
    when the curvature is small.
    """
    m_lo = _mse_total(-1.0, theta, conjecture, params)
    m_mid = _mse_total(0.0, theta, conjecture, params)
    m_hi = _mse_total(1.0, theta, conjecture, params)
    curv = m_hi + m_lo - 2.0 * m_mid
    if curv <= 0.0:
        raise SingularDenominator(
            "conditional MSE is not strictly convex in the forecast"
        )
    f = (m_lo - m_hi) / (2.0 * curv)
    for _ in range(2):
        hi = _mse_total(f + 1.0, theta, conjecture, params)
        lo = _mse_total(f - 1.0, theta, conjecture, params)
        mid = _mse_total(f, theta, conjecture, params)
        curv = hi + lo - 2.0 * mid
        if curv <= 0.0:
            break
        f = f - (hi - lo) / (2.0 * curv)
    return f


def _golden_section(objective, lo: float, hi: float, tolerance: float) -> float:
    """Standard golden-section descent on [lo, hi]; assumes the bracket holds
    an interior minimum (checked by the caller)."""
    a, b = lo, hi
    c = b - _INV_PHI * (b - a)
    d = a + _INV_PHI * (b - a)
    fc = objective(c)
    fd = objective(d)
    for _ in range(_MAX_GOLDEN_ITER):
        if b - a <= tolerance:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - _INV_PHI * (b - a)
            fc = objective(c)
        else:
            a, c, fc = c, d, fd
            d = a + _INV_PHI * (b - a)
            fd = objective(d)
    return 0.5 * (a + b)


def mc_mse_minimizer(
    theta: float,
    conjecture: LinearRule,
    params: ModelParams,
    dist: PolicyShockSpec,
    cfg: OracleConfig,
    with_stderr: bool = False,
):
    """Golden-section minimizer of the Monte-Carlo-estimated conditional MSE.

    The same (x, eps) draws score every candidate forecast (common random
    numbers), so the estimated objective is an exact quadratic in f and the
    search is deterministic given the seed. With ``with_stderr`` the return
    value is ``(minimizer, stderr)``, where the standard error comes from the
    delta method applied to the ratio form of the sample minimizer.
    """
    if not math.isclose(dist.target_mean, params.mu, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"shock mean {dist.target_mean} does not match params.mu {params.mu}"
        )
    if not math.isclose(dist.target_var, params.tau2, rel_tol=1e-9, abs_tol=1e-12):
        raise ValueError(
            f"shock variance {dist.target_var} does not match params.tau2 {params.tau2}"
        )
    b, c = conjecture.intercept, conjecture.slope

    ss = np.random.SeedSequence(cfg.seed)
    seed_x, seed_eps = ss.spawn(2)
    x = sample_policy_shock(dist, cfg.sample_count, seed_x)
    eps = np.random.default_rng(seed_eps).normal(
        0.0, math.sqrt(params.sigma2), cfg.sample_count
    )

    def objective(f: float) -> float:
        return kernels.mse_at(f, theta, b, c, params.y_target, x, eps)

    pilot = optimal_forecast(conjecture, params)(theta)
    half = cfg.bracket_halfwidth
    if half is None:
        half = max(1.0, 10.0 * abs(pilot))
    lo, hi = pilot - half, pilot + half
    if not (objective(pilot) <= objective(lo) and objective(pilot) <= objective(hi)):
        raise BracketFailure(
            f"bracket [{lo:.6g}, {hi:.6g}] does not contain the sample minimum"
        )
    f_hat = _golden_section(objective, lo, hi, cfg.tolerance)
    if not with_stderr:
        return f_hat

    # e_i(f) = A_i - (1 + B_i) f, so the sample minimizer is mean(u)/mean(v)
    # with u = A(1+B) and v = (1+B)^2; the delta method gives its stderr.
    a_i = theta + x * ((c * params.y_target + b) / c) + eps
    w_i = 1.0 + x / c
    u = a_i * w_i
    v = w_i * w_i
    v_bar = float(np.mean(v))
    ratio = float(np.mean(u)) / v_bar
    resid = u - ratio * v
    stderr = float(np.std(resid, ddof=1)) / (v_bar * math.sqrt(len(u)))
    return f_hat, stderr


def grid_action_minimizer(
    forecast_value: float,
    t_cost: float,
    conjecture: LinearRule,
    params: ModelParams,
) -> float:
    """Grid-plus-refinement minimizer of the DM objective

        (theta_hat + a - y_target)^2 + sigma2 + t * a^2

    with theta_hat the conjecture-implied state (f - b)/c. Two staged grids
    narrow the bracket and a final parabola through the best three points
    lands on the vertex.
    """
    t = float(t_cost)
    if not math.isfinite(t) or t <= -1.0:
        raise ValueError(f"t_cost must exceed -1, got {t_cost}")
    b, c = conjecture.intercept, conjecture.slope
    if c == 0.0:
        raise DegenerateConjecture("conjectured slope is zero")
    theta_hat = (float(forecast_value) - b) / c
    gap = params.y_target - theta_hat

    def objective(a):
        miss = theta_hat + a - params.y_target
        return miss * miss + params.sigma2 + t * a * a

    half = (abs(gap) + 1.0) * max(1.0, 1.0 / (1.0 + t))
    lo, hi = -half, half
    points = 1601
    best = 0.0
    for _ in range(2):
        grid = np.linspace(lo, hi, points)
        values = objective(grid)
        i = int(np.argmin(values))
        best = float(grid[i])
        lo = float(grid[max(i - 1, 0)])
        hi = float(grid[min(i + 1, points - 1)])
    grid = np.linspace(lo, hi, points)
    values = objective(grid)
    i = int(np.argmin(values))
    i = min(max(i, 1), points - 2)
    g0, g1, g2 = grid[i - 1], grid[i], grid[i + 1]
    j0, j1, j2 = values[i - 1], values[i], values[i + 1]
    num = (g1 - g0) ** 2 * (j1 - j2) - (g1 - g2) ** 2 * (j1 - j0)
    den = (g1 - g0) * (j1 - j2) - (g1 - g2) * (j1 - j0)
    if den == 0.0:
        return float(g1)
    return float(g1 - 0.5 * num / den)
