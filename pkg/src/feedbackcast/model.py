"""Closed forms for the forecaster / decision-maker feedback game.

A forecaster observes the state ``theta`` and publishes a forecast ``f`` of
the outcome

    y = theta + a + eps,        eps ~ (0, sigma2)

A decision maker (DM) with target ``y_target`` reads the forecast through a
conjectured affine rule ``f = b + c * theta``, backs out the implied state
``(f - b) / c``, and moves the outcome toward the target with strength ``x``:

    a(f) = x * (y_target - (f - b) / c)

``x`` is private to the DM; the forecaster knows only its mean ``mu`` and
variance ``tau2`` and minimizes mean squared error taking the reaction into
account. Everything in this module is an exact formula. Monte Carlo and
brute-force counterparts live in :mod:`feedbackcast.oracle` and
:mod:`feedbackcast.simulate`; they exist to check these expressions, not to
replace them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

from .errors import (
    DegenerateConjecture,
    DegenerateEquilibrium,
    MissingMenu,
    NoEquilibrium,
    SingularDenominator,
    SingularMZ,
)

__all__ = [
    "ModelParams",
    "LinearRule",
    "MZLine",
    "BiasLine",
    "EquilibriumSolution",
    "ConditionalForecastSpec",
    "MseSplit",
    "TAYLOR_RULE",
    "dm_optimal_action",
    "reaction_from_conjecture",
    "optimal_forecast",
    "unbiased_rule",
    "solve_equilibria",
    "bias_line",
    "mz_line",
    "equilibrium_bias_and_mz",
    "mse_decomposition",
    "conditional_forecast",
    "conditional_bias_and_mz",
    "constrained_dm_choice",
]


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise ValueError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class ModelParams:
    """Primitives of the game.

    mu, tau2
        Mean and variance of the DM's reaction strength ``x``. The strength
        is positive, so ``mu > 0``; ``tau2 >= 0``.
    sigma2
        Variance of the outcome noise ``eps``; strictly positive.
    y_target
        The DM's target for the outcome.
    """

    mu: float
    tau2: float
    sigma2: float = 1.0
    y_target: float = 0.0

    def __post_init__(self):
        for name in ("mu", "tau2", "sigma2", "y_target"):
            object.__setattr__(self, name, _require_finite(name, getattr(self, name)))
        if self.mu <= 0.0:
            raise ValueError(f"mu must be positive, got {self.mu}")
        if self.tau2 < 0.0:
            raise ValueError(f"tau2 must be nonnegative, got {self.tau2}")
        if self.sigma2 <= 0.0:
            raise ValueError(f"sigma2 must be positive, got {self.sigma2}")


@dataclass(frozen=True)
class LinearRule:
    """Affine map ``value = intercept + slope * argument``."""

    intercept: float
    slope: float

    def __post_init__(self):
        object.__setattr__(self, "intercept", _require_finite("intercept", self.intercept))
        object.__setattr__(self, "slope", _require_finite("slope", self.slope))

    def __call__(self, argument: float) -> float:
        return self.intercept + self.slope * argument


#: The naive conjecture under which the DM believes forecasts reveal the
#: state one for one (f = theta).
TAYLOR_RULE = LinearRule(0.0, 1.0)


@dataclass(frozen=True)
class MZLine:
    """Population regression of outcome on forecast, E[y | f] = intercept + slope * f.

    A forecast is efficient in the Mincer-Zarnowitz sense when intercept = 0
    and slope = 1. Under feedback the optimal forecast is deliberately off
    that benchmark.
    """

    intercept: float
    slope: float

    def __post_init__(self):
        object.__setattr__(self, "intercept", _require_finite("intercept", self.intercept))
        object.__setattr__(self, "slope", _require_finite("slope", self.slope))

    def __call__(self, forecast: float) -> float:
        return self.intercept + self.slope * forecast


@dataclass(frozen=True)
class BiasLine:
    """Conditional forecast error E[y - f | theta] = coef_theta * theta + coef_const."""

    coef_theta: float
    coef_const: float

    def __post_init__(self):
        object.__setattr__(self, "coef_theta", _require_finite("coef_theta", self.coef_theta))
        object.__setattr__(self, "coef_const", _require_finite("coef_const", self.coef_const))

    def __call__(self, theta: float) -> float:
        return self.coef_const + self.coef_theta * theta


class MseSplit(NamedTuple):
    """Conditional MSE of a forecast split into noise and squared bias."""

    variance_term: float
    bias_sq_term: float

    @property
    def total(self) -> float:
        return self.variance_term + self.bias_sq_term


def _check_conjecture(conjecture: LinearRule) -> tuple[float, float]:
    b, c = conjecture.intercept, conjecture.slope
    if c == 0.0:
        raise DegenerateConjecture(
            "conjectured slope is zero; the DM cannot invert the forecast"
        )
    return b, c


def dm_optimal_action(x: float, expected_state: float, params: ModelParams) -> float:
    """Action of a DM with realized strength ``x`` who believes the state is
    ``expected_state``: close a fraction ``x`` of the gap to the target."""
    x = _require_finite("x", x)
    if x <= 0.0:
        raise ValueError(f"reaction strength x must be positive, got {x}")
    expected_state = _require_finite("expected_state", expected_state)
    return x * (params.y_target - expected_state)


def reaction_from_conjecture(
    x: float, conjecture: LinearRule, forecast_value: float, params: ModelParams
) -> float:
    """Realized action of a strength-``x`` DM who reads ``forecast_value``
    through ``conjecture``:

        a(f) = x * (y_target - f/c + b/c)

    i.e. ``dm_optimal_action`` with the conjecture-implied state (f - b)/c.
    """
    b, c = _check_conjecture(conjecture)
    x = _require_finite("x", x)
    if x <= 0.0:
        raise ValueError(f"reaction strength x must be positive, got {x}")
    forecast_value = _require_finite("forecast_value", forecast_value)
    return x * (params.y_target - (forecast_value - b) / c)


def optimal_forecast(conjecture: LinearRule, params: ModelParams) -> LinearRule:
    """MSE-optimal forecast rule f*(theta) = d + e * theta given the DM's conjecture.

    With s = mu + c and D = tau2 + s**2,

        e = c * s / D
        d = (tau2 + mu * s) / D * (c * y_target + b)

    The slope shrinks toward zero as tau2 grows: uncertainty about how hard
    the DM will react makes state-revealing forecasts expensive.
    """
    b, c = _check_conjecture(conjecture)
    s = params.mu + c
    denom = params.tau2 + s * s
    if denom == 0.0:
        raise SingularDenominator(
            "tau2 + (mu + c)^2 = 0; the forecast objective is flat"
        )
    k = (params.tau2 + params.mu * s) / denom
    return LinearRule(intercept=k * (c * params.y_target + b), slope=c * s / denom)


def unbiased_rule(conjecture: LinearRule, params: ModelParams) -> LinearRule:
    """The forecast rule with zero conditional bias, f(theta) = (theta + mu*(y_target + b/c)) * c/(mu+c).

    Not the MSE optimum: it ignores the variance the forecast itself injects
    through the uncertain reaction.
    """
    b, c = _check_conjecture(conjecture)
    s = params.mu + c
    if s == 0.0:
        raise SingularMZ("mu + c = 0; no affine rule is conditionally unbiased")
    return LinearRule(
        intercept=params.mu * (c * params.y_target + b) / s,
        slope=c / s,
    )


@dataclass(frozen=True)
class EquilibriumSolution:
    """Self-confirming forecast rules: rules that are optimal against the
    conjecture they themselves induce.

    Two candidate slopes exist when ``tau2 <= 1/4``:

        c = 1/2 - mu +/- sqrt(1 - 4*tau2) / 2

    indexed 1 (plus branch) and 2 (minus branch). ``slopes`` and ``k_values``
    are populated whenever ``exists``; a root is flagged ``degenerate`` (with
    a None entry in ``rules``) when its rule cannot be constructed: slope
    exactly zero (a flat rule reveals nothing for the DM to invert), or the
    ``mu + c = 0`` root at ``tau2 = 0``, where the best-response map is
    singular. At ``tau2 = 1/4`` the two roots coincide and ``repeated`` is
    set.
    """

    exists: bool
    rules: tuple[LinearRule | None, LinearRule | None] = (None, None)
    slopes: tuple[float, float] | None = None
    k_values: tuple[float, float] | None = None
    degenerate: tuple[bool, bool] = (False, False)
    repeated: bool = False
    selected_index: int = 1

    def rule(self, index: int | None = None) -> LinearRule:
        """Return the equilibrium rule with 1-based ``index`` (default: the
        selected root), raising if it does not exist or is degenerate."""
        if index is None:
            index = self.selected_index
        if index not in (1, 2):
            raise ValueError(f"equilibrium index must be 1 or 2, got {index}")
        if not self.exists:
            raise NoEquilibrium("tau2 > 1/4: no self-confirming rule exists")
        if self.degenerate[index - 1]:
            raise DegenerateEquilibrium(
                f"equilibrium root {index} is degenerate and has no usable rule"
            )
        rule = self.rules[index - 1]
        assert rule is not None
        return rule

    @property
    def selected_rule(self) -> LinearRule:
        return self.rule(None)


def solve_equilibria(params: ModelParams) -> EquilibriumSolution:
    """Solve for the self-confirming rules of the game.

    A rule f = b + c*theta is self-confirming when ``optimal_forecast``
    against it returns the rule itself. Matching slopes forces
    tau2 + (mu + c)**2 = mu + c, a quadratic in s = mu + c with real roots
    s = (1 +/- sqrt(1 - 4*tau2)) / 2 iff tau2 <= 1/4. The intercept then
    follows from b = k * c * y_target / (1 - k).

    1 - k is computed as c * s / (tau2 + s**2), which is algebraically equal
    but does not lose precision to cancellation when k is close to 1.
    """
    if params.tau2 > 0.25:
        return EquilibriumSolution(exists=False)

    root = math.sqrt(1.0 - 4.0 * params.tau2)
    slopes = (0.5 - params.mu + 0.5 * root, 0.5 - params.mu - 0.5 * root)

    rules: list[LinearRule | None] = []
    ks: list[float] = []
    degenerate: list[bool] = []
    for c in slopes:
        s = params.mu + c
        denom = params.tau2 + s * s
        if denom == 0.0:
            # the s = 0 root at tau2 = 0: every forecast is a best response
            # against it, so no rule is pinned down; k gets its limit along
            # the root curve as tau2 -> 0.
            ks.append(1.0 + params.mu)
            degenerate.append(True)
            rules.append(None)
            continue
        k = (params.tau2 + params.mu * s) / denom
        ks.append(k)
        if c == 0.0:
            degenerate.append(True)
            rules.append(None)
            continue
        degenerate.append(False)
        one_minus_k = c * s / denom
        rules.append(LinearRule(intercept=k * c * params.y_target / one_minus_k, slope=c))

    return EquilibriumSolution(
        exists=True,
        rules=(rules[0], rules[1]),
        slopes=slopes,
        k_values=(ks[0], ks[1]),
        degenerate=(degenerate[0], degenerate[1]),
        repeated=root == 0.0,
    )


def bias_line(conjecture: LinearRule, params: ModelParams) -> BiasLine:
    """Conditional bias of the optimal forecast against ``conjecture``:

        E[y - f* | theta] = G * (theta - c*y_target - b),  G = tau2 / (tau2 + (mu+c)**2)

    The optimal forecast under-delivers exactly when the state sits above the
    level the conjecture associates with the target.
    """
    b, c = _check_conjecture(conjecture)
    s = params.mu + c
    denom = params.tau2 + s * s
    if denom == 0.0:
        raise SingularDenominator("tau2 + (mu + c)^2 = 0; bias is undefined")
    g = params.tau2 / denom
    return BiasLine(coef_theta=g, coef_const=-g * (c * params.y_target + b) + 0.0)


def mz_line(conjecture: LinearRule, params: ModelParams) -> MZLine:
    """Population regression line of outcome on the optimal forecast:

        E[y | f*] = -tau2 * (c*y_target + b) / (c*(mu+c))  +  (tau2 + c*(mu+c)) / (c*(mu+c)) * f*

    The slope exceeds one whenever c*(mu+c) > 0 and tau2 > 0; a researcher
    regressing outcomes on these forecasts would call them inefficient even
    though they minimize MSE.
    """
    b, c = _check_conjecture(conjecture)
    s = params.mu + c
    if s == 0.0:
        raise SingularMZ("mu + c = 0; the regression of outcome on forecast is undefined")
    cs = c * s
    return MZLine(
        intercept=-params.tau2 * (c * params.y_target + b) / cs + 0.0,
        slope=(params.tau2 + cs) / cs,
    )


def equilibrium_bias_and_mz(params: ModelParams) -> tuple[BiasLine, MZLine]:
    """Bias and MZ lines evaluated at the first self-confirming rule.

    With r = sqrt(1 - 4*tau2) and s = (1 + r)/2 the forms reduce to

        bias coefficient on theta:  2*tau2 / (1 + r)
        MZ slope:                   (1-mu)*s / ((1-mu)*s - tau2)
        MZ intercept:               tau2 / (tau2 - (1-mu)*s) * y_target

    At mu = 1 the slope is exactly 0 and the intercept exactly y_target: the
    forecast absorbs the feedback completely and the outcome stops responding
    to it. Lines for the second root follow from ``bias_line`` / ``mz_line``
    applied to ``solve_equilibria(params).rule(2)``.
    """
    if params.tau2 > 0.25:
        raise NoEquilibrium("tau2 > 1/4: no self-confirming rule exists")
    r = math.sqrt(1.0 - 4.0 * params.tau2)
    s = 0.5 + 0.5 * r
    wedge = (1.0 - params.mu) * s
    denom = wedge - params.tau2
    if denom == 0.0:
        # wedge - tau2 equals c1 * s, so this is the zero-slope root.
        raise DegenerateEquilibrium(
            "first equilibrium root has slope zero; its MZ line is undefined"
        )
    g = 2.0 * params.tau2 / (1.0 + r)
    bias = BiasLine(coef_theta=g + 0.0, coef_const=-g * params.y_target + 0.0)
    mz = MZLine(
        intercept=params.tau2 / (params.tau2 - wedge) * params.y_target + 0.0,
        slope=wedge / denom + 0.0,
    )
    return bias, mz


def mse_decomposition(
    forecast: float, theta: float, conjecture: LinearRule, params: ModelParams
) -> MseSplit:
    """Split the conditional MSE of announcing ``forecast`` in state ``theta``.

    With adj = y_target - (forecast - b)/c (the gap the DM perceives),

        variance_term = tau2 * adj**2 + sigma2
        bias_sq_term  = (theta + mu * adj - forecast)**2

    The first term is noise the forecast injects through the uncertain
    reaction; the second is systematic error. Minimizing the sum, not the
    bias alone, is what tilts the optimal rule.
    """
    b, c = _check_conjecture(conjecture)
    forecast = _require_finite("forecast", forecast)
    theta = _require_finite("theta", theta)
    adj = (c * params.y_target - forecast + b) / c
    bias = theta + params.mu * adj - forecast
    return MseSplit(
        variance_term=params.tau2 * adj * adj + params.sigma2,
        bias_sq_term=bias * bias,
    )


@dataclass(frozen=True)
class ConditionalForecastSpec:
    """A forecast conditioned on an announced action.

    assumed_action
        The action the forecast takes as given; the conditional forecast is
        theta + assumed_action.
    menu
        Optional pair of actions a constrained DM chooses between.
    t_cost
        The DM's quadratic action cost coefficient; required whenever a menu
        is present and must exceed -1 so the DM problem stays convex.
    """

    assumed_action: float
    menu: tuple[float, float] | None = None
    t_cost: float | None = None

    def __post_init__(self):
        object.__setattr__(
            self, "assumed_action", _require_finite("assumed_action", self.assumed_action)
        )
        if self.menu is not None:
            if len(self.menu) != 2:
                raise ValueError("menu must hold exactly two actions")
            menu = (
                _require_finite("menu[0]", self.menu[0]),
                _require_finite("menu[1]", self.menu[1]),
            )
            object.__setattr__(self, "menu", menu)
            if self.t_cost is None:
                raise ValueError("t_cost is required when a menu is present")
        if self.t_cost is not None:
            t = _require_finite("t_cost", self.t_cost)
            if t <= -1.0:
                raise ValueError(f"t_cost must exceed -1, got {t}")
            object.__setattr__(self, "t_cost", t)


def conditional_forecast(theta: float, spec: ConditionalForecastSpec) -> float:
    """Forecast of the outcome given that the action will be ``spec.assumed_action``."""
    return _require_finite("theta", theta) + spec.assumed_action


def conditional_bias_and_mz(
    spec: ConditionalForecastSpec, conjecture: LinearRule, params: ModelParams
) -> tuple[BiasLine, MZLine]:
    """Bias and MZ lines when the published forecast is theta + a0 but the DM
    still reacts through ``conjecture``.

        E[y - f | theta] = mu*(y_target + b/c) - (mu+c)/c * a0 - (mu/c) * theta
        E[y | f]         = mu*(y_target + b/c) - a0 + (c - mu)/c * f

    The MZ slope (c - mu)/c no longer depends on tau2: conditioning on the
    action removes reaction risk but leaves the inversion distortion.
    """
    b, c = _check_conjecture(conjecture)
    a0 = spec.assumed_action
    s = params.mu + c
    level = params.mu * (c * params.y_target + b) / c
    bias = BiasLine(
        coef_theta=-params.mu / c,
        coef_const=level - s * a0 / c,
    )
    mz = MZLine(intercept=level - a0, slope=(c - params.mu) / c)
    return bias, mz


def constrained_dm_choice(
    f0: float,
    f1: float,
    spec: ConditionalForecastSpec,
    params: ModelParams,
) -> int:
    """Index (0 or 1) of the menu action a cost-``t`` DM prefers, given the
    conditional forecast announced for each.

    The DM compares (f_i - y_target)**2 + t * a_i**2 and takes action 0 on
    ties.
    """
    if spec.menu is None:
        raise MissingMenu("constrained choice requires a two-action menu")
    f0 = _require_finite("f0", f0)
    f1 = _require_finite("f1", f1)
    a0, a1 = spec.menu
    t = spec.t_cost
    y = params.y_target
    lhs = (f0 - y) ** 2 - (f1 - y) ** 2
    rhs = t * (a1 * a1 - a0 * a0)
    return 0 if lhs <= rhs else 1
