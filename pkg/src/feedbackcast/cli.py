"""Command-line front end: solve / sweep / simulate / evaluate.

Exit codes: 0 success, 1 usage or validation problem, 2 model infeasibility
(no equilibrium), 3 I/O failure. Numeric table output uses 10 significant
digits with a locale-independent decimal point; JSON reports carry full
float precision so they round-trip.

A config file (``--config``, JSON object or flat ``key=value`` lines) seeds
the defaults of the chosen subcommand; explicit flags always win. The
``FEEDBACKCAST_SEED`` environment variable supplies the default seed when
``--seed`` is absent.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys

import numpy as np

from .errors import FeedbackcastError, NoEquilibrium, DegenerateEquilibrium
from .evaluate import ingest_csv, rolling_mz
from .model import (
    TAYLOR_RULE,
    LinearRule,
    ModelParams,
    MZLine,
    bias_line,
    equilibrium_bias_and_mz,
    mz_line,
    optimal_forecast,
    solve_equilibria,
)
from .simulate import (
    PolicyShockSpec,
    SimulationRun,
    StateNoiseSpec,
    ols_mz,
    play_game,
)

ENV_SEED = "FEEDBACKCAST_SEED"


def _fmt(value: float) -> str:
    return "%.10g" % value


class _Parser(argparse.ArgumentParser):
    # argparse exits 2 on usage errors by default, but 2 is reserved for
    # "no equilibrium" here; route usage problems to exit 1.
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _rule_dict(rule) -> dict:
    return {"intercept": rule.intercept, "slope": rule.slope}


def _bias_dict(line) -> dict:
    return {"coef_theta": line.coef_theta, "coef_const": line.coef_const}


def _fit_dict(fit) -> dict | None:
    """Uniform JSON shape for a fitted regression line (MZ fit of outcome on
    forecast, or bias fit of error on state: slope is the theta coefficient)."""
    if fit is None:
        return None
    line = fit.line
    if isinstance(line, MZLine):
        intercept, slope = line.intercept, line.slope
    else:
        intercept, slope = line.coef_const, line.coef_theta
    return {
        "intercept": intercept,
        "slope": slope,
        "intercept_stderr": fit.stderrs[0],
        "slope_stderr": fit.stderrs[1],
        "r_squared": fit.r_squared,
    }


def _resolve_seed(value: int | None) -> int:
    if value is not None:
        return value
    env = os.environ.get(ENV_SEED)
    if env is not None and env.strip():
        try:
            return int(env)
        except ValueError:
            raise ValueError(f"{ENV_SEED} must be an integer, got {env!r}") from None
    return 0


def _conjecture_from(ns) -> LinearRule | None:
    if (ns.b is None) != (ns.c is None):
        raise ValueError("--b and --c must be given together")
    if ns.c is None:
        return None
    return LinearRule(intercept=ns.b, slope=ns.c)


# ---------------------------------------------------------------------------
# subcommand handlers

def cmd_solve(ns) -> int:
    params = ModelParams(mu=ns.mu, tau2=ns.tau2, sigma2=ns.sigma2, y_target=ns.ytarget)
    conjecture = _conjecture_from(ns)

    report: dict = {
        "params": {
            "mu": params.mu,
            "tau2": params.tau2,
            "sigma2": params.sigma2,
            "y_target": params.y_target,
        }
    }

    sol = solve_equilibria(params)
    roots = []
    if sol.exists:
        for i in range(2):
            rule = sol.rules[i]
            roots.append(
                {
                    "index": i + 1,
                    "slope": sol.slopes[i],
                    "intercept": None if rule is None else rule.intercept,
                    "k": sol.k_values[i],
                    "degenerate": sol.degenerate[i],
                }
            )
    report["equilibria"] = {
        "exists": sol.exists,
        "repeated": sol.repeated,
        "selected_index": sol.selected_index,
        "roots": roots,
    }
    if sol.exists and not sol.degenerate[0]:
        eq_bias, eq_mz = equilibrium_bias_and_mz(params)
        report["equilibrium"] = {
            "rule": _rule_dict(sol.rule(1)),
            "bias_line": _bias_dict(eq_bias),
            "mz_line": _rule_dict(eq_mz),
        }

    report["taylor"] = {
        "conjecture": _rule_dict(TAYLOR_RULE),
        "optimal_rule": _rule_dict(optimal_forecast(TAYLOR_RULE, params)),
        "bias_line": _bias_dict(bias_line(TAYLOR_RULE, params)),
        "mz_line": _rule_dict(mz_line(TAYLOR_RULE, params)),
    }

    if conjecture is not None:
        report["conjecture"] = {
            "conjecture": _rule_dict(conjecture),
            "optimal_rule": _rule_dict(optimal_forecast(conjecture, params)),
            "bias_line": _bias_dict(bias_line(conjecture, params)),
            "mz_line": _rule_dict(mz_line(conjecture, params)),
        }
    elif not sol.exists:
        raise NoEquilibrium(
            f"tau2 = {params.tau2} > 1/4: no equilibrium, and no conjecture given"
        )

    print(json.dumps(report, indent=2))
    return 0


def cmd_sweep(ns) -> int:
    if ns.tau2_min < 0.0 or ns.tau2_min > ns.tau2_max:
        raise ValueError("need 0 <= tau2-min <= tau2-max")
    if ns.steps < 2:
        raise ValueError(f"steps must be >= 2, got {ns.steps}")
    if ns.clip is not None and ns.clip <= 0.0:
        raise ValueError(f"clip must be positive, got {ns.clip}")

    lines = ["mu,tau2,mz_slope,mz_intercept,exists"]
    grid = np.linspace(ns.tau2_min, ns.tau2_max, ns.steps)
    for mu in ns.mu:
        for tau2 in grid:
            tau2 = float(tau2)
            try:
                params = ModelParams(mu=mu, tau2=tau2, sigma2=1.0, y_target=ns.ytarget)
                _, mz = equilibrium_bias_and_mz(params)
            except NoEquilibrium:
                lines.append(f"{_fmt(mu)},{_fmt(tau2)},,,false")
                continue
            except DegenerateEquilibrium:
                lines.append(f"{_fmt(mu)},{_fmt(tau2)},,,true")
                continue
            slope, intercept = mz.slope, mz.intercept
            if ns.clip is not None:
                slope = min(max(slope, -ns.clip), ns.clip)
                intercept = min(max(intercept, -ns.clip), ns.clip)
            lines.append(
                f"{_fmt(mu)},{_fmt(tau2)},{_fmt(slope)},{_fmt(intercept)},true"
            )
    text = "\n".join(lines) + "\n"
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_simulate(ns) -> int:
    params = ModelParams(mu=ns.mu, tau2=ns.tau2, sigma2=ns.sigma2, y_target=ns.ytarget)
    if (ns.support_lo is None) != (ns.support_hi is None):
        raise ValueError("--support-lo and --support-hi must be given together")
    support = None
    if ns.support_lo is not None:
        support = (ns.support_lo, ns.support_hi)
    shock = PolicyShockSpec(
        family=ns.family,
        target_mean=ns.mu,
        target_var=ns.tau2,
        support=support,
    )
    state = StateNoiseSpec(
        theta_mean=ns.theta_mean, theta_var=ns.theta_var, noise_var=ns.sigma2
    )
    run = SimulationRun(
        draw_count=ns.n,
        seed=_resolve_seed(ns.seed),
        scenario=ns.scenario,
        conjecture=_conjecture_from(ns),
        equilibrium_index=ns.equilibrium_index,
        assumed_action=ns.a0,
        dm_applies_assumed=ns.dm_applies_assumed,
        menu=tuple(ns.menu) if ns.menu is not None else None,
    )
    out = play_game(run, shock, state, params)

    draws_path = f"{ns.out_prefix}_draws.csv"
    summary_path = f"{ns.out_prefix}_summary.json"
    with open(draws_path, "w", encoding="utf-8", newline="") as handle:
        handle.write("theta,x,forecast,action,outcome,error\n")
        cols = (out.theta, out.x, out.forecast, out.action, out.outcome, out.error)
        for row in zip(*cols):
            handle.write(",".join(_fmt(v) for v in row) + "\n")

    s = out.summary
    summary = {
        "scenario": run.scenario,
        "draw_count": run.draw_count,
        "seed": run.seed,
        "params": {
            "mu": params.mu,
            "tau2": params.tau2,
            "sigma2": params.sigma2,
            "y_target": params.y_target,
        },
        "shock": {
            "family": shock.family,
            "target_mean": shock.target_mean,
            "target_var": shock.target_var,
            "support": list(shock.bounds),
        },
        "state": {
            "theta_mean": state.theta_mean,
            "theta_var": state.theta_var,
            "noise_var": state.noise_var,
        },
        "summary": {
            "mean_error": s.mean_error,
            "mse": s.mse,
            "variance_component": s.variance_component,
            "bias_sq_component": s.bias_sq_component,
            "mz": _fit_dict(s.mz),
            "bias_fit": _fit_dict(s.bias_fit),
        },
    }
    with open(summary_path, "w", encoding="utf-8", newline="") as handle:
        json.dump(summary, handle, indent=2)
        handle.write("\n")

    print(f"scenario: {run.scenario}")
    print(f"draws: {run.draw_count}")
    print(f"seed: {run.seed}")
    print(f"mean_error: {_fmt(s.mean_error)}")
    print(f"mse: {_fmt(s.mse)}")
    if s.mz is not None:
        print(f"mz_intercept: {_fmt(s.mz.line.intercept)}")
        print(f"mz_slope: {_fmt(s.mz.line.slope)}")
        print(f"mz_r_squared: {_fmt(s.mz.r_squared)}")
    print(f"wrote: {draws_path}")
    print(f"wrote: {summary_path}")
    return 0


def cmd_evaluate(ns) -> int:
    series = ingest_csv(ns.input)
    full = ols_mz(series.forecast, series.realization)
    print(
        "full_sample_mz: intercept=%s slope=%s slope_stderr=%s r_squared=%s"
        % (
            _fmt(full.line.intercept),
            _fmt(full.line.slope),
            _fmt(full.stderrs[1]),
            _fmt(full.r_squared),
        )
    )
    rolling = rolling_mz(series, ns.window)
    lines = ["window_end,mz_intercept,mz_slope,slope_stderr,r_squared,mean_error"]
    for i, label in enumerate(rolling.window_end):
        lines.append(
            ",".join(
                (
                    label,
                    _fmt(rolling.mz_intercept[i]),
                    _fmt(rolling.mz_slope[i]),
                    _fmt(rolling.slope_stderr[i]),
                    _fmt(rolling.r_squared[i]),
                    _fmt(rolling.mean_error[i]),
                )
            )
        )
    text = "\n".join(lines) + "\n"
    if ns.out:
        with open(ns.out, "w", encoding="utf-8", newline="") as handle:
            handle.write(text)
    else:
        sys.stdout.write(text)
    return 0


# ---------------------------------------------------------------------------
# parser construction and config-file plumbing

def _build_parser() -> tuple[_Parser, dict[str, _Parser]]:
    parser = _Parser(prog="feedbackcast", description=__doc__.splitlines()[0])
    subs = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    table: dict[str, _Parser] = {}

    solve = subs.add_parser(
        "solve", help="closed-form rules, equilibria, bias and MZ lines"
    )
    solve.add_argument("--mu", type=float, required=True)
    solve.add_argument("--tau2", type=float, required=True)
    solve.add_argument("--ytarget", type=float, default=0.0)
    solve.add_argument("--sigma2", type=float, default=1.0)
    solve.add_argument("--b", type=float, default=None, help="conjecture intercept")
    solve.add_argument("--c", type=float, default=None, help="conjecture slope")
    solve.add_argument("--config", default=None)
    solve.set_defaults(func=cmd_solve)
    table["solve"] = solve

    sweep = subs.add_parser(
        "sweep", help="equilibrium MZ line over a (mu, tau2) grid"
    )
    sweep.add_argument("--mu", type=float, nargs="+", required=True)
    sweep.add_argument("--tau2-min", type=float, required=True)
    sweep.add_argument("--tau2-max", type=float, required=True)
    sweep.add_argument("--steps", type=int, required=True)
    sweep.add_argument("--ytarget", type=float, default=0.0)
    sweep.add_argument("--clip", type=float, default=None, help="clamp slope/intercept to [-clip, clip]")
    sweep.add_argument("--out", default=None)
    sweep.add_argument("--config", default=None)
    sweep.set_defaults(func=cmd_sweep)
    table["sweep"] = sweep

    sim = subs.add_parser(
        "simulate", help="play the game and write draws + summary"
    )
    sim.add_argument(
        "--scenario",
        required=True,
        choices=["conjecture_rule", "equilibrium", "taylor_rule", "conditional", "constrained_menu"],
    )
    sim.add_argument("--mu", type=float, required=True)
    sim.add_argument("--tau2", type=float, required=True)
    sim.add_argument("--sigma2", type=float, default=1.0)
    sim.add_argument("--ytarget", type=float, default=0.0)
    sim.add_argument("--theta-mean", type=float, default=0.0)
    sim.add_argument("--theta-var", type=float, default=1.0)
    sim.add_argument("--family", default="beta_scaled",
                     choices=["beta_scaled", "truncated_normal", "degenerate"])
    sim.add_argument("--support-lo", type=float, default=None)
    sim.add_argument("--support-hi", type=float, default=None)
    sim.add_argument("--b", type=float, default=None, help="conjecture intercept")
    sim.add_argument("--c", type=float, default=None, help="conjecture slope")
    sim.add_argument("--a0", type=float, default=None, help="assumed action")
    sim.add_argument("--dm-applies-assumed", action="store_true")
    sim.add_argument("--menu", type=float, nargs=2, default=None, metavar=("A0", "A1"))
    sim.add_argument("--equilibrium-index", type=int, default=None)
    sim.add_argument("--n", type=int, required=True)
    sim.add_argument("--seed", type=int, default=None)
    sim.add_argument("--out-prefix", required=True)
    sim.add_argument("--config", default=None)
    sim.set_defaults(func=cmd_simulate)
    table["simulate"] = sim

    ev = subs.add_parser(
        "evaluate", help="rolling MZ regression over a forecast CSV"
    )
    ev.add_argument("input", help="CSV with header period,forecast,realization")
    ev.add_argument("--window", type=int, default=40)
    ev.add_argument("--out", default=None)
    ev.add_argument("--config", default=None)
    ev.set_defaults(func=cmd_evaluate)
    table["evaluate"] = ev

    return parser, table


def _load_config_mapping(path: str) -> dict:
    with open(path, encoding="utf-8") as handle:
        text = handle.read()
    stripped = text.strip()
    if not stripped:
        return {}
    if stripped.startswith("{"):
        data = json.loads(stripped)
        if not isinstance(data, dict):
            raise ValueError("config JSON must be an object")
        return {str(k).replace("-", "_"): v for k, v in data.items()}
    mapping = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ValueError(f"config line {line_no}: expected key=value, got {line!r}")
        key, _, value = line.partition("=")
        mapping[key.strip().replace("-", "_")] = value.strip()
    return mapping


def _coerce_config_value(action: argparse.Action, value):
    if isinstance(action, (argparse._StoreTrueAction, argparse._StoreFalseAction)):
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ("true", "1", "yes"):
            return True
        if text in ("false", "0", "no"):
            return False
        raise ValueError(f"config key {action.dest!r}: expected a boolean, got {value!r}")
    convert = action.type if action.type is not None else str
    if action.nargs in ("+", "*", 2):
        items = value if isinstance(value, (list, tuple)) else str(value).replace(",", " ").split()
        return [convert(item) for item in items]
    if isinstance(value, str):
        return convert(value)
    if convert is float and isinstance(value, (int, float)):
        return float(value)
    if convert is int:
        if isinstance(value, int):
            return value
        if isinstance(value, float) and value.is_integer():
            return int(value)
    return convert(str(value))


def _apply_config_file(argv: list[str], table: dict[str, _Parser]) -> None:
    if not argv or argv[0] not in table:
        return
    sub = table[argv[0]]
    path = None
    for i, arg in enumerate(argv):
        if arg == "--config" and i + 1 < len(argv):
            path = argv[i + 1]
        elif arg.startswith("--config="):
            path = arg.split("=", 1)[1]
    if path is None:
        return
    mapping = _load_config_mapping(path)
    actions = {a.dest: a for a in sub._actions if a.dest != "help"}
    defaults = {}
    for key, value in mapping.items():
        if key not in actions:
            raise ValueError(f"unknown config key {key!r} for subcommand {argv[0]!r}")
        action = actions[key]
        defaults[key] = _coerce_config_value(action, value)
        action.required = False
    sub.set_defaults(**defaults)


def main(argv=None) -> int:
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, table = _build_parser()
    try:
        _apply_config_file(argv, table)
        try:
            ns = parser.parse_args(argv)
        except SystemExit as exc:
            code = exc.code
            if code is None:
                return 0
            return code if isinstance(code, int) else 1
        return ns.func(ns)
    except NoEquilibrium as exc:
        print(f"feedbackcast: no equilibrium: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"feedbackcast: i/o error: {exc}", file=sys.stderr)
        return 3
    except (FeedbackcastError, ValueError) as exc:
        print(f"feedbackcast: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
