"""Command-line entry point: tabulated curves and checks as CSV or JSON.

Exit codes: 0 success, 2 bad physical input, 3 numerical failure, 64 usage
error.  Output carries the full run configuration and package version and
contains no timestamps, so identical arguments give byte-identical files.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import ConfigurationError, DomainError, NumericError
from .precision import PRECISION_ENV, Mode, arith
from .systems import BOX, LINEAR_POTENTIAL, OSCILLATOR, boltzmann_weights, classical_density, get_system
from .systems import semiclassical_density

EXIT_OK = 0
EXIT_DOMAIN = 2
EXIT_NUMERIC = 3
EXIT_USAGE = 64

#: digits printed for the reference density values at tau = 60
BOX_TAU60_REFERENCE = ((0.2, 1.07855849250), (0.5, 1.07855849256))


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


@dataclass
class RunConfig:
    command: str
    precision: str = "native"
    format: str = "csv"
    output: str = "-"
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        d = asdict(self)
        d["version"] = __version__
        return d


@dataclass
class Table:
    columns: list[str]
    rows: list[list]
    checks: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)


# ---------------------------------------------------------------- formatting


def _text(value, ar) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, str):
        return value
    if value is None:
        return ""
    if ar.mode is Mode.NATIVE or isinstance(value, float):
        x = float(value)
        return "nan" if math.isnan(x) else format(x, ".17g")
    return ar.fmt(value)


def _json_value(value, ar):
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if value is None or isinstance(value, str):
        return value
    if isinstance(value, (list, tuple)):
        return [_json_value(v, ar) for v in value]
    if isinstance(value, (float, np.floating)):
        x = float(value)
        return None if not math.isfinite(x) else x
    # extended-precision numbers travel as decimal strings
    return ar.fmt(value)


def render(config: RunConfig, table: Table) -> str:
    ar = arith(config.precision)
    if config.format == "json":
        doc = {
            "config": config.as_dict(),
            "columns": table.columns,
            "rows": [[_json_value(v, ar) for v in row] for row in table.rows],
            "checks": {k: _json_value(v, ar) for k, v in table.checks.items()},
        }
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"
    lines = [f"# thermoflat {__version__}", "# config: " + json.dumps(config.as_dict(), sort_keys=True)]
    for key, value in table.checks.items():
        if isinstance(value, (list, tuple)):
            value = json.dumps(_json_value(value, ar))
        lines.append(f"# check {key} = {_text(value, ar)}")
    lines.extend(f"# {note}" for note in table.notes)
    lines.append("# all quantities are dimensionless")
    lines.append(",".join(table.columns))
    lines.extend(",".join(_text(v, ar) for v in row) for row in table.rows)
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------- commands


def _parse_range(text: str) -> tuple[float, float]:
    try:
        lo, hi = (float(p) for p in text.split(","))
    except ValueError:
        raise UsageError(f"range must look like a,b; got {text!r}") from None
    return lo, hi


def _parse_ints(text: str) -> list[int]:
    try:
        return [int(p) for p in text.split(",") if p]
    except ValueError:
        raise UsageError(f"expected comma-separated integers, got {text!r}") from None


def cmd_box_density(args, config: RunConfig) -> Table:
    from .thermal import box_density_theta

    ar = arith(config.precision)
    if args.grid < 2:
        raise DomainError("grid needs at least two points")
    rows = []
    for k in range(args.grid):
        xi = ar.real(k) / (args.grid - 1)
        rows.append([xi, box_density_theta(args.tau, xi, ar)])
    table = Table(["xi", "rho_q"], rows)
    if args.tau == 60:
        for xi, printed in BOX_TAU60_REFERENCE:
            value = float(box_density_theta(60, xi, ar))
            table.checks[f"rho_q({xi})"] = value
            table.checks[f"rho_q({xi})_matches_printed"] = abs(value - printed) <= 5e-12
    return table


def cmd_box_flatness(args, config: RunConfig) -> Table:
    from .flatness_box import closed_form_weights, verify_solution
    from .thermal import kl_divergence

    sol = closed_form_weights(args.n)
    ref = boltzmann_weights(BOX, args.tau_per_n * args.n, n_trunc=args.n)
    rows = [[n, p, q] for n, p, q in zip(sol.weights.indices, sol.weights.floats(), ref.floats())]
    exact = verify_solution(args.n)
    checks = {"kl": kl_divergence(sol.weights, ref), "exact_residuals_zero": exact.ok}
    notes = [f"exact weight n={n}: {p}" for n, p in zip(sol.weights.indices, sol.weights_exact)]
    return Table(["n", "p_flatness_optimal", "p_boltzmann"], rows, checks, notes)


def cmd_box_kl_scan(args, config: RunConfig) -> Table:
    from .flatness_box import kl_asymptotics

    ns = _parse_ints(args.n_list)
    reports = kl_asymptotics(ns, tau_of_n=lambda n: args.tau_per_n * n)
    rows = [[n, r.kl, r.scaled_kl] for n, r in zip(ns, reports)]
    d = [r.kl for r in reports]
    return Table(["n", "kl", "n2_kl"], rows, {"kl_strictly_decreasing": all(a > b for a, b in zip(d, d[1:]))})


def cmd_osc_match(args, config: RunConfig) -> Table:
    from .flatness_osc import kl_closed_form, matched_weights, position_variance

    match = matched_weights(args.tau, args.n_trunc)
    ref = boltzmann_weights(OSCILLATOR, args.tau, n_trunc=len(match.weights))
    rows = [[n, p, q] for n, p, q in zip(match.weights.indices, match.weights.floats(), ref.floats())]
    kl = kl_closed_form(args.tau)
    checks = {
        "tau_effective": match.tau_effective,
        "kl": kl.kl,
        "scaled_kl_288tau4": kl.scaled_kl,
        "position_variance": position_variance(match.weights),
    }
    return Table(["n", "p_matched", "p_boltzmann"], rows, checks)


def cmd_linpot_ratio(args, config: RunConfig) -> Table:
    from .linpot import ratio_constancy
    from .thermal import weighted_components

    ar = arith(config.precision)
    lo, hi = _parse_range(args.range)
    rep = ratio_constancy(args.tau, lo, hi, args.grid, ar)
    w = boltzmann_weights(LINEAR_POTENTIAL, args.tau, mode=ar)
    rows = []
    for xi, r in zip(rep.grid, rep.values):
        rows.append([xi, r, *weighted_components(LINEAR_POTENTIAL, w, args.tau, xi, 4)])
    checks = {
        "max": rep.max,
        "min": rep.min,
        "mean": rep.mean,
        "relative_spread": rep.spread,
        "states_needed": rep.states_needed,
    }
    return Table(["xi", "r", "component_1", "component_2", "component_3", "component_4"], rows, checks)


def cmd_linpot_emergence(args, config: RunConfig) -> Table:
    from .linpot import EMERGENCE_LIMIT, emergence_check

    rep = emergence_check(args.tau, args.n_max, args.plateau_start)
    cols = ["n", "u_n", "ai_prime_sq", "spacing", "r_n_proxy", "limit_residual"]
    rows = [[getattr(r, c) for c in cols] for r in rep.rows]
    checks = {"b_tau": rep.b_tau, "a_tau": rep.a_tau, "limit": EMERGENCE_LIMIT}
    return Table(cols, rows, checks)


def cmd_ytransform(args, config: RunConfig) -> Table:
    from .ytransform import FlatnessOptimizer, YDensity, flatness_score, midpoint_grid

    system = get_system(args.system)
    if args.n_trunc is None:
        w = boltzmann_weights(system, args.tau)
    else:
        w = boltzmann_weights(system, args.tau, n_trunc=args.n_trunc)
    sigma = YDensity(system, args.tau, w)
    ys = midpoint_grid(args.grid)
    values = sigma.values(args.grid)
    score = flatness_score(sigma, args.epsilon, args.grid)
    checks = {"sigma_max": score.sigma_max, "score": score.measure, "epsilon": args.epsilon}
    if not args.optimize:
        return Table(["y", "sigma"], [[y, s] for y, s in zip(ys, values)], checks)
    opt = FlatnessOptimizer(system, args.tau, len(w), args.epsilon, args.seed, grid=args.grid)
    found = opt.run()
    tuned = YDensity(system, args.tau, found)
    checks["score_optimized"] = flatness_score(tuned, args.epsilon, args.grid).measure
    checks["trace"] = [[e.start, e.epsilon, e.score, e.shortfall] for e in opt.trace]
    checks["weights_optimized"] = [float(p) for p in found.weights]
    rows = [[y, s, t] for y, s, t in zip(ys, values, tuned.values(args.grid))]
    notes = ["optimizer: heuristic pattern search, no optimality guarantee"]
    return Table(["y", "sigma", "sigma_optimized"], rows, checks, notes)


def cmd_semiclassical(args, config: RunConfig) -> Table:
    from .thermal import mixed_density

    system = get_system(args.system)
    tau = args.tau
    if system is BOX:
        lo, hi = 0.0, 1.0
    elif system is OSCILLATOR:
        lo, hi = -4.0 * math.sqrt(tau), 4.0 * math.sqrt(tau)
    else:
        lo, hi = 0.0, 10.0 * tau
    w = boltzmann_weights(system, tau)
    rows = []
    for xi in np.linspace(lo, hi, args.grid):
        xi = float(xi)
        q = float(mixed_density(system, w, xi, "native"))
        s = semiclassical_density(system, tau, xi)
        rows.append([xi, q, s, float(classical_density(system, tau, xi)), abs(q - s)])
    checks = {"max_deviation": max(r[-1] for r in rows)}
    return Table(["xi", "rho_quantum", "rho_semiclassical", "rho_classical", "deviation"], rows, checks)


# ---------------------------------------------------------------- parser


EXTENDED_COMMANDS = {"box-density", "linpot-ratio"}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--precision", choices=["native", "extended"], default="native")
    common.add_argument("--format", choices=["csv", "json"], default="csv")
    common.add_argument("--output", "-o", default="-", help="file path, or - for stdout")

    p = _Parser(prog="thermoflat", description="Quantum thermal densities versus classical ones.")
    p.add_argument("--version", action="version", version=f"thermoflat {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("box-density", parents=[common], help="box thermal density via the theta form")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--grid", type=int, default=201)
    s.set_defaults(func=cmd_box_density)

    s = sub.add_parser("box-flatness", parents=[common], help="flatness-optimal box weights against Boltzmann")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--tau-per-n", type=float, default=1.0, help="Boltzmann reference at tau = this times N")
    s.set_defaults(func=cmd_box_flatness)

    s = sub.add_parser("box-kl-scan", parents=[common], help="KL divergence at tau = N over a list of N")
    s.add_argument("--n-list", default="5,10,20,40,80")
    s.add_argument("--tau-per-n", type=float, default=1.0, help="Boltzmann reference at tau = this times N")
    s.set_defaults(func=cmd_box_kl_scan)

    s = sub.add_parser("osc-match", parents=[common], help="oscillator weights reproducing the classical Gaussian")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--n-trunc", type=int, default=None)
    s.set_defaults(func=cmd_osc_match)

    s = sub.add_parser("linpot-ratio", parents=[common], help="linear-potential ratio r(xi) and its spread")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--range", default="0,12")
    s.add_argument("--grid", type=int, default=61)
    s.set_defaults(func=cmd_linpot_ratio)

    s = sub.add_parser("linpot-emergence", parents=[common], help="Airy-zero diagnostics behind the Boltzmann form")
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--n-max", type=int, default=200)
    s.add_argument("--plateau-start", type=float, default=None, help="default 3 tau")
    s.set_defaults(func=cmd_linpot_emergence)

    s = sub.add_parser("ytransform", parents=[common], help="sigma(y) and its flatness score")
    s.add_argument("--system", required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--n-trunc", type=int, default=None)
    s.add_argument("--grid", type=int, default=1001)
    s.add_argument("--epsilon", type=float, default=1e-4)
    s.add_argument("--optimize", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_ytransform)

    s = sub.add_parser("semiclassical", parents=[common], help="second-order semiclassical density against the exact one")
    s.add_argument("--system", required=True)
    s.add_argument("--tau", type=float, required=True)
    s.add_argument("--grid", type=int, default=101)
    s.set_defaults(func=cmd_semiclassical)
    return p


def _config(args) -> RunConfig:
    requested = os.environ.get(PRECISION_ENV) or args.precision
    precision = arith(requested).mode.value
    params = {
        k: v
        for k, v in sorted(vars(args).items())
        if k not in ("func", "command", "precision", "format", "output")
    }
    if args.command not in EXTENDED_COMMANDS and precision == Mode.EXTENDED.value:
        params["precision_requested"] = precision
        precision = Mode.NATIVE.value
    return RunConfig(args.command, precision, args.format, args.output, params)


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        config = _config(args)
        text = render(config, args.func(args, config))
    except (UsageError, ConfigurationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    if config.output == "-":
        sys.stdout.write(text)
    else:
        with open(config.output, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
