"""Command-line entry point.

Exit status is 0 on success, 2 for invalid input and 3 when a dependence
budget cannot be met. Results go to stdout as JSON.
"""

from __future__ import annotations

import argparse
import json
import math
import sys

from .calibration import gamma_from_delta
from .errors import DomainError, InfeasibleError
from .marginals import Bernoulli, Dirac, Empirical, Exponential, MarginalDist, Uniform01
from .portfolio import emit_figure_data, load_portfolio, run_report
from .riskmeasures import var

EXIT_OK, EXIT_DOMAIN, EXIT_INFEASIBLE = 0, 2, 3


def _kv(text: str) -> dict[str, str]:
    out = {}
    for part in filter(None, text.split(",")):
        key, sep, value = part.partition("=")
        if not sep:
            raise DomainError(f"expected key=value, got {part!r}")
        out[key.strip()] = value.strip()
    return out


def _number(params: dict, key: str, kind: str) -> float:
    if key not in params:
        raise DomainError(f"{kind} needs parameter {key}=...")
    try:
        return float(params[key])
    except ValueError:
        raise DomainError(f"{kind}: {key} must be numeric, got {params[key]!r}") from None


def parse_dist(spec: str) -> MarginalDist:
    """``bernoulli:p=0.01``, ``exp:rate=2``, ``uniform01``, ``dirac:x=3`` or ``empirical:file=path``.

    The empirical file holds one number per line (commas also separate).
    """
    kind, _, rest = spec.strip().partition(":")
    kind = kind.lower()
    params = _kv(rest)
    if kind == "bernoulli":
        return Bernoulli(_number(params, "p", kind))
    if kind in ("exp", "exponential"):
        return Exponential(_number(params, "rate", kind))
    if kind == "uniform01":
        return Uniform01()
    if kind == "dirac":
        return Dirac(_number(params, "x", kind))
    if kind == "empirical":
        if "file" not in params:
            raise DomainError("empirical needs parameter file=...")
        with open(params["file"]) as fh:
            tokens = fh.read().replace(",", " ").split()
        try:
            return Empirical([float(t) for t in tokens])
        except ValueError as exc:
            raise DomainError(f"empirical file: {exc}") from None
    raise DomainError(f"unknown distribution kind {kind!r}")


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2))


def _cmd_report(args) -> int:
    portfolio = load_portfolio(args.portfolio, args.format)
    report = run_report(portfolio, args.delta, args.alpha, args.mc_budget, args.seed, workers=args.workers)
    print(report.to_json())
    return EXIT_OK


def _cmd_calibrate(args) -> int:
    dist = parse_dist(args.dist) if args.dist else None
    res = gamma_from_delta(args.measure, args.delta, dist, method=args.method)
    _emit(
        {
            "measure": args.measure,
            "delta": args.delta,
            "gamma": res.gamma,
            "delta_achieved": res.delta_achieved,
            "method": res.method,
            "iterations": res.iterations,
        }
    )
    return EXIT_OK


def _cmd_figure(args) -> int:
    params = {}
    for item in args.param:
        params.update(_kv(item))
    path = emit_figure_data(args.which, params, args.out)
    print(str(path))
    return EXIT_OK


def _cmd_var(args) -> int:
    value = var(parse_dist(args.dist), args.alpha)
    _emit({"dist": args.dist, "alpha": args.alpha, "var": value if math.isfinite(value) else None})
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="tailcoupling",
        description="Tail risk under upper-comonotonic couplings with a dependence budget.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    rep = sub.add_parser("report", help="worst-case vs conditional VaR of a credit portfolio")
    rep.add_argument("--portfolio", required=True, help="CSV (id,exposure,pd) or JSON file")
    rep.add_argument("--format", choices=("csv", "json"), default=None, help="override the file suffix")
    rep.add_argument("--delta", type=float, required=True, help="pairwise Pearson budget in (0, 1)")
    rep.add_argument("--alpha", type=float, required=True, help="VaR level in (0, 1)")
    rep.add_argument("--mc-budget", type=int, default=10**6, help="samples for Monte Carlo fallbacks")
    rep.add_argument("--seed", type=int, default=0)
    rep.add_argument("--workers", type=int, default=1)
    rep.set_defaults(func=_cmd_report)

    cal = sub.add_parser("calibrate", help="smallest gamma meeting a dependence budget")
    cal.add_argument("--measure", required=True, choices=("pearson", "spearman", "kendall"))
    cal.add_argument("--delta", type=float, required=True)
    cal.add_argument("--dist", default=None, help="marginal, required for pearson")
    cal.add_argument("--method", choices=("closed_form", "bisection"), default=None)
    cal.set_defaults(func=_cmd_calibrate)

    fig = sub.add_parser("figure", help="write a figure dataset as CSV")
    fig.add_argument("--which", required=True, choices=("1", "2", "3", "4", "fig1", "fig2", "fig3", "fig4"))
    fig.add_argument("--out", required=True)
    fig.add_argument("--param", action="append", default=[], metavar="KEY=VALUE", help="override a grid or model parameter")
    fig.set_defaults(func=_cmd_figure)

    v = sub.add_parser("var", help="value at risk of a single distribution")
    v.add_argument("--dist", required=True)
    v.add_argument("--alpha", type=float, required=True)
    v.set_defaults(func=_cmd_var)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except DomainError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
