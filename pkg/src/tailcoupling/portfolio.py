"""Credit portfolios: loading, risk reports and figure datasets."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path

import numpy as np

from .aggregation import (
    WeightedSum,
    aggregate_distribution,
    conditional_var,
    var_aggregate,
    var_ratio_curve,
)
from .calibration import delta_from_gamma, feasibility_bound, min_feasible_gamma
from .coupling import GammaCoupling
from .errors import DomainError
from .marginals import Bernoulli, Empirical, Exponential
from .montecarlo import McConfig, aggregate_sample
from .riskmeasures import es

CSV_HEADER = ["id", "exposure", "pd"]


@dataclass(frozen=True)
class Borrower:
    id: str
    exposure: float
    pd: float


@dataclass(frozen=True)
class PortfolioSpec:
    borrowers: tuple[Borrower, ...]

    def __post_init__(self):
        b = tuple(self.borrowers)
        if not b:
            raise DomainError("a portfolio needs at least one borrower")
        for row, item in enumerate(b, start=1):
            _validate(row, item.exposure, item.pd)
        object.__setattr__(self, "borrowers", b)

    @classmethod
    def homogeneous(cls, n: int, exposure: float = 1.0, pd: float = 0.01) -> "PortfolioSpec":
        return cls(tuple(Borrower(str(i + 1), exposure, pd) for i in range(n)))

    @property
    def n(self) -> int:
        return len(self.borrowers)

    @property
    def exposures(self) -> np.ndarray:
        return np.array([b.exposure for b in self.borrowers])

    @property
    def pds(self) -> np.ndarray:
        return np.array([b.pd for b in self.borrowers])


def _validate(row: int, exposure: float, pd: float) -> None:
    if not math.isfinite(exposure) or exposure < 0.0:
        raise DomainError(f"row {row}: exposure must be a finite non-negative number, got {exposure}")
    if not 0.0 < pd < 1.0:
        raise DomainError(f"row {row}: pd must lie in (0, 1), got {pd}")


def _parse_row(row: int, ident, exposure, pd) -> Borrower:
    try:
        exposure, pd = float(exposure), float(pd)
    except (TypeError, ValueError):
        raise DomainError(f"row {row}: exposure and pd must be numbers, got {exposure!r}, {pd!r}") from None
    _validate(row, exposure, pd)
    return Borrower(str(ident), exposure, pd)


def load_portfolio(path, format: str | None = None) -> PortfolioSpec:
    """Read a portfolio from CSV (header ``id,exposure,pd``) or a JSON array of objects.

    The format defaults to the file suffix. Rows are numbered from 1,
    not counting the CSV header.
    """
    path = Path(path)
    fmt = (format or path.suffix.lstrip(".") or "csv").lower()
    if fmt not in ("csv", "json"):
        raise DomainError(f"unsupported portfolio format {fmt!r}")
    text = path.read_text()
    borrowers = []
    if fmt == "csv":
        rows = list(csv.reader(text.splitlines()))
        if not rows or rows[0] != CSV_HEADER:
            raise DomainError(f"CSV header must be exactly {','.join(CSV_HEADER)}")
        for i, fields in enumerate(rows[1:], start=1):
            if not fields:
                continue
            if len(fields) != 3:
                raise DomainError(f"row {i}: expected 3 fields, got {len(fields)}")
            borrowers.append(_parse_row(i, *fields))
    else:
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise DomainError(f"invalid JSON: {exc}") from None
        if not isinstance(data, list):
            raise DomainError("JSON portfolio must be an array of borrower objects")
        for i, obj in enumerate(data, start=1):
            if not isinstance(obj, dict) or not all(k in obj for k in CSV_HEADER):
                raise DomainError(f"row {i}: expected an object with keys {', '.join(CSV_HEADER)}")
            borrowers.append(_parse_row(i, obj["id"], obj["exposure"], obj["pd"]))
    return PortfolioSpec(tuple(borrowers))


@dataclass(frozen=True)
class RiskReport:
    gamma_used: float
    alpha: float
    worst_case_var: float
    conditional_var: float
    ratio: float
    feasibility: bool
    es_worst_case: float

    def to_dict(self) -> dict:
        # json has no infinity; an unbounded ratio is reported as null
        return {k: (None if isinstance(v, float) and not math.isfinite(v) else v) for k, v in asdict(self).items()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def run_report(
    portfolio: PortfolioSpec,
    delta: float,
    alpha: float,
    mc_budget: int = 10**6,
    seed: int = 0,
    *,
    workers: int = 1,
) -> RiskReport:
    """Worst-case and conditional VaR of the portfolio loss under a
    pairwise-max Pearson budget ``delta``.

    If ``gamma = alpha`` keeps every pairwise correlation within budget it is
    used directly; otherwise the smallest admissible ``gamma`` is used and the
    report is flagged infeasible at ``alpha``.
    """
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise DomainError(f"alpha must lie in (0, 1), got {alpha}")
    pds = portfolio.pds
    feasible = feasibility_bound(pds, alpha, delta)
    gamma = alpha if feasible else min_feasible_gamma(pds, delta)
    marginals = [Bernoulli(p) for p in pds]
    coupling = GammaCoupling(gamma, marginals)
    f = WeightedSum(portfolio.exposures)

    worst = var_aggregate(f, coupling, alpha, mc_budget, seed, workers=workers)
    cond = conditional_var(f, coupling, alpha, mc_budget, seed, workers=workers)
    if cond == 0.0:
        ratio = 0.0 if worst == 0.0 else math.inf
    else:
        ratio = worst / cond

    if len(set(pds)) == 1 and alpha >= gamma:
        # positive homogeneity on the comonotone tail
        tail_es = es(marginals[0], alpha) * float(sum(f.weights))
    else:
        law = aggregate_distribution(f, coupling)
        if law is None:
            if mc_budget < 1000:
                raise DomainError(f"mc_budget must be at least 1000, got {mc_budget}")
            law = Empirical(aggregate_sample(coupling, f, McConfig(mc_budget, seed, workers)))
        tail_es = es(law, alpha)
    return RiskReport(float(gamma), alpha, float(worst), float(cond), float(ratio), feasible, float(tail_es))


# -- figure datasets ---------------------------------------------------------

FIGURES = ("fig1", "fig2", "fig3", "fig4")

_DEFAULTS = {
    "fig1": {"gamma": 0.999, "p_min": 0.002, "p_max": 0.1, "p_step": 0.0005},
    "fig2": {"rate": 1.0, "gamma_step": 0.001},
    "fig3": {"p": 0.01, "gamma": 0.999, "alpha": 0.999, "n_min": 100, "n_max": 10**6, "points": 50},
    "fig4": {"n": 1000, "p": 0.01, "gamma": 0.999, "alpha_min": 0.99, "alpha_max": 0.9995, "alpha_step": 0.0005},
}


def _grid(lo: float, hi: float, step: float) -> np.ndarray:
    k = np.arange(round(lo / step), round(hi / step) + 1)
    return np.round(k * step, 12)


def _fig1(p):
    g = p["gamma"]
    return ["x", "y"], [(x, delta_from_gamma("pearson", g, Bernoulli(x))) for x in _grid(p["p_min"], p["p_max"], p["p_step"])]


def _fig2(p):
    dist = Exponential(p["rate"])
    xs = _grid(p["gamma_step"], 1.0 - p["gamma_step"], p["gamma_step"])
    return ["x", "y"], [(x, delta_from_gamma("pearson", x, dist)) for x in xs]


def _fig3(p):
    lo, hi = math.log10(p["n_min"]), math.log10(p["n_max"])
    ns = np.round(np.logspace(lo, hi, int(p["points"]))).astype(int)
    decades = 10 ** np.arange(math.ceil(lo), math.floor(hi) + 1)
    ns = np.unique(np.concatenate([ns, decades]))
    return ["x", "y"], var_ratio_curve(p["p"], p["gamma"], p["alpha"], ns)


def _fig4(p):
    n, pd, g = int(p["n"]), p["p"], p["gamma"]
    coupling = GammaCoupling(g, [Bernoulli(pd)] * n)
    f = WeightedSum.ones(n)
    rows = []
    for a in _grid(p["alpha_min"], p["alpha_max"], p["alpha_step"]):
        rows.append((a, var_aggregate(f, coupling, a), conditional_var(f, coupling, a)))
    return ["x", "worst_case_var", "conditional_var"], rows


def figure_rows(which: str, params: dict | None = None):
    """Header and rows of a figure dataset, with ``params`` overriding defaults."""
    which = str(which)
    if which in ("1", "2", "3", "4"):
        which = "fig" + which
    if which not in FIGURES:
        raise DomainError(f"unknown figure {which!r}; choose one of {', '.join(FIGURES)}")
    merged = dict(_DEFAULTS[which])
    for key, value in (params or {}).items():
        if key not in merged:
            raise DomainError(f"unknown parameter {key!r} for {which}; known: {', '.join(merged)}")
        try:
            merged[key] = float(value)
        except (TypeError, ValueError):
            raise DomainError(f"parameter {key} must be numeric, got {value!r}") from None
    return {"fig1": _fig1, "fig2": _fig2, "fig3": _fig3, "fig4": _fig4}[which](merged)


def emit_figure_data(which: str, params: dict | None, out_path) -> Path:
    """Write a figure dataset as CSV and return the path."""
    header, rows = figure_rows(which, params)
    out_path = Path(out_path)
    with open(out_path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(v) for v in row])
    return out_path


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    if v.is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(v)


def portfolio_loss_sample(portfolio: PortfolioSpec, gamma: float, cfg: McConfig) -> np.ndarray:
    """Simulated portfolio losses under the coupling at ``gamma``."""
    coupling = GammaCoupling(gamma, [Bernoulli(p) for p in portfolio.pds])
    return aggregate_sample(coupling, WeightedSum(portfolio.exposures), cfg)


__all__ = [
    "Borrower",
    "PortfolioSpec",
    "RiskReport",
    "load_portfolio",
    "run_report",
    "emit_figure_data",
    "figure_rows",
    "portfolio_loss_sample",
]
