"""Cost sweeps and welfare geometry.

Runs the solver across a ladder of information-cost scales, classifies how
each welfare account moves with the cost, checks the boundary-prior
always-segments property, and provides the surplus-triangle bounds that
every sweep locus must respect. Output is tabular (CSV) with an optional
self-contained SVG chart.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .binary import tangency_posteriors
from .market import (
    Market,
    MarketInstance,
    ValidationError,
    Valuations,
    WelfareReport,
    all_revenues,
    welfare,
)
from .solver import OptimalityReport, SolveOptions, SolverError, solve, verify_optimality

CSV_HEADER = "k,cs,ps_gross,info_cost,ps_net,ts_gross,ts_net,n_segments,prices"

# assigned prices from the iterative path can be off revenue-maximal by the
# solver's stationarity residual; welfare rows allow that much slack
SWEEP_PRICE_TOL = 1e-8


@dataclass(frozen=True)
class KGridSpec:
    """Cost-scale ladder: ``n`` points from ``lo`` to ``hi``, log-spaced by default."""

    lo: float
    hi: float
    n: int
    log: bool = True

    def __post_init__(self):
        if not (0.0 < self.lo < self.hi) or not math.isfinite(self.hi):
            raise ValidationError("k_grid", f"need 0 < lo < hi finite, got [{self.lo}, {self.hi}]")
        if self.n < 2:
            raise ValidationError("k_grid", f"need at least 2 points, got {self.n}")

    def as_array(self) -> np.ndarray:
        if self.log:
            return np.geomspace(self.lo, self.hi, self.n)
        return np.linspace(self.lo, self.hi, self.n)


def default_k_grid(vals: Valuations) -> KGridSpec:
    """200 log-spaced cost scales spanning both limits of the lowest valuation."""
    return KGridSpec(1e-3 * vals[0], 1e2 * vals[0], 200)


@dataclass(frozen=True)
class SweepRow:
    """One sweep entry: the cost scale, welfare accounts, and solution shape.

    ``error`` is the stringified solver failure when the row could not be
    solved; numeric fields are then absent.
    """

    k: float
    report: WelfareReport | None
    n_segments: int
    prices: tuple[float, ...]
    verify: OptimalityReport | None
    error: str | None = None


@dataclass(frozen=True)
class SweepTable:
    """Sweep rows in strictly increasing k order plus the grid that produced them."""

    rows: tuple[SweepRow, ...]
    grid: KGridSpec | None

    def __post_init__(self):
        ks = [r.k for r in self.rows]
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValidationError("sweep_order", "rows must be strictly increasing in k")

    def series(self, field: str) -> list[tuple[float, float]]:
        """(k, value) pairs of one welfare account, skipping failed rows."""
        out = []
        for r in self.rows:
            if r.report is not None:
                out.append((r.k, getattr(r.report, field)))
        return out


def _sweep_row(args: tuple) -> SweepRow:
    vals_t, mu_t, k, opt = args
    vals = Valuations(vals_t)
    prior = Market(mu_t)
    try:
        seg = solve(MarketInstance(vals, prior, k), opt)
    except SolverError as e:
        return SweepRow(k=k, report=None, n_segments=0, prices=(), verify=None, error=str(e))
    rep = welfare(seg, vals, k, price_tol=SWEEP_PRICE_TOL)
    ver = verify_optimality(seg, vals, k)
    prices = tuple(vals[i] for i in seg.price_indices())
    return SweepRow(k=k, report=rep, n_segments=len(seg.segments), prices=prices, verify=ver)


def sweep_k(
    vals: Valuations,
    mu_star: Market,
    k_grid: KGridSpec | Sequence[float] | None = None,
    options: SolveOptions | None = None,
    max_workers: int = 1,
) -> SweepTable:
    """Solve one market at every cost scale on the grid.

    Rows that fail to converge are recorded with their error and the sweep
    continues. ``max_workers`` > 1 fans rows out to worker processes; row
    order always follows the grid either way.
    """
    grid_spec = None
    if k_grid is None:
        grid_spec = default_k_grid(vals)
        ks = grid_spec.as_array()
    elif isinstance(k_grid, KGridSpec):
        grid_spec = k_grid
        ks = k_grid.as_array()
    else:
        ks = np.asarray(list(k_grid), dtype=float)
        if len(ks) == 0:
            raise ValidationError("k_grid", "grid must be non-empty")
        if np.any(ks <= 0.0) or np.any(np.diff(ks) <= 0.0):
            raise ValidationError("k_grid", "grid must be positive and strictly increasing")
    work = [(vals.values, mu_star.weights, float(k), options) for k in ks]
    if max_workers > 1:
        with ProcessPoolExecutor(max_workers=max_workers) as pool:
            rows = list(pool.map(_sweep_row, work))
    else:
        rows = [_sweep_row(w) for w in work]
    return SweepTable(rows=tuple(rows), grid=grid_spec)


def classify_monotonicity(values: Iterable[float], tol: float | None = None) -> str:
    """Label a series nondecreasing, nonincreasing, or nonmonotone.

    ``tol`` absorbs float noise in the successive differences; it defaults
    to 1e-9 of the series magnitude. A constant series counts as
    nondecreasing (checked first).
    """
    vals = [float(v) for v in values]
    if len(vals) < 3:
        raise ValidationError("series_size", f"need at least 3 points, got {len(vals)}")
    if tol is None:
        scale = max(abs(v) for v in vals)
        tol = 1e-9 * scale
    diffs = [b - a for a, b in zip(vals, vals[1:])]
    if all(d >= -tol for d in diffs):
        return "nondecreasing"
    if all(d <= tol for d in diffs):
        return "nonincreasing"
    return "nonmonotone"


@dataclass(frozen=True)
class BoundaryReport:
    """Witness that the boundary prior segments at every tested cost scale.

    ``min_straddle_slack`` is the smallest distance from the boundary share
    to either tangency posterior; ``min_gain`` the smallest net value gain
    of segmenting over standing pat, with ``argmin_k`` the scale attaining it.
    """

    always_segments: bool
    min_straddle_slack: float
    min_gain: float
    argmin_k: float


def boundary_always_segments(vals: Valuations, k_grid: Sequence[float]) -> BoundaryReport:
    """Check that the price-region boundary prior segments for every k.

    The boundary market (high-type share ω₁/ω₂) is revenue-indifferent
    between both prices, and the tangency posteriors straddle it at every
    finite cost scale, so the seller always strictly gains by splitting.
    The gain is computed with the k factor kept outside the entropy
    combination, which preserves its sign even when it decays to the
    1e-12 scale at large k.
    """
    if len(vals) != 2:
        raise ValidationError("binary_only", "boundary property is for two-type markets")
    w1, w2 = vals[0], vals[1]
    r = w1 / w2
    prior = Market([1.0 - r, r])

    def H(x: float) -> float:
        if x <= 0.0 or x >= 1.0:
            return 0.0
        return -(x * math.log(x) + (1.0 - x) * math.log1p(-x))

    rev_prior = float(np.max(all_revenues(prior, vals)))
    h_prior = H(r)
    always = True
    min_slack = math.inf
    min_gain = math.inf
    argmin_k = math.nan
    for k in k_grid:
        k = float(k)
        lo, hi = tangency_posteriors(vals, k)
        slack = min(r - lo, hi - r)
        min_slack = min(min_slack, slack)
        if not (lo < r < hi):
            always = False
            continue
        tau = (hi - r) / (hi - lo)
        rev_split = tau * w1 + (1.0 - tau) * w2 * hi
        gain = (rev_split - rev_prior) + k * (tau * H(lo) + (1.0 - tau) * H(hi) - h_prior)
        if gain < min_gain:
            min_gain = gain
            argmin_k = k
        if gain <= 0.0:
            always = False
    return BoundaryReport(
        always_segments=always,
        min_straddle_slack=min_slack,
        min_gain=min_gain,
        argmin_k=argmin_k,
    )


@dataclass(frozen=True)
class SurplusTriangle:
    """Feasible (CS, PS) region: CS ≥ 0, PS ≥ uniform profit, CS + PS ≤ full surplus."""

    uniform_profit: float
    full_surplus: float
    max_cs: float

    @property
    def vertices(self) -> tuple[tuple[float, float], tuple[float, float], tuple[float, float]]:
        return (
            (0.0, self.uniform_profit),
            (self.max_cs, self.uniform_profit),
            (0.0, self.full_surplus),
        )

    def contains(self, cs: float, ps: float, cs_tol: float = 1e-12, ps_tol: float = 1e-9) -> bool:
        return (
            cs >= -cs_tol
            and ps >= self.uniform_profit - ps_tol
            and cs + ps <= self.full_surplus + ps_tol
        )


def surplus_triangle(mu_star: Market, vals: Valuations) -> SurplusTriangle:
    """Bounds on (CS, gross PS) under any segmentation of the prior."""
    uniform = float(np.max(all_revenues(mu_star, vals)))
    full = math.fsum(w * v for w, v in zip(mu_star.weights, vals.values))
    return SurplusTriangle(uniform_profit=uniform, full_surplus=full, max_cs=full - uniform)


def to_csv(table: SweepTable) -> str:
    """Render a sweep as CSV text. Failed rows carry nan fields and no prices."""
    lines = [CSV_HEADER]
    for row in table.rows:
        if row.report is None:
            fields = [repr(row.k)] + ["nan"] * 6 + ["0", ""]
        else:
            rep = row.report
            fields = [
                repr(row.k),
                repr(rep.cs),
                repr(rep.ps_gross),
                repr(rep.info_cost),
                repr(rep.ps_net),
                repr(rep.ts_gross),
                repr(rep.ts_net),
                str(row.n_segments),
                ";".join(repr(p) for p in row.prices),
            ]
        lines.append(",".join(fields))
    return "\n".join(lines) + "\n"


_SVG_SERIES = ("cs", "ps_gross", "ps_net", "ts_gross")
_SVG_COLORS = {"cs": "#1f77b4", "ps_gross": "#d62728", "ps_net": "#ff7f0e", "ts_gross": "#2ca02c"}


def to_svg(table: SweepTable, width: int = 800, height: int = 500) -> str:
    """Self-contained SVG line chart of the welfare accounts against log10(k)."""
    pts = {name: table.series(name) for name in _SVG_SERIES}
    all_k = [k for series in pts.values() for k, _ in series]
    all_v = [v for series in pts.values() for _, v in series]
    if not all_k:
        raise ValidationError("sweep_empty", "no successful rows to chart")
    lx = [math.log10(k) for k in all_k]
    x0, x1 = min(lx), max(lx)
    y0, y1 = min(all_v), max(all_v)
    if x1 - x0 <= 0.0:
        x1 = x0 + 1.0
    if y1 - y0 <= 0.0:
        y1 = y0 + 1.0
    ml, mr, mt, mb = 60, 20, 20, 45
    pw, ph = width - ml - mr, height - mt - mb

    def px(k: float) -> float:
        return ml + pw * (math.log10(k) - x0) / (x1 - x0)

    def py(v: float) -> float:
        return mt + ph * (1.0 - (v - y0) / (y1 - y0))

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" '
        f'viewBox="0 0 {width} {height}">',
        f'<rect x="0" y="0" width="{width}" height="{height}" fill="white"/>',
        f'<rect x="{ml}" y="{mt}" width="{pw}" height="{ph}" fill="none" stroke="#333"/>',
    ]
    for name in _SVG_SERIES:
        series = pts[name]
        if not series:
            continue
        coords = " ".join(f"{px(k):.2f},{py(v):.2f}" for k, v in series)
        parts.append(
            f'<polyline points="{coords}" fill="none" stroke="{_SVG_COLORS[name]}" stroke-width="1.5"/>'
        )
    legend_y = mt + 14
    for name in _SVG_SERIES:
        parts.append(
            f'<text x="{ml + 8}" y="{legend_y}" font-family="monospace" font-size="12" '
            f'fill="{_SVG_COLORS[name]}">{name}</text>'
        )
        legend_y += 14
    parts.append(
        f'<text x="{ml + pw / 2:.0f}" y="{height - 12}" font-family="monospace" font-size="12" '
        f'fill="#333" text-anchor="middle">log10(k)</text>'
    )
    parts.append("</svg>")
    return "\n".join(parts) + "\n"
