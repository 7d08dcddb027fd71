"""Inverse problem: choose segments and a convex information cost so that a
given (consumer surplus, producer surplus) pair is what the seller's optimum
produces.

For a two-type market whose uniform price is the low valuation, every
strictly interior point of the surplus triangle is achievable. The target
pins down a unique segment pair and mixing weight; a one-knot
piecewise-quadratic cost then makes that pair globally optimal. Global
optimality needs the cost's derivative gap across the segments to equal the
high valuation together with a chord condition: both are built in exactly,
and verify_rationalization re-checks the outcome by brute force.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .market import (
    Market,
    Segment,
    Segmentation,
    ValidationError,
    Valuations,
    welfare,
)
from .sweeps import SurplusTriangle, surplus_triangle

SLOPE_FLOOR = 1e-6
_CHUNK = 256


@dataclass(frozen=True)
class RationalizationTarget:
    """A (CS, gross PS) point to be made optimal, with its market.

    Valid targets are strictly interior to the surplus triangle, and the
    prior's uniform price must be the low valuation; high-prior markets are
    the mirror case and are rejected rather than silently transformed.
    """

    cs: float
    ps: float
    vals: Valuations
    mu_star: Market

    def __post_init__(self):
        if len(self.vals) != 2 or len(self.mu_star) != 2:
            raise ValidationError("binary_only", "rationalization covers two-type markets")
        w1, w2 = self.vals[0], self.vals[1]
        if w2 * self.mu_star[1] > w1:
            raise ValidationError(
                "price_region", "prior must price at the low valuation (high-type share <= w1/w2)"
            )
        tri = self.triangle
        if not (0.0 < self.cs < tri.max_cs):
            raise ValidationError(
                "rationalizable_region", f"cs must lie strictly in (0, {tri.max_cs}), got {self.cs}"
            )
        if not self.ps > tri.uniform_profit:
            raise ValidationError(
                "rationalizable_region",
                f"ps must strictly exceed the uniform profit {tri.uniform_profit}, got {self.ps}",
            )
        if not self.cs + self.ps < tri.full_surplus:
            raise ValidationError(
                "rationalizable_region",
                f"cs + ps must stay strictly below the full surplus {tri.full_surplus}, got {self.cs + self.ps}",
            )

    @property
    def triangle(self) -> SurplusTriangle:
        return surplus_triangle(self.mu_star, self.vals)


class InducedSegments(NamedTuple):
    """High-type shares of the two segments and the low-price segment's weight."""

    mu1: float
    mu2: float
    tau1: float


def induced_segments(target: RationalizationTarget) -> InducedSegments:
    """Solve the target's welfare equations for the unique segment pair.

    Only the low-price segment generates consumer surplus (its high types
    pay the low price), which fixes that segment's share of high types;
    producer surplus then fixes the weight, and Bayes plausibility fixes
    the rest. Interior targets always land with the low segment weakly
    below the pricing boundary and the high segment strictly above it.
    """
    w1, w2 = target.vals[0], target.vals[1]
    mu = target.mu_star[1]
    t1 = target.cs / (w2 - w1)        # tau1 * mu1, the surplus-earning mass
    t2 = mu - t1                      # tau2 * mu2
    tau1 = (target.ps - w2 * t2) / w1
    if not (0.0 < tau1 < 1.0):
        raise ValidationError("rationalizable_region", f"implied weight {tau1} is not interior")
    mu1 = t1 / tau1
    mu2 = t2 / (1.0 - tau1)
    r = w1 / w2
    if not (mu1 <= r <= mu2):
        raise ValidationError(
            "rationalizable_region",
            f"segments ({mu1}, {mu2}) must straddle the pricing boundary {r}",
        )
    return InducedSegments(mu1=mu1, mu2=mu2, tau1=tau1)


def realized_welfare(seg: InducedSegments, vals: Valuations) -> tuple[float, float]:
    """(CS, gross PS) generated by the induced segments; inverse of induced_segments."""
    w1, w2 = vals[0], vals[1]
    cs = seg.tau1 * seg.mu1 * (w2 - w1)
    ps = seg.tau1 * w1 + (1.0 - seg.tau1) * seg.mu2 * w2
    return cs, ps


@dataclass(frozen=True)
class ConvexCostSpec:
    """Piecewise-quadratic convex function on [0, 1].

    ``quadratics[i]`` holds (a, b, c) with value a*x^2 + b*x + c on the
    interval [knots[i], knots[i+1]]. Construction validates increasing
    knots, strict convexity of every piece, and value/derivative
    continuity at the interior knots.
    """

    knots: tuple[float, ...]
    quadratics: tuple[tuple[float, float, float], ...]

    def __post_init__(self):
        ks = self.knots
        if len(ks) < 2 or len(self.quadratics) != len(ks) - 1:
            raise ValidationError("cost_shape", "need one quadratic per knot interval")
        if any(b <= a for a, b in zip(ks, ks[1:])):
            raise ValidationError("cost_knots", f"knots must be strictly increasing, got {ks}")
        if ks[0] != 0.0 or ks[-1] != 1.0:
            raise ValidationError("cost_knots", "knots must span [0, 1]")
        for i, (a, _, _) in enumerate(self.quadratics):
            if not (a > 0.0 and math.isfinite(a)):
                raise ValidationError(
                    "cost_convexity", f"piece {i} has curvature {a}; strict convexity needs a > 0"
                )
        for i in range(1, len(ks) - 1):
            x = ks[i]
            al, bl, cl = self.quadratics[i - 1]
            ar, br, cr = self.quadratics[i]
            vgap = abs((al * x + bl) * x + cl - ((ar * x + br) * x + cr))
            dgap = abs((2.0 * al * x + bl) - (2.0 * ar * x + br))
            scale = 1.0 + abs(2.0 * ar * x + br)
            if vgap > 1e-9 * scale or dgap > 1e-9 * scale:
                raise ValidationError(
                    "cost_continuity", f"knot {x}: value gap {vgap:.3e}, derivative gap {dgap:.3e}"
                )

    def _piece(self, x: np.ndarray) -> np.ndarray:
        idx = np.searchsorted(np.asarray(self.knots), x, side="right") - 1
        return np.clip(idx, 0, len(self.quadratics) - 1)

    def value(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        coef = np.asarray(self.quadratics)[self._piece(xs)]
        out = (coef[..., 0] * xs + coef[..., 1]) * xs + coef[..., 2]
        return float(out) if np.isscalar(x) else out

    def derivative(self, x) -> np.ndarray | float:
        xs = np.asarray(x, dtype=float)
        coef = np.asarray(self.quadratics)[self._piece(xs)]
        out = 2.0 * coef[..., 0] * xs + coef[..., 1]
        return float(out) if np.isscalar(x) else out


def construct_cost(
    mu1: float, mu2: float, tau1: float, vals: Valuations, mu_star: Market
) -> ConvexCostSpec:
    """Build a strictly convex cost making (mu1, mu2) the optimal segments.

    The derivative is piecewise linear through (mu1, d1) and (mu2, d2) with
    one interior knot. d1 comes from the chord condition under the
    normalization c(mu1) = c(mu2) = 0; d2 = w2 + d1 equalizes the tangent
    slopes across the pricing kink. The knot height makes the derivative's
    integral over [mu1, mu2] vanish exactly (so the normalization holds),
    and the knot position is the midpoint of the interval on which both
    connecting slopes stay positive. Outside [mu1, mu2] the derivative
    extends linearly with slope one.
    """
    w1, w2 = vals[0], vals[1]
    if not (0.0 < mu1 < mu2 < 1.0):
        raise ValidationError("cost_segments", f"need 0 < mu1 < mu2 < 1, got ({mu1}, {mu2})")
    d1 = (w1 - w2 * mu2) / (mu2 - mu1)
    d2 = w2 + d1
    if d1 >= 0.0 or d2 <= 0.0:
        raise ValidationError(
            "cost_convexity", f"tangency derivatives ({d1}, {d2}) must straddle zero"
        )
    gain = (1.0 - tau1) * (w2 * mu2 - w1)
    if gain < 0.0:
        raise ValidationError("cost_gain", f"segmentation gain {gain} is negative")
    beta = -d1
    t_lo = max(0.0, 1.0 - 2.0 * beta / w2)
    t_hi = min(1.0, 2.0 - 2.0 * beta / w2)
    t = 0.5 * (t_lo + t_hi)
    m = mu1 + t * (mu2 - mu1)
    y = w2 * t - d2  # makes the integral of the derivative over [mu1, mu2] zero
    span = mu2 - mu1
    slope_in1 = (y - d1) / (t * span)
    slope_in2 = (d2 - y) / ((1.0 - t) * span)
    if min(slope_in1, slope_in2) < SLOPE_FLOOR:
        raise ValidationError(
            "cost_convexity",
            f"interior slopes ({slope_in1:.3e}, {slope_in2:.3e}) fall below the floor {SLOPE_FLOOR}",
        )

    # derivative values at knots [0, mu1, m, mu2, 1]; linear extension slope 1
    knots = (0.0, mu1, m, mu2, 1.0)
    derivs = (d1 - mu1, d1, y, d2, d2 + (1.0 - mu2))
    # integrate: trapezoid is exact for a piecewise-linear derivative
    values = [0.0] * 5
    values[1] = 0.0  # normalization c(mu1) = 0
    values[0] = values[1] - 0.5 * (derivs[0] + derivs[1]) * (knots[1] - knots[0])
    for i in (2, 3, 4):
        values[i] = values[i - 1] + 0.5 * (derivs[i - 1] + derivs[i]) * (knots[i] - knots[i - 1])
    quads = []
    for i in range(4):
        x0, x1 = knots[i], knots[i + 1]
        g0, g1 = derivs[i], derivs[i + 1]
        s = (g1 - g0) / (x1 - x0)
        a = 0.5 * s
        b = g0 - s * x0
        c = values[i] - (a * x0 + b) * x0
        quads.append((a, b, c))
    return ConvexCostSpec(knots=knots, quadratics=tuple(quads))


def foc_residuals(spec: ConvexCostSpec, seg: InducedSegments, vals: Valuations) -> tuple[float, float]:
    """Residuals of the two tangency conditions under the constructed cost.

    First: the chord condition (w1 - w2*mu2) - c'(mu1)*(mu2 - mu1).
    Second: the tangent-slope condition (c'(mu2) - c'(mu1)) - w2, i.e. the
    derivative gap across the pricing kink must equal the high valuation.
    """
    w1, w2 = vals[0], vals[1]
    d1 = spec.derivative(seg.mu1)
    d2 = spec.derivative(seg.mu2)
    return (w1 - w2 * seg.mu2) - d1 * (seg.mu2 - seg.mu1), (d2 - d1) - w2


@dataclass(frozen=True)
class RationalizationReport:
    """Outcome of brute-force re-optimization under a constructed cost."""

    passed: bool
    best_is_pair: bool
    argmax: tuple[float, float, float] | None
    intended: InducedSegments
    posterior_steps: float
    realized_cs: float
    realized_ps: float
    best_value: float
    no_seg_value: float
    grid_step: float
    messages: tuple[str, ...]


def verify_rationalization(
    spec: ConvexCostSpec,
    target: RationalizationTarget,
    grid_n: int = 4000,
    cs_ps_tol: float = 1e-3,
) -> RationalizationReport:
    """Re-optimize from scratch under the constructed cost and compare.

    Maximizes the seller's objective (revenue minus expected cost, plus the
    constant cost at the prior) over every grid pair straddling the prior
    and the no-segmentation candidate. Passes when the argmax lands within
    two grid steps of the intended segments and reproduces the target
    welfare within ``cs_ps_tol``.
    """
    if grid_n < 2000:
        raise ValidationError("grid_size", f"verification needs grid_n >= 2000, got {grid_n}")
    w1, w2 = target.vals[0], target.vals[1]
    mu = target.mu_star[1]
    intended = induced_segments(target)
    h = 1.0 / grid_n

    x = np.linspace(0.0, 1.0, grid_n + 1)
    revenue_best = np.maximum(w1, w2 * x)
    phi = revenue_best - spec.value(x)
    c_prior = float(spec.value(mu))
    no_seg_value = max(w1, w2 * mu)  # phi(mu) + c(mu)

    lo_mask = x <= mu
    hi_mask = x >= mu
    xl, pl = x[lo_mask], phi[lo_mask]
    xh, ph = x[hi_mask], phi[hi_mask]
    best_v = -math.inf
    best_pair = (0.0, 0.0)
    for start in range(0, len(xl), _CHUNK):
        xb = xl[start : start + _CHUNK, None]
        pb = pl[start : start + _CHUNK, None]
        with np.errstate(divide="ignore", invalid="ignore"):
            tau = np.where(xh[None, :] > xb, (xh[None, :] - mu) / (xh[None, :] - xb), np.nan)
        V = tau * pb + (1.0 - tau) * ph[None, :]
        V = np.where(np.isnan(V), -np.inf, V)
        i, j = np.unravel_index(int(np.argmax(V)), V.shape)
        if V[i, j] > best_v:
            best_v = float(V[i, j])
            best_pair = (float(xb[i, 0]), float(xh[j]))
    best_v += c_prior

    messages: list[str] = []
    best_is_pair = best_v > no_seg_value
    if not best_is_pair:
        messages.append(f"no-segmentation value {no_seg_value!r} beats every pair ({best_v!r})")
        return RationalizationReport(
            passed=False,
            best_is_pair=False,
            argmax=None,
            intended=intended,
            posterior_steps=math.inf,
            realized_cs=0.0,
            realized_ps=no_seg_value,
            best_value=no_seg_value,
            no_seg_value=no_seg_value,
            grid_step=h,
            messages=tuple(messages),
        )

    x1, x2 = best_pair
    tau1 = (x2 - mu) / (x2 - x1)
    steps = max(abs(x1 - intended.mu1), abs(x2 - intended.mu2)) / h
    m1 = Market([1.0 - x1, x1])
    m2 = Market([1.0 - x2, x2])
    seg = Segmentation(
        target.mu_star,
        [
            Segment(m1, tau1, 0 if w2 * x1 <= w1 else 1),
            Segment(m2, 1.0 - tau1, 1 if w2 * x2 >= w1 else 0),
        ],
    )
    rep = welfare(seg, target.vals, 0.0)
    if steps > 2.0:
        messages.append(
            f"argmax ({x1}, {x2}) is {steps:.1f} grid steps from intended "
            f"({intended.mu1}, {intended.mu2})"
        )
    if abs(rep.cs - target.cs) > cs_ps_tol or abs(rep.ps_gross - target.ps) > cs_ps_tol:
        messages.append(
            f"realized (CS, PS) = ({rep.cs}, {rep.ps_gross}) misses target "
            f"({target.cs}, {target.ps}) beyond {cs_ps_tol}"
        )
    return RationalizationReport(
        passed=not messages,
        best_is_pair=True,
        argmax=(x1, x2, tau1),
        intended=intended,
        posterior_steps=steps,
        realized_cs=rep.cs,
        realized_ps=rep.ps_gross,
        best_value=best_v,
        no_seg_value=no_seg_value,
        grid_step=h,
        messages=tuple(messages),
    )
