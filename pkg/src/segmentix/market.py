"""Core market types and welfare accounting.

A market is a distribution over a finite ladder of buyer valuations. The
seller posts one price per segment; a buyer purchases whenever her valuation
weakly exceeds the posted price. Everything downstream (solvers, sweeps,
rationalization) is built on the primitives defined here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

# Tolerances used by the constructors. These are part of the contract:
# inputs inside the tolerance are normalized, inputs outside are rejected.
WEIGHT_SUM_TOL = 1e-12
SEGMENT_WEIGHT_SUM_TOL = 1e-10
BAYES_TOL = 1e-9
PRICE_OPT_TOL = 1e-10

# exp() overflows just above 709; payoff/cost ratios past this point are
# indistinguishable from the zero-cost limit in double precision.
EXP_OVERFLOW = 700.0


class ValidationError(ValueError):
    """Raised when a constructor or checker rejects its input.

    ``invariant`` carries a stable machine-readable name for the violated
    condition (e.g. ``"bayes_plausibility"``); the CLI surfaces it verbatim.
    """

    def __init__(self, invariant: str, message: str):
        super().__init__(f"{invariant}: {message}")
        self.invariant = invariant
        self.message = message


def _as_float_tuple(values: Sequence[float]) -> tuple[float, ...]:
    return tuple(float(v) for v in values)


@dataclass(frozen=True)
class Valuations:
    """Strictly increasing positive valuation ladder, one entry per buyer type."""

    values: tuple[float, ...]

    def __init__(self, values: Sequence[float]):
        vals = _as_float_tuple(values)
        if len(vals) < 2:
            raise ValidationError("valuations_size", "need at least two types")
        if vals[0] <= 0.0:
            raise ValidationError("valuations_positive", f"lowest valuation must be > 0, got {vals[0]}")
        if any(not math.isfinite(v) for v in vals):
            raise ValidationError("valuations_finite", "valuations must be finite")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise ValidationError("valuations_increasing", f"valuations must be strictly increasing, got {vals}")
        object.__setattr__(self, "values", vals)

    def __len__(self) -> int:
        return len(self.values)

    def __getitem__(self, i: int) -> float:
        return self.values[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.values, dtype=float)


@dataclass(frozen=True)
class Market:
    """Probability vector over buyer types.

    Weights must be nonnegative and sum to one within ``WEIGHT_SUM_TOL``;
    inputs inside the tolerance are renormalized exactly, anything else is
    rejected.
    """

    weights: tuple[float, ...]

    def __init__(self, weights: Sequence[float]):
        w = _as_float_tuple(weights)
        if len(w) < 2:
            raise ValidationError("market_size", "need at least two type weights")
        if any(not math.isfinite(x) for x in w):
            raise ValidationError("market_finite", "weights must be finite")
        if any(x < 0.0 for x in w):
            raise ValidationError("market_nonnegative", f"weights must be >= 0, got {w}")
        total = math.fsum(w)
        if abs(total - 1.0) > WEIGHT_SUM_TOL:
            raise ValidationError("market_weight_sum", f"weights sum to {total!r}, expected 1 within {WEIGHT_SUM_TOL}")
        if total != 1.0:
            w = tuple(x / total for x in w)
        object.__setattr__(self, "weights", w)

    def __len__(self) -> int:
        return len(self.weights)

    def __getitem__(self, i: int) -> float:
        return self.weights[i]

    def as_array(self) -> np.ndarray:
        return np.asarray(self.weights, dtype=float)

    @property
    def support(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.weights) if x > 0.0)


@dataclass(frozen=True)
class Segment:
    """One cell of a segmentation: a market, its mass, and the price charged.

    ``price_index`` indexes into the valuation ladder. Whether that price is
    revenue-maximal on ``market`` can only be checked against a concrete
    ladder; see :func:`check_segment_prices`.
    """

    market: Market
    weight: float
    price_index: int

    def __post_init__(self):
        if not (self.weight > 0.0 and self.weight <= 1.0 + SEGMENT_WEIGHT_SUM_TOL):
            raise ValidationError("segment_weight", f"segment weight must lie in (0, 1], got {self.weight}")
        if self.price_index < 0 or self.price_index >= len(self.market):
            raise ValidationError("segment_price_index", f"price index {self.price_index} out of range")


@dataclass(frozen=True)
class Segmentation:
    """Bayes-plausible split of a prior market into priced segments.

    Invariants enforced at construction: segment weights sum to one within
    ``SEGMENT_WEIGHT_SUM_TOL``, the weighted segment markets average back to
    the prior within ``BAYES_TOL`` per coordinate, and there are at most as
    many segments as buyer types.
    """

    prior: Market
    segments: tuple[Segment, ...]

    def __init__(self, prior: Market, segments: Sequence[Segment]):
        segs = tuple(segments)
        if not segs:
            raise ValidationError("segmentation_empty", "need at least one segment")
        k = len(prior)
        if any(len(s.market) != k for s in segs):
            raise ValidationError("segmentation_shape", "all segment markets must match the prior's length")
        if len(segs) > k:
            raise ValidationError("segmentation_support", f"{len(segs)} segments exceed {k} types")
        total = math.fsum(s.weight for s in segs)
        if abs(total - 1.0) > SEGMENT_WEIGHT_SUM_TOL:
            raise ValidationError("segmentation_weight_sum", f"segment weights sum to {total!r}")
        mixed = np.zeros(k)
        for s in segs:
            mixed += s.weight * s.market.as_array()
        resid = float(np.max(np.abs(mixed - prior.as_array())))
        if resid > BAYES_TOL:
            raise ValidationError("bayes_plausibility", f"weighted segments miss the prior by {resid:.3e}")
        object.__setattr__(self, "prior", prior)
        object.__setattr__(self, "segments", segs)

    @property
    def bayes_residual(self) -> float:
        mixed = np.zeros(len(self.prior))
        for s in self.segments:
            mixed += s.weight * s.market.as_array()
        return float(np.max(np.abs(mixed - self.prior.as_array())))

    def price_indices(self) -> tuple[int, ...]:
        return tuple(s.price_index for s in self.segments)


@dataclass(frozen=True)
class WelfareReport:
    """Surplus split of a priced segmentation.

    ``ps_gross`` is seller revenue before information costs, ``ps_net``
    after. ``ts_gross``/``ts_net`` pair consumer surplus with each.
    """

    cs: float
    ps_gross: float
    info_cost: float
    ps_net: float
    ts_gross: float
    ts_net: float
    segmented: bool


@dataclass(frozen=True)
class MarketInstance:
    """A prior market, its valuation ladder, and the information cost scale."""

    vals: Valuations
    mu_star: Market
    k: float

    def __post_init__(self):
        if len(self.vals) != len(self.mu_star):
            raise ValidationError("instance_shape", "valuations and weights must have equal length")
        if not (math.isfinite(self.k) and self.k >= 0.0):
            raise ValidationError("cost_scale", f"k must be finite and >= 0, got {self.k}")


def seller_payoff(price: float, valuation: float) -> float:
    """Revenue from one buyer: the price if she buys, zero otherwise."""
    return price if valuation >= price else 0.0


def buyer_payoff(price: float, valuation: float) -> float:
    """Surplus for one buyer: valuation minus price if she buys, zero otherwise."""
    return valuation - price if valuation >= price else 0.0


def revenue(market: Market, vals: Valuations, price_index: int) -> float:
    """Expected revenue on ``market`` when charging ``vals[price_index]``.

    Buyers with valuation at or above the price purchase, so revenue is the
    price times the upper tail mass.
    """
    if price_index < 0 or price_index >= len(vals):
        raise ValidationError("price_index", f"price index {price_index} out of range")
    p = vals[price_index]
    tail = math.fsum(w for w, v in zip(market.weights, vals.values) if v >= p)
    return p * tail


def all_revenues(market: Market, vals: Valuations) -> np.ndarray:
    """Revenue at every candidate price (vectorized tail sums)."""
    w = market.as_array()
    v = vals.as_array()
    # tail mass at price v[j] = sum of weights with valuation >= v[j]
    tails = np.cumsum(w[::-1])[::-1]
    return v * tails


def optimal_price(market: Market, vals: Valuations) -> int:
    """Index of the revenue-maximizing price, lowest index on ties."""
    rev = all_revenues(market, vals)
    return int(np.argmax(rev))  # argmax returns the first maximizer


def price_region(market: Market, vals: Valuations, tol: float = PRICE_OPT_TOL) -> tuple[int, ...]:
    """All price indices whose revenue is within ``tol`` of the maximum."""
    rev = all_revenues(market, vals)
    best = float(np.max(rev))
    return tuple(int(i) for i in np.nonzero(rev >= best - tol)[0])


def check_segment_prices(seg: Segmentation, vals: Valuations, tol: float = PRICE_OPT_TOL) -> None:
    """Reject any segment whose assigned price is not revenue-maximal within ``tol``."""
    for idx, s in enumerate(seg.segments):
        rev = all_revenues(s.market, vals)
        if rev[s.price_index] < float(np.max(rev)) - tol:
            raise ValidationError(
                "segment_price_optimality",
                f"segment {idx} charges index {s.price_index} but better prices exist (gap {float(np.max(rev)) - rev[s.price_index]:.3e})",
            )


def entropy(market: Market | Sequence[float] | np.ndarray) -> float:
    """Shannon entropy of a weight vector in nats, with 0*log(0) = 0."""
    w = market.as_array() if isinstance(market, Market) else np.asarray(market, dtype=float)
    pos = w[w > 0.0]
    return float(-np.sum(pos * np.log(pos)))


def net_segment_value(market: Market, vals: Valuations, k: float) -> float:
    """Maximal revenue on the market plus its entropy credit ``k * H``.

    This is the quantity whose expectation the seller maximizes over
    Bayes-plausible splits; the entropy credit is what makes information
    about nearly-degenerate segments expensive to produce.
    """
    rev = all_revenues(market, vals)
    return float(np.max(rev)) + k * entropy(market)


def net_objective(seg: Segmentation, vals: Valuations, k: float) -> float:
    """Expected revenue minus information cost at the assigned prices.

    Unlike :func:`welfare` this does not insist the assigned prices are
    revenue-maximal, so it can score arbitrary candidate segmentations.
    """
    total = 0.0
    for s in seg.segments:
        total += s.weight * (revenue(s.market, vals, s.price_index) + k * entropy(s.market))
    return total - k * entropy(seg.prior)


def no_segmentation(mu_star: Market, vals: Valuations) -> Segmentation:
    """The degenerate segmentation: the prior itself at its best uniform price."""
    return Segmentation(mu_star, [Segment(mu_star, 1.0, optimal_price(mu_star, vals))])


def perfect_discrimination(mu_star: Market, vals: Valuations) -> Segmentation:
    """Fully revealing segmentation: one degenerate segment per supported type.

    Each buyer type is isolated and charged exactly its valuation, which is
    the zero-information-cost limit of the seller's problem.
    """
    k = len(mu_star)
    segments = []
    for i, w in enumerate(mu_star.weights):
        if w <= 0.0:
            continue
        point = [0.0] * k
        point[i] = 1.0
        segments.append(Segment(Market(point), w, i))
    return Segmentation(mu_star, segments)


def uniform_report(mu_star: Market, vals: Valuations) -> WelfareReport:
    """Welfare when the seller does not segment and charges the single best price."""
    p_idx = optimal_price(mu_star, vals)
    p = vals[p_idx]
    cs = math.fsum(w * buyer_payoff(p, v) for w, v in zip(mu_star.weights, vals.values))
    ps = revenue(mu_star, vals, p_idx)
    return WelfareReport(cs=cs, ps_gross=ps, info_cost=0.0, ps_net=ps, ts_gross=cs + ps, ts_net=cs + ps, segmented=False)


def welfare(seg: Segmentation, vals: Valuations, k: float, price_tol: float = PRICE_OPT_TOL) -> WelfareReport:
    """Split total surplus of a priced segmentation into its welfare accounts.

    Consumer surplus and gross seller revenue are expectations over segments
    at each segment's own price. The information cost is ``k`` times the
    expected entropy reduction relative to the prior; it is subtracted from
    gross revenue to obtain the seller's net payoff.

    ``price_tol`` bounds how far each segment's assigned price may fall short
    of revenue-maximal; iterative solver output needs a looser bound than
    exact closed forms.
    """
    if k < 0.0:
        raise ValidationError("cost_scale", f"k must be >= 0, got {k}")
    if seg.bayes_residual > BAYES_TOL:
        raise ValidationError("bayes_plausibility", f"residual {seg.bayes_residual:.3e} exceeds {BAYES_TOL}")
    check_segment_prices(seg, vals, price_tol)
    cs = 0.0
    ps_gross = 0.0
    avg_entropy = 0.0
    for s in seg.segments:
        p = vals[s.price_index]
        cs += s.weight * math.fsum(w * buyer_payoff(p, v) for w, v in zip(s.market.weights, vals.values))
        ps_gross += s.weight * revenue(s.market, vals, s.price_index)
        avg_entropy += s.weight * entropy(s.market)
    info_cost = k * (entropy(seg.prior) - avg_entropy)
    ps_net = ps_gross - info_cost
    return WelfareReport(
        cs=cs,
        ps_gross=ps_gross,
        info_cost=info_cost,
        ps_net=ps_net,
        ts_gross=cs + ps_gross,
        ts_net=cs + ps_net,
        segmented=len(seg.segments) > 1,
    )
