"""Core type, pricing, and welfare accounting tests."""

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from segmentix import (
    Market,
    Segment,
    Segmentation,
    ValidationError,
    Valuations,
    all_revenues,
    buyer_payoff,
    entropy,
    net_segment_value,
    no_segmentation,
    optimal_price,
    perfect_discrimination,
    price_region,
    revenue,
    seller_payoff,
    uniform_report,
    welfare,
)

V12 = Valuations((1.0, 2.0))
V123 = Valuations((1.0, 2.0, 3.0))


# -------------------- constructors --------------------

def test_valuations_reject_short_ladder():
    with pytest.raises(ValidationError) as err:
        Valuations((1.0,))
    assert err.value.invariant == "valuations_size"


def test_valuations_reject_nonpositive_bottom():
    with pytest.raises(ValidationError) as err:
        Valuations((0.0, 1.0))
    assert err.value.invariant == "valuations_positive"


def test_valuations_reject_unordered():
    with pytest.raises(ValidationError) as err:
        Valuations((2.0, 1.0))
    assert err.value.invariant == "valuations_increasing"


def test_market_rejects_negative_weight():
    with pytest.raises(ValidationError):
        Market((-0.1, 1.1))


def test_market_rejects_bad_sum():
    with pytest.raises(ValidationError) as err:
        Market((0.4, 0.7))
    assert err.value.invariant == "market_weight_sum"


def test_market_normalizes_tiny_drift():
    m = Market((0.4, 0.6 + 1e-13))
    assert math.fsum(m.weights) == 1.0


# -------------------- payoffs and revenue --------------------

def test_seller_and_buyer_payoffs():
    assert seller_payoff(1.0, 2.0) == 1.0
    assert seller_payoff(2.0, 1.0) == 0.0
    assert buyer_payoff(1.0, 2.0) == 1.0
    assert buyer_payoff(2.0, 2.0) == 0.0
    assert buyer_payoff(2.0, 1.0) == 0.0


def test_revenue_low_price_serves_everyone():
    assert revenue(Market((0.4, 0.6)), V12, 0) == 1.0


def test_revenue_high_price_serves_high_types():
    assert revenue(Market((0.4, 0.6)), V12, 1) == pytest.approx(1.2, abs=1e-15)


def test_revenue_three_types_middle_price():
    m = Market((0.2, 0.3, 0.5))
    assert revenue(m, V123, 1) == pytest.approx(1.6, abs=1e-15)


@given(st.integers(2, 5), st.data())
def test_all_revenues_matches_direct_sum(k, data):
    raw = data.draw(st.lists(st.floats(0.01, 1.0), min_size=k, max_size=k))
    total = sum(raw)
    m = Market([r / total for r in raw])
    vals = Valuations([1.0 + i for i in range(k)])
    rv = all_revenues(m, vals)
    for p in range(k):
        direct = sum(vals[p] * m[i] for i in range(k) if vals[i] >= vals[p])
        assert rv[p] == pytest.approx(direct, abs=1e-12)


# -------------------- optimal pricing --------------------

def test_optimal_price_prefers_high_when_profitable():
    assert optimal_price(Market((0.4, 0.6)), V12) == 1


def test_optimal_price_degenerate_low_market():
    assert optimal_price(Market((1.0, 0.0)), V12) == 0


def test_optimal_price_breaks_ties_low():
    # revenues tie at 1.0; the buyer-friendly price wins
    assert optimal_price(Market((0.5, 0.5)), V12) == 0


def test_optimal_price_three_types():
    m = Market((1 / 3, 1 / 3, 1 / 3))
    assert optimal_price(m, V123) == 1  # revenues (1, 4/3, 1)


def test_price_region_boundary_contains_both():
    assert price_region(Market((0.5, 0.5)), V12) == (0, 1)


def test_price_region_interior():
    assert price_region(Market((0.4, 0.6)), V12) == (1,)
    assert price_region(Market((0.7, 0.3)), V12) == (0,)


# -------------------- entropy and segment values --------------------

def test_entropy_uniform_binary():
    assert entropy(Market((0.5, 0.5))) == pytest.approx(math.log(2.0), abs=1e-15)


def test_entropy_point_mass_is_zero():
    assert entropy(Market((1.0, 0.0))) == 0.0


def test_entropy_frozen_value():
    assert entropy(Market((0.4, 0.6))) == pytest.approx(0.6730116670092565, abs=1e-15)


@given(st.floats(0.0, 1.0))
def test_entropy_bounds(x):
    h = entropy(Market((x, 1.0 - x)))
    assert -1e-15 <= h <= math.log(2.0) + 1e-15


def test_net_segment_value_zero_cost_piecewise():
    assert net_segment_value(Market((0.6, 0.4)), V12, 0.0) == 1.0
    assert net_segment_value(Market((0.4, 0.6)), V12, 0.0) == pytest.approx(1.2, abs=1e-15)


def test_net_segment_value_adds_scaled_entropy():
    got = net_segment_value(Market((0.4, 0.6)), V12, 0.8)
    assert got == pytest.approx(1.7384093336074051, abs=1e-12)


# -------------------- segments and segmentations --------------------

def test_segment_rejects_suboptimal_price_on_check():
    from segmentix import check_segment_prices

    seg = Segmentation(Market((0.7, 0.3)), [Segment(Market((0.7, 0.3)), 1.0, 1)])
    with pytest.raises(ValidationError) as err:
        check_segment_prices(seg, V12)
    assert err.value.invariant == "segment_price_optimality"


def test_segmentation_rejects_bad_weight_sum():
    m = Market((0.5, 0.5))
    with pytest.raises(ValidationError) as err:
        Segmentation(m, [Segment(m, 0.7, 0), Segment(m, 0.7, 0)])
    assert err.value.invariant == "segmentation_weight_sum"


def test_segmentation_rejects_bayes_violation():
    with pytest.raises(ValidationError) as err:
        Segmentation(
            Market((0.5, 0.5)),
            [Segment(Market((0.9, 0.1)), 0.5, 0), Segment(Market((0.3, 0.7)), 0.5, 1)],
        )
    assert err.value.invariant == "bayes_plausibility"


def test_segmentation_rejects_support_above_type_count():
    m = Market((0.5, 0.5))
    segs = [Segment(m, 1 / 3, 0)] * 3
    with pytest.raises(ValidationError) as err:
        Segmentation(m, segs)
    assert err.value.invariant == "segmentation_support"


def test_segmentation_shape_mismatch():
    with pytest.raises(ValidationError) as err:
        Segmentation(Market((0.5, 0.5)), [Segment(Market((0.2, 0.3, 0.5)), 1.0, 0)])
    assert err.value.invariant == "segmentation_shape"


# -------------------- welfare accounting --------------------

def test_welfare_degenerate_segmentation():
    mu = Market((0.4, 0.6))
    rep = welfare(no_segmentation(mu, V12), V12, 0.8)
    assert rep.cs == 0.0
    assert rep.ps_gross == pytest.approx(1.2, abs=1e-15)
    assert rep.info_cost == 0.0
    assert rep.segmented is False


def test_welfare_perfect_discrimination_at_zero_cost():
    mu = Market((0.4, 0.6))
    rep = welfare(perfect_discrimination(mu, V12), V12, 0.0)
    assert rep.cs == 0.0
    assert rep.ps_gross == pytest.approx(1.6, abs=1e-15)
    assert rep.info_cost == 0.0
    assert rep.ts_gross == pytest.approx(1.6, abs=1e-15)


def test_welfare_identities_and_bounds():
    mu = Market((0.4, 0.6))
    for maker, k in ((no_segmentation, 0.8), (perfect_discrimination, 0.3)):
        rep = welfare(maker(mu, V12), V12, k)
        assert rep.ts_gross == pytest.approx(rep.cs + rep.ps_gross, abs=1e-12)
        assert rep.ps_net == pytest.approx(rep.ps_gross - rep.info_cost, abs=1e-12)
        assert rep.ts_net == pytest.approx(rep.cs + rep.ps_net, abs=1e-12)
        assert rep.cs >= 0.0
        assert rep.info_cost >= 0.0
        assert rep.ts_gross <= 1.6 + 1e-12


def test_uniform_report_picks_monopoly_price():
    assert uniform_report(Market((0.4, 0.6)), V12).ps_gross == pytest.approx(1.2)
    assert uniform_report(Market((0.7, 0.3)), V12).ps_gross == pytest.approx(1.0)


def test_perfect_discrimination_info_cost_positive_when_k_positive():
    mu = Market((0.4, 0.6))
    rep = welfare(perfect_discrimination(mu, V12), V12, 1.0)
    assert rep.info_cost == pytest.approx(entropy(mu), abs=1e-12)
