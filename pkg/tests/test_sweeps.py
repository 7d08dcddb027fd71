"""Cost-scale sweeps, monotonicity classification, surplus geometry."""

import math

import numpy as np
import pytest

from segmentix import (
    KGridSpec,
    Market,
    ValidationError,
    Valuations,
    boundary_always_segments,
    classify_monotonicity,
    default_k_grid,
    segmentation_threshold,
    surplus_triangle,
    sweep_k,
    to_csv,
    to_svg,
    uniform_report,
)
from segmentix.sweeps import CSV_HEADER

V12 = Valuations((1.0, 2.0))
MU46 = Market((0.4, 0.6))


# -------------------- grid spec --------------------

def test_grid_spec_validates():
    with pytest.raises(ValidationError):
        KGridSpec(lo=0.0, hi=1.0, n=10)
    with pytest.raises(ValidationError):
        KGridSpec(lo=1.0, hi=0.5, n=10)
    with pytest.raises(ValidationError):
        KGridSpec(lo=0.1, hi=1.0, n=1)


def test_grid_spec_log_spacing():
    ks = KGridSpec(lo=0.01, hi=10.0, n=200).as_array()
    assert len(ks) == 200
    assert ks[0] == pytest.approx(0.01)
    assert ks[-1] == pytest.approx(10.0)
    ratios = ks[1:] / ks[:-1]
    assert np.allclose(ratios, ratios[0])


def test_default_grid_scales_with_low_valuation():
    g = default_k_grid(Valuations((2.0, 5.0)))
    assert g.lo == pytest.approx(2e-3)
    assert g.hi == pytest.approx(200.0)
    assert g.n == 200


# -------------------- sweeping --------------------

def test_sweep_rows_follow_grid_and_account():
    table = sweep_k(V12, MU46, KGridSpec(lo=0.05, hi=5.0, n=25))
    assert len(table.rows) == 25
    for row in table.rows:
        assert row.error is None
        rep = row.report
        assert rep.ts_gross == pytest.approx(rep.cs + rep.ps_gross, abs=1e-12)
        assert row.n_segments in (1, 2)
        assert row.verify is not None and row.verify.passed


def test_sweep_rows_stay_inside_surplus_triangle():
    tri = surplus_triangle(MU46, V12)
    table = sweep_k(V12, MU46, KGridSpec(lo=1e-3, hi=100.0, n=60))
    for row in table.rows:
        assert tri.contains(row.report.cs, row.report.ps_gross)


def test_sweep_limits_match_uniform_and_efficient_endpoints():
    kbar = segmentation_threshold(V12, MU46)
    table = sweep_k(V12, MU46, [1e-4, 1e-3, 10.0 * kbar, 20.0 * kbar])
    lo_row = table.rows[0].report
    assert lo_row.ts_gross == pytest.approx(1.6, abs=1e-9)
    assert lo_row.cs == pytest.approx(0.0, abs=1e-9)
    uni = uniform_report(MU46, V12)
    for row in table.rows[2:]:
        assert row.report.cs == uni.cs
        assert row.report.ps_gross == uni.ps_gross
        assert row.report.info_cost == 0.0


def test_sweep_parallel_matches_serial():
    grid = KGridSpec(lo=0.1, hi=2.0, n=12)
    serial = sweep_k(V12, MU46, grid, max_workers=1)
    parallel = sweep_k(V12, MU46, grid, max_workers=3)
    assert to_csv(serial) == to_csv(parallel)


def test_sweep_series_extraction():
    table = sweep_k(V12, MU46, KGridSpec(lo=0.1, hi=1.0, n=5))
    cs = table.series("cs")
    assert len(cs) == 5
    assert all(k > 0 and v >= 0 for k, v in cs)


# -------------------- monotonicity classes --------------------

def test_classify_monotone_series():
    assert classify_monotonicity([1.0, 2.0, 3.0]) == "nondecreasing"
    assert classify_monotonicity([3.0, 2.0, 1.0]) == "nonincreasing"
    assert classify_monotonicity([1.0, 3.0, 2.0]) == "nonmonotone"
    assert classify_monotonicity([2.0, 2.0, 2.0]) == "nondecreasing"


def test_classify_needs_three_points():
    with pytest.raises(ValidationError) as err:
        classify_monotonicity([1.0, 2.0])
    assert err.value.invariant == "series_size"


def test_classify_absorbs_float_noise():
    assert classify_monotonicity([1.0, 1.0 - 1e-12, 2.0]) == "nondecreasing"


# -------------------- boundary market property --------------------

def test_boundary_market_always_segments():
    ks = np.geomspace(1e-3, 1e3, 120)
    rep = boundary_always_segments(V12, ks)
    assert rep.always_segments
    assert rep.min_gain > 0.0
    assert rep.min_straddle_slack > 0.0


def test_boundary_gain_shrinks_but_stays_positive_at_heavy_cost():
    rep = boundary_always_segments(V12, [1e3])
    assert 0.0 < rep.min_gain < 1e-3


def test_nonboundary_prior_stops_segmenting():
    # contrast case: an off-boundary prior has a finite threshold
    mu = Market((0.3, 0.7))
    kbar = segmentation_threshold(V12, mu)
    assert kbar < 10.0
    from segmentix import MarketInstance, solve_binary

    seg = solve_binary(MarketInstance(V12, mu, 10.0))
    assert len(seg.segments) == 1


# -------------------- surplus triangle --------------------

def test_triangle_low_prior_vertices():
    tri = surplus_triangle(Market((0.6, 0.4)), V12)
    (c0, p0), (c1, p1), (c2, p2) = tri.vertices
    assert (c0, p0) == (0.0, 1.0)
    assert c1 == pytest.approx(0.4) and p1 == 1.0
    assert c2 == 0.0 and p2 == pytest.approx(1.4)


def test_triangle_high_prior_vertices():
    tri = surplus_triangle(MU46, V12)
    assert tri.uniform_profit == pytest.approx(1.2)
    assert tri.full_surplus == pytest.approx(1.6)
    assert tri.max_cs == pytest.approx(0.4)


def test_triangle_degenerate_prior():
    tri = surplus_triangle(Market((1.0, 0.0)), V12)
    assert tri.vertices == ((0.0, 1.0), (0.0, 1.0), (0.0, 1.0))


def test_triangle_membership():
    tri = surplus_triangle(MU46, V12)
    assert tri.contains(0.1, 1.25)
    assert not tri.contains(-0.01, 1.3)
    assert not tri.contains(0.1, 1.19)
    assert not tri.contains(0.3, 1.5)


# -------------------- serialization --------------------

def test_csv_header_and_shape():
    table = sweep_k(V12, MU46, KGridSpec(lo=0.1, hi=1.0, n=4))
    text = to_csv(table)
    lines = text.strip().split("\n")
    assert lines[0] == CSV_HEADER
    assert len(lines) == 5
    first = lines[1].split(",")
    assert len(first) == 9
    assert first[8] == "1.0;2.0"


def test_svg_renders_series():
    table = sweep_k(V12, MU46, KGridSpec(lo=0.1, hi=1.0, n=8))
    svg = to_svg(table)
    assert svg.startswith("<svg")
    assert svg.count("<polyline") == 4
    assert svg.rstrip().endswith("</svg>")
