"""Tests for finite metric measure spaces, balls, and doubling statistics.

Oracles: ball masses on grids are compared against independent cell
counts and analytic areas; doubling ratios against interval/disk counting;
everything else is exact by construction and asserted directly.
"""

import json
import math

import numpy as np
import pytest

from metricsym import (
    ArgumentError,
    BallIndexSet,
    ContainmentError,
    MetricMeasureSpace,
    ball,
    build_grid_space,
    center_index,
    doubling_stats,
    doubling_to_csv,
    growth_constant,
    space_from_json,
    space_to_json,
)


def three_point_line() -> MetricMeasureSpace:
    """Points 0, 1, 2 on a line: d(0,1)=1, d(0,2)=2, d(1,2)=1, unit weights."""
    dist = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]
    return MetricMeasureSpace([1.0, 1.0, 1.0], dist=dist)


def random_point_cloud(rng: np.random.Generator, n: int) -> MetricMeasureSpace:
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    weights = rng.integers(1, 2**20, size=n).astype(float) / 2**20
    return MetricMeasureSpace(weights, coords=coords)


# ---------------------------------------------------------------------------
# space construction and validation


def test_weights_validation():
    with pytest.raises(ArgumentError):
        MetricMeasureSpace([], dist=[[]])
    with pytest.raises(ArgumentError):
        MetricMeasureSpace([1.0, 0.0], dist=[[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ArgumentError):
        MetricMeasureSpace([1.0, -1.0], dist=[[0.0, 1.0], [1.0, 0.0]])
    with pytest.raises(ArgumentError):
        MetricMeasureSpace([1.0], None)  # neither dist nor coords


def test_metric_axiom_validation():
    with pytest.raises(ArgumentError):  # asymmetric
        MetricMeasureSpace([1.0, 1.0], dist=[[0.0, 1.0], [2.0, 0.0]])
    with pytest.raises(ArgumentError):  # nonzero diagonal
        MetricMeasureSpace([1.0, 1.0], dist=[[0.5, 1.0], [1.0, 0.0]])
    with pytest.raises(ArgumentError):  # negative entry
        MetricMeasureSpace([1.0, 1.0], dist=[[0.0, -1.0], [-1.0, 0.0]])
    with pytest.raises(ArgumentError):  # triangle violation, full check
        MetricMeasureSpace(
            [1.0, 1.0, 1.0],
            dist=[[0.0, 1.0, 3.0], [1.0, 0.0, 1.0], [3.0, 1.0, 0.0]],
        )


def test_large_space_randomized_triangle_check_catches_gross_violation():
    """Above 200 points the triangle check samples 10 n^2 random triples;
    a planted gross violation involving one pair is still caught."""
    rng = np.random.default_rng(5)
    pts = rng.uniform(0.0, 1.0, (210, 2))
    diff = pts[:, None, :] - pts[None, :, :]
    D = np.sqrt(np.sum(diff**2, axis=2))
    valid = MetricMeasureSpace(np.ones(210), dist=D)  # passes
    assert valid.n == 210
    D2 = D.copy()
    D2[0, 1] = D2[1, 0] = 50.0
    with pytest.raises(ArgumentError):
        MetricMeasureSpace(np.ones(210), dist=D2)


def test_total_mass_is_weight_sum():
    rng = np.random.default_rng(7)
    sp = random_point_cloud(rng, 50)
    assert sp.total_mass == pytest.approx(float(np.sum(sp.weights)), rel=1e-12)


def test_duplicated_points_are_allowed_as_atoms():
    coords = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    sp = MetricMeasureSpace([0.5, 0.25, 1.0], coords=coords)
    b = ball(sp, 0, 0.0)
    assert list(b.members) == [0, 1]  # zero-distance twin joins the ball
    assert b.mass == 0.75


def test_explicit_table_wins_over_coords():
    coords = [[0.0, 0.0], [1.0, 0.0]]
    sp = MetricMeasureSpace([1.0, 1.0], dist=[[0.0, 3.0], [3.0, 0.0]], coords=coords)
    assert sp.dist(0, 1) == 3.0  # table value, not the Euclidean 1.0


# ---------------------------------------------------------------------------
# ball


def test_ball_on_three_point_line():
    sp = three_point_line()
    b = ball(sp, 0, 1.0)
    assert list(b.members) == [0, 1]
    assert b.mass == 2.0


def test_zero_radius_ball_is_the_center():
    sp = three_point_line()
    b = ball(sp, 0, 0.0)
    assert list(b.members) == [0]
    assert b.mass == 1.0


def test_ball_center_out_of_range():
    sp = three_point_line()
    with pytest.raises(ArgumentError):
        ball(sp, 3, 1.0)
    with pytest.raises(ArgumentError):
        ball(sp, -1, 1.0)
    with pytest.raises(ArgumentError):
        ball(sp, 0, -0.5)


def test_grid_ball_mass_matches_disk_area():
    """64x64 unit square, midpoint center, r = 0.25: the ball mass equals
    the independent cell count exactly and the analytic disk area pi/16
    within 5%."""
    sp = build_grid_space(64)
    c = center_index(sp)
    b = ball(sp, c, 0.25)
    # independent count: cells whose center lies in the disk
    count = int(np.sum(np.sqrt(np.sum((sp.coords - sp.coords[c]) ** 2, axis=1)) <= 0.25))
    assert b.members.size == count
    assert b.mass == pytest.approx(count / 64**2, rel=1e-12)
    assert b.mass / sp.total_mass == pytest.approx(math.pi * 0.25**2, rel=0.05)


def test_ball_monotonicity_in_radius():
    rng = np.random.default_rng(8)
    sp = random_point_cloud(rng, 40)
    for _ in range(100):
        x = int(rng.integers(0, sp.n))
        r1, r2 = sorted(rng.uniform(0.0, 1.2, size=2))
        small = set(ball(sp, x, r1).members.tolist())
        big = set(ball(sp, x, r2).members.tolist())
        assert small <= big


def test_ball_mass_additivity_over_partitions():
    """Dyadic-rational weights make the mass sum exactly associative, so
    any two-way split of the members sums to the ball mass bitwise."""
    rng = np.random.default_rng(9)
    sp = random_point_cloud(rng, 60)
    for _ in range(20):
        x = int(rng.integers(0, sp.n))
        b = ball(sp, x, float(rng.uniform(0.1, 1.0)))
        k = int(rng.integers(0, b.members.size + 1))
        first, second = b.members[:k], b.members[k:]
        assert float(np.sum(sp.weights[first])) + float(
            np.sum(sp.weights[second])
        ) == b.mass


# ---------------------------------------------------------------------------
# doubling statistics


def test_doubling_on_1d_grid_matches_interval_count():
    """1D uniform grid: the doubling ratio at interior centers is the ratio
    of symmetric point counts (2 floor(2r/h) + 1) / (2 floor(r/h) + 1) ~ 2."""
    sp = build_grid_space(101, dims=1)
    h = 1.0 / 101
    interior = [i for i in range(sp.n) if abs(sp.coords[i, 0] - 0.5) < 0.2]
    r = 0.1
    st = doubling_stats(sp, centers=interior, radii=[r])
    for c, rr, ratio in st.samples:
        expect = (2 * math.floor(2 * rr / h + 1e-9) + 1) / (
            2 * math.floor(rr / h + 1e-9) + 1
        )
        assert ratio == pytest.approx(expect, rel=1e-12)
    assert st.c_d == pytest.approx(2.0, rel=0.05)
    assert st.s == pytest.approx(1.0, abs=0.08)


def test_doubling_on_2d_grid_gives_dimension_two():
    sp = build_grid_space(32)
    interior = [i for i in range(sp.n) if np.all(np.abs(sp.coords[i] - 0.5) < 0.2)]
    st = doubling_stats(sp, centers=interior, radii=[0.05, 0.08])
    assert st.s == pytest.approx(2.0, abs=0.2)


def test_doubling_equality_case():
    """d(0,1)=1, d(0,2)=5: B(0,1) = B(0,2) = {0,1}, so the single sampled
    ratio is 1 and the dimension is exactly 0."""
    dist = [[0.0, 1.0, 5.0], [1.0, 0.0, 4.0], [5.0, 4.0, 0.0]]
    sp = MetricMeasureSpace([1.0, 1.0, 1.0], dist=dist)
    st = doubling_stats(sp, centers=[0], radii=[1.0])
    assert st.c_d == 1.0
    assert st.s == 0.0


def test_doubling_consistency_and_exact_log():
    rng = np.random.default_rng(10)
    sp = random_point_cloud(rng, 80)
    st = doubling_stats(sp)  # default centers and quantile radii
    ratios = [s[2] for s in st.samples]
    assert st.c_d == max(ratios)  # maximum attained by a sample
    assert all(r <= st.c_d for r in ratios)
    assert st.s == float(np.log2(st.c_d))  # exact, not approximate
    assert st.c_d >= 1.0


def test_doubling_argument_errors():
    sp = three_point_line()
    with pytest.raises(ArgumentError):
        doubling_stats(sp, centers=[])
    with pytest.raises(ArgumentError):
        doubling_stats(sp, centers=[0], radii=[])
    with pytest.raises(ArgumentError):
        doubling_stats(sp, centers=[0], radii=[0.0])


# ---------------------------------------------------------------------------
# growth constant


def test_growth_self_ratio_is_one():
    sp = build_grid_space(32)
    c = center_index(sp)
    big = ball(sp, c, 0.5)
    st = doubling_stats(sp, centers=[c], radii=[0.1, 0.2])
    assert growth_constant(sp, big, [big], st) == 1.0


def test_growth_dyadic_sub_balls_stable_under_refinement():
    """Concentric dyadic sub-balls of the inscribed disk: in the continuum
    every normalized ratio is exactly 1 (disk areas scale as r^2), so the
    discrete minimum sits near 1 and stays there when the grid refines."""
    got = {}
    for N in (32, 64):
        sp = build_grid_space(N)
        c = center_index(sp)
        big = ball(sp, c, 0.5)
        subs = [ball(sp, c, 0.5 / 2**j) for j in range(4)]
        st = doubling_stats(sp, centers=[c], radii=[0.1, 0.2])
        got[N] = growth_constant(sp, big, subs, st)
    assert got[32] >= 0.9
    assert got[64] >= 0.9
    assert got[32] <= 1.05 and got[64] <= 1.05


def test_growth_zero_radius_sub_ball_rejected():
    sp = build_grid_space(16)
    c = center_index(sp)
    big = ball(sp, c, 0.5)
    st = doubling_stats(sp, centers=[c], radii=[0.1])
    with pytest.raises(ArgumentError):
        growth_constant(sp, big, [ball(sp, c, 0.0)], st)


def test_growth_containment_violation_rejected():
    sp = build_grid_space(16)
    big = ball(sp, center_index(sp), 0.2)
    stray = ball(sp, 0, 0.2)  # corner ball pokes outside the central one
    st = doubling_stats(sp, centers=[center_index(sp)], radii=[0.1])
    with pytest.raises(ContainmentError):
        growth_constant(sp, big, [stray], st)


def test_growth_empty_sub_balls_rejected():
    sp = build_grid_space(16)
    big = ball(sp, center_index(sp), 0.5)
    st = doubling_stats(sp, centers=[0], radii=[0.1])
    with pytest.raises(ArgumentError):
        growth_constant(sp, big, [], st)


# ---------------------------------------------------------------------------
# builders and helpers


def test_build_grid_space_square():
    sp = build_grid_space(8)
    assert sp.n == 64
    assert sp.grid.shape == (8, 8)
    assert np.all(sp.weights == 1.0 / 64)
    assert sp.total_mass == pytest.approx(1.0, rel=1e-12)


def test_build_grid_space_per_axis():
    sp = build_grid_space((4, 6), lo=(0.0, -1.0), hi=(1.0, 1.0))
    assert sp.n == 24
    assert sp.grid.shape == (4, 6)
    assert np.all(sp.weights == pytest.approx((1.0 / 4) * (2.0 / 6), rel=1e-12))
    assert sp.grid.spacings == pytest.approx((0.25, 2.0 / 6), rel=1e-12)


def test_build_grid_space_rejects_empty_axis():
    with pytest.raises(ArgumentError):
        build_grid_space((4, 0))


def test_center_index_midpoint_and_explicit_point():
    sp = build_grid_space(9)  # odd: the midpoint cell center is exact
    c = center_index(sp)
    assert np.allclose(sp.coords[c], [0.5, 0.5])
    corner = center_index(sp, point=[0.0, 0.0])
    assert np.allclose(sp.coords[corner], [0.5 / 9, 0.5 / 9])


def test_center_index_requires_coordinates():
    sp = three_point_line()
    with pytest.raises(ArgumentError):
        center_index(sp)


# ---------------------------------------------------------------------------
# interchange


def test_space_json_round_trip_dense_is_exact():
    sp = three_point_line()
    back = space_from_json(space_to_json(sp))
    assert np.array_equal(back.weights, sp.weights)
    assert np.array_equal(back.dense(), sp.dense())


def test_space_json_round_trip_coords_is_exact():
    rng = np.random.default_rng(11)
    sp = random_point_cloud(rng, 17)
    back = space_from_json(space_to_json(sp))
    assert np.array_equal(back.weights, sp.weights)
    assert np.array_equal(back.coords, sp.coords)
    assert not back.has_dense


def test_space_json_rejects_malformed():
    with pytest.raises(ArgumentError):
        space_from_json(json.dumps({"dist": [[0.0]]}))
    with pytest.raises(ArgumentError):
        space_from_json(json.dumps({"weights": [1.0]}))
    with pytest.raises(ArgumentError):
        space_from_json(
            json.dumps({"weights": [1.0], "coords": [[0.0]], "metric": "manhattan"})
        )


def test_doubling_csv_format():
    sp = three_point_line()
    st = doubling_stats(sp, centers=[0], radii=[1.0])
    text = doubling_to_csv(st)
    lines = text.strip().split("\n")
    assert lines[0] == "center,r,ratio"
    c, r, ratio = lines[1].split(",")
    assert int(c) == 0
    assert float(r) == 1.0
    assert float(ratio) == st.samples[0][2]
