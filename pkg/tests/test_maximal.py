"""Tests for maximal operators and the covering construction.

Oracles: hand enumeration of the complete candidate-ball family on tiny
spaces (written before the assertions), the naive re-summing maximal
implementation (kept as a permanent dual route), and exact identities.
"""

import json
import math

import numpy as np
import pytest

from metricsym import (
    ArgumentError,
    BallIndexSet,
    MetricMeasureSpace,
    SobolevPair,
    ball,
    build_grid_space,
    center_index,
    construct_covering,
    covering_to_json,
    distribution,
    field_from_csv,
    field_to_csv,
    hl_maximal,
    hl_maximal_naive,
    poincare_constant,
    rearrangement,
    riesz_constant,
    sharp_maximal,
)


def three_point_line() -> MetricMeasureSpace:
    dist = [[0.0, 1.0, 2.0], [1.0, 0.0, 1.0], [2.0, 1.0, 0.0]]
    return MetricMeasureSpace([1.0, 1.0, 1.0], dist=dist)


def random_space(
    rng: np.random.Generator, n: int, allow_atoms: bool = True
) -> MetricMeasureSpace:
    if rng.random() < 0.5:
        coords = rng.uniform(0.0, 1.0, size=(n, int(rng.integers(1, 4))))
        weights = rng.uniform(0.1, 2.0, size=n)
        return MetricMeasureSpace(weights, coords=coords)
    # dense table from a random embedding, with duplicated points sometimes
    coords = rng.uniform(0.0, 1.0, size=(n, 2))
    if allow_atoms and n >= 4 and rng.random() < 0.3:
        coords[1] = coords[0]  # atom pair
    diff = coords[:, None, :] - coords[None, :, :]
    d = np.sqrt(np.sum(diff**2, axis=2))
    weights = rng.uniform(0.1, 2.0, size=n)
    return MetricMeasureSpace(weights, dist=d)


def enumerate_balls(space: MetricMeasureSpace):
    """Oracle helper: every distinct ball as (member-index-tuple) -> list of
    (center, radius). A prefix of a sorted distance row is a ball exactly
    when the next distance is strictly larger."""
    out = []
    for c in range(space.n):
        d = space.dist_row(c)
        for r in np.unique(d):
            members = np.flatnonzero(d <= r)
            out.append((c, float(r), members))
    return out


# ---------------------------------------------------------------------------
# Hardy-Littlewood maximal operator


def test_hl_of_constant_is_the_constant():
    sp = three_point_line()
    out = hl_maximal(sp, np.full(3, 2.0))  # doubling is float-exact
    assert np.array_equal(out.values, np.full(3, 2.0))
    out2 = hl_maximal(sp, np.full(3, -0.7))
    assert out2.values == pytest.approx(np.full(3, 0.7), rel=1e-14)


def test_hl_three_point_line_matches_nine_ball_enumeration():
    """g = (1,0,0): the oracle enumerates all 9 candidate balls (3 centers
    x 3 radii each) and takes, per point, the max average over balls
    containing it; Mg(2) = 1/3 via the full-space ball."""
    sp = three_point_line()
    g = np.array([1.0, 0.0, 0.0])
    oracle = np.zeros(3)
    for c, r, members in enumerate_balls(sp):
        avg = float(np.sum(g[members] * sp.weights[members])) / float(
            np.sum(sp.weights[members])
        )
        for i in members:
            oracle[i] = max(oracle[i], avg)
    assert oracle[2] == pytest.approx(1.0 / 3.0, rel=1e-15)
    got = hl_maximal(sp, g)
    assert got.values == pytest.approx(oracle, rel=1e-14)
    assert got.values[2] == pytest.approx(1.0 / 3.0, rel=1e-15)


def test_hl_dominates_g_on_random_instances():
    """Mg >= |g| pointwise wherever singletons are balls, i.e. on spaces
    with metrically distinct points (the smallest ball at x is then {x})."""
    rng = np.random.default_rng(20)
    for _ in range(100):
        sp = random_space(rng, int(rng.integers(2, 30)), allow_atoms=False)
        g = rng.normal(0.0, 2.0, size=sp.n)
        out = hl_maximal(sp, g)
        assert np.all(out.values >= np.abs(g) - 1e-12)


def test_hl_on_atom_pair_averages_within_the_atom():
    """Duplicated points are never separated by a ball, so both twins see
    the same ball family (identical Mg) and the best they can do locally
    is the atom's weighted average, possibly below the larger |g| twin."""
    coords = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    w = np.array([1.0, 3.0, 1.0])
    sp = MetricMeasureSpace(w, coords=coords)
    g = np.array([4.0, 0.0, 0.0])
    out = hl_maximal(sp, g)
    atom_avg = (4.0 * 1.0 + 0.0 * 3.0) / 4.0
    assert out.values[0] == out.values[1]
    assert out.values[0] == atom_avg  # smallest ball = the atom pair
    assert out.values[0] < abs(g[0])  # domination genuinely fails here


def test_hl_optimized_equals_naive_exactly():
    """Dual-route check: the optimized sweep and the naive re-summing
    enumeration agree bitwise on random spaces (both accumulate in the
    same canonical order)."""
    rng = np.random.default_rng(21)
    for _ in range(60):
        sp = random_space(rng, int(rng.integers(2, 41)))
        g = rng.normal(0.0, 1.5, size=sp.n)
        fast = hl_maximal(sp, g)
        naive = hl_maximal_naive(sp, g)
        assert np.array_equal(fast.values, naive.values)


def test_hl_thread_count_does_not_change_bits():
    rng = np.random.default_rng(22)
    sp = random_space(rng, 50)
    g = rng.normal(0.0, 1.0, size=sp.n)
    a = hl_maximal(sp, g, threads=1)
    b = hl_maximal(sp, g, threads=4)
    assert np.array_equal(a.values, b.values)


def test_hl_rejects_bad_g():
    sp = three_point_line()
    with pytest.raises(ArgumentError):
        hl_maximal(sp, [1.0, 2.0])  # wrong length
    with pytest.raises(ArgumentError):
        hl_maximal(sp, [1.0, np.inf, 0.0])


# ---------------------------------------------------------------------------
# sharp maximal operator


def test_sharp_two_point_space_matches_three_ball_enumeration():
    """f = (0,1), unit weights, B0 = whole space, p = q = 1. Candidate
    balls: {0}, {1} (zero deviation) and {0,1} with mean 1/2 and
    integrated deviation 1, giving (1/mu(B)) * 1 = 1/2 at both points."""
    sp = MetricMeasureSpace([1.0, 1.0], dist=[[0.0, 1.0], [1.0, 0.0]])
    f = np.array([0.0, 1.0])
    oracle = np.zeros(2)
    for c, r, members in enumerate_balls(sp):
        wB = sp.weights[members]
        mean = float(np.sum(f[members] * wB) / np.sum(wB))
        dev = float(np.sum(np.abs(f[members] - mean) * wB))
        val = dev / float(np.sum(wB)) ** 1.0
        for i in members:
            oracle[i] = max(oracle[i], val)
    assert np.array_equal(oracle, [0.5, 0.5])
    got = sharp_maximal(sp, f, ball(sp, 0, 1.0), p=1.0, q=1.0)
    assert np.array_equal(got.values, [0.5, 0.5])


def test_sharp_of_constant_is_zero():
    sp = build_grid_space(8)
    B0 = ball(sp, center_index(sp), 0.4)
    out = sharp_maximal(sp, np.full(sp.n, 3.3), B0, p=2.0, q=1.5)
    assert np.all(out.values == 0.0)


def test_sharp_matches_brute_force_on_small_instances():
    """Independent oracle: enumerate every ball B inside B0 and every
    member, recomputing the deviation sum from scratch."""
    rng = np.random.default_rng(23)
    for _ in range(10):
        sp = random_space(rng, int(rng.integers(3, 14)))
        f = rng.normal(0.0, 1.0, size=sp.n)
        B0 = ball(sp, int(rng.integers(0, sp.n)), float(rng.uniform(0.2, 0.8)))
        p = float(rng.choice([1.0, 2.0]))
        q = float(rng.choice([1.0, 1.5]))
        b0set = set(B0.members.tolist())
        oracle = np.zeros(sp.n)
        for c, r, members in enumerate_balls(sp):
            if not set(members.tolist()) <= b0set:
                continue
            wB = sp.weights[members]
            mean = float(np.sum(f[members] * wB) / np.sum(wB))
            dev = float(np.sum(np.abs(f[members] - mean) ** p * wB))
            val = (dev / float(np.sum(wB)) ** q) ** (1.0 / p)
            for i in members:
                oracle[i] = max(oracle[i], val)
        got = sharp_maximal(sp, f, B0, p=p, q=q)
        assert got.values == pytest.approx(oracle, rel=1e-12, abs=1e-12)


def test_sharp_is_zero_outside_b0_and_uses_only_inside_balls():
    sp = three_point_line()
    f = np.array([0.0, 1.0, 5.0])
    B0 = ball(sp, 0, 1.0)  # members {0, 1}
    out = sharp_maximal(sp, f, B0, p=1.0, q=1.0)
    assert out.values[2] == 0.0
    assert np.array_equal(out.values[:2], [0.5, 0.5])  # the two-point value


def test_sharp_homogeneity():
    rng = np.random.default_rng(24)
    sp = random_space(rng, 20)
    f = rng.normal(0.0, 1.0, size=sp.n)
    B0 = ball(sp, 0, 0.7)
    base = sharp_maximal(sp, f, B0, p=1.0, q=1.0)
    doubled = sharp_maximal(sp, 2.0 * f, B0, p=1.0, q=1.0)
    assert np.array_equal(doubled.values, 2.0 * base.values)  # exact for x2
    base2 = sharp_maximal(sp, f, B0, p=2.0, q=1.5)
    scaled = sharp_maximal(sp, 3.0 * f, B0, p=2.0, q=1.5)
    assert scaled.values == pytest.approx(3.0 * base2.values, rel=1e-12)


def test_sharp_zero_distance_alien_blocks_every_ball():
    """A manually built B0 that splits a zero-distance atom pair leaves its
    member with no qualifying ball, hence sharp value 0."""
    coords = [[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]]
    sp = MetricMeasureSpace([1.0, 1.0, 1.0], coords=coords)
    B0 = BallIndexSet(center=1, radius=0.0, members=np.array([1]), mass=1.0)
    out = sharp_maximal(sp, np.array([0.0, 1.0, 2.0]), B0, p=1.0, q=1.0)
    assert np.all(out.values == 0.0)


def test_sharp_argument_errors():
    sp = build_grid_space(8)
    B0 = ball(sp, center_index(sp), 0.4)
    f = np.zeros(sp.n)
    with pytest.raises(ArgumentError):
        sharp_maximal(sp, f, B0, p=0.5, q=1.0)
    with pytest.raises(ArgumentError):
        sharp_maximal(sp, f, B0, p=1.0, q=0.5)
    with pytest.raises(ArgumentError):
        sharp_maximal(sp, f[:-1], B0, p=1.0, q=1.0)
    with pytest.raises(ArgumentError):
        sharp_maximal(sp, f, B0, p=1.0, q=1.0, b0_cap=4)


# ---------------------------------------------------------------------------
# Riesz-type rearrangement bound


def test_riesz_constant_finite_and_attained_at_breakpoint():
    sp = build_grid_space(16)
    rng = np.random.default_rng(25)
    g = np.abs(rng.normal(0.0, 1.0, size=sp.n)) + 0.05
    c_hat, t_at = riesz_constant(sp, g)
    assert math.isfinite(c_hat) and c_hat > 0
    mg = hl_maximal(sp, g)
    mstar = rearrangement(mg.values, sp.weights)
    assert np.any(np.isclose(mstar.breakpoints, t_at, rtol=1e-12))


def test_riesz_constant_stable_under_refinement():
    """(Mg)*(t) <= c g**(t): the empirical c varies by far less than the
    factor 2 budget across N in {16, 32, 64}."""
    rng = np.random.default_rng(7)
    vals = {}
    for N in (16, 32, 64):
        sp = build_grid_space(N)
        g = np.abs(np.sin(5 * sp.coords[:, 0]) + rng.normal(0.0, 0.3, sp.n)) + 0.05
        c_hat, _ = riesz_constant(sp, g, threads=4)
        vals[N] = c_hat
    assert max(vals.values()) <= 2.0 * min(vals.values())


def test_riesz_rejects_zero_g():
    sp = build_grid_space(8)
    with pytest.raises(ArgumentError):
        riesz_constant(sp, np.zeros(sp.n))


def test_weak_1_1_surrogate_constant_is_moderate():
    """For an indicator g, mu{Mg > u} <= c ||g||_1 / u on a u-grid; the
    empirical c stays well under 5 (measured ~2.2)."""
    sp = build_grid_space(32)
    g = (np.sqrt(np.sum((sp.coords - 0.3) ** 2, axis=1)) <= 0.12).astype(float)
    mg = hl_maximal(sp, g, threads=4)
    F = rearrangement(mg.values, sp.weights)
    l1 = float(np.sum(g * sp.weights))
    us = np.geomspace(mg.values[mg.values > 0].min() * 0.5, mg.values.max(), 200)
    c_hat = max(float(u) * distribution(F, float(u)) / l1 for u in us)
    assert math.isfinite(c_hat)
    assert c_hat <= 5.0


def test_sharp_chained_through_poincare_and_maximal_fields():
    """With matching ball families (sigma = contain = 1, omega = B0) the
    definitions give, pointwise on B0,

        f#(x) <= c_hat * K * (M(g^q)(x))^(1/q),

    where c_hat is the scanned oscillation constant, K the largest
    r(B) mu(B)^((1-q_sharp)/p) over the family (enumerated independently
    here), because every sharp candidate value factors through a scanned
    ball's ratio and the g-average over that ball is dominated by the
    maximal function at each of its members."""
    sp = build_grid_space(24)
    c = center_index(sp)
    B0 = ball(sp, c, 0.3)
    rng = np.random.default_rng(42)
    f = np.sin(3 * sp.coords[:, 0]) * np.cos(2 * sp.coords[:, 1]) + 0.3 * rng.normal(
        size=sp.n
    )
    g = rng.uniform(0.2, 2.0, sp.n)
    p, q, q_sharp = 1.0, 1.0, 1.5

    c_hat = poincare_constant(
        sp, SobolevPair(f, g, "synthetic"), p=p, q=q, sigma=1.0, omega=B0
    ).best_constant
    assert math.isfinite(c_hat)

    # independent enumeration of the shared ball family for K
    in_b0 = np.zeros(sp.n, dtype=bool)
    in_b0[B0.members] = True
    idx = np.arange(sp.n)
    K = 0.0
    for cc in B0.members:
        d = sp.dist_row(int(cc))
        order = np.lexsort((idx, d))
        sd = d[order]
        inb = in_b0[order]
        L = sp.n if inb.all() else int(np.argmin(inb))
        W = np.cumsum(sp.weights[order])
        for k in range(L):
            if k < sp.n - 1 and sd[k + 1] <= sd[k]:
                continue
            K = max(K, float(sd[k]) * float(W[k]) ** ((1.0 - q_sharp) / p))

    sharp = sharp_maximal(sp, f, B0, p=p, q=q_sharp)
    mgq = hl_maximal(sp, g**q)
    lhs = sharp.values[B0.members]
    rhs = c_hat * K * mgq.values[B0.members] ** (1.0 / q)
    assert np.all(lhs <= rhs * (1 + 1e-9))


# ---------------------------------------------------------------------------
# covering construction


def test_covering_empty_set_is_vacuous():
    sp = build_grid_space(16)
    B = ball(sp, center_index(sp), 0.4)
    rep = construct_covering(sp, B, [])
    assert rep.balls == ()
    assert rep.property1 and rep.property2 and rep.property3 and rep.property4
    assert rep.overlap_constant == 0.0


def test_covering_single_point():
    """One deep interior point: a single stopping ball whose overlap
    constant is exactly mu(B_1)/mu({x})."""
    sp = build_grid_space(16)
    c = center_index(sp)
    B = ball(sp, c, 0.45)
    rep = construct_covering(sp, B, [c])
    assert len(rep.balls) == 1
    assert rep.property1 and rep.property2 and rep.property3 and rep.property4
    b1 = rep.balls[0]
    assert rep.overlap_constant == b1.mass / float(sp.weights[c])


def test_covering_disk_on_grid_all_properties_and_moderate_overlap():
    """E = concentric disk of ~0.05 mu(B): all four properties hold; the
    overlap constant is far below 20 (regression-locked value)."""
    sp = build_grid_space(64)
    c = center_index(sp)
    B = ball(sp, c, 0.45)
    row = sp.dist_row(c)
    E = np.flatnonzero(row <= 0.1)
    mass_e = float(np.sum(sp.weights[E]))
    assert mass_e <= 0.1 * B.mass  # default lambda precondition
    rep = construct_covering(sp, B, E)
    assert rep.property1 and rep.property2 and rep.property3 and rep.property4
    assert rep.overlap_constant < 20.0
    assert rep.overlap_constant == pytest.approx(2.0232558139534884, rel=1e-12)


def test_covering_precondition_errors():
    sp = build_grid_space(16)
    c = center_index(sp)
    B = ball(sp, c, 0.2)
    big_e = list(range(sp.n))  # not a subset of B and too heavy
    with pytest.raises(ArgumentError):
        construct_covering(sp, B, big_e)
    with pytest.raises(ArgumentError):
        construct_covering(sp, B, [sp.n + 3])
    # subset of B but heavier than lambda * mu(B)
    with pytest.raises(ArgumentError):
        construct_covering(sp, B, list(B.members), lam=0.1)


def test_covering_json_shape_and_determinism():
    sp = build_grid_space(32)
    c = center_index(sp)
    B = ball(sp, c, 0.45)
    E = np.flatnonzero(sp.dist_row(c) <= 0.08)
    rep1 = construct_covering(sp, B, E)
    rep2 = construct_covering(sp, B, E)
    j1, j2 = covering_to_json(rep1), covering_to_json(rep2)
    assert j1 == j2
    obj = json.loads(j1)
    assert set(obj) == {
        "balls",
        "property1",
        "property2",
        "property3",
        "property4",
        "overlap_constant",
        "witnesses",
    }
    for b in obj["balls"]:
        assert set(b) == {"center", "radius", "mass", "size"}


# ---------------------------------------------------------------------------
# interchange


def test_field_csv_round_trip_exact():
    rng = np.random.default_rng(26)
    sp = random_space(rng, 15)
    g = rng.normal(0.0, 1.0, size=sp.n)
    field = hl_maximal(sp, g)
    back = field_from_csv(field_to_csv(field))
    assert np.array_equal(back, field.values)
    assert field_to_csv(field).startswith("point_index,value\n")
