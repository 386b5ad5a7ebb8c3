import math
from itertools import permutations, product

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qbl import enumeration, geometry, localdens
from qbl.arith import vec_gcd
from qbl.verify import naive_point_heights


def brute_fiber(x, Y):
    g = np.arange(-Y, Y + 1)
    ys = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
    ys = ys[(ys ** 2 @ np.array(x)) == 0]
    return int((np.gcd.reduce(np.abs(ys), axis=1) == 1).sum())


# ---------------------------------------------------------------- thin set

@pytest.mark.parametrize("x,want", [((1, 1, -1, -1), True), ((1, 1, 1, -3), False),
                                    ((2, -1, -1, 0), True), ((2, 3, 6, 1), True),
                                    ((-1, 1, 1, 1), False)])
def test_thin_set(x, want):
    assert enumeration.thin_set_membership(x) is want


# ------------------------------------------------------------ fiber counts

@pytest.mark.parametrize("x,Y,want", [((1, 1, 1, -1), 1, 12), ((1, 1, 1, 1), 1, 0),
                                      ((1, 1, 1, 1), 7, 0), ((1, 1, 1, -3), 1, 16)])
def test_fiber_examples(x, Y, want):
    assert enumeration.fiber_point_count(x, Y) == want
    assert enumeration.fiber_point_count(x, Y, method="triple") == want


def test_fiber_zero_coefficient_rejected():
    with pytest.raises(ValueError):
        enumeration.fiber_point_count((1, 0, 1, -1), 3)


def test_fiber_y_zero():
    assert enumeration.fiber_point_count((1, 1, 1, -1), 0) == 0


coeff = st.integers(-6, 6).filter(bool)


@given(st.tuples(coeff, coeff, coeff, coeff), st.integers(0, 6))
@settings(max_examples=40)
def test_fiber_against_box(x, Y):
    want = brute_fiber(x, Y)
    assert enumeration.fiber_point_count(x, Y) == want
    assert enumeration.fiber_point_count(x, Y, method="triple") == want


@given(st.tuples(coeff, coeff, coeff, coeff), st.integers(0, 12), st.permutations(range(4)))
def test_fiber_symmetries(x, Y, perm):
    n = enumeration.fiber_point_count(x, Y)
    assert enumeration.fiber_point_count(tuple(x[i] for i in perm), Y) == n
    assert enumeration.fiber_point_count(tuple(-t for t in x), Y) == n


# ------------------------------------------------------------ global count

def test_count_bound_one():
    rep = enumeration.count_points(1)
    assert rep.canonical_count == 24
    # log 1 = 0, so there is no prediction to compare with
    assert rep.predicted == 0 and math.isnan(rep.ratio)
    rep = enumeration.count_points(100)
    assert rep.ratio == rep.canonical_count / rep.predicted


def test_bound_one_by_hand():
    # x in {+-1}^4 with an odd number of minus signs, y on two-element supports
    # pairing a +1 coefficient with a -1 one
    pts = set()
    for x in product((1, -1), repeat=4):
        if x[0] < 0 or x.count(-1) % 2 == 0:
            continue
        for y in product((-1, 0, 1), repeat=4):
            if any(y) and sum(a * b * b for a, b in zip(x, y)) == 0:
                first = next(t for t in y if t)
                if first > 0:
                    pts.add((x, y))
    assert len(pts) == 24


def test_count_rejects_bad_input():
    with pytest.raises(ValueError):
        enumeration.count_points(0)
    with pytest.raises(ValueError):
        enumeration.count_points(10, split="sideways")


def test_naive_equivalence_up_to_500():
    hs = np.array(naive_point_heights(500))
    bad = [B for B in range(1, 501)
           if enumeration.count_points(B).canonical_count != int((hs <= B).sum())]
    assert bad == []


def test_monotone():
    counts = [enumeration.count_points(B).canonical_count for B in range(1, 400, 7)]
    assert all(a <= b for a, b in zip(counts, counts[1:]))


@pytest.mark.parametrize("B", [1, 17, 100, 999, 4321, 10 ** 4])
def test_split_halves_partition(B):
    auto = enumeration.count_points(B)
    ys = enumeration.count_points(B, split="y_side_only")
    xs = enumeration.count_points(B, split="x_side_only")
    assert ys.canonical_count + xs.canonical_count == auto.canonical_count
    assert ys.thin_excluded + xs.thin_excluded == auto.thin_excluded


@pytest.mark.parametrize("B", [50, 2000, 30000])
def test_boundary_doubling(B):
    rep = enumeration.count_points(B)
    moved = enumeration.count_points(B, boundary=2 * rep.split_boundary)
    assert moved.canonical_count == rep.canonical_count
    assert moved.thin_excluded == rep.thin_excluded


def test_raw_pairs_are_four_times_points():
    B = 120
    raw = 0
    X = math.floor(B ** (1 / 3) + 1e-9)
    for x in product(range(-X, X + 1), repeat=4):
        if 0 in x or math.gcd(*x) != 1:
            continue
        d = x[0] * x[1] * x[2] * x[3]
        if d >= 0 and math.isqrt(d) ** 2 == d:
            continue
        n = max(map(abs, x))
        raw += brute_fiber(x, math.isqrt(B // n ** 3))
    assert raw == 4 * enumeration.count_points(B).canonical_count
    assert enumeration.canonical_count(raw) * 4 == raw
    with pytest.raises(ArithmeticError):
        enumeration.canonical_count(raw + 1)


def test_iter_points_invariants():
    B = 300
    pts = list(enumeration.iter_points(B))
    assert len(pts) == enumeration.count_points(B).canonical_count
    assert len({(p.x.entries, p.y.entries) for p in pts}) == len(pts)
    for p in pts[::3]:
        x, y = p.x.entries, p.y.entries
        assert sum(a * b * b for a, b in zip(x, y)) == 0
        assert vec_gcd(x) == 1 and vec_gcd(y) == 1
        assert next(t for t in x if t) > 0 and next(t for t in y if t) > 0
        assert p.height == max(map(abs, x)) ** 3 * max(map(abs, y)) ** 2 <= B
        assert not enumeration.thin_set_membership(x)


@pytest.mark.parametrize("y", [(0, 0, 1, 2), (1, 1, 1, 1), (0, 3, 3, 5)])
def test_orbit_size_nonneg(y):
    orbit = {tuple(s * y[i] for s, i in zip(signs, perm))
             for perm in permutations(range(4)) for signs in product((1, -1), repeat=4)}
    assert enumeration.orbit_size_nonneg(y) == len(orbit)


@pytest.mark.parametrize("x", [(1, 1, 1, -1), (-2, 1, 1, 2), (1, 2, 3, 4), (-1, -1, 1, 1)])
def test_orbit_size_signed(x):
    orbit = {tuple(s * x[i] for i in perm) for perm in permutations(range(4)) for s in (1, -1)}
    assert enumeration.orbit_size_signed(x) == len(orbit)


def test_class_walks_cover_everything():
    X = 3
    reps = list(enumeration.x_classes(X))
    total = sum(enumeration.orbit_size_signed(x) for x in reps)
    assert total == (2 * X) ** 4
    Y = 4
    total = sum(enumeration.orbit_size_nonneg(y) for y in enumeration.y_classes(Y))
    prim = sum(1 for y in product(range(-Y, Y + 1), repeat=4) if any(y) and math.gcd(*y) == 1)
    assert total == prim


# --------------------------------------------------------- weighted counts

W1 = geometry.SmoothWeight(0.05, "inner_w1")


@pytest.mark.parametrize("P", [0.5, 1.0])
def test_weighted_vanishes_for_small_P(P):
    # every solution has |y| <= P, where w1 is zero at 0 and at 1
    assert enumeration.weighted_count((1, 2, 3, -5), W1, P) == 0.0


def test_weighted_rejects_nonpositive_P():
    with pytest.raises(ValueError):
        enumeration.weighted_count((1, 2, 3, -5), W1, 0)


def test_weighted_matches_direct_sum():
    F, P = (1, 2, -3, -1), 9.0
    g = np.arange(-9, 10)
    ys = np.stack(np.meshgrid(g, g, g, g, indexing="ij"), -1).reshape(-1, 4)
    ys = ys[(ys ** 2 @ np.array(F)) == 0]
    want = sum(geometry.smooth_weight_eval(W1, y / P) for y in ys)
    assert enumeration.weighted_count(F, W1, P) == pytest.approx(want, rel=1e-12)


@pytest.mark.parametrize("perm", [(1, 0, 2, 3), (3, 2, 1, 0), (2, 3, 0, 1)])
def test_weighted_permutation_invariant(perm):
    F = (1, 2, 3, -5)
    base = enumeration.weighted_count(F, W1, 60)
    got = enumeration.weighted_count(tuple(F[i] for i in perm), W1, 60)
    assert got == pytest.approx(base, rel=1e-12)


def test_weighted_against_main_term():
    F, P = (1, 2, 3, -5), 400
    nw = enumeration.weighted_count(F, W1, P)
    pred = geometry.sigma_infinity_weighted(W1, F) * localdens.singular_series_value(F) * P * P
    assert abs(nw / pred - 1) <= 0.15
