import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from wildflat.numeric import (
    Angle,
    get_tolerance,
    is_exact,
    sc,
    sc_cmp,
    sc_eq,
    scalar_from_json,
    scalar_to_json,
    seg_point_dist_sq,
    set_tolerance,
    v_cross,
    v_len_sq,
)


def test_sc_coercions():
    assert sc(3) == Fraction(3) and is_exact(sc(3))
    assert sc("1/3") == Fraction(1, 3)
    assert sc(0.5) == 0.5 and not is_exact(sc(0.5))
    with pytest.raises(TypeError):
        sc(True)


def test_exact_compare_is_exact():
    # 1/3 differs from a close float only in the tail; exact-vs-float uses tol
    a = Fraction(1, 3)
    assert sc_cmp(a, a + Fraction(1, 10**30)) == -1
    assert sc_eq(a, 0.3333333333333333)  # within 1e-9 of 1/3
    assert not sc_eq(a, 0.3333)


def test_tolerance_scoping():
    old = get_tolerance()
    try:
        set_tolerance(1e-2)
        assert sc_eq(Fraction(1, 3), 0.33)
        set_tolerance(1e-12)
        assert not sc_eq(Fraction(1, 3), 0.3333333333333333 + 1e-10)
    finally:
        set_tolerance(old)
    with pytest.raises(ValueError):
        set_tolerance(0)


def test_scalar_json_round_trip():
    for x in [Fraction(-7, 12), Fraction(2**200, 3), 0.125, -1.5]:
        back = scalar_from_json(scalar_to_json(x))
        assert back == x
        assert is_exact(back) == is_exact(x)
    # big numerators survive as strings
    payload = scalar_to_json(Fraction(10**40 + 1, 7))
    assert payload["num"] == str(10**40 + 1)


# angle oracle: (3/4)pi + (3/4)pi = (3/2)pi, computed by hand
def test_angle_addition_exact():
    a = Angle.from_pi(Fraction(3, 4))
    s = (a + a).mod_2pi()
    assert s.exact and s.pi_mult == Fraction(3, 2)


def test_angle_mod_positive_keeps_full_turn():
    assert Angle.from_pi(2).mod_2pi_positive().pi_mult == 2
    assert Angle.from_pi(0).mod_2pi_positive().pi_mult == 2
    assert Angle.from_pi(Fraction(9, 4)).mod_2pi_positive().pi_mult == Fraction(1, 4)
    r = Angle.from_radians(4 * math.pi).mod_2pi_positive()
    assert abs(r.rad - 2 * math.pi) < 1e-12


def test_angle_from_vector_exact_grid():
    cases = {
        (1, 0): Fraction(0),
        (3, 3): Fraction(1, 4),
        (0, 2): Fraction(1, 2),
        (-1, 1): Fraction(3, 4),
        (-5, 0): Fraction(1),
        (-2, -2): Fraction(5, 4),
        (0, -1): Fraction(3, 2),
        (4, -4): Fraction(7, 4),
    }
    for (dx, dy), mult in cases.items():
        a = Angle.from_vector(Fraction(dx), Fraction(dy))
        assert a.exact and a.pi_mult == mult
    off = Angle.from_vector(Fraction(2), Fraction(1))
    assert not off.exact
    assert abs(off.rad - math.atan2(1, 2)) < 1e-12


def test_angle_vectors_match_trig():
    for mult in [0, Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1,
                 Fraction(5, 4), Fraction(3, 2), Fraction(7, 4)]:
        a = Angle.from_pi(mult)
        vx, vy = a.vector()
        r = float(mult) * math.pi
        assert v_cross((float(vx), float(vy)), (math.cos(r), math.sin(r))) == pytest.approx(0, abs=1e-12)
        assert float(vx) * math.cos(r) + float(vy) * math.sin(r) > 0


def test_angle_json_round_trip():
    for a in [Angle.from_pi(Fraction(5, 8)), Angle.from_radians(1.2345)]:
        b = Angle.from_json(a.to_json())
        assert b.exact == a.exact
        assert a.eq(b)


def test_congruence_mod_2pi():
    assert Angle.from_pi(Fraction(9, 4)).congruent_2pi(Angle.from_pi(Fraction(1, 4)))
    assert not Angle.from_pi(Fraction(9, 4)).congruent_2pi(Angle.from_pi(Fraction(1, 2)))
    assert Angle.from_radians(0.1).congruent_2pi(Angle.from_radians(0.1 + 2 * math.pi))


dyadic = st.builds(
    Fraction,
    st.integers(min_value=-64, max_value=64),
    st.sampled_from([1, 2, 4, 8, 16, 32]),
)


@given(dyadic, dyadic, dyadic)
def test_exact_angle_addition_associative(a, b, c):
    x, y, z = Angle.from_pi(a), Angle.from_pi(b), Angle.from_pi(c)
    left = ((x + y) + z).mod_2pi()
    right = (x + (y + z)).mod_2pi()
    assert left.pi_mult == right.pi_mult


@given(dyadic, dyadic)
def test_dyadic_closed_under_addition(a, b):
    s = Angle.from_pi(a) + Angle.from_pi(b)
    assert s.is_dyadic()


@given(dyadic, st.floats(min_value=-10, max_value=10, allow_nan=False))
def test_float_taints_angle(a, r):
    s = Angle.from_pi(a) + Angle.from_radians(r)
    assert not s.exact
    assert s.rad == pytest.approx(float(a) * math.pi + r)


def test_seg_point_distance_oracle():
    # distance from (0, 1) to segment [(0,0), (2,0)] is 1 (interior foot)
    assert seg_point_dist_sq((Fraction(0), Fraction(1)),
                             (Fraction(0), Fraction(0)),
                             (Fraction(2), Fraction(0))) == 1
    # beyond the right end: nearest point is the endpoint (2, 0)
    assert seg_point_dist_sq((Fraction(3), Fraction(1)),
                             (Fraction(0), Fraction(0)),
                             (Fraction(2), Fraction(0))) == 2
    # degenerate segment
    assert seg_point_dist_sq((Fraction(1), Fraction(1)),
                             (Fraction(0), Fraction(0)),
                             (Fraction(0), Fraction(0))) == 2


@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5),
       st.integers(-5, 5), st.integers(-5, 5), st.integers(-5, 5))
def test_seg_dist_below_endpoint_dists(px, py, ax, ay, bx, by):
    p = (Fraction(px), Fraction(py))
    a = (Fraction(ax), Fraction(ay))
    b = (Fraction(bx), Fraction(by))
    d = seg_point_dist_sq(p, a, b)
    assert d <= v_len_sq((p[0] - a[0], p[1] - a[1]))
    assert d <= v_len_sq((p[0] - b[0], p[1] - b[1]))
