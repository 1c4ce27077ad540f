import math
from fractions import Fraction

import pytest

from conftest import make_square_torus, make_two_tori_with_slit
from wildflat.numeric import Angle
from wildflat.surface import Surface
from wildflat.wild import (
    BOUNDARY,
    FRONTIER,
    NO,
    UNKNOWN,
    YES,
    NoSingularityFound,
    NotFound,
    NotSingular,
    RotationExceedsComponent,
    UnstableComponents,
    approach_at_position,
    approaches_at,
    ball_search,
    direction_at,
    enumerate_components,
    extract_topology,
    is_good_cellulation_sampled,
    make_approach,
    make_ball,
    parallel_approach_witness,
    rotational_walk,
    small_extension_witness,
    subbasis_contains,
)

F = Fraction


def make_marked_two_tori():
    s = make_two_tori_with_slit()
    tip = s.instance_at(0, (F(1, 4), F(1, 2)))
    s.declare_singular(tip, label="sigma")
    return s.finalize(), tip


def make_open_slit_torus(mark_boundary=False, merge_tips=False):
    """Unit torus with an unglued horizontal slit, tips optionally merged."""
    s = make_square_torus()
    s.cut_slit(0, (F(1, 4), F(1, 2)), (F(3, 4), F(1, 2)))
    vp = s.instance_at(0, (F(1, 4), F(1, 2)))
    vq = s.instance_at(0, (F(3, 4), F(1, 2)))
    if merge_tips:
        s.declare_same_point(vp, vq)
    s.declare_singular(vp)
    if not merge_tips:
        s.declare_singular(vq)
    if mark_boundary:
        s.mark_boundary(vp)
    return s.finalize(), vp, vq


def test_not_singular_guard(square_torus):
    with pytest.raises(NotSingular):
        approaches_at(square_torus, (0, 0))
    forced = approaches_at(square_torus, (0, 0), force=True)
    assert len(forced) == 8  # 4 corners, offset 0 and mid each


def test_approach_fields(square_torus):
    a = make_approach(square_torus, (0, 0), Angle.from_pi(F(1, 4)))
    assert a.direction.pi_mult == F(1, 4)
    assert a.available_terminal == "singular"
    assert abs(float(a.available_length) - math.sqrt(2)) < 1e-9


def test_single_closed_component():
    s, tip = make_marked_two_tori()
    views = enumerate_components(s, tip)
    assert len(views) == 1
    v = views[0]
    assert v.label == "c0"
    assert v.closed and v.exact_total
    assert v.total.pi_mult == F(4)
    assert v.left_end is None and v.right_end is None
    assert rotational_walk(s, tip, v.corners[1]).corners == v.corners


def test_open_chain_ends_frontier_vs_boundary():
    s, vp, _vq = make_open_slit_torus()
    v = enumerate_components(s, vp)[0]
    assert not v.closed and not v.exact_total
    assert v.total.pi_mult == F(2)
    assert (v.left_end, v.right_end) == (FRONTIER, FRONTIER)

    s2, vp2, _ = make_open_slit_torus(mark_boundary=True)
    v2 = enumerate_components(s2, vp2)[0]
    assert (v2.left_end, v2.right_end) == (BOUNDARY, BOUNDARY)
    assert v2.exact_total


def test_walk_positions_cross_corners():
    s, tip = make_marked_two_tori()
    v = enumerate_components(s, tip)[0]
    # position 2pi lands on the second corner at offset 0
    ap = approach_at_position(s, v, Angle.from_pi(F(2)))
    assert ap.anchor == v.corners[1]
    assert ap.offset.pi_mult == 0
    for num in (F(1, 2), F(3, 2), F(2), F(7, 2)):
        x = Angle.from_pi(num)
        assert approach_at_position(s, v, x).direction == direction_at(s, v, x)
    # closed chains wrap
    wrapped = approach_at_position(s, v, Angle.from_pi(F(9, 2)))
    assert wrapped.direction == direction_at(s, v, Angle.from_pi(F(1, 2)))


def test_walk_direction_additivity():
    s, tip = make_marked_two_tori()
    v = enumerate_components(s, tip)[0]
    xs = [Angle.from_pi(F(k, 4)) for k in range(9)]
    for x in xs:
        for y in xs:
            lhs = (direction_at(s, v, x) - direction_at(s, v, y)).mod_2pi()
            rhs = (x - y).mod_2pi()
            assert lhs == rhs


def test_walk_position_out_of_range():
    s, vp, _ = make_open_slit_torus()
    v = enumerate_components(s, vp)[0]
    with pytest.raises(RotationExceedsComponent):
        approach_at_position(s, v, Angle.from_pi(F(3)))


def test_subbasis_yes_no():
    s, tip = make_marked_two_tori()
    center = make_approach(s, tip, Angle.from_pi(F(1)))
    assert center.available_length == F(1, 2)
    ball = make_ball(s, center, F(1, 8), F(1, 100))
    assert subbasis_contains(s, ball, center) == YES
    other_tip = (1, tip[1])
    far = make_approach(s, other_tip, Angle.from_pi(F(1)))
    # its time-1/8 point sits one slit crossing away, distance 1/4 certified
    assert subbasis_contains(s, ball, far) == NO


def test_ball_search_own_component_only():
    s, tip = make_marked_two_tori()
    center = make_approach(s, tip, Angle.from_pi(F(1)))
    ball = make_ball(s, center, F(1, 8), F(1, 16))
    found = ball_search(s, ball)
    assert found
    assert all(f.cls == center.cls for f in found)
    assert any(f.anchor == tip and f.offset.pi_mult == F(1) for f in found)


def test_parallel_witness_and_absence():
    s, tip = make_marked_two_tori()
    gamma = make_approach(s, tip, Angle.from_pi(F(1)))
    w, perp = parallel_approach_witness(s, gamma, F(1, 8))
    assert w.anchor == (1, tip[1])
    assert w.direction == gamma.direction
    assert perp == 0.0

    torus = make_square_torus().finalize()
    reg = make_approach(torus, (0, 0), Angle.from_pi(F(1, 4)))
    with pytest.raises(NoSingularityFound):
        parallel_approach_witness(torus, reg, F(1, 8))


def test_small_extension_witness():
    s, tip = make_marked_two_tori()
    center = make_approach(s, tip, Angle.from_pi(F(1)))
    ball = make_ball(s, center, F(1, 8), F(1, 16))
    w = small_extension_witness(s, ball, F(1))
    assert w.available_length == F(1, 2)
    with pytest.raises(NotFound):
        small_extension_witness(s, ball, F(1, 4))


def test_extract_topology_single_point():
    s, tip = make_marked_two_tori()
    pre, topo = extract_topology(s, tip)
    assert pre.labels == ["c0"]
    assert topo.to_json()["opens"] == [[], ["c0"]]


def test_extract_topology_discrete_pair():
    # unglued slit with identified tips: the two 2pi fans never converge
    s, vp, _vq = make_open_slit_torus(merge_tips=True)
    pre, topo = extract_topology(s, vp)
    assert pre.labels == ["c0", "c1"]
    assert not pre.leq[0][1] and not pre.leq[1][0]
    assert len(topo.opens) == 4
    ev = pre.evidence[("c0", "c1")]
    assert ev["scales"][-1]["status"] == "no-witness"


def test_unstable_components_detected():
    s, tip = make_marked_two_tori()

    def rebuild(_depth):
        alt, _vp, _vq = make_open_slit_torus(merge_tips=True)
        return alt

    with pytest.raises(UnstableComponents):
        extract_topology(s, tip, depth=1, rebuild=rebuild)


def test_good_cellulation_sampled():
    s, tip = make_marked_two_tori()
    slit_edges = set()
    for cid in (0, 1):
        for loop in s.charts[cid].loops[1:]:
            slit_edges.update(loop)
    report = is_good_cellulation_sampled(s, slit_edges, count=30, length=3, seed=5)
    assert report["failures"] == []
    assert report["analyzed"] > 0
    assert report["max_hits"] >= 1


def test_component_json_shape():
    s, vp, _ = make_open_slit_torus()
    v = enumerate_components(s, vp)[0]
    j = v.to_json()
    assert j["total"]["kind"] == "at_least"
    assert j["ends"] == [FRONTIER, FRONTIER]
    s2, tip = make_marked_two_tori()
    j2 = enumerate_components(s2, tip)[0].to_json()
    assert j2["total"]["kind"] == "exact"
    assert j2["total"]["angle"] == {"pi_num": 4, "pi_den": 1}


def test_marked_rep_suppresses_fallback_anchors():
    s = make_two_tori_with_slit()
    tip = s.instance_at(0, (F(1, 4), F(1, 2)))
    s.declare_singular(tip, label="sigma")
    s.mark_rep(tip)
    s.finalize()
    from wildflat.wild import _default_reps

    v = enumerate_components(s, tip)[0]
    reps = _default_reps(s, v)
    assert all(k == tip for k, _off in reps)
    # sector samples of the 2pi corner: mid, quarter, three-quarter, zero
    assert sorted(off.pi_mult for _k, off in reps) == [0, F(1, 2), F(1), F(3, 2)]


def test_unmarked_reps_cover_all_corners():
    s, tip = make_marked_two_tori()
    from wildflat.wild import _default_reps

    v = enumerate_components(s, tip)[0]
    anchors = {k for k, _off in _default_reps(s, v)}
    assert anchors == set(v.corners)
