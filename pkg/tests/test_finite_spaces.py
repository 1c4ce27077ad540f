from itertools import combinations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wildflat.finite_spaces import (
    FiniteTopology,
    NotAPreorder,
    NotATopology,
    contains_point_space,
    enumerate_preorders,
    enumerate_topologies,
    finite_space_covering_dim,
    preorder_from_topology,
    topology_from_preorder,
)


def brute_covering_dim(t: FiniteTopology) -> int:
    """Direct reading of the definition, no pruning."""
    pts = set(t.points)
    opens = [set(o) for o in t.opens if o]

    def covers(sets):
        u = set()
        for s in sets:
            u |= s
        return u == pts

    def multiplicity(sets):
        return max(sum(1 for s in sets if p in s) for p in pts)

    best = 0
    for k in range(1, len(opens) + 1):
        for cov in combinations(range(len(opens)), k):
            cs = [opens[i] for i in cov]
            if not covers(cs):
                continue
            refinable = [s for s in opens if any(s <= c for c in cs)]
            m = None
            for j in range(1, len(refinable) + 1):
                for ref in combinations(refinable, j):
                    if covers(ref):
                        mm = multiplicity(ref)
                        m = mm if m is None else min(m, mm)
            best = max(best, m - 1)
    return best


def test_topology_counts():
    assert len(enumerate_topologies(1)) == 1
    assert len(enumerate_topologies(2)) == 4
    assert len(enumerate_topologies(3)) == 29
    assert len(enumerate_preorders(3)) == 29


def test_sierpinski_from_preorder():
    t = topology_from_preorder((("a", "b"), ((True, False), (True, True))))
    assert t.opens == frozenset(
        {frozenset(), frozenset({"a"}), frozenset({"a", "b"})}
    )


def test_preorder_topology_mutual_inverses():
    for n in (1, 2, 3):
        for t in enumerate_topologies(n):
            assert topology_from_preorder(preorder_from_topology(t)) == t
        for pre in enumerate_preorders(n):
            t = topology_from_preorder(pre)
            labels, leq = preorder_from_topology(t)
            assert labels == pre[0] and leq == pre[1]


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_roundtrip_on_random_preorders(data):
    n = data.draw(st.integers(min_value=1, max_value=5))
    labels = tuple(f"y{i}" for i in range(n))
    rel = data.draw(
        st.lists(
            st.tuples(
                st.integers(0, n - 1), st.integers(0, n - 1)
            ),
            max_size=n * n,
        )
    )
    leq = [[i == j for j in range(n)] for i in range(n)]
    for i, j in rel:
        leq[i][j] = True
    # transitive closure makes it a preorder
    for k in range(n):
        for i in range(n):
            for j in range(n):
                if leq[i][k] and leq[k][j]:
                    leq[i][j] = True
    t = topology_from_preorder((labels, leq))
    got_labels, got_leq = preorder_from_topology(t)
    assert tuple(got_labels) == labels
    assert [list(r) for r in got_leq] == [list(r) for r in leq]


def test_validation_rejects_non_topologies():
    with pytest.raises(NotATopology):
        FiniteTopology.make(("a", "b"), [("a",)])  # no empty, no full
    with pytest.raises(NotATopology):
        FiniteTopology.make(("a", "b", "c"), [(), ("a",), ("b",), ("a", "b", "c")])
    with pytest.raises(NotATopology):
        FiniteTopology.make(
            ("a", "b", "c"),
            [(), ("a", "b"), ("b", "c"), ("a", "b", "c")],
        )


def test_validation_rejects_non_preorders():
    with pytest.raises(NotAPreorder):
        topology_from_preorder((("a", "b"), ((False, False), (False, True))))
    with pytest.raises(NotAPreorder):
        topology_from_preorder(
            (
                ("a", "b", "c"),
                (
                    (True, True, False),
                    (False, True, True),
                    (False, False, True),
                ),
            )
        )
    with pytest.raises(NotAPreorder):
        topology_from_preorder((("a", "b"), ((True, True),)))


def test_relabel_and_json_roundtrip():
    t = contains_point_space(2)
    r = t.relabel({"p": "x", "q1": "y", "q2": "z"})
    assert frozenset({"x"}) in r.opens
    assert FiniteTopology.from_json(t.to_json()) == t
    j = t.to_json()
    assert j["opens"][0] == []
    assert j["opens"][-1] == sorted(t.points)


def test_contains_point_space_shape():
    for n in (1, 2, 3):
        t = contains_point_space(n)
        assert len(t.points) == n + 1
        assert len(t.opens) == 1 + 2 ** n


def test_covering_dim_small_cases():
    sierp = topology_from_preorder((("a", "b"), ((True, False), (True, True))))
    assert finite_space_covering_dim(sierp) == 0
    discrete = FiniteTopology.make(
        ("a", "b"), [(), ("a",), ("b",), ("a", "b")]
    )
    assert finite_space_covering_dim(discrete) == 0
    indiscrete = FiniteTopology.make(("a", "b"), [(), ("a", "b")])
    assert finite_space_covering_dim(indiscrete) == 0


def test_covering_dim_matches_brute_force():
    for t in enumerate_topologies(3):
        assert finite_space_covering_dim(t) == brute_covering_dim(t)


def test_covering_dim_contains_point_family():
    # one satellite more than the target dimension
    for n in (1, 2, 3, 4):
        assert finite_space_covering_dim(contains_point_space(n + 1)) == n
