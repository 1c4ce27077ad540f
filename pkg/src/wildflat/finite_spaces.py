"""Finite topological spaces as explicit open-set families.

Conversions to and from specialization preorders, exhaustive enumeration of
labeled topologies, and Lebesgue covering dimension by brute force over
irredundant open covers.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence


class NotATopology(Exception):
    pass


class NotAPreorder(Exception):
    pass


@dataclass(frozen=True)
class FiniteTopology:
    points: tuple
    opens: frozenset  # frozenset of frozensets of labels

    @staticmethod
    def make(points: Sequence, opens: Iterable) -> "FiniteTopology":
        pts = tuple(points)
        ops = frozenset(frozenset(o) for o in opens)
        t = FiniteTopology(pts, ops)
        t.validate()
        return t

    def validate(self) -> None:
        pset = frozenset(self.points)
        if len(pset) != len(self.points):
            raise NotATopology("duplicate point labels")
        for o in self.opens:
            if not o <= pset:
                raise NotATopology(f"open set {sorted(o)} not within the point set")
        if frozenset() not in self.opens:
            raise NotATopology("empty set missing")
        if pset not in self.opens:
            raise NotATopology("full set missing")
        for a in self.opens:
            for b in self.opens:
                if a | b not in self.opens:
                    raise NotATopology(f"union {sorted(a | b)} missing")
                if a & b not in self.opens:
                    raise NotATopology(f"intersection {sorted(a & b)} missing")

    def relabel(self, mapping: dict) -> "FiniteTopology":
        pts = tuple(mapping[p] for p in self.points)
        ops = frozenset(frozenset(mapping[x] for x in o) for o in self.opens)
        return FiniteTopology(pts, ops)

    def to_json(self) -> dict:
        return {
            "points": list(self.points),
            "opens": sorted(
                (sorted(o) for o in self.opens), key=lambda o: (len(o), o)
            ),
        }

    @staticmethod
    def from_json(obj: dict) -> "FiniteTopology":
        return FiniteTopology.make(obj["points"], obj["opens"])

    def __eq__(self, other) -> bool:
        if not isinstance(other, FiniteTopology):
            return NotImplemented
        return frozenset(self.points) == frozenset(other.points) and self.opens == other.opens

    def __hash__(self):
        return hash((frozenset(self.points), self.opens))


def _normalize_preorder(pre) -> tuple:
    """Accepts (labels, matrix) or an object with .labels/.leq."""
    if isinstance(pre, tuple) and len(pre) == 2:
        labels, leq = pre
    else:
        labels, leq = pre.labels, pre.leq
    labels = tuple(labels)
    n = len(labels)
    if len(leq) != n or any(len(row) != n for row in leq):
        raise NotAPreorder("matrix shape does not match labels")
    for i in range(n):
        if not leq[i][i]:
            raise NotAPreorder(f"not reflexive at {labels[i]}")
    for i in range(n):
        for j in range(n):
            for k in range(n):
                if leq[i][j] and leq[j][k] and not leq[i][k]:
                    raise NotAPreorder(
                        f"not transitive: {labels[i]} <= {labels[j]} <= {labels[k]}"
                    )
    return labels, [list(map(bool, row)) for row in leq]


def topology_from_preorder(pre) -> FiniteTopology:
    """Opens are the up-sets of <=."""
    labels, leq = _normalize_preorder(pre)
    n = len(labels)
    opens = []
    for mask in range(1 << n):
        member = [bool(mask >> i & 1) for i in range(n)]
        if all(
            member[j]
            for i in range(n)
            if member[i]
            for j in range(n)
            if leq[i][j]
        ):
            opens.append(frozenset(labels[i] for i in range(n) if member[i]))
    return FiniteTopology(tuple(labels), frozenset(opens))


def preorder_from_topology(t: FiniteTopology) -> tuple:
    """x <= y iff every open set containing x contains y."""
    t.validate()
    labels = tuple(t.points)
    n = len(labels)
    leq = [[True] * n for _ in range(n)]
    for o in t.opens:
        for i in range(n):
            if labels[i] in o:
                for j in range(n):
                    if labels[j] not in o:
                        leq[i][j] = False
    return labels, leq


def enumerate_preorders(n: int, labels: Sequence = None) -> list:
    """All labeled preorders on n points, as (labels, matrix) pairs."""
    if labels is None:
        labels = tuple(f"y{i + 1}" for i in range(n))
    labels = tuple(labels)
    offdiag = [(i, j) for i in range(n) for j in range(n) if i != j]
    out = []
    for mask in range(1 << len(offdiag)):
        leq = [[i == j for j in range(n)] for i in range(n)]
        for b, (i, j) in enumerate(offdiag):
            if mask >> b & 1:
                leq[i][j] = True
        ok = all(
            not (leq[i][j] and leq[j][k]) or leq[i][k]
            for i in range(n)
            for j in range(n)
            for k in range(n)
        )
        if ok:
            out.append((labels, leq))
    return out


def enumerate_topologies(n: int, labels: Sequence = None) -> list:
    return [topology_from_preorder(p) for p in enumerate_preorders(n, labels)]


def contains_point_space(num_satellites: int, hub: str = "p") -> FiniteTopology:
    """Opens are the empty set and every set containing the hub point."""
    sats = tuple(f"q{i + 1}" for i in range(num_satellites))
    points = (hub,) + sats
    opens = [frozenset()]
    for mask in range(1 << num_satellites):
        opens.append(
            frozenset((hub,) + tuple(s for i, s in enumerate(sats) if mask >> i & 1))
        )
    return FiniteTopology.make(points, opens)


def _irredundant_covers(points: frozenset, opens: list):
    """All antichain covers where every member keeps a private point."""
    order = sorted(points)
    found = set()

    def rec(chosen: tuple, covered: frozenset):
        if covered == points:
            fam = frozenset(chosen)
            if fam in found:
                return
            # each member must contribute a point no other member has
            for m in fam:
                rest = [o for o in fam if o != m]
                union_rest = frozenset().union(*rest) if rest else frozenset()
                if not (m - union_rest):
                    return
            found.add(fam)
            yield fam
            return
        x = next(p for p in order if p not in covered)
        for o in opens:
            if x not in o:
                continue
            if any(o <= c or c <= o for c in chosen):
                continue
            yield from rec(chosen + (o,), covered | o)

    yield from rec((), frozenset())


def _min_multiplicity(points: frozenset, candidates: list, cap: int) -> int:
    """Smallest m so some subfamily of candidates covers with every point in
    at most m members."""
    order = sorted(points)

    for m in range(1, cap + 1):

        def rec(covered: frozenset, counts: dict) -> bool:
            if covered == points:
                return True
            x = next(p for p in order if p not in covered)
            for o in candidates:
                if x not in o:
                    continue
                if any(counts.get(p, 0) + 1 > m for p in o):
                    continue
                nc = dict(counts)
                for p in o:
                    nc[p] = nc.get(p, 0) + 1
                if rec(covered | o, nc):
                    return True
            return False

        if rec(frozenset(), {}):
            return m
    return cap


def finite_space_covering_dim(t: FiniteTopology) -> int:
    """Max over irredundant open covers of the minimal refinement multiplicity,
    minus one."""
    t.validate()
    points = frozenset(t.points)
    if not points:
        return -1
    opens = sorted(
        (o for o in t.opens if o), key=lambda o: (len(o), sorted(o))
    )
    worst = 1
    for cover in _irredundant_covers(points, opens):
        cands = [o for o in opens if any(o <= m for m in cover)]
        worst = max(worst, _min_multiplicity(points, cands, len(points)))
    return worst - 1
