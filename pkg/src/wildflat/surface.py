"""Chart complexes with translation gluings and slit surgery.

A surface is a set of polygonal charts (possibly with degenerate inner
loops for slits) whose boundary edges are either glued pairwise by
translations or left as frontier edges where a truncated infinite
construction stops.  Vertex instances are identified through the gluing
endpoint maps (union-find), plus explicit builder declarations for
identifications that arise from distance-0 arguments rather than from a
single gluing.

Conventions:
  - loop 0 of a chart is the outer boundary, counterclockwise (interior on
    the left of each directed edge); inner loops are clockwise, including
    the degenerate two-edge loops produced by interior slits;
  - every edge carries an exact angle when the builder knows one, so corner
    angles stay symbolic even on charts with floating-point coordinates;
  - the corner at a vertex instance spans counterclockwise from the
    direction of its outgoing edge to (direction of incoming edge) + pi.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional

from .numeric import (
    Angle,
    Scalar,
    get_tolerance,
    is_exact,
    sc_eq,
    scalar_from_json,
    scalar_to_json,
    v_cross,
    v_dot,
    v_exact,
    v_len_sq,
    v_sub,
)


class SurfaceError(Exception):
    pass


class SegmentIntersectsBoundary(SurfaceError):
    pass


class DegenerateSegment(SurfaceError):
    pass


class LengthOverflow(SurfaceError):
    pass


class HolonomyMismatch(SurfaceError):
    pass


class AlreadyGlued(SurfaceError):
    pass


class ArityMismatch(SurfaceError):
    pass


class NotSingular(SurfaceError):
    pass


class FinalizedSurface(SurfaceError):
    """Raised on mutation after finalize()."""


Point = tuple  # (Scalar, Scalar)
Key = tuple  # (chart id, vertex index) identifying a vertex instance


def unit_vector(a: Angle) -> Point:
    """Unit direction vector; exact for axis directions, float otherwise."""
    if a.exact:
        m = a.pi_mult % 2
        axis = {
            Fraction(0): (Fraction(1), Fraction(0)),
            Fraction(1, 2): (Fraction(0), Fraction(1)),
            Fraction(1): (Fraction(-1), Fraction(0)),
            Fraction(3, 2): (Fraction(0), Fraction(-1)),
        }.get(m)
        if axis is not None:
            return axis
    import math

    r = a.radians
    return (math.cos(r), math.sin(r))


@dataclass
class EdgeRec:
    id: int
    chart: int
    sv: int  # start vertex index within the chart
    ev: int
    direction: Angle


@dataclass
class Chart:
    id: int
    kind: str  # "polygon" | "truncated_plane"
    label: str
    verts: list  # list of Point, creation order
    loops: list  # list of lists of edge ids; loop 0 outer ccw
    half_width: Optional[Scalar] = None


@dataclass(frozen=True)
class Corner:
    key: Key
    e_in: int
    e_out: int
    angle: Angle


@dataclass
class Chain:
    """A maximal corner walk around one vertex class."""

    corners: list  # Keys in ccw order
    closed: bool
    # for open chains: the edges where the walk stops (unglued, or glued
    # across an artifact-mark boundary)
    left_frontier: Optional[int] = None
    right_frontier: Optional[int] = None


class Surface:
    def __init__(self, mode: str = "exact", depth: int = 0):
        if mode not in ("exact", "approx"):
            raise ValueError("mode must be exact or approx")
        self.mode = mode
        self.depth = depth
        self.charts: dict[int, Chart] = {}
        self.edges: dict[int, EdgeRec] = {}
        # edge id -> (partner edge id, translation this-chart -> partner-chart)
        self.glue: dict[int, tuple[int, Point]] = {}
        self._parent: dict[Key, Key] = {}
        self.class_labels: dict[Key, str] = {}
        self.singular_marks: set = set()
        self.boundary_marks: set = set()
        self.artifact_marks: set = set()
        self.rep_marks: list = []
        self.landmarks: dict[str, Key] = {}
        self.meta: dict = {}
        self._next_chart = 0
        self._next_edge = 0
        self._finalized = False
        self._corner_cache: Optional[dict] = None

    # -- bookkeeping -------------------------------------------------------

    def _mutate(self):
        if self._finalized:
            raise FinalizedSurface("surface is finalized")
        self._corner_cache = None

    def _new_edge(self, chart: int, sv: int, ev: int, direction: Angle) -> int:
        eid = self._next_edge
        self._next_edge += 1
        self.edges[eid] = EdgeRec(eid, chart, sv, ev, direction)
        self._corner_cache = None
        return eid

    def position(self, key: Key) -> Point:
        return self.charts[key[0]].verts[key[1]]

    def edge_start(self, eid: int) -> Key:
        e = self.edges[eid]
        return (e.chart, e.sv)

    def edge_end(self, eid: int) -> Key:
        e = self.edges[eid]
        return (e.chart, e.ev)

    def edge_displacement(self, eid: int) -> Point:
        e = self.edges[eid]
        c = self.charts[e.chart]
        return v_sub(c.verts[e.ev], c.verts[e.sv])

    def edge_length_sq(self, eid: int) -> Scalar:
        return v_len_sq(self.edge_displacement(eid))

    def chart_edges(self, chart_id: int) -> list:
        c = self.charts[chart_id]
        return [eid for loop in c.loops for eid in loop]

    def frontier_edges(self) -> list:
        return sorted(e for e in self.edges if e not in self.glue)

    def instances(self) -> list:
        return [
            (cid, vi)
            for cid in sorted(self.charts)
            for vi in range(len(self.charts[cid].verts))
        ]

    # -- union-find --------------------------------------------------------

    def _find(self, k: Key) -> Key:
        p = self._parent
        root = k
        while p.get(root, root) != root:
            root = p[root]
        while p.get(k, k) != k:
            p[k], k = root, p[k]
        return root

    def _union(self, a: Key, b: Key):
        ra, rb = self._find(a), self._find(b)
        if ra == rb:
            return
        # keep the smaller key as root for determinism
        if rb < ra:
            ra, rb = rb, ra
        self._parent[rb] = ra

    def class_of(self, key: Key) -> Key:
        """Canonical representative (minimal key) of the instance's class."""
        return self._find(key)

    def class_members(self, key: Key) -> list:
        rep = self._find(key)
        return sorted(k for k in self.instances() if self._find(k) == rep)

    def classes(self) -> list:
        """All classes as sorted member lists, ordered by representative."""
        groups: dict[Key, list] = {}
        for k in self.instances():
            groups.setdefault(self._find(k), []).append(k)
        return [sorted(groups[r]) for r in sorted(groups)]

    def class_label(self, key: Key) -> str:
        rep = self._find(key)
        for k in self.class_members(rep):
            if k in self.class_labels:
                return self.class_labels[k]
        return f"v{rep[0]}_{rep[1]}"

    def is_singular(self, key: Key) -> bool:
        rep = self._find(key)
        return any(k in self.singular_marks for k in self.class_members(rep))

    # -- declarations ------------------------------------------------------

    def declare_same_point(self, a: Key, b: Key):
        """Identify two completion points (distance-0 argument by the builder)."""
        self._mutate()
        self._union(a, b)

    def declare_singular(self, key: Key, label: Optional[str] = None):
        self._mutate()
        self.singular_marks.add(key)
        if label is not None:
            self.class_labels[key] = label

    def mark_boundary(self, key: Key):
        """A walk stopping at this instance is at a true end of its component."""
        self._mutate()
        self.boundary_marks.add(key)

    def mark_artifact(self, key: Key):
        """Corners here exist only because of the truncation apparatus."""
        self._mutate()
        self.artifact_marks.add(key)

    def mark_rep(self, key: Key):
        """Designate a preferred representative corner for closure testing."""
        self._mutate()
        if key not in self.rep_marks:
            self.rep_marks.append(key)

    def set_landmark(self, name: str, key: Key):
        self._mutate()
        self.landmarks[name] = key

    # -- chart creation ----------------------------------------------------

    def add_chart(
        self,
        points: list,
        label: str = "",
        dirs: Optional[list] = None,
        kind: str = "polygon",
        half_width: Optional[Scalar] = None,
    ) -> int:
        self._mutate()
        if len(points) < 3:
            raise SurfaceError("polygon needs at least 3 vertices")
        area2 = 0.0
        for i in range(len(points)):
            a, b = points[i], points[(i + 1) % len(points)]
            area2 += float(a[0]) * float(b[1]) - float(b[0]) * float(a[1])
        if area2 <= 0:
            raise SurfaceError("outer loop must be counterclockwise with area > 0")
        cid = self._next_chart
        self._next_chart += 1
        chart = Chart(cid, kind, label, list(points), [[]], half_width)
        self.charts[cid] = chart
        n = len(points)
        for i in range(n):
            j = (i + 1) % n
            d = (
                dirs[i]
                if dirs is not None
                else Angle.from_vector(*v_sub(points[j], points[i]))
            )
            chart.loops[0].append(self._new_edge(cid, i, j, d))
        return cid

    def add_truncated_plane(self, half_width: Scalar, label: str = "plane") -> int:
        hw = half_width
        pts = [(-hw, -hw), (hw, -hw), (hw, hw), (-hw, hw)]
        return self.add_chart(
            pts, label=label, kind="truncated_plane", half_width=hw
        )

    # -- structure queries -------------------------------------------------

    def _in_out(self) -> dict:
        """vertex key -> (incoming edge id, outgoing edge id)."""
        if self._corner_cache is not None:
            return self._corner_cache
        m: dict[Key, list] = {}
        for c in self.charts.values():
            for loop in c.loops:
                for eid in loop:
                    e = self.edges[eid]
                    m.setdefault((c.id, e.sv), [None, None])[1] = eid
                    m.setdefault((c.id, e.ev), [None, None])[0] = eid
        self._corner_cache = {k: (v[0], v[1]) for k, v in m.items()}
        return self._corner_cache

    def corner(self, key: Key) -> Corner:
        e_in, e_out = self._in_out()[key]
        if e_in is None or e_out is None:
            raise SurfaceError(f"instance {key} is not on a closed loop")
        ang = (
            self.edges[e_in].direction
            + Angle.from_pi(1)
            - self.edges[e_out].direction
        ).mod_2pi_positive()
        return Corner(key, e_in, e_out, ang)

    def sector_start(self, key: Key) -> Angle:
        """Direction of the corner's clockwise boundary ray (position 0)."""
        return self.edges[self._in_out()[key][1]].direction

    def step_ccw(self, key: Key) -> Optional[Key]:
        """Next corner counterclockwise around the vertex class, if glued."""
        e_in, _ = self._in_out()[key]
        hit = self.glue.get(e_in)
        if hit is None:
            return None
        partner, _t = hit
        return self.edge_start(partner)

    def step_cw(self, key: Key) -> Optional[Key]:
        _, e_out = self._in_out()[key]
        hit = self.glue.get(e_out)
        if hit is None:
            return None
        partner, _t = hit
        return self.edge_end(partner)

    # -- geometric predicates ---------------------------------------------

    def _same_point(self, p: Point, q: Point) -> bool:
        if v_exact(p) and v_exact(q):
            return p[0] == q[0] and p[1] == q[1]
        t = get_tolerance()
        return abs(float(p[0]) - float(q[0])) <= t and abs(float(p[1]) - float(q[1])) <= t

    def instance_at(self, chart_id: int, p: Point) -> Optional[Key]:
        c = self.charts[chart_id]
        for vi, v in enumerate(c.verts):
            if self._same_point(v, p):
                return (chart_id, vi)
        return None

    def point_in_chart(self, chart_id: int, p: Point) -> bool:
        """Crossing-parity test against all loops (holes included)."""
        c = self.charts[chart_id]
        x, y = float(p[0]), float(p[1])
        inside = False
        for loop in c.loops:
            for eid in loop:
                e = self.edges[eid]
                ax, ay = (float(s) for s in c.verts[e.sv])
                bx, by = (float(s) for s in c.verts[e.ev])
                if (ay > y) != (by > y):
                    xs = ax + (y - ay) / (by - ay) * (bx - ax)
                    if xs > x:
                        inside = not inside
        return inside

    # -- slit surgery ------------------------------------------------------

    def _open_segment_hits_boundary(self, chart_id: int, p: Point, q: Point) -> bool:
        """Does the open segment (p, q) touch any existing edge or vertex?"""
        d = v_sub(q, p)
        c = self.charts[chart_id]
        exact = v_exact(p) and v_exact(q)
        tol = get_tolerance()
        # vertices strictly inside (p, q)
        for v in c.verts:
            w = v_sub(v, p)
            if exact and v_exact(v):
                if v_cross(d, w) == 0:
                    t = Fraction(v_dot(w, d)) / Fraction(v_len_sq(d))
                    if 0 < t < 1:
                        return True
            else:
                dl = float(v_len_sq(d)) ** 0.5
                if abs(float(v_cross(d, w))) <= tol * max(1.0, dl):
                    t = float(v_dot(w, d)) / float(v_len_sq(d))
                    if tol < t < 1 - tol:
                        return True
        # proper or touching intersections with edges
        for eid in self.chart_edges(chart_id):
            e = self.edges[eid]
            a, b = c.verts[e.sv], c.verts[e.ev]
            if _segments_cross_open(p, q, a, b, exact):
                return True
        return False

    def cut_slit(
        self,
        chart_id: int,
        p: Point,
        q: Point,
        dirs: Optional[tuple] = None,
    ) -> tuple:
        """Cut the open segment (p, q) into a two-sided slit.

        Returns (side_pq, side_qp): the edge running p->q (chart interior on
        its left) and the opposite side.  If exactly one endpoint coincides
        with an existing boundary vertex, the slit spike is spliced into that
        vertex's loop, splitting its corner in two; the open interior must
        stay clear of the boundary either way.
        """
        self._mutate()
        if self._same_point(p, q):
            raise DegenerateSegment("slit endpoints coincide")
        at_p = self.instance_at(chart_id, p)
        at_q = self.instance_at(chart_id, q)
        if at_p is not None and at_q is not None:
            raise SegmentIntersectsBoundary("both slit endpoints on the boundary")
        if at_q is not None:
            # normalize: the boundary endpoint, if any, is p
            p, q = q, p
            at_p, at_q = at_q, None
            if dirs is not None:
                dirs = (dirs[1], dirs[0])
        if self._open_segment_hits_boundary(chart_id, p, q):
            raise SegmentIntersectsBoundary("open slit interior touches the boundary")
        if at_p is None and not self.point_in_chart(chart_id, p):
            raise SegmentIntersectsBoundary("slit endpoint outside the chart")
        if not self.point_in_chart(chart_id, q):
            raise SegmentIntersectsBoundary("slit endpoint outside the chart")
        if not self.point_in_chart(
            chart_id,
            ((p[0] + q[0]) / 2, (p[1] + q[1]) / 2),
        ):
            raise SegmentIntersectsBoundary("slit not inside the chart")

        c = self.charts[chart_id]
        if dirs is None:
            d_fwd = Angle.from_vector(*v_sub(q, p))
            d_back = (d_fwd + Angle.from_pi(1)).mod_2pi()
        else:
            d_fwd, d_back = dirs

        if at_p is None:
            # interior slit: a fresh degenerate inner loop with two spike tips
            c.verts.append(p)
            vp = len(c.verts) - 1
            c.verts.append(q)
            vq = len(c.verts) - 1
            e_fwd = self._new_edge(chart_id, vp, vq, d_fwd)
            e_back = self._new_edge(chart_id, vq, vp, d_back)
            c.loops.append([e_fwd, e_back])
            return (e_fwd, e_back)

        # boundary-touching slit: splice a spike into the existing corner
        corner = self.corner(at_p)
        rel_in = (
            self.edges[corner.e_in].direction + Angle.from_pi(1) - d_fwd
        ).mod_2pi_positive()
        rel_out = (d_back + Angle.from_pi(1) - self.edges[corner.e_out].direction).mod_2pi_positive()
        if rel_in.cmp(corner.angle) >= 0 or rel_out.cmp(corner.angle) >= 0:
            raise SegmentIntersectsBoundary("slit direction leaves the corner sector")
        c.verts.append(q)
        vq = len(c.verts) - 1
        c.verts.append(p)  # second visit of the base point
        vp2 = len(c.verts) - 1
        e_fwd = self._new_edge(chart_id, at_p[1], vq, d_fwd)
        e_back = self._new_edge(chart_id, vq, vp2, d_back)
        e_out = self.edges[corner.e_out]
        e_out.sv = vp2
        for loop in c.loops:
            if corner.e_out in loop:
                i = loop.index(corner.e_out)
                loop[i:i] = [e_fwd, e_back]
                break
        return (e_fwd, e_back)

    def subdivide_edge(self, eid: int, break_lengths: list) -> list:
        """Split a frontier edge into sub-edges from its start.

        A strict-sum split leaves a trailing remainder edge (included in the
        returned list).
        """
        self._mutate()
        if not break_lengths:
            return [eid]
        if eid in self.glue:
            raise AlreadyGlued("cannot subdivide a glued edge")
        e = self.edges[eid]
        c = self.charts[e.chart]
        disp = self.edge_displacement(eid)
        total = _axis_length(disp)
        if any((b <= 0) if is_exact(b) else (float(b) <= 0) for b in break_lengths):
            raise LengthOverflow("break lengths must be positive")
        acc = 0
        cuts = []
        for b in break_lengths:
            acc = acc + b
            cuts.append(acc)
        if is_exact(acc) and is_exact(total):
            if acc > total:
                raise LengthOverflow(f"breaks sum to {acc} on an edge of length {total}")
            exact_full = acc == total
        else:
            if float(acc) > float(total) + get_tolerance():
                raise LengthOverflow(f"breaks sum to {acc} on an edge of length {total}")
            exact_full = sc_eq(acc, total)
        start = c.verts[e.sv]
        points = []
        for s in cuts[: len(cuts) - (1 if exact_full else 0)]:
            f = s / total if is_exact(s) and is_exact(total) else float(s) / float(total)
            points.append((start[0] + disp[0] * f, start[1] + disp[1] * f))
        return self._split_edge_at_points(eid, points)

    def _split_edge_at_points(self, eid: int, points: list) -> list:
        """Replace one frontier edge by a chain through the given interior points."""
        self._mutate()
        if not points:
            return [eid]
        if eid in self.glue:
            raise AlreadyGlued("cannot subdivide a glued edge")
        e = self.edges[eid]
        c = self.charts[e.chart]
        vis = []
        for p in points:
            c.verts.append(p)
            vis.append(len(c.verts) - 1)
        seq = [e.sv] + vis + [e.ev]
        new_ids = []
        for i in range(len(seq) - 1):
            new_ids.append(self._new_edge(e.chart, seq[i], seq[i + 1], e.direction))
        for loop in c.loops:
            if eid in loop:
                i = loop.index(eid)
                loop[i : i + 1] = new_ids
                break
        del self.edges[eid]
        return new_ids

    # -- gluing ------------------------------------------------------------

    def glue_edges(self, ea: int, eb: int):
        self._mutate()
        if ea == eb:
            raise HolonomyMismatch("an edge cannot be glued to itself")
        if ea in self.glue or eb in self.glue:
            raise AlreadyGlued(f"edge already glued: {ea if ea in self.glue else eb}")
        da = self.edge_displacement(ea)
        db = self.edge_displacement(eb)
        if v_exact(da) and v_exact(db):
            if da[0] != -db[0] or da[1] != -db[1]:
                raise HolonomyMismatch(f"displacements not opposite: {da} vs {db}")
        else:
            t = get_tolerance()
            if (
                abs(float(da[0]) + float(db[0])) > t
                or abs(float(da[1]) + float(db[1])) > t
            ):
                raise HolonomyMismatch(f"displacements not opposite: {da} vs {db}")
        wa = self.edges[ea].direction
        wb = self.edges[eb].direction
        if not (wa + Angle.from_pi(1)).congruent_2pi(wb):
            raise HolonomyMismatch(f"directions not opposite: {wa} vs {wb}")
        pa = self.position(self.edge_start(ea))
        qb = self.position(self.edge_end(eb))
        t_ab = v_sub(qb, pa)
        pb = self.position(self.edge_start(eb))
        qa = self.position(self.edge_end(ea))
        t_ba = v_sub(qa, pb)
        self.glue[ea] = (eb, t_ab)
        self.glue[eb] = (ea, t_ba)
        self._union(self.edge_start(ea), self.edge_end(eb))
        self._union(self.edge_end(ea), self.edge_start(eb))

    def attach_rectangle_cylinder(
        self, ea: int, eb: int, w: Scalar, h: Scalar, s: int, label: str = "cyl"
    ) -> dict:
        """Glue a w-by-h rectangle of s squares onto the slit (ea, eb).

        The short sides take the two slit sides; tops and bottoms are glued
        square-to-square: adjacent pairs swapped, the middle square closed on
        itself (s odd; s = 3 uses the symmetric outer swap, s = 1 is a plain
        cylinder).
        """
        if s < 1 or s % 2 == 0:
            raise ArityMismatch("square count must be odd")
        if not _scalar_eq_mode(w, s * h):
            raise ArityMismatch(f"w != s*h: {w} vs {s}*{h}")
        lsq = self.edge_length_sq(ea)
        if not _scalar_eq_mode(lsq, h * h):
            raise ArityMismatch(f"slit length does not match h = {h}")
        theta = self.edges[ea].direction
        alpha = (theta - Angle.from_pi(Fraction(1, 2))).mod_2pi()
        u_long = unit_vector(alpha)
        u_short = unit_vector(theta)
        c0 = (0 * w, 0 * w)
        c1 = (u_long[0] * w, u_long[1] * w)
        c2 = (u_long[0] * w + u_short[0] * h, u_long[1] * w + u_short[1] * h)
        c3 = (u_short[0] * h, u_short[1] * h)
        cid = self.add_chart(
            [c0, c1, c2, c3],
            label=label,
            dirs=[alpha, theta, (alpha + Angle.from_pi(1)).mod_2pi(), (theta + Angle.from_pi(1)).mod_2pi()],
        )
        bottom, right, top, left = self.chart_edges(cid)
        bot_edges = self._split_edge_at_points(
            bottom,
            [(u_long[0] * (k * h), u_long[1] * (k * h)) for k in range(1, s)],
        )
        top_edges_rtl = self._split_edge_at_points(
            top,
            [
                (
                    u_long[0] * ((s - k) * h) + u_short[0] * h,
                    u_long[1] * ((s - k) * h) + u_short[1] * h,
                )
                for k in range(1, s)
            ],
        )
        top_ltr = list(reversed(top_edges_rtl))
        self.glue_edges(left, ea)
        self.glue_edges(right, eb)
        for ti, bi in _crosswise_pairs(s):
            self.glue_edges(top_ltr[ti - 1], bot_edges[bi - 1])
        return {
            "chart": cid,
            "bottom": bot_edges,
            "top_ltr": top_ltr,
            "left": left,
            "right": right,
        }

    def attach_cross(self, ea: int, eb: int, label: str = "cross") -> dict:
        """Glue a plus-shaped chart onto the slit (ea, eb).

        Arms are 2 long with unit segments glued by the adjacent-swap rule;
        the two short ends of the axis arms come back unglued as the cross's
        own slit (to be glued together when unused, or onto a target slit).
        """
        lsq = self.edge_length_sq(ea)
        theta = self.edges[ea].direction
        L = _sqrt_scalar(lsq)
        alpha = (theta - Angle.from_pi(Fraction(1, 2))).mod_2pi()
        ux, uy = unit_vector(alpha)
        vx, vy = unit_vector(theta)

        def pt(a, b):
            # coordinates in the (long-axis, short-axis) frame of the cross
            return (ux * a + vx * b, uy * a + vy * b)

        two = Fraction(2) if is_exact(L) else 2.0
        pts = [
            pt(-two, 0 * L),
            pt(0 * L, 0 * L),
            pt(0 * L, -two),
            pt(L, -two),
            pt(L, 0 * L),
            pt(L + two, 0 * L),
            pt(L + two, L),
            pt(L, L),
            pt(L, L + two),
            pt(0 * L, L + two),
            pt(0 * L, L),
            pt(-two, L),
        ]
        a0 = alpha
        a1 = (alpha + Angle.from_pi(Fraction(1, 2))).mod_2pi()
        a2 = (alpha + Angle.from_pi(1)).mod_2pi()
        a3 = (alpha + Angle.from_pi(Fraction(3, 2))).mod_2pi()
        dirs = [a0, a3, a0, a1, a0, a1, a2, a1, a2, a3, a2, a3]
        cid = self.add_chart(pts, label=label, dirs=dirs)
        (
            bl_arm,
            b_arm_l,
            cap_bottom,
            b_arm_r,
            br_arm,
            cap_right,
            tr_arm,
            t_arm_r,
            cap_top,
            t_arm_l,
            tl_arm,
            cap_left,
        ) = self.chart_edges(cid)
        one = Fraction(1) if is_exact(L) else 1.0
        bl = self._split_edge_at_points(bl_arm, [pt(-one, 0 * L)])
        b_l = self._split_edge_at_points(b_arm_l, [pt(0 * L, -one)])
        b_r = self._split_edge_at_points(b_arm_r, [pt(L, -one)])
        br = self._split_edge_at_points(br_arm, [pt(L + one, 0 * L)])
        tr = self._split_edge_at_points(tr_arm, [pt(L + one, L)])
        t_r = self._split_edge_at_points(t_arm_r, [pt(L, L + one)])
        t_l = self._split_edge_at_points(t_arm_l, [pt(0 * L, L + one)])
        tl = self._split_edge_at_points(tl_arm, [pt(-one, L)])
        # left arm: outer/inner swap between top and bottom
        self.glue_edges(tl[1], bl[1])  # outer top <-> inner bottom
        self.glue_edges(tl[0], bl[0])  # inner top <-> outer bottom
        # right arm
        self.glue_edges(tr[0], br[0])  # outer top <-> inner bottom
        self.glue_edges(tr[1], br[1])  # inner top <-> outer bottom
        # bottom arm: left side upper <-> right side lower and vice versa
        self.glue_edges(b_l[0], b_r[0])
        self.glue_edges(b_l[1], b_r[1])
        # top arm
        self.glue_edges(t_l[0], t_r[0])
        self.glue_edges(t_l[1], t_r[1])
        self.glue_edges(cap_left, ea)
        self.glue_edges(cap_right, eb)
        return {"chart": cid, "slit": (cap_bottom, cap_top)}

    # -- finalize and global invariants ------------------------------------

    def finalize(self) -> "Surface":
        for c in self.charts.values():
            for loop in c.loops:
                if not loop:
                    raise SurfaceError(f"chart {c.id} has an empty loop")
                for i, eid in enumerate(loop):
                    nxt = loop[(i + 1) % len(loop)]
                    if self.edges[eid].ev != self.edges[nxt].sv:
                        raise SurfaceError(
                            f"loop of chart {c.id} broken at edge {eid}->{nxt}"
                        )
        for eid, (pid, _t) in self.glue.items():
            back = self.glue.get(pid)
            if back is None or back[0] != eid:
                raise SurfaceError(f"gluing of edge {eid} is not symmetric")
        for key in self.instances():
            self.corner(key)  # raises if some vertex is not on a loop
        self._finalized = True
        return self

    def edge_accounting(self) -> tuple:
        """(#edges, #gluings, #frontier); edges = 2*gluings + frontier."""
        n_edges = len(self.edges)
        n_glue = len(self.glue) // 2
        n_front = n_edges - len(self.glue)
        return (n_edges, n_glue, n_front)

    # -- corner walks ------------------------------------------------------

    def class_chains(self, key: Key) -> list:
        """Partition the corners of key's class into maximal walks.

        Artifact-marked corners never share a chain with unmarked ones: a
        walk stops where the mark status flips, so apparatus corners form
        their own (unlabeled) chains instead of fusing real components.
        """
        members = self.class_members(key)
        art = self.artifact_marks
        seen = set()
        chains = []
        for start in members:
            if start in seen:
                continue
            mine = start in art
            # rewind clockwise to the start of the chain (or detect a cycle)
            cur = start
            closed = False
            while True:
                prev = self.step_cw(cur)
                if prev is None or (prev in art) != mine:
                    break
                if prev == start:
                    closed = True
                    cur = start
                    break
                cur = prev
            corners = []
            walker = cur
            while True:
                corners.append(walker)
                seen.add(walker)
                nxt = self.step_ccw(walker)
                if nxt is None or nxt == cur or (nxt in art) != mine:
                    break
                walker = nxt
            if closed:
                chains.append(Chain(corners, True))
            else:
                left_e = self._in_out()[corners[0]][1]
                right_e = self._in_out()[corners[-1]][0]
                chains.append(Chain(corners, False, left_e, right_e))
        chains.sort(key=lambda ch: min(ch.corners))
        return chains

    def chain_angle(self, chain: Chain) -> Angle:
        total = Angle.from_pi(0)
        for k in chain.corners:
            total = total + self.corner(k).angle
        return total

    def cone_angle(self, key: Key) -> tuple:
        """("total" | "at_least", summed Angle) for the instance's class."""
        chains = self.class_chains(key)
        total = Angle.from_pi(0)
        complete = True
        for ch in chains:
            total = total + self.chain_angle(ch)
            if not ch.closed:
                if not (
                    ch.corners[0] in self.boundary_marks
                    and ch.corners[-1] in self.boundary_marks
                ):
                    complete = False
        return ("total" if complete else "at_least", total)

    # -- serialization -----------------------------------------------------

    def edge_index_maps(self) -> tuple:
        """(edge id -> [chart, index], [chart, index] -> edge id)."""
        fwd = {}
        back = {}
        for cid in sorted(self.charts):
            for i, eid in enumerate(self.chart_edges(cid)):
                fwd[eid] = (cid, i)
                back[(cid, i)] = eid
        return fwd, back

    def to_json(self) -> dict:
        fwd, _ = self.edge_index_maps()
        charts = []
        for cid in sorted(self.charts):
            c = self.charts[cid]
            entry = {
                "id": c.id,
                "kind": c.kind,
                "label": c.label,
                "vertices": [
                    [scalar_to_json(x), scalar_to_json(y)] for (x, y) in c.verts
                ],
                "loops": [[self.edges[eid].sv for eid in loop] for loop in c.loops],
                "dirs": [
                    [self.edges[eid].direction.to_json() for eid in loop]
                    for loop in c.loops
                ],
            }
            if c.half_width is not None:
                entry["half_width"] = scalar_to_json(c.half_width)
            charts.append(entry)
        gluings = []
        for eid in sorted(self.glue):
            pid, t = self.glue[eid]
            if fwd[eid] <= fwd[pid]:
                gluings.append(
                    {
                        "a": list(fwd[eid]),
                        "b": list(fwd[pid]),
                        "t": [scalar_to_json(t[0]), scalar_to_json(t[1])],
                    }
                )
        gluings.sort(key=lambda g: (g["a"], g["b"]))
        frontier = sorted(list(fwd[eid]) for eid in self.edges if eid not in self.glue)
        classes = []
        for members in self.classes():
            rep = members[0]
            labeled = any(k in self.class_labels for k in members)
            singular = any(k in self.singular_marks for k in members)
            if len(members) == 1 and not labeled and not singular:
                continue
            classes.append(
                {
                    "label": self.class_label(rep),
                    "singular": singular,
                    "members": [list(k) for k in members],
                }
            )
        return {
            "mode": self.mode,
            "depth": self.depth,
            "charts": charts,
            "gluings": gluings,
            "frontier": frontier,
            "classes": classes,
            "boundary_marks": sorted(list(k) for k in self.boundary_marks),
            "artifact_marks": sorted(list(k) for k in self.artifact_marks),
            "rep_marks": [list(k) for k in self.rep_marks],
            "landmarks": {
                name: list(self.landmarks[name]) for name in sorted(self.landmarks)
            },
            "meta": self.meta,
        }

    def save(self, path: str):
        with open(path, "w") as fh:
            fh.write(dumps_canonical(self.to_json()))
            fh.write("\n")

    @staticmethod
    def from_json(obj: dict) -> "Surface":
        s = Surface(mode=obj["mode"], depth=obj["depth"])
        for ce in obj["charts"]:
            cid = ce["id"]
            verts = [
                (scalar_from_json(x), scalar_from_json(y)) for x, y in ce["vertices"]
            ]
            chart = Chart(
                cid,
                ce["kind"],
                ce["label"],
                verts,
                [],
                scalar_from_json(ce["half_width"]) if "half_width" in ce else None,
            )
            s.charts[cid] = chart
            s._next_chart = max(s._next_chart, cid + 1)
            for loop_vs, loop_dirs in zip(ce["loops"], ce["dirs"]):
                loop = []
                n = len(loop_vs)
                for i in range(n):
                    loop.append(
                        s._new_edge(
                            cid,
                            loop_vs[i],
                            loop_vs[(i + 1) % n],
                            Angle.from_json(loop_dirs[i]),
                        )
                    )
                chart.loops.append(loop)
        _, back = s.edge_index_maps()
        for g in obj["gluings"]:
            ea = back[tuple(g["a"])]
            eb = back[tuple(g["b"])]
            s.glue_edges(ea, eb)
        for cl in obj["classes"]:
            members = [tuple(m) for m in cl["members"]]
            for m in members[1:]:
                s._union(members[0], m)
            if cl["singular"]:
                s.singular_marks.add(members[0])
            if cl["label"] != f"v{members[0][0]}_{members[0][1]}":
                s.class_labels[members[0]] = cl["label"]
        s.boundary_marks = {tuple(k) for k in obj.get("boundary_marks", [])}
        s.artifact_marks = {tuple(k) for k in obj.get("artifact_marks", [])}
        s.rep_marks = [tuple(k) for k in obj.get("rep_marks", [])]
        s.landmarks = {n: tuple(k) for n, k in obj.get("landmarks", {}).items()}
        s.meta = obj.get("meta", {})
        return s.finalize()

    @staticmethod
    def load(path: str) -> "Surface":
        with open(path) as fh:
            return Surface.from_json(json.load(fh))


def dumps_canonical(obj) -> str:
    return json.dumps(obj, separators=(",", ":"), sort_keys=False)


# -- helpers ---------------------------------------------------------------


def _axis_length(d: Point) -> Scalar:
    """Length of a displacement; exact for axis-aligned exact vectors."""
    if v_exact(d):
        if d[0] == 0:
            return abs(d[1])
        if d[1] == 0:
            return abs(d[0])
    return float(v_len_sq(d)) ** 0.5


def _sqrt_scalar(sq: Scalar) -> Scalar:
    if is_exact(sq):
        f = Fraction(sq)
        rn = _isqrt_exact(f.numerator)
        rd = _isqrt_exact(f.denominator)
        if rn is not None and rd is not None:
            return Fraction(rn, rd)
    return float(sq) ** 0.5


def _isqrt_exact(n: int):
    import math

    r = math.isqrt(n)
    return r if r * r == n else None


def _scalar_eq_mode(a: Scalar, b: Scalar) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return sc_eq(a, b)


def _crosswise_pairs(s: int) -> list:
    """(top index, bottom index) gluing pairs, 1-based, left to right."""
    if s == 1:
        return [(1, 1)]
    m = (s + 1) // 2
    pairs = [(m, m)]
    side = m - 1
    if side % 2 == 1:
        # odd flank (only s = 3): the symmetric outer swap
        for k in range(1, side + 1):
            pairs.append((k, s + 1 - k))
            pairs.append((s + 1 - k, k))
        return pairs
    for base in range(1, side, 2):
        pairs.append((base, base + 1))
        pairs.append((base + 1, base))
    for base in range(m + 1, s, 2):
        pairs.append((base, base + 1))
        pairs.append((base + 1, base))
    return pairs


def _segments_cross_open(p, q, a, b, exact: bool) -> bool:
    """Does the open segment (p, q) meet the closed segment [a, b]?"""
    d1 = v_sub(q, p)
    d2 = v_sub(b, a)
    den = v_cross(d1, d2)
    w = v_sub(a, p)
    if exact and v_exact(a) and v_exact(b):
        if den == 0:
            if v_cross(d1, w) != 0:
                return False
            # collinear: overlap iff the parameter intervals intersect openly
            l1 = v_dot(d1, d1)
            t_a = Fraction(v_dot(w, d1), l1)
            t_b = Fraction(v_dot(v_sub(b, p), d1), l1)
            lo, hi = min(t_a, t_b), max(t_a, t_b)
            return hi > 0 and lo < 1
        t = Fraction(v_cross(w, d2), den)
        u = Fraction(v_cross(w, d1), den)
        return 0 < t < 1 and 0 <= u <= 1
    # float path with tolerance
    tol = get_tolerance()
    fd1 = (float(d1[0]), float(d1[1]))
    fd2 = (float(d2[0]), float(d2[1]))
    fden = fd1[0] * fd2[1] - fd1[1] * fd2[0]
    fw = (float(w[0]), float(w[1]))
    scale = max(1.0, abs(fd1[0]) + abs(fd1[1])) * max(1.0, abs(fd2[0]) + abs(fd2[1]))
    if abs(fden) <= tol * scale:
        cr = fd1[0] * fw[1] - fd1[1] * fw[0]
        if abs(cr) > tol * max(1.0, abs(fd1[0]) + abs(fd1[1])):
            return False
        l1 = fd1[0] ** 2 + fd1[1] ** 2
        t_a = (fw[0] * fd1[0] + fw[1] * fd1[1]) / l1
        wb = v_sub(b, p)
        t_b = (float(wb[0]) * fd1[0] + float(wb[1]) * fd1[1]) / l1
        lo, hi = min(t_a, t_b), max(t_a, t_b)
        return hi > tol and lo < 1 - tol
    t = (fw[0] * fd2[1] - fw[1] * fd2[0]) / fden
    u = (fw[0] * fd1[1] - fw[1] * fd1[0]) / fden
    return tol < t < 1 - tol and -tol <= u <= 1 + tol
