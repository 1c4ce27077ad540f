"""Straight-line geodesic flow across gluings and bounded metric estimates.

Traces are parameterized internally by the ray parameter lambda with respect
to a direction vector (exact on the pi/4 grid), so that crossing points stay
rational on rational charts even for diagonal directions; reported lengths
are lambda * |direction vector|.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from .numeric import (
    Angle,
    Scalar,
    get_tolerance,
    is_exact,
    seg_point_dist_sq,
    v_add,
    v_cross,
    v_dot,
    v_exact,
    v_len_sq,
    v_scale,
    v_sub,
)
from .surface import Key, Point, Surface


class TraceError(Exception):
    pass


class InsufficientLength(TraceError):
    pass


COMPLETED = "completed"
SINGULAR_HIT = "singular_hit"
FRONTIER_HIT = "frontier_hit"
BUDGET_EXHAUSTED = "budget_exhausted"

DEFAULT_BUDGET = 64


@dataclass(frozen=True)
class PointRef:
    chart: int
    pos: Point


@dataclass
class TracePiece:
    chart: int
    entry: Point
    exit: Point
    translation: Point  # chart coords + translation = coords in the start frame


@dataclass
class GeodesicTrace:
    start: PointRef
    direction: Angle
    pieces: list
    length: Scalar
    terminal: str
    hit_instance: Optional[Key] = None
    hit_class: Optional[Key] = None
    frontier_edge: Optional[int] = None
    crossings: int = 0

    @property
    def end(self) -> PointRef:
        last = self.pieces[-1]
        return PointRef(last.chart, last.exit)

    def to_json(self):
        from .numeric import scalar_to_json

        return {
            "start": {
                "chart": self.start.chart,
                "pos": [scalar_to_json(self.start.pos[0]), scalar_to_json(self.start.pos[1])],
            },
            "direction": self.direction.to_json(),
            "terminal": self.terminal,
            "length": scalar_to_json(self.length),
            "crossings": self.crossings,
            "pieces": [
                {
                    "chart": p.chart,
                    "entry": [scalar_to_json(p.entry[0]), scalar_to_json(p.entry[1])],
                    "exit": [scalar_to_json(p.exit[0]), scalar_to_json(p.exit[1])],
                }
                for p in self.pieces
            ],
            "hit_class": list(self.hit_class) if self.hit_class else None,
        }


def _ray_events(surface: Surface, chart_id: int, cur: Point, d: Point):
    """Candidate stops along cur + lambda*d: vertex hits and edge exits.

    Yields (lam, kind, payload); vertex hits use perpendicular distance <= tol
    in approx mode and exact collinearity in exact mode.
    """
    chart = surface.charts[chart_id]
    exact = v_exact(cur) and v_exact(d)
    tol = get_tolerance()
    dlen = math.sqrt(float(v_len_sq(d)))
    events = []
    for vi, v in enumerate(chart.verts):
        w = v_sub(v, cur)
        if exact and v_exact(v):
            if v_cross(d, w) == 0:
                lam = Fraction(v_dot(w, d), v_len_sq(d))
                if lam > 0:
                    events.append((lam, "vertex", (chart_id, vi)))
        else:
            if abs(float(v_cross(d, w))) <= tol * dlen:
                lam = float(v_dot(w, d)) / float(v_len_sq(d))
                if lam > tol / dlen:
                    events.append((lam, "vertex", (chart_id, vi)))
    for eid in surface.chart_edges(chart_id):
        e = surface.edges[eid]
        a, b = chart.verts[e.sv], chart.verts[e.ev]
        ab = v_sub(b, a)
        den = v_cross(d, ab)
        exact_e = exact and v_exact(a) and v_exact(b)
        if exact_e:
            if den <= 0:
                # interior lies left of the edge, so exits have cross(d, ab) > 0
                continue
            w = v_sub(a, cur)
            lam = Fraction(v_cross(w, ab), den)
            s = Fraction(v_cross(w, d), den)
            if lam > 0 and 0 < s < 1:
                events.append((lam, "edge", eid))
        else:
            ab_len = math.sqrt(float(v_len_sq(ab)))
            fden = float(den)
            if fden <= tol * dlen * max(1.0, ab_len):
                continue
            w = v_sub(a, cur)
            lam = float(v_cross(w, ab)) / fden
            s = float(v_cross(w, d)) / fden
            s_margin = tol / ab_len
            if lam > tol / dlen and s_margin < s < 1 - s_margin:
                events.append((lam, "edge", eid))
    return events


def trace(
    surface: Surface,
    start: PointRef,
    direction: Angle,
    length: Scalar,
    budget: int = DEFAULT_BUDGET,
) -> GeodesicTrace:
    if float(length) <= 0:
        raise TraceError("length must be positive")
    d = direction.vector()
    dlen_sq = v_len_sq(d)
    dlen = math.sqrt(float(dlen_sq))
    if is_exact(length) and v_exact(d) and _is_square(dlen_sq):
        lam_target: Scalar = Fraction(length) / _exact_sqrt(dlen_sq)
    else:
        lam_target = float(length) / dlen
    pieces = []
    translation = (
        (Fraction(0), Fraction(0)) if v_exact(start.pos) and v_exact(d) else (0.0, 0.0)
    )
    cur = start.pos
    chart = start.chart
    lam_done: Scalar = 0
    crossings = 0
    while True:
        events = _ray_events(surface, chart, cur, d)
        remaining = lam_target - lam_done
        best = None
        if events:
            events.sort(key=lambda ev: float(ev[0]))
            best = events[0]
            for ev in events[1:]:
                if not _lam_close(ev[0], best[0]):
                    break
                if ev[1] == "vertex" and best[1] == "edge":
                    best = ev  # vertex wins ties: endpoint coincidence
        if best is None or _lam_less(remaining, best[0]) or (
            _lam_close(best[0], remaining) and best[1] == "edge"
        ):
            end = v_add(cur, v_scale(d, remaining))
            pieces.append(TracePiece(chart, cur, end, translation))
            return GeodesicTrace(
                start, direction, pieces, length, COMPLETED, crossings=crossings
            )
        lam, kind, payload = best
        hit = v_add(cur, v_scale(d, lam))
        lam_done = lam_done + lam
        if kind == "vertex":
            hit = surface.position(payload)
            pieces.append(TracePiece(chart, cur, hit, translation))
            return GeodesicTrace(
                start,
                direction,
                pieces,
                _lam_to_length(lam_done, dlen_sq),
                SINGULAR_HIT,
                hit_instance=payload,
                hit_class=surface.class_of(payload),
                crossings=crossings,
            )
        eid = payload
        pieces.append(TracePiece(chart, cur, hit, translation))
        partner = surface.glue.get(eid)
        if partner is None:
            return GeodesicTrace(
                start,
                direction,
                pieces,
                _lam_to_length(lam_done, dlen_sq),
                FRONTIER_HIT,
                frontier_edge=eid,
                crossings=crossings,
            )
        if crossings + 1 > budget:
            return GeodesicTrace(
                start,
                direction,
                pieces,
                _lam_to_length(lam_done, dlen_sq),
                BUDGET_EXHAUSTED,
                crossings=crossings,
            )
        crossings += 1
        pid, t = partner
        cur = v_add(hit, t)
        chart = surface.edges[pid].chart
        translation = v_sub(translation, t)


def _lam_less(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a < b
    return float(a) < float(b)


def _lam_close(a, b) -> bool:
    if is_exact(a) and is_exact(b):
        return a == b
    return abs(float(a) - float(b)) <= get_tolerance()


def _lam_to_length(lam, dlen_sq) -> Scalar:
    if is_exact(lam) and _is_square(dlen_sq):
        return lam * _exact_sqrt(dlen_sq)
    return float(lam) * math.sqrt(float(dlen_sq))


def _is_square(x) -> bool:
    if not is_exact(x):
        return False
    f = Fraction(x)
    return (
        math.isqrt(f.numerator) ** 2 == f.numerator
        and math.isqrt(f.denominator) ** 2 == f.denominator
    )


def _exact_sqrt(x) -> Fraction:
    f = Fraction(x)
    return Fraction(math.isqrt(f.numerator), math.isqrt(f.denominator))


def develop(tr: GeodesicTrace) -> list:
    """Trace pieces mapped into the frame of the start chart."""
    return [
        (v_add(p.entry, p.translation), v_add(p.exit, p.translation)) for p in tr.pieces
    ]


def collinearity_deviation(tr: GeodesicTrace) -> float:
    """Max distance of developed breakpoints from the ideal straight line."""
    d = tr.direction.vector()
    dlen = math.sqrt(float(v_len_sq(d)))
    p0 = tr.start.pos
    worst = 0.0
    for a, b in develop(tr):
        for pt in (a, b):
            dev = abs(float(v_cross(d, v_sub(pt, p0)))) / dlen
            worst = max(worst, dev)
    return worst


def _segment_inside_chart(surface: Surface, chart_id: int, x: Point, y: Point) -> bool:
    """Is the straight segment from x to y contained in the closed chart?"""
    d = v_sub(y, x)
    if v_len_sq(d) == 0:
        return True
    for lam, kind, _payload in _ray_events(surface, chart_id, x, d):
        if kind == "edge" and _lam_less(lam, 1) and not _lam_close(lam, 1):
            return False
    return True


def _euclid(x: Point, y: Point) -> float:
    return math.sqrt(float(v_len_sq(v_sub(x, y))))


def _chart_clearance(surface: Surface, ref: PointRef) -> float:
    """Distance from the point to the nearest glued edge of its chart."""
    best = math.inf
    c = surface.charts[ref.chart]
    for eid in surface.chart_edges(ref.chart):
        if eid not in surface.glue:
            continue
        e = surface.edges[eid]
        dsq = seg_point_dist_sq(ref.pos, c.verts[e.sv], c.verts[e.ev])
        best = min(best, math.sqrt(float(dsq)))
    return best


def _seg_dist_float(px, py, ax, ay, bx, by) -> float:
    dx, dy = bx - ax, by - ay
    wx, wy = px - ax, py - ay
    dd = dx * dx + dy * dy
    if dd <= 0.0:
        return math.hypot(wx, wy)
    s = (wx * dx + wy * dy) / dd
    if s < 0.0:
        s = 0.0
    elif s > 1.0:
        s = 1.0
    return math.hypot(wx - s * dx, wy - s * dy)


def developed_copies(
    surface: Surface, chart_id: int, center: Point, radius: float,
    max_copies: int = 4096,
):
    """Chart copies (chart, translation-to-base-frame) whose glued entry edge
    comes within `radius` of `center` in the base frame.

    Expands smallest translations first.  Sound for bounded searches up to
    the copy cap: shifted regluings can develop to infinitely many distinct
    translations, so the flood stops after `max_copies` copies and the cap
    keeps the least-wrapped copies.
    """
    cx, cy = float(center[0]), float(center[1])
    fverts = {}

    def floats(cid):
        got = fverts.get(cid)
        if got is None:
            got = [(float(v[0]), float(v[1])) for v in surface.charts[cid].verts]
            fverts[cid] = got
        return got

    zero_key = _t_key((0.0, 0.0))
    seen = {(chart_id, zero_key)}
    zero = (Fraction(0), Fraction(0))
    out = []
    heap = [(0.0, zero_key, chart_id, zero)]
    while heap and len(out) < max_copies:
        _, _, cid, t = heapq.heappop(heap)
        out.append((cid, t))
        fv = floats(cid)
        tx, ty = float(t[0]), float(t[1])
        for eid in surface.chart_edges(cid):
            partner = surface.glue.get(eid)
            if partner is None:
                continue
            e = surface.edges[eid]
            a = fv[e.sv]
            b = fv[e.ev]
            if _seg_dist_float(cx, cy, a[0] + tx, a[1] + ty, b[0] + tx, b[1] + ty) > radius:
                continue
            pid, tr = partner
            nchart = surface.edges[pid].chart
            nt = v_sub(t, tr)
            key = (nchart, _t_key(nt))
            if key in seen:
                continue
            seen.add(key)
            heapq.heappush(heap, (math.hypot(*key[1]), key[1], nchart, nt))
    return out


def _t_key(t):
    return (round(float(t[0]), 9), round(float(t[1]), 9))


def distance_bounds(
    surface: Surface, x: PointRef, y: PointRef, budget: int = 8,
    early_stop: float = None,
) -> tuple:
    """(lower, upper) bounds on the completion metric between two points.

    When the caller only cares whether the distance clears a threshold,
    passing it as `early_stop` skips the straight-segment verification once
    the lower bound alone settles the question, and never traces candidates
    that are too long to matter.
    """
    if x.chart == y.chart and surface._same_point(x.pos, y.pos):
        return (0, 0)
    clear = _chart_clearance(surface, x) + _chart_clearance(surface, y)
    if x.chart == y.chart:
        # shortcut through gluings can still undercut the straight segment
        lower = min(_euclid(x.pos, y.pos), clear)
    else:
        lower = clear
    if early_stop is not None and lower >= early_stop:
        return (lower, math.inf)
    upper = math.inf
    if x.chart == y.chart:
        # the in-chart straight segment settles almost every near-threshold
        # query; verifying it before flooding copies matters when wrapped
        # near-duplicates would otherwise sort ahead of it
        disp = v_sub(y.pos, x.pos)
        ddist = math.sqrt(float(v_len_sq(disp)))
        if early_stop is None or ddist < early_stop:
            dlen = _candidate_length(disp)
            tr = trace(surface, x, Angle.from_vector(*disp), dlen, budget=4 * budget + 8)
            if _reaches(surface, tr, y, dlen):
                upper = ddist
                if early_stop is not None:
                    return (min(lower, upper), upper)
    # threshold mode tolerates an unsettled answer (caller treats it as not
    # contained), so the candidate flood can stop much earlier and only the
    # shortest few connections are worth verifying
    cap = 4096 if early_stop is None else 512
    traced = 0
    for dist, direction, length in _straight_candidates(
        surface, x, y, budget, radius=early_stop, max_states=cap
    ):
        if dist >= upper:
            break
        if early_stop is not None and (dist >= early_stop or traced >= 12):
            break
        traced += 1
        tr = trace(surface, x, direction, length, budget=4 * budget + 8)
        if _reaches(surface, tr, y, length):
            upper = dist
            break
    return (min(lower, upper), upper)


def _reaches(surface: Surface, tr: GeodesicTrace, y: PointRef, length) -> bool:
    if tr.terminal == COMPLETED and tr.end.chart == y.chart and surface._same_point(
        tr.end.pos, y.pos
    ):
        return True
    return (
        tr.terminal == SINGULAR_HIT
        and tr.hit_instance[0] == y.chart
        and surface._same_point(surface.position(tr.hit_instance), y.pos)
        and _lam_close(tr.length, length)
    )


def _straight_candidates(
    surface: Surface, x: PointRef, y: PointRef, budget: int,
    radius: float = None, max_states: int = 4096,
):
    """Candidate straight connections via breadth-limited developed copies.

    A radius (when known) prunes crossings through edges too far from x to
    carry a connection that short; the state cap keeps shifted regluings from
    developing forever.
    """
    states = _copy_flood(surface, x.chart, x.pos, radius, budget, max_states)
    px, py = float(x.pos[0]), float(x.pos[1])
    yx, yy = float(y.pos[0]), float(y.pos[1])
    # in threshold mode anything beyond the prune radius gets discarded by
    # the caller anyway, so skip the exact arithmetic for those
    cutoff = None if radius is None else radius + 1e-9
    cands = []
    for cid, t in states:
        if cid != y.chart:
            continue
        fdist = math.hypot(yx + float(t[0]) - px, yy + float(t[1]) - py)
        if cutoff is not None and fdist > cutoff:
            continue
        target = v_add(y.pos, t)
        disp = v_sub(target, x.pos)
        if v_len_sq(disp) == 0:
            continue
        dist = math.sqrt(float(v_len_sq(disp)))
        cands.append((dist, Angle.from_vector(*disp), _candidate_length(disp)))
    cands.sort(key=lambda c: c[0])
    return cands


def _copy_flood(
    surface: Surface, chart_id: int, pos, radius, budget: int, max_states: int
):
    """Developed copies reachable from pos by crossing nearby glued edges.

    Memoized on the surface: repeated threshold queries from one ball center
    re-enter with identical arguments.
    """
    cache = getattr(surface, "_flood_cache", None)
    if cache is None:
        cache = surface._flood_cache = {}
    ck = (chart_id, pos, radius, budget, max_states)
    got = cache.get(ck)
    if got is not None:
        return got
    px, py = float(pos[0]), float(pos[1])
    fverts = {}

    def floats(cid):
        f = fverts.get(cid)
        if f is None:
            f = [(float(v[0]), float(v[1])) for v in surface.charts[cid].verts]
            fverts[cid] = f
        return f

    states = [(chart_id, (Fraction(0), Fraction(0)))]
    seen = {(chart_id, _t_key((0.0, 0.0)))}
    depth = {(chart_id, _t_key((0.0, 0.0))): 0}
    qi = 0
    while qi < len(states) and len(states) < max_states:
        cid, t = states[qi]
        qi += 1
        dkey = depth[(cid, _t_key(t))]
        if dkey >= budget:
            continue
        fv = floats(cid)
        tx, ty = float(t[0]), float(t[1])
        for eid in surface.chart_edges(cid):
            partner = surface.glue.get(eid)
            if partner is None:
                continue
            if radius is not None:
                e = surface.edges[eid]
                a = fv[e.sv]
                b = fv[e.ev]
                if _seg_dist_float(px, py, a[0] + tx, a[1] + ty, b[0] + tx, b[1] + ty) > radius:
                    continue
            pid, tr = partner
            nchart = surface.edges[pid].chart
            nt = v_sub(t, tr)
            key = (nchart, _t_key(nt))
            if key in seen:
                continue
            seen.add(key)
            depth[key] = dkey + 1
            states.append((nchart, nt))
            if len(states) >= max_states:
                break
    if len(cache) > 256:
        cache.clear()
    cache[ck] = states
    return states


def _candidate_length(disp) -> Scalar:
    lsq = v_len_sq(disp)
    if _is_square(lsq):
        return _exact_sqrt(lsq)
    return math.sqrt(float(lsq))


def d_eps_lower(
    surface: Surface,
    ray1: tuple,
    ray2: tuple,
    eps: Scalar,
    samples: int = 64,
    budget: int = DEFAULT_BUDGET,
) -> float:
    """Sampled sup-distance between two rays over (0, eps).

    Each ray is (PointRef, Angle).  Exact only in spirit: a lower estimate of
    the sup, from `samples` evenly spaced parameters.
    """
    best = 0.0
    for k in range(1, samples + 1):
        t = eps * Fraction(k, samples + 1) if is_exact(eps) else float(eps) * k / (samples + 1)
        p1 = _ray_point(surface, ray1, t, budget)
        p2 = _ray_point(surface, ray2, t, budget)
        _lo, up = distance_bounds(surface, p1, p2, budget=8)
        if up == math.inf:
            continue
        best = max(best, float(up))
    return best


def _ray_point(surface: Surface, ray: tuple, t: Scalar, budget: int) -> PointRef:
    start, direction = ray
    tr = trace(surface, start, direction, t, budget=budget)
    if tr.terminal != COMPLETED:
        raise InsufficientLength(f"ray not defined at parameter {t}: {tr.terminal}")
    return tr.end
