"""Builders for the reference families of finitely truncated surfaces.

Each builder lays out a sequence-driven chart complex, glues the finite
portion, and leaves the truncated remainder as frontier edges.  All of them
work in exact arithmetic and return a recorded plan, so the same surface can
be rebuilt at any depth from the plan metadata alone.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

from .plans import ConstructionPlan, PlanRecorder, build, family


class InvalidSequence(Exception):
    pass


class InvalidRatio(Exception):
    pass


class AllZeroPrefix(Exception):
    pass


ZERO = Fraction(0)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float):
        return Fraction(x).limit_denominator(1 << 40)
    return Fraction(x)


@dataclass(frozen=True)
class BitSequence:
    """Finite 0/1 prefix of an eventually vanishing binary sequence."""

    bits: tuple

    @staticmethod
    def coerce(value) -> "BitSequence":
        if isinstance(value, BitSequence):
            return value
        if isinstance(value, str):
            raw = [ch for ch in value.strip()]
        else:
            raw = list(value)
        bits = []
        for b in raw:
            n = int(b)
            if n not in (0, 1):
                raise ValueError(f"bit sequence entries must be 0 or 1, got {b!r}")
            bits.append(n)
        return BitSequence(tuple(bits))

    def __str__(self) -> str:
        return "".join(str(b) for b in self.bits)

    def __len__(self) -> int:
        return len(self.bits)


# ---------------------------------------------------------------------------
# slit plane with harmonically paired rewirings


def _sequence_terms(a, count: int) -> list:
    if a is None:
        return [Fraction(1, n) for n in range(1, count + 1)]
    if callable(a):
        return [_as_fraction(a(n)) for n in range(1, count + 1)]
    terms = [_as_fraction(x) for x in a]
    if len(terms) < count:
        raise InvalidSequence(f"need at least {count} terms, got {len(terms)}")
    return terms[:count]


@family("harmonic")
def plan_harmonic(depth: int, a=None) -> ConstructionPlan:
    """Plane with one long slit whose upper side is regrouped in swapped pairs.

    The lower side from the far end pairs (a_{2k-1}, a_{2k}) against the upper
    pieces in order, which transports a neighborhood of the slit base around
    the far end infinitely often in the untruncated limit.
    """
    if depth < 1:
        raise InvalidSequence("depth must be at least 1")
    count = 2 * depth + 2
    terms = _sequence_terms(a, count)
    if any(t <= 0 for t in terms):
        raise InvalidSequence("sequence terms must be positive")
    # a summable-looking tail starves the pairing; insist on slow decay
    if sum(terms[count // 2 :]) < terms[0] / 4:
        raise InvalidSequence("sequence tail vanishes too fast for the pairing")
    body = terms[: 2 * depth]
    tail = terms[2 * depth] + terms[2 * depth + 1]
    total = sum(body) + tail
    hw = Fraction(math.ceil(total) + 1)

    rec = PlanRecorder("exact", depth)
    plane = rec.add_truncated_plane(hw, label="plane")
    side_pq, side_qp = rec.cut_slit(plane, (ZERO, ZERO), (total, ZERO))
    upper = rec.subdivide_edge(side_pq, body)
    lower_breaks = [tail]
    for k in range(depth, 0, -1):
        lower_breaks.append(terms[2 * k - 2])
        lower_breaks.append(terms[2 * k - 1])
    lower = rec.subdivide_edge(side_qp, lower_breaks)
    paired = {}
    idx = 1
    for k in range(depth, 0, -1):
        paired[2 * k - 1] = lower[idx]
        paired[2 * k] = lower[idx + 1]
        idx += 2
    for n in range(1, 2 * depth + 1):
        rec.glue_edges(upper[n - 1], paired[n])
    vp = rec.surface.instance_at(plane, (ZERO, ZERO))
    vq = rec.surface.instance_at(plane, (total, ZERO))
    rec.declare_singular(vp, "sigma")
    rec.set_landmark("slit-base", vp)
    rec.set_landmark("slit-far", vq)
    realized = None if a is None else [str(t) for t in terms]
    return rec.plan(
        "harmonic",
        {"a": realized},
        meta={"family": {"name": "harmonic", "args": {"a": realized}}},
    )


def build_harmonic(a=None, depth: int = 8):
    return build(plan_harmonic(depth, a=a))


# ---------------------------------------------------------------------------
# torus with a geometrically subdivided slit


@family("geometric")
def plan_geometric(depth: int, variant: str = "i", ratio=Fraction(1, 2)) -> ConstructionPlan:
    """Torus slit regrouped by a geometric sequence.

    Variant "i" glues each upper piece straight back to the lower piece below
    it; both slit endpoints then carry unbounded rotational components that
    cannot be told apart at any scale.  Variant "ii" regroups the lower side
    in swapped pairs from the far end, which pins the far endpoint down to a
    single full turn while the base endpoint stays unbounded.
    """
    q = _as_fraction(ratio)
    if not ZERO < q < 1:
        raise InvalidRatio(f"ratio must lie strictly between 0 and 1, got {ratio}")
    if variant not in ("i", "ii"):
        raise ValueError(f"variant must be 'i' or 'ii', got {variant!r}")
    if depth < 2:
        raise InvalidRatio("depth must be at least 2")
    m = 2 * depth
    a = [(1 - q) * q ** (n - 1) for n in range(1, m + 1)]
    tail = q**m

    rec = PlanRecorder("exact", depth)
    two = Fraction(2)
    torus = rec.add_chart([(ZERO, ZERO), (two, ZERO), (two, two), (ZERO, two)], label="torus")
    bottom, right, top, left = rec.surface.chart_edges(torus)
    rec.glue_edges(bottom, top)
    rec.glue_edges(left, right)
    p = (Fraction(1, 2), Fraction(1))
    qpt = (Fraction(3, 2), Fraction(1))
    side_pq, side_qp = rec.cut_slit(torus, p, qpt)
    upper = rec.subdivide_edge(side_pq, a)
    if variant == "i":
        lower = rec.subdivide_edge(side_qp, a)
        for n in range(m):
            rec.glue_edges(upper[n], lower[n])
    else:
        lower_breaks = [tail]
        for k in range(depth, 0, -1):
            lower_breaks.append(a[2 * k - 2])
            lower_breaks.append(a[2 * k - 1])
        lower = rec.subdivide_edge(side_qp, lower_breaks)
        paired = {}
        idx = 1
        for k in range(depth, 0, -1):
            paired[2 * k - 1] = lower[idx]
            paired[2 * k] = lower[idx + 1]
            idx += 2
        for n in range(1, m + 1):
            rec.glue_edges(upper[n - 1], paired[n])
    vp = rec.surface.instance_at(torus, p)
    vq = rec.surface.instance_at(torus, qpt)
    partial = ZERO
    cums = []
    for x in a:
        partial += x
        cums.append(partial)
    if variant == "i":
        rec.mark_rep(rec.surface.instance_at(torus, (p[0] + cums[m - 3], p[1])))
        rec.mark_rep(rec.surface.instance_at(torus, (p[0] + cums[m - 2], p[1])))
    else:
        rec.mark_boundary(vq)
        rec.mark_rep(rec.surface.instance_at(torus, (p[0] + cums[0], p[1])))
        rec.mark_rep(vq)
    rec.declare_same_point(vp, vq)
    rec.declare_singular(vp, "sigma")
    rec.set_landmark("slit-base", vp)
    rec.set_landmark("slit-far", vq)
    args = {"variant": variant, "ratio": str(q)}
    return rec.plan("geometric", dict(args), meta={"family": {"name": "geometric", "args": args}})


def build_geometric(variant: str = "i", ratio=Fraction(1, 2), depth: int = 10):
    return build(plan_geometric(depth, variant=variant, ratio=ratio))


# ---------------------------------------------------------------------------
# square with dyadic opposite-side rewiring


@family("chamanara")
def plan_chamanara(depth: int) -> ConstructionPlan:
    """Unit square with opposite sides glued piecewise at dyadic scales.

    Bottom pieces (from the left) meet top pieces (from the right) and left
    pieces (from the top) meet right pieces (from the bottom), so all four
    square corners become one singular point whose approach space splits into
    two unbounded components and two isolated quarter turns.
    """
    if depth < 2:
        raise InvalidSequence("depth must be at least 2")
    n = depth
    rec = PlanRecorder("exact", depth)
    one = Fraction(1)
    sq = rec.add_chart([(ZERO, ZERO), (one, ZERO), (one, one), (ZERO, one)], label="square")
    bottom, right, top, left = rec.surface.chart_edges(sq)
    halves = [Fraction(1, 2**k) for k in range(1, n + 1)]
    b = rec.subdivide_edge(bottom, halves)
    t = rec.subdivide_edge(top, halves)
    side_breaks = [Fraction(1, 2**n)] + [Fraction(1, 2**k) for k in range(n, 0, -1)]
    r = rec.subdivide_edge(right, side_breaks)
    l = rec.subdivide_edge(left, side_breaks)
    for k in range(n):
        rec.glue_edges(b[k], t[k])
        rec.glue_edges(l[k + 1], r[k + 1])
    c00 = rec.surface.instance_at(sq, (ZERO, ZERO))
    c10 = rec.surface.instance_at(sq, (one, ZERO))
    c11 = rec.surface.instance_at(sq, (one, one))
    c01 = rec.surface.instance_at(sq, (ZERO, one))
    rec.declare_same_point(c00, c10)
    rec.declare_same_point(c00, c11)
    rec.declare_same_point(c00, c01)
    rec.declare_singular(c00, "sigma")
    rec.mark_boundary(c10)
    rec.mark_boundary(c01)
    rec.mark_rep(rec.surface.instance_at(sq, (Fraction(3, 4), ZERO)))
    rec.mark_rep(rec.surface.instance_at(sq, (Fraction(1, 2), ZERO)))
    rec.mark_rep(c10)
    rec.mark_rep(c01)
    rec.set_landmark("corner", c00)
    return rec.plan("chamanara", {}, meta={"family": {"name": "chamanara", "args": {}}})


def build_chamanara(depth: int = 8):
    return build(plan_chamanara(depth))


# ---------------------------------------------------------------------------
# infinite staircase of shrinking boxes


def _box_sequences(heights, widths, depth: int):
    n = depth
    if heights is None:
        hs = [Fraction(1)] * n
    elif callable(heights):
        hs = [_as_fraction(heights(k)) for k in range(1, n + 1)]
    else:
        hs = [_as_fraction(x) for x in heights]
        if len(hs) < n:
            raise InvalidSequence(f"need at least {n} heights, got {len(hs)}")
        hs = hs[:n]
    if widths is None:
        ws = [Fraction(1, 2**k) for k in range(1, n + 2)]
    elif callable(widths):
        ws = [_as_fraction(widths(k)) for k in range(1, n + 2)]
    else:
        ws = [_as_fraction(x) for x in widths]
        if len(ws) < n + 1:
            raise InvalidSequence(f"need at least {n + 1} widths, got {len(ws)}")
        ws = ws[: n + 1]
    if any(h <= 0 for h in hs):
        raise InvalidSequence("heights must be positive")
    if any(w <= 0 for w in ws):
        raise InvalidSequence("widths must be positive")
    for i in range(len(ws) - 1):
        if ws[i + 1] >= ws[i]:
            raise InvalidSequence("widths must decrease strictly")
    if ws[n] >= ws[0] / 2:
        raise InvalidSequence("widths must at least halve across the stack")
    return hs, ws


def _stack_boxes(rec: PlanRecorder, hs: list, ws: list):
    """Shared staircase: glued column of boxes whose tops feed the base floor.

    Returns (box chart ids, base floor piece ids keyed by box index, the
    remainder piece, and the cumulative box top heights).
    """
    n = len(hs)
    boxes = []
    tops = {}
    bottoms = {}
    levels = [ZERO]
    y = ZERO
    for k in range(1, n + 1):
        w, h = ws[k - 1], hs[k - 1]
        cid = rec.add_chart([(ZERO, y), (w, y), (w, y + h), (ZERO, y + h)], label=f"box{k}")
        eb, er, et, el = rec.surface.chart_edges(cid)
        rec.glue_edges(el, er)
        boxes.append(cid)
        tops[k] = et
        bottoms[k] = eb
        y += h
        levels.append(y)
    exposed = {}
    rest = {}
    for k in range(1, n + 1):
        pieces = rec.subdivide_edge(tops[k], [ws[k - 1] - ws[k]])
        exposed[k], rest[k] = pieces[0], pieces[1]
    breaks = [ws[n]] + [ws[k - 1] - ws[k] for k in range(n, 0, -1)]
    floor = rec.subdivide_edge(bottoms[1], breaks)
    d = {}
    for i, k in enumerate(range(n, 0, -1)):
        d[k] = floor[1 + i]
    for k in range(1, n + 1):
        rec.glue_edges(exposed[k], d[k])
    for k in range(1, n):
        rec.glue_edges(rest[k], bottoms[k + 1])
    return boxes, d, floor[0], levels


def _finish_stack(rec: PlanRecorder, boxes: list, ws: list, levels: list):
    n = len(boxes)
    origin = rec.surface.instance_at(boxes[0], (ZERO, ZERO))
    rec.declare_singular(origin, "sigma")
    rec.mark_boundary(origin)
    stub_top = rec.surface.instance_at(boxes[-1], (ws[n], levels[n]))
    stub_floor = rec.surface.instance_at(boxes[0], (ws[n], ZERO))
    rec.mark_artifact(stub_top)
    rec.mark_artifact(stub_floor)
    rec.set_landmark("origin", origin)


@family("boxes")
def plan_stack_of_boxes(depth: int, heights=None, widths=None) -> ConstructionPlan:
    """Column of shrinking boxes whose tops glue back into the base floor.

    Crossing the exposed part of any box top re-enters the bottom of the base
    box, so upward geodesics climb the stack forever while the singular corner
    at the origin accumulates every box corner into one chain.
    """
    if depth < 2:
        raise InvalidSequence("depth must be at least 2")
    hs, ws = _box_sequences(heights, widths, depth)
    rec = PlanRecorder("exact", depth)
    boxes, _, _, levels = _stack_boxes(rec, hs, ws)
    _finish_stack(rec, boxes, ws, levels)
    hargs = None if heights is None else [str(h) for h in hs]
    wargs = None if widths is None else [str(w) for w in ws]
    args = {"heights": hargs, "widths": wargs}
    return rec.plan("boxes", dict(args), meta={"family": {"name": "boxes", "args": args}})


def build_stack_of_boxes(heights=None, widths=None, depth: int = 10):
    return build(plan_stack_of_boxes(depth, heights=heights, widths=widths))


# ---------------------------------------------------------------------------
# box stack with one recording window per binary digit


@family("xr")
def plan_xr(depth: int, bits="1") -> ConstructionPlan:
    """Box stack with a capped slit window at (2^-n, 0) wherever bit r_n = 1.

    The window at level n is a vertical slit of height 4^-n capped by a flat
    rectangle, so a 1-bit splits the floor corner there into a pair of quarter
    turns joined through the cap while a 0-bit leaves the plain corner.  Bits
    beyond the realized prefix are truncated to 0.
    """
    seq = BitSequence.coerce(bits)
    if len(seq) == 0 or all(b == 0 for b in seq.bits):
        raise AllZeroPrefix("the recorded prefix must contain a 1")
    if depth < 2:
        raise InvalidSequence("depth must be at least 2")
    n = depth
    realized = list(seq.bits[: n - 1]) + [0] * max(0, (n - 1) - len(seq))
    hs, ws = _box_sequences(None, None, depth)
    rec = PlanRecorder("exact", depth)
    boxes, _, _, levels = _stack_boxes(rec, hs, ws)
    base = boxes[0]
    for k in range(2, n + 1):
        if realized[k - 2] == 0:
            continue
        x = Fraction(1, 2**k)
        h = Fraction(1, 4**k)
        side_pq, side_qp = rec.cut_slit(base, (x, ZERO), (x, h))
        cap = rec.add_chart([(ZERO, ZERO), (Fraction(1), ZERO), (Fraction(1), h), (ZERO, h)], label=f"cap{k}")
        cb, cr, ct, cl = rec.surface.chart_edges(cap)
        rec.glue_edges(ct, cb)
        rec.glue_edges(cl, side_pq)
        rec.glue_edges(cr, side_qp)
    _finish_stack(rec, boxes, ws, levels)
    for k in range(2, n + 1):
        rec.set_landmark(f"window-{k}", rec.surface.instance_at(base, (Fraction(1, 2**k), ZERO)))
    args = {"bits": str(seq)}
    return rec.plan("xr", dict(args), meta={"family": {"name": "xr", "args": args}})


def build_xr(bits, depth: int = 10):
    return build(plan_xr(depth, bits=bits))
