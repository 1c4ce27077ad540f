"""Radial slit decorations of the plane with branch-pair or cylinder wirings.

Both builders cut slits outward from one point of a truncated plane, in
increasing direction order so every origin corner lands in a predictable
sector.  The slit sides are then rewired either in opposite pairs or through
attached square cylinders; the branch structure keeps each rotational
component finite while the component count (or the component itself) grows
with depth.
"""

from __future__ import annotations

import math
from fractions import Fraction

from ..numeric import Angle
from .families import InvalidSequence, ZERO
from .plans import ConstructionPlan, PlanRecorder, build, family


def _star_branches(depth: int) -> list:
    """(direction as a multiple of pi, slit length, level) sorted by direction."""
    branches = [(Fraction(m, 2), Fraction(1, 2), 1) for m in range(4)]
    for n in range(2, depth + 1):
        for m in range(1, 1 << (n + 1), 2):
            branches.append((Fraction(m, 1 << n), Fraction(1, 1 << n), n))
    branches.sort(key=lambda b: b[0])
    return branches


def _cut_branch(rec, plane, frac, length, tip_by_frac):
    theta = Angle.from_pi(frac)
    back = (theta + Angle.from_pi(1)).mod_2pi()
    if frac - 1 in tip_by_frac:
        # opposite of an already placed tip, kept exactly opposite so the
        # pair gluing sees displacement sums of zero
        ox, oy = tip_by_frac[frac - 1]
        tip = (-ox, -oy)
    else:
        rad = math.pi * float(frac)
        tip = (float(length) * math.cos(rad), float(length) * math.sin(rad))
    tip_by_frac[frac] = tip
    return rec.cut_slit(plane, (ZERO, ZERO), tip, dirs=(theta, back))


def _origin_instances(surface, plane) -> list:
    out = []
    for vi, v in enumerate(surface.charts[plane].verts):
        if v[0] == 0 and v[1] == 0:
            out.append((plane, vi))
    return out


def _mark_chain_ends(rec, sigma):
    # every surviving chain is fully present at this truncation: nothing on
    # it is cut off by depth, so both ends are real
    for ch in rec.surface.class_chains(sigma):
        if ch.closed or ch.corners[0] in rec.surface.artifact_marks:
            continue
        rec.mark_boundary(ch.corners[0])
        if ch.corners[-1] != ch.corners[0]:
            rec.mark_boundary(ch.corners[-1])


@family("star")
def plan_star(depth: int, variant: str = "plain") -> ConstructionPlan:
    """Star of 2^(depth+1) slits, paired across the origin or capped by
    cylinders.

    The plain wiring glues each slit side to the matching side of the
    opposite slit, which turns every tip into its own full-turn component.
    The cylinder wiring caps each slit with a row of crosswise glued squares
    whose count grows with the branch level, so the component totals grow
    level by level while staying exactly computable.
    """
    if variant not in ("plain", "cylinders"):
        raise ValueError(f"variant must be 'plain' or 'cylinders', got {variant!r}")
    if depth < 1:
        raise InvalidSequence("depth must be at least 1")
    branches = _star_branches(depth)

    rec = PlanRecorder("approx", depth)
    plane = rec.add_truncated_plane(Fraction(2), label="plane")
    sides = {}
    tip_by_frac = {}
    tip_keys = []
    for frac, length, level in branches:
        f, b = _cut_branch(rec, plane, frac, length, tip_by_frac)
        sides[frac] = (f, b, level)
        tip_keys.append((plane, rec.surface.edges[f].ev))
    if variant == "plain":
        for frac, (f, b, _level) in sorted(sides.items()):
            if frac >= 1:
                continue
            f2, b2, _ = sides[frac + 1]
            rec.glue_edges(f, f2)
            rec.glue_edges(b, b2)
    else:
        for i, (frac, length, level) in enumerate(branches):
            f, b, _ = sides[frac]
            s = (1 << level) + 1
            rec.attach_rectangle_cylinder(
                f, b, Fraction(s, 1 << level), length, s, label=f"cyl{i}"
            )
    origin = _origin_instances(rec.surface, plane)
    for key in origin:
        rec.mark_artifact(key)
    sigma = origin[0]
    rec.declare_singular(sigma, "sigma")
    _mark_chain_ends(rec, sigma)
    rec.set_landmark("center", sigma)
    for i, key in enumerate(tip_keys):
        rec.set_landmark(f"tip-{i}", key)
    args = {"variant": variant}
    return rec.plan("star", dict(args), meta={"family": {"name": "star", "args": args}})


def build_star(variant: str = "plain", depth: int = 6):
    return build(plan_star(depth, variant=variant))


# ---------------------------------------------------------------------------
# one spiraling component from slits closing in on a limit direction


@family("shrinking_star")
def plan_shrinking_star(depth: int) -> ConstructionPlan:
    """Cylinder-capped slits accumulating on the vertical direction.

    Unlike the star, consecutive wedge corners stay unmarked, so the chain
    threads through every cylinder in one walk.  An unglued seam along the
    limit direction pins the walk's start; the last wedge against the seam is
    apparatus and ends the walk at the truncation frontier.
    """
    if depth < 1:
        raise InvalidSequence("depth must be at least 1")
    rec = PlanRecorder("approx", depth)
    plane = rec.add_truncated_plane(Fraction(2), label="plane")
    tip_by_frac = {}
    for n in range(1, depth + 1):
        frac = Fraction(1, 2) - Fraction(1, 1 << n)
        length = Fraction(1, 1 << n)
        f, b = _cut_branch(rec, plane, frac, length, tip_by_frac)
        s = (1 << n) + 1
        rec.attach_rectangle_cylinder(
            f, b, Fraction(s, 1 << n), length, s, label=f"cyl{n}"
        )
    up = Angle.from_pi(Fraction(1, 2))
    down = Angle.from_pi(Fraction(3, 2))
    seam_tip = (ZERO, Fraction(1, 1 << (depth + 1)))
    sf, sb = rec.cut_slit(plane, (ZERO, ZERO), seam_tip, dirs=(up, down))
    vp = (plane, rec.surface.edges[sf].sv)
    vp2 = (plane, rec.surface.edges[sb].ev)
    rec.mark_boundary(vp)
    rec.mark_artifact(vp2)
    rec.declare_singular(vp, "sigma")
    rec.set_landmark("center", vp)
    rec.set_landmark("seam-tip", (plane, rec.surface.edges[sf].ev))
    return rec.plan(
        "shrinking_star", {}, meta={"family": {"name": "shrinking_star", "args": {}}}
    )


def build_shrinking_star(depth: int = 10):
    return build(plan_shrinking_star(depth))
