"""Compiling finite topological spaces into flat surfaces.

Any finite space embeds into the specialization order of a wild
singularity.  The compiler emits a surface plan whose rotational
components, read back through ball searches at a ladder of dyadic
scales, reproduce the input space exactly.

One point of the space becomes one "star": a tower of dyadically
shrinking boxes accumulating at a singular point shared by every star,
each box border folded into the same rotational component.  Star ``i``
carries a marked probe corner on its second box.  A relation ``i <= j``
is realized by planting, at every dyadic scale, a short slit under the
probe whose sides are glued into a cross hanging off star ``j``: the
slit tips lie on star ``j``'s component while sitting arbitrarily close
to star ``i``'s probe direction, which is exactly the witness a ball
search needs.  Absent relations leave nothing of star ``j`` within
reach.  Cross arms are long, so a search flood entering a cross never
leaks out the far side to the partner slit.

Tori consume one cross per star per level so every star tower has the
same box count no matter how many relations its point enters; a compile
at depth ``N - 1`` is then a prefix of the compile at depth ``N``, which
is what the stability gate of the read-back verifies.
"""

from fractions import Fraction

from ..finite_spaces import FiniteTopology, preorder_from_topology
from ..numeric import Angle
from .plans import ConstructionPlan, PlanRecorder, build, family

ZERO = Fraction(0)
HALF = Fraction(1, 2)


def _w(m: int) -> Fraction:
    return Fraction(1, 1 << m)


def _true_pairs(leq) -> list:
    n = len(leq)
    return [
        (i, j)
        for i in range(1, n + 1)
        for j in range(1, n + 1)
        if i != j and leq[i - 1][j - 1]
    ]


def _slots(n: int, depth: int, pairs: list) -> list:
    # level-major so a shallower compile consumes a prefix of the same list
    out = []
    for k in range(1, depth + 1):
        for i in range(1, n + 1):
            out.append((k, i, i))
        out.extend((k, i, j) for (i, j) in pairs)
    return out


def compile_topology(space: FiniteTopology, depth: int = 6) -> ConstructionPlan:
    """Plan a surface whose singularity realizes the given finite space.

    ``depth`` controls how many scales of witness slits are planted; the
    read-back may then probe balls down to radius ``2 ** -(4 + depth)``.
    """
    space.validate()
    if not space.points:
        raise ValueError("cannot compile the empty space")
    if depth < 1:
        raise ValueError("depth must be at least 1")
    labels, leq = preorder_from_topology(space)
    n = len(labels)
    pairs = _true_pairs(leq)
    slots = _slots(n, depth, pairs)
    m_top = 1 + len(slots)  # boxes per star; crosses are numbered 2 .. m_top

    rec = PlanRecorder(mode="exact", depth=depth)
    up = Angle.from_pi(Fraction(1, 2))
    down = Angle.from_pi(Fraction(3, 2))
    east = Angle.zero()
    west = Angle.from_pi(1)

    # box 1 of every star goes in first: chart ids, and with them component
    # labels, follow the point order
    box1 = []
    for i in range(1, n + 1):
        x0 = Fraction(i - 1)
        box1.append(
            rec.add_chart(
                [(x0, ZERO), (x0 + HALF, ZERO), (x0 + HALF, 1), (x0, 1)],
                label=f"star{i}-box1",
            )
        )

    crosses = {}  # (star, index) -> (cap_bottom, cap_top)
    box2 = []
    for i in range(1, n + 1):
        x0 = Fraction(i - 1)
        charts = [box1[i - 1]]
        for m in range(2, m_top + 1):
            charts.append(
                rec.add_chart(
                    [(ZERO, m - 1), (_w(m), m - 1), (_w(m), m), (ZERO, m)],
                    label=f"star{i}-box{m}",
                )
            )
        box2.append(charts[1])
        edges = [rec.surface.chart_edges(c) for c in charts]
        tops = []
        for m in range(1, m_top + 1):
            tops.append(rec.subdivide_edge(edges[m - 1][2], [_w(m) - _w(m + 1)]))
        segs = rec.subdivide_edge(
            edges[0][0],
            [_w(m_top + 1)] + [_w(m) - _w(m + 1) for m in range(m_top, 0, -1)],
        )
        # segs[0] is the stub below every slit scale; d_of[m] faces box m's
        # exposed top piece under the purely vertical translation
        d_of = {m: segs[1 + m_top - m] for m in range(1, m_top + 1)}
        for m in range(1, m_top + 1):
            rec.glue_edges(edges[m - 1][3], edges[m - 1][1])
            rec.glue_edges(tops[m - 1][0], d_of[m])
            if m < m_top:
                rec.glue_edges(tops[m - 1][1], edges[m][0])
        for m in range(2, m_top + 1):
            fwd, back = rec.cut_slit(
                charts[0],
                (x0 + _w(m), ZERO),
                (x0 + _w(m), Fraction(1, 1 << (2 * m))),
                dirs=(up, down),
            )
            got = rec.attach_cross(fwd, back, label=f"star{i}-cross{m}")
            crosses[(i, m)] = got["slit"]
        rec.mark_rep(rec.surface.instance_at(charts[1], (_w(3), 2)))
        # the deepest top piece and the bottom stub end blind at this
        # truncation; their shared corner pair is apparatus, not surface
        rec.mark_artifact(
            rec.surface.instance_at(charts[m_top - 1], (_w(m_top + 1), m_top))
        )
        rec.mark_artifact(rec.surface.instance_at(charts[0], (x0 + _w(m_top + 1), ZERO)))

    tori = {}
    for k in range(1, depth + 1):
        s = _w(k)
        cid = rec.add_chart([(ZERO, ZERO), (s, ZERO), (s, s), (ZERO, s)], label=f"torus{k}")
        eb, er, et, el = rec.surface.chart_edges(cid)
        rec.glue_edges(eb, et)
        rec.glue_edges(el, er)
        tori[k] = cid

    consumed = set()
    a = 1
    for (k, i, j) in slots:
        a += 1
        length = Fraction(1, 1 << (2 * a))
        if i == j:
            s = _w(k)
            x1 = s / 4
            pq, qp = rec.cut_slit(
                tori[k],
                (x1, Fraction(i, n + 1) * s),
                (x1 + length, Fraction(i, n + 1) * s),
                dirs=(east, west),
            )
        else:
            q = (i - 1) * n + (j - 1)
            c = Fraction(3 * n * n + q, 4 * n * n) * Fraction(1, 1 << (5 + k))
            # the offset c/16 grows with c, so witness rays descending to a
            # probe ball stay strictly left of every deeper slit
            x1 = Fraction(1, 8) + c / 16
            pq, qp = rec.cut_slit(
                box2[i - 1], (x1, 2 - c), (x1 + length, 2 - c), dirs=(east, west)
            )
        cap_bottom, cap_top = crosses[(j, a)]
        rec.glue_edges(pq, cap_top)
        rec.glue_edges(qp, cap_bottom)
        consumed.add((j, a))
    for i in range(1, n + 1):
        for a in range(2, m_top + 1):
            if (i, a) not in consumed:
                cap_bottom, cap_top = crosses[(i, a)]
                rec.glue_edges(cap_bottom, cap_top)

    sigma = rec.surface.instance_at(box1[0], (ZERO, ZERO))
    for i in range(2, n + 1):
        rec.declare_same_point(rec.surface.instance_at(box1[i - 1], (Fraction(i - 1), ZERO)), sigma)
    rec.declare_singular(sigma, label="sigma")
    rec.set_landmark("center", sigma)
    for i in range(1, n + 1):
        rec.set_landmark(f"probe-{i}", rec.surface.instance_at(box2[i - 1], (_w(3), 2)))

    args = {"points": list(labels), "opens": space.to_json()["opens"]}
    meta = {
        "family": {"name": "compiled", "args": args},
        "point_labels": {f"c{i}": labels[i] for i in range(n)},
        "compile": {"points": n, "depth": depth, "boxes_per_star": m_top},
    }
    return rec.plan("compiled", dict(args), meta=meta)


@family("compiled")
def plan_compiled(depth: int, points=(), opens=()) -> ConstructionPlan:
    return compile_topology(FiniteTopology.make(points, opens), depth)


def build_compiled(space: FiniteTopology, depth: int = 6):
    return build(compile_topology(space, depth))


def readback_schedule(scales: int = 5) -> list:
    base = Fraction(1, 32)
    return [(base / (1 << k), base / (1 << k)) for k in range(scales)]


def read_back(surface, budget: int = 8, ray_budget: int = 24,
              ray_cap: Fraction = Fraction(1, 4), schedule=None):
    """Extract the finite space a compiled surface realizes, in its own labels.

    Returns ``(preorder, topology)`` with the topology's points renamed
    back to the compiled space's points.
    """
    from ..wild import extract_topology

    if schedule is None:
        schedule = readback_schedule()
    pre, topo = extract_topology(
        surface,
        surface.landmarks["center"],
        schedule=schedule,
        budget=budget,
        ray_budget=ray_budget,
        ray_cap=ray_cap,
    )
    return pre, topo.relabel(dict(surface.meta["point_labels"]))
