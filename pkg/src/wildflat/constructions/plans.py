"""Recorded build plans.

A construction plan is the full list of surface mutations needed to rebuild a
chart complex from nothing.  Builders assemble their surface through a
:class:`PlanRecorder`, which executes each operation and writes it down, so the
finished plan replays deterministically: chart and edge ids are handed out by
counters, and replaying the same steps on a fresh surface yields byte-identical
JSON.
"""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional

from ..numeric import Angle
from ..surface import Surface, dumps_canonical


class UnknownConstruction(Exception):
    pass


class PlanError(Exception):
    pass


# mutations that a plan may contain; queries are free and never recorded
RECORDED_OPS = frozenset(
    {
        "add_chart",
        "add_truncated_plane",
        "cut_slit",
        "subdivide_edge",
        "glue_edges",
        "attach_rectangle_cylinder",
        "attach_cross",
        "declare_same_point",
        "declare_singular",
        "mark_boundary",
        "mark_artifact",
        "mark_rep",
        "set_landmark",
    }
)


def encode_arg(value):
    if isinstance(value, bool) or value is None:
        return value
    if isinstance(value, int):
        return value
    if isinstance(value, float):
        return value
    if isinstance(value, str):
        return value
    if isinstance(value, Fraction):
        return {"num": str(value.numerator), "den": str(value.denominator)}
    if isinstance(value, Angle):
        return {"angle": value.to_json()}
    if isinstance(value, (tuple, list)):
        return [encode_arg(v) for v in value]
    raise PlanError(f"cannot encode plan argument {value!r}")


def decode_arg(value):
    if isinstance(value, dict):
        if "angle" in value:
            return Angle.from_json(value["angle"])
        if "num" in value:
            return Fraction(int(value["num"]), int(value["den"]))
        raise PlanError(f"cannot decode plan argument {value!r}")
    if isinstance(value, list):
        return tuple(decode_arg(v) for v in value)
    return value


@dataclass
class ConstructionPlan:
    """Replayable recipe: metadata plus the recorded mutation steps."""

    kind: str
    depth: int
    mode: str
    params: dict
    steps: list
    meta: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "depth": self.depth,
            "mode": self.mode,
            "params": self.params,
            "steps": self.steps,
            "meta": self.meta,
        }

    @staticmethod
    def from_json(obj: dict) -> "ConstructionPlan":
        return ConstructionPlan(
            kind=obj["kind"],
            depth=int(obj["depth"]),
            mode=obj["mode"],
            params=dict(obj.get("params", {})),
            steps=[list(s) for s in obj["steps"]],
            meta=dict(obj.get("meta", {})),
        )

    def dumps(self) -> str:
        return dumps_canonical(self.to_json())


class PlanRecorder:
    """Executes surface mutations while recording them as plan steps.

    Recorded operations are called on the recorder itself; read-only queries
    (positions, instance lookups) go through ``.surface`` and leave no trace.
    """

    def __init__(self, mode: str = "exact", depth: int = 0):
        self.surface = Surface(mode=mode, depth=depth)
        self.mode = mode
        self.depth = depth
        self.steps: list = []

    def __getattr__(self, name: str):
        if name not in RECORDED_OPS:
            raise AttributeError(name)
        op = getattr(self.surface, name)

        def run(*args, **kwargs):
            self.steps.append(
                [
                    name,
                    [encode_arg(a) for a in args],
                    {k: encode_arg(v) for k, v in sorted(kwargs.items())},
                ]
            )
            return op(*args, **kwargs)

        return run

    def plan(self, kind: str, params: dict, meta: Optional[dict] = None) -> ConstructionPlan:
        return ConstructionPlan(
            kind=kind,
            depth=self.depth,
            mode=self.mode,
            params={k: encode_arg(v) for k, v in sorted(params.items())},
            steps=self.steps,
            meta=meta or {},
        )


def build(plan: ConstructionPlan) -> Surface:
    """Replay a plan on a fresh surface and finalize it."""
    s = Surface(mode=plan.mode, depth=plan.depth)
    for name, args, kwargs in plan.steps:
        if name not in RECORDED_OPS:
            raise PlanError(f"plan contains unknown operation {name!r}")
        getattr(s, name)(
            *[decode_arg(a) for a in args],
            **{k: decode_arg(v) for k, v in kwargs.items()},
        )
    s.meta.update(copy.deepcopy(plan.meta))
    return s.finalize()


# name -> planner(depth, **args) -> ConstructionPlan
FAMILIES: dict = {}


def family(name: str) -> Callable:
    def register(fn: Callable) -> Callable:
        FAMILIES[name] = fn
        return fn

    return register


def plan_family(name: str, depth: int, **args) -> ConstructionPlan:
    if name not in FAMILIES:
        known = ", ".join(sorted(FAMILIES))
        raise UnknownConstruction(f"no construction named {name!r} (have: {known})")
    return FAMILIES[name](depth, **args)


def build_family(name: str, depth: int, **args) -> Surface:
    return build(plan_family(name, depth, **args))
