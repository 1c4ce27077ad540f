"""Builders for the surface families and the finite-space compiler."""

from .plans import (
    ConstructionPlan,
    PlanError,
    PlanRecorder,
    UnknownConstruction,
    build,
    build_family,
    family,
    plan_family,
)
from .families import (
    AllZeroPrefix,
    BitSequence,
    InvalidRatio,
    InvalidSequence,
    build_chamanara,
    build_geometric,
    build_harmonic,
    build_stack_of_boxes,
    build_xr,
    plan_chamanara,
    plan_geometric,
    plan_harmonic,
    plan_stack_of_boxes,
    plan_xr,
)
from .stars import (
    build_shrinking_star,
    build_star,
    plan_shrinking_star,
    plan_star,
)
from .compiler import (
    build_compiled,
    compile_topology,
    plan_compiled,
    read_back,
    readback_schedule,
)
from .recorder import (
    PassageRecorderConfig,
    PatternMismatch,
    record_passage_sequence,
)

__all__ = [
    "ConstructionPlan",
    "PlanError",
    "PlanRecorder",
    "UnknownConstruction",
    "build",
    "build_family",
    "family",
    "plan_family",
    "AllZeroPrefix",
    "BitSequence",
    "InvalidRatio",
    "InvalidSequence",
    "build_chamanara",
    "build_geometric",
    "build_harmonic",
    "build_stack_of_boxes",
    "build_xr",
    "plan_chamanara",
    "plan_geometric",
    "plan_harmonic",
    "plan_stack_of_boxes",
    "plan_xr",
    "build_shrinking_star",
    "build_star",
    "plan_shrinking_star",
    "plan_star",
    "build_compiled",
    "compile_topology",
    "plan_compiled",
    "read_back",
    "readback_schedule",
    "PassageRecorderConfig",
    "PatternMismatch",
    "record_passage_sequence",
]
