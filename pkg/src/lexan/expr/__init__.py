"""Expression DSL: parsing, evaluation, differentiation, classification."""

from .classify import (
    Box,
    ClassificationReport,
    Interval,
    ProbeSchedule,
    ReferenceDomain,
    Verdict,
    classify,
    probe_boundedness,
)
from .differentiate import differentiate
from .evaluate import eval_expr
from .nodes import (
    PRIMITIVES,
    Add,
    Const,
    Exp,
    Expr,
    Inv,
    Log,
    Mul,
    Neg,
    Pow,
    Prim,
    Primitive,
    Var,
    exp_depth,
    log_depth,
    register_primitive,
    to_text,
)
from .parser import parse

__all__ = [
    "Add", "Box", "ClassificationReport", "Const", "Exp", "Expr", "Interval", "Inv", "Log",
    "Mul", "Neg", "PRIMITIVES", "Pow", "Prim", "Primitive", "ProbeSchedule", "ReferenceDomain",
    "Var", "Verdict", "classify", "differentiate", "eval_expr", "exp_depth", "log_depth",
    "parse", "probe_boundedness", "register_primitive", "to_text",
]
