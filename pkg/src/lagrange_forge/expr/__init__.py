"""Symbolic expression core: trees, parsing, calculus, evaluation, zero testing."""
from .compile import compile_expr
from .calculus import diff, gradient, max_index, substitute
from .evaluate import (EvalPoint, SampleDomain, SplitMix64, Verdict, ZeroTest,
                       ZeroTestConfig, all_zero, evaluate, evaluate_array, is_zero,
                       sample_uniform)
from .nodes import (ONE, ZERO, Expr, Func, Num, Pow, Prod, Sum, Sym, abs_, accel, add,
                    as_expr, coord, cos, div, exp, func, ln, mul, neg, param, pow_, sin,
                    sub, time, vel)
from .parse import parse
from .printer import to_string

__all__ = [
    "Expr", "Num", "Sym", "Sum", "Prod", "Pow", "Func", "ZERO", "ONE",
    "as_expr", "add", "sub", "mul", "div", "neg", "pow_", "func",
    "exp", "ln", "sin", "cos", "abs_", "time", "coord", "vel", "accel", "param",
    "parse", "to_string", "compile_expr", "diff", "gradient", "substitute", "max_index",
    "evaluate", "evaluate_array", "EvalPoint", "SampleDomain", "SplitMix64",
    "sample_uniform", "is_zero", "all_zero", "Verdict", "ZeroTest", "ZeroTestConfig",
]
