"""Compile expressions to plain Python callables for hot numeric loops."""
from __future__ import annotations

import math

from ..errors import DomainError, UnboundSymbol
from .nodes import Func, Num, Pow, Prod, Sum, Sym, as_expr


def _fpow(b, e):
    if b < 0:
        raise DomainError("negative base with fractional exponent")
    if b == 0 and e < 0:
        raise DomainError("division by zero")
    return b ** e


def _ln(x):
    if x <= 0:
        raise DomainError("log of non-positive value")
    return math.log(x)


def _ipow(b, k):
    if b == 0 and k < 0:
        raise DomainError("division by zero")
    return b ** k


_ENV = {"_exp": math.exp, "_ln": _ln, "_sin": math.sin, "_cos": math.cos, "_abs": abs,
        "_fpow": _fpow, "_ipow": _ipow}


def compile_expr(e, arg_names, constants=None):
    """Return ``fn(*args)`` evaluating ``e`` with symbols bound positionally to ``arg_names``.

    Symbols listed in ``constants`` are baked in.  Every other free symbol
    must appear in ``arg_names``.
    """
    e = as_expr(e)
    constants = dict(constants or {})
    index = {name: i for i, name in enumerate(arg_names)}
    lines = []
    memo = {}

    def emit(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Num):
            return repr(float(x.value))
        if isinstance(x, Sym):
            if x.name in index:
                return f"_a[{index[x.name]}]"
            if x.name in constants:
                return repr(float(constants[x.name]))
            raise UnboundSymbol(f"no value bound for {x.name!r}")
        if isinstance(x, Sum):
            code = "(" + " + ".join(emit(t) for t in x.terms) + ")"
        elif isinstance(x, Prod):
            code = "(" + " * ".join(emit(f) for f in x.factors) + ")"
        elif isinstance(x, Pow):
            b = emit(x.base)
            if x.exp.denominator == 1:
                k = int(x.exp)
                code = f"({b} ** {k})" if k > 0 else f"_ipow({b}, {k})"
            else:
                code = f"_fpow({b}, {float(x.exp)!r})"
        elif isinstance(x, Func):
            code = f"_{x.name}({emit(x.arg)})"
        else:
            raise TypeError(f"not an expression: {x!r}")
        name = f"_t{len(lines)}"
        lines.append(f"    {name} = {code}")
        memo[x] = name
        return name

    result = emit(e)
    src = "def _f(*_a):\n" + "\n".join(lines) + f"\n    return {result}\n"
    ns = dict(_ENV)
    exec(compile(src, "<lagrange_forge.compile>", "exec"), ns)
    fn = ns["_f"]

    def call(*args):
        try:
            return fn(*args)
        except (ZeroDivisionError, OverflowError) as exc:
            raise DomainError(str(exc)) from None

    return call
