"""Partial differentiation and simultaneous substitution."""
from __future__ import annotations

from functools import lru_cache

from .nodes import (ONE, ZERO, Expr, Func, Num, Pow, Prod, Sum, Sym, add, as_expr,
                    func, mul, pow_)


@lru_cache(maxsize=200_000)
def diff(e: Expr, s: Sym) -> Expr:
    """Partial derivative of ``e`` with respect to the symbol ``s``."""
    if s not in e.free_symbols:
        return ZERO
    if isinstance(e, Sym):
        return ONE if e == s else ZERO
    if isinstance(e, Sum):
        return add(*(diff(term, s) for term in e.terms))
    if isinstance(e, Prod):
        parts = []
        for i, f in enumerate(e.factors):
            df = diff(f, s)
            if df != ZERO:
                parts.append(mul(df, *e.factors[:i], *e.factors[i + 1:]))
        return add(*parts)
    if isinstance(e, Pow):
        return mul(e.exp, pow_(e.base, e.exp - 1), diff(e.base, s))
    if isinstance(e, Func):
        arg = e.arg
        if e.name == "exp":
            return mul(e, diff(arg, s))
        if e.name == "ln":
            # d ln|u| = du / u, avoids the sign factor of d|u|
            inner = arg.arg if isinstance(arg, Func) and arg.name == "abs" else arg
            return mul(diff(inner, s), pow_(inner, -1))
        if e.name == "sin":
            return mul(func("cos", arg), diff(arg, s))
        if e.name == "cos":
            return mul(-1, func("sin", arg), diff(arg, s))
        if e.name == "abs":
            return mul(arg, pow_(e, -1), diff(arg, s))
    raise TypeError(f"cannot differentiate {e!r}")


def substitute(e, bindings) -> Expr:
    """Replace symbols simultaneously, then renormalize."""
    e = as_expr(e)
    bindings = {k: as_expr(v) for k, v in bindings.items()}
    if not bindings:
        return e
    keys = frozenset(bindings)
    memo = {}

    def walk(x):
        if not (x.free_symbols & keys):
            return x
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Sym):
            out = bindings[x]
        elif isinstance(x, Sum):
            out = add(*(walk(t) for t in x.terms))
        elif isinstance(x, Prod):
            out = mul(*(walk(f) for f in x.factors))
        elif isinstance(x, Pow):
            out = pow_(walk(x.base), x.exp)
        elif isinstance(x, Func):
            out = func(x.name, walk(x.arg))
        else:
            out = x
        memo[x] = out
        return out

    return walk(e)


def gradient(e, symbols):
    return [diff(e, s) for s in symbols]


def coefficient_free(e: Expr, symbols) -> bool:
    """True when none of ``symbols`` occurs in ``e``."""
    return not (e.free_symbols & frozenset(symbols))


def max_index(*exprs) -> int:
    """Largest coordinate/velocity/acceleration index occurring in ``exprs``."""
    best = 0
    for e in exprs:
        for s in as_expr(e).free_symbols:
            if s.kind in ("coord", "vel", "accel"):
                best = max(best, s.index)
    return best


def is_number(e) -> bool:
    return isinstance(e, Num)
