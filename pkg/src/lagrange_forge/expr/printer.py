"""Canonical printer.  Output re-parses to a structurally equal expression."""
from __future__ import annotations

from fractions import Fraction

from .nodes import Func, Num, Pow, Prod, Sum, Sym


def _frac(value: Fraction) -> str:
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


def _exponent(value: Fraction) -> str:
    if value.denominator == 1 and value >= 0:
        return str(value.numerator)
    return f"({_frac(value)})"


def _atom(e) -> str:
    """Render e so that it can stand as the base of ``^``."""
    if isinstance(e, (Sym, Func)):
        return to_string(e)
    if isinstance(e, Num) and e.value >= 0 and e.value.denominator == 1:
        return str(e.value.numerator)
    return f"({to_string(e)})"


def _power(base, exp: Fraction) -> str:
    if exp == 1:
        return _atom(base) if isinstance(base, (Sum, Prod, Pow)) else to_string(base)
    return f"{_atom(base)}^{_exponent(exp)}"


def _factor_str(f) -> str:
    if isinstance(f, Pow):
        return _power(f.base, f.exp)
    if isinstance(f, Sum):
        return f"({to_string(f)})"
    return to_string(f)


def _product(coeff: Fraction, factors) -> str:
    # A sum may only stand alone as a denominator: "1/(s1*s2)" or "1/s^2" would be
    # expanded on re-parse, so such factors keep an explicit negative exponent.
    negs = [f for f in factors if isinstance(f, Pow) and f.exp < 0]
    sum_negs = [f for f in negs if isinstance(f.base, Sum)]
    lone_sum = (len(negs) == 1 and len(sum_negs) == 1 and sum_negs[0].exp == -1
                and coeff.denominator == 1)
    numer, denom = [], []
    for f in factors:
        if isinstance(f, Pow) and f.exp < 0 and (not isinstance(f.base, Sum) or lone_sum):
            denom.append(_power(f.base, -f.exp))
        else:
            numer.append(_factor_str(f))
    sign = "-" if coeff < 0 else ""
    coeff = abs(coeff)
    parts = []
    if coeff.numerator != 1 or not numer:
        parts.append(str(coeff.numerator))
    parts.extend(numer)
    text = "*".join(parts)
    den = [str(coeff.denominator)] if coeff.denominator != 1 else []
    den.extend(denom)
    if den:
        tail = den[0] if len(den) == 1 else "(" + "*".join(den) + ")"
        text = f"{text}/{tail}"
    return sign + text


def to_string(e) -> str:
    if isinstance(e, Num):
        return _frac(e.value)
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Func):
        return f"{e.name}({to_string(e.arg)})"
    if isinstance(e, Pow):
        return _product(Fraction(1), [e])
    if isinstance(e, Prod):
        if isinstance(e.factors[0], Num):
            return _product(e.factors[0].value, e.factors[1:])
        return _product(Fraction(1), e.factors)
    if isinstance(e, Sum):
        out = to_string(e.terms[0])
        for term in e.terms[1:]:
            s = to_string(term)
            if s.startswith("-"):
                out += " - " + s[1:]
            else:
                out += " + " + s
        return out
    raise TypeError(f"not an expression: {e!r}")
