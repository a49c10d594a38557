"""Immutable expression trees kept in a canonical, fully expanded form.

Every node is built through the smart constructors :func:`add`, :func:`mul`,
:func:`pow_` and :func:`func`, so any ``Expr`` in circulation is already
normalized: sums and products are flattened and sorted, numeric constants are
merged, like terms and like bases are collected, ``exp`` factors are merged,
and products and positive integer powers of sums are distributed.  The result
is a Laurent-like polynomial over "atoms" (symbols, function calls and
non-expandable powers).  This is deliberately weaker than a rational normal
form; semantic equality is decided by :func:`lagrange_forge.expr.is_zero`.
"""
from __future__ import annotations

import itertools
import math
import re
from fractions import Fraction
from numbers import Rational

__all__ = [
    "Expr", "Num", "Sym", "Sum", "Prod", "Pow", "Func",
    "ZERO", "ONE", "as_expr", "add", "mul", "pow_", "func", "sub", "div", "neg",
    "exp", "ln", "sin", "cos", "abs_", "time", "coord", "vel", "accel", "param",
    "FUNCTIONS",
]

FUNCTIONS = ("ln", "exp", "sin", "cos", "abs")

_IDENT = re.compile(r"[A-Za-z_][A-Za-z0-9_]*\Z")
_KIND_RANK = {"param": 0, "time": 1, "coord": 2, "vel": 3, "accel": 4}
_KIND_PREFIX = {"coord": "q", "vel": "v", "accel": "a"}
# Guard against runaway expansion of large integer powers of sums.
_MAX_EXPAND = 12


class Expr:
    __slots__ = ("_sortkey", "_hash", "_free")

    def _init_key(self, basekey, exponent=Fraction(1), hashkey=None):
        # composites hash their children's cached hashes instead of the nested key
        self._sortkey = (basekey, exponent)
        self._hash = hash(self._sortkey if hashkey is None else hashkey)
        self._free = None

    @property
    def sortkey(self):
        return self._sortkey

    # immutable: copies are the object itself; pickling goes through the printer
    def __copy__(self):
        return self

    def __deepcopy__(self, memo):
        return self

    def __reduce__(self):
        return (_from_text, (str(self),))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        if self is other:
            return True
        if not isinstance(other, Expr):
            if isinstance(other, (int, Fraction)):
                return isinstance(self, Num) and self.value == other
            return NotImplemented
        return self._hash == other._hash and self._sortkey == other._sortkey

    def __ne__(self, other):
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    def __lt__(self, other):
        return self._sortkey < other._sortkey

    @property
    def free_symbols(self):
        if self._free is None:
            self._free = frozenset().union(*(c.free_symbols for c in self.children())) \
                if self.children() else frozenset()
        return self._free

    def children(self):
        return ()

    # operator sugar -------------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return sub(self, other)

    def __rsub__(self, other):
        return sub(other, self)

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return div(self, other)

    def __rtruediv__(self, other):
        return div(other, self)

    def __pow__(self, other):
        return pow_(self, other)

    def __neg__(self):
        return neg(self)

    def __pos__(self):
        return self

    def __str__(self):
        from .printer import to_string
        return to_string(self)

    def __repr__(self):
        return f"Expr({str(self)!r})"


class Num(Expr):
    __slots__ = ("value",)

    def __init__(self, value):
        self.value = Fraction(value)
        self._init_key((0, self.value))

    @property
    def free_symbols(self):
        return frozenset()


class Sym(Expr):
    """A symbol: time ``t``, ``q<i>``, ``v<i>``, ``a<i>`` or a named parameter."""

    __slots__ = ("kind", "index", "name")

    def __init__(self, kind, index=0, name=None):
        if kind not in _KIND_RANK:
            raise ValueError(f"unknown symbol kind {kind!r}")
        if kind in _KIND_PREFIX:
            if int(index) < 1:
                raise ValueError("coordinate indices are 1-based")
            name = f"{_KIND_PREFIX[kind]}{int(index)}"
        elif kind == "time":
            name, index = "t", 0
        else:
            if not name or not _IDENT.match(name):
                raise ValueError(f"invalid parameter name {name!r}")
            index = 0
        self.kind = kind
        self.index = int(index)
        self.name = name
        self._init_key((1, _KIND_RANK[kind], self.index, name))

    @property
    def free_symbols(self):
        if self._free is None:
            self._free = frozenset((self,))
        return self._free


class Sum(Expr):
    __slots__ = ("terms",)

    def __init__(self, terms):
        self.terms = tuple(terms)
        self._init_key((5, tuple(t._sortkey for t in self.terms)),
                       hashkey=(5,) + tuple(t._hash for t in self.terms))

    def children(self):
        return self.terms


class Prod(Expr):
    __slots__ = ("factors",)

    def __init__(self, factors):
        self.factors = tuple(factors)
        self._init_key((4, tuple(f._sortkey for f in self.factors)),
                       hashkey=(4,) + tuple(f._hash for f in self.factors))

    def children(self):
        return self.factors


class Pow(Expr):
    __slots__ = ("base", "exp")

    def __init__(self, base, exponent):
        self.base = base
        self.exp = Fraction(exponent)
        if isinstance(base, Pow):
            basekey = (3, base._sortkey)
        else:
            basekey = base._sortkey[0]
        self._init_key(basekey, self.exp, hashkey=(3, base._hash, self.exp))

    def children(self):
        return (self.base,)


class Func(Expr):
    __slots__ = ("name", "arg")

    def __init__(self, name, arg):
        if name not in FUNCTIONS:
            raise ValueError(f"unknown function {name!r}")
        self.name = name
        self.arg = arg
        self._init_key((2, name, arg._sortkey), hashkey=(2, name, arg._hash))

    def children(self):
        return (self.arg,)


ZERO = Num(0)
ONE = Num(1)


def _from_text(text):
    from .parse import parse
    return parse(text)


def as_expr(x):
    if isinstance(x, Expr):
        return x
    if isinstance(x, bool):
        raise TypeError("booleans are not expressions")
    if isinstance(x, (int, Rational)):
        return Num(Fraction(x))
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError("non-finite constant")
        return Num(Fraction(x))
    if isinstance(x, str):
        from .parse import parse
        return parse(x)
    raise TypeError(f"cannot convert {type(x).__name__} to Expr")


def _as_fraction(e):
    if isinstance(e, Expr):
        if not isinstance(e, Num):
            raise TypeError("exponents must be rational constants")
        return e.value
    if isinstance(e, float):
        return Fraction(e).limit_denominator(10**6)
    return Fraction(e)


# --------------------------------------------------------------------------
# sums

def _split_coeff(e):
    """Return (coefficient, rest) with rest None for a pure number."""
    if isinstance(e, Num):
        return e.value, None
    if isinstance(e, Prod) and isinstance(e.factors[0], Num):
        rest = e.factors[1:]
        return e.factors[0].value, rest[0] if len(rest) == 1 else Prod(rest)
    return Fraction(1), e


def _with_coeff(c, rest):
    if rest is None:
        return Num(c)
    if c == 1:
        return rest
    if isinstance(rest, Prod):
        return Prod((Num(c),) + rest.factors)
    return Prod((Num(c), rest))


def add(*args):
    const = Fraction(0)
    coeffs = {}
    stack = [as_expr(a) for a in args]
    for term in stack:
        if isinstance(term, Sum):
            stack.extend(term.terms)
            continue
        c, rest = _split_coeff(term)
        if rest is None:
            const += c
        else:
            coeffs[rest] = coeffs.get(rest, Fraction(0)) + c
    items = sorted(((r, c) for r, c in coeffs.items() if c != 0), key=lambda rc: rc[0]._sortkey)
    terms = [_with_coeff(c, r) for r, c in items]
    if const != 0:
        terms.insert(0, Num(const))
    if not terms:
        return ZERO
    if len(terms) == 1:
        return terms[0]
    return Sum(terms)


def sub(a, b):
    return add(a, mul(-1, b))


def neg(a):
    return mul(-1, a)


# --------------------------------------------------------------------------
# products

def _is_int(fr):
    return fr.denominator == 1


def _exact_root(value, n):
    """Exact non-negative n-th root of a non-negative Fraction, or None."""
    if value < 0:
        return None

    def iroot(k):
        r = round(k ** (1.0 / n)) if k else 0
        for cand in (r - 1, r, r + 1):
            if cand >= 0 and cand ** n == k:
                return cand
        return None

    num, den = iroot(value.numerator), iroot(value.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def _leading_coeff(e):
    if isinstance(e, Num):
        return e.value
    if isinstance(e, Sum):
        return _split_coeff(e.terms[0])[0]
    return _split_coeff(e)[0]


def _raise_atom(base, e):
    """base**e for a non-Prod base, applying the atom-level rewrite rules."""
    if e == 0:
        return ONE
    if isinstance(base, Num):
        v = base.value
        if _is_int(e):
            if v == 0 and e < 0:
                return Pow(base, e)
            return Num(v ** int(e))
        root = _exact_root(v, e.denominator)
        if root is not None and not (root == 0 and e < 0):
            return Num(root ** e.numerator)
        return Pow(base, e)
    if e == 1:
        return base
    if isinstance(base, Func):
        if base.name == "exp":
            return func("exp", mul(e, base.arg))
        if base.name == "abs" and _is_int(e) and e.numerator % 2 == 0:
            return pow_(base.arg, e)
    if isinstance(base, Pow):
        if _is_int(e) or not _is_int(base.exp):
            return pow_(base.base, base.exp * e)
    if isinstance(base, Sum) and _is_int(e):
        c = _leading_coeff(base)
        if c != 1:
            scaled = add(*(mul(Fraction(1) / c, term) for term in base.terms))
            return mul(Num(c ** int(e)), Pow(scaled, e))
    return Pow(base, e)


def _is_simple_factor(f):
    return isinstance(f, (Sym, Func, Pow))


def _base_of(f):
    return f.base if isinstance(f, Pow) else f


def mul(*args):
    coeff = Fraction(1)
    powers = {}
    exp_args = []
    stack = [as_expr(a) for a in args]
    for f in stack:
        if isinstance(f, Num):
            coeff *= f.value
            if coeff == 0:
                return ZERO
            continue
        if isinstance(f, Prod):
            stack.extend(f.factors)
            continue
        if isinstance(f, Func) and f.name == "exp":
            exp_args.append(f.arg)
            continue
        if isinstance(f, Pow):
            base, e = f.base, f.exp
        else:
            base, e = f, Fraction(1)
        powers[base] = powers.get(base, Fraction(0)) + e

    factors = []
    extra = []
    sums = []
    if exp_args:
        merged = func("exp", add(*exp_args))
        if isinstance(merged, Func):
            factors.append(merged)
        else:
            extra.append(merged)
    for base, e in powers.items():
        if e == 0:
            continue
        if isinstance(base, Sum) and _is_int(e) and 0 < e <= _MAX_EXPAND:
            sums.extend([base] * int(e))
            continue
        f = _raise_atom(base, e) if not isinstance(base, Prod) else pow_(base, e)
        if isinstance(f, Num):
            coeff *= f.value
        elif isinstance(f, Pow) and isinstance(f.base, Num) and f.base.value == 0:
            factors.append(f)
        elif _is_simple_factor(f) and _base_of(f) == base:
            factors.append(f)
        else:
            extra.append(f)
    if coeff == 0:
        return ZERO
    if extra:
        return mul(Num(coeff), *factors, *extra, *sums)
    if sums:
        mono = _build_prod(coeff, factors)
        return add(*(mul(mono, *combo) for combo in itertools.product(*(s.terms for s in sums))))
    return _build_prod(coeff, factors)


def _build_prod(coeff, factors):
    factors = sorted(factors, key=lambda f: f._sortkey)
    if not factors:
        return Num(coeff)
    if coeff == 1 and len(factors) == 1:
        return factors[0]
    if coeff == 1:
        return Prod(factors)
    return Prod([Num(coeff)] + factors)


def div(a, b):
    return mul(a, pow_(b, -1))


def pow_(base, e):
    base = as_expr(base)
    e = _as_fraction(e)
    if e == 0:
        return ONE
    if e == 1:
        return base
    if isinstance(base, Prod):
        if _is_int(e):
            return mul(*(pow_(f, e) for f in base.factors))
        c, rest = _split_coeff(base)
        if c > 0 and c != 1:
            return mul(_raise_atom(Num(c), e), pow_(rest, e))
        return Pow(base, e)
    if isinstance(base, Sum) and _is_int(e) and 0 < e <= _MAX_EXPAND:
        return mul(*([base] * int(e)))
    return _raise_atom(base, e)


# --------------------------------------------------------------------------
# elementary functions

def func(name, arg):
    arg = as_expr(arg)
    if name == "exp":
        if arg == ZERO:
            return ONE
        return Func("exp", arg)
    if name == "ln":
        if arg == ONE:
            return ZERO
        if isinstance(arg, Func) and arg.name == "exp":
            return arg.arg
        return Func("ln", arg)
    if name == "abs":
        if isinstance(arg, Num):
            return Num(abs(arg.value))
        if isinstance(arg, Func) and arg.name in ("abs", "exp"):
            return arg
        if isinstance(arg, Pow) and _is_int(arg.exp) and arg.exp.numerator % 2 == 0:
            return arg
        if isinstance(arg, Prod):
            c, rest = _split_coeff(arg)
            if c != 1:
                return mul(abs(c), func("abs", rest))
        if isinstance(arg, Sum) and _leading_coeff(arg) < 0:
            return Func("abs", neg(arg))
        return Func("abs", arg)
    if name in ("sin", "cos"):
        if arg == ZERO:
            return ZERO if name == "sin" else ONE
        if _leading_coeff(arg) < 0:
            flipped = Func(name, neg(arg))
            return neg(flipped) if name == "sin" else flipped
        return Func(name, arg)
    raise ValueError(f"unknown function {name!r}")


def exp(x):
    return func("exp", x)


def ln(x):
    return func("ln", x)


def sin(x):
    return func("sin", x)


def cos(x):
    return func("cos", x)


def abs_(x):
    return func("abs", x)


# --------------------------------------------------------------------------
# symbol factories

def time():
    return Sym("time")


def coord(i):
    return Sym("coord", i)


def vel(i):
    return Sym("vel", i)


def accel(i):
    return Sym("accel", i)


def param(name):
    return Sym("param", name=name)
