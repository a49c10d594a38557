"""Numeric evaluation, deterministic sampling and the probabilistic zero test."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from ..errors import DomainError, UnboundSymbol
from .nodes import Expr, Func, Num, Pow, Prod, Sum, Sym, as_expr

_MASK = (1 << 64) - 1
_GAMMA = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
    return z ^ (z >> 31)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood constants)."""

    def __init__(self, seed: int):
        self.state = int(seed) & _MASK

    def next_u64(self) -> int:
        self.state = (self.state + _GAMMA) & _MASK
        return _mix64(self.state)

    def uniform(self) -> float:
        return (self.next_u64() >> 11) * 2.0 ** -53

    @staticmethod
    def at(seed: int, k: int) -> int:
        """The k-th output (0-based) of the stream started from ``seed``."""
        return _mix64((int(seed) + (k + 1) * _GAMMA) & _MASK)


def _name_hash(name: str) -> int:
    h = 0xCBF29CE484222325
    for byte in name.encode():
        h = ((h ^ byte) * 0x100000001B3) & _MASK
    return h


def sample_uniform(seed: int, k: int, name: str) -> float:
    """Uniform [0, 1) value for symbol ``name`` at sample point ``k``.

    Point k takes the k-th value of the seed's SplitMix64 stream; each symbol
    then draws from that value mixed with a 64-bit FNV-1a hash of its name, so
    a symbol gets the same value at point k no matter which other symbols are
    present.
    """
    return (_mix64(SplitMix64.at(seed, k) ^ _name_hash(name)) >> 11) * 2.0 ** -53


@dataclass(frozen=True)
class EvalPoint:
    t: float = 0.0
    q: tuple = ()
    v: tuple = ()
    a: tuple = ()
    params: Mapping[str, float] = field(default_factory=dict)

    def bindings(self) -> dict:
        out = {"t": float(self.t)}
        for prefix, values in (("q", self.q), ("v", self.v), ("a", self.a)):
            for i, x in enumerate(values or (), start=1):
                out[f"{prefix}{i}"] = float(x)
        out.update({k: float(x) for k, x in self.params.items()})
        return out


def _bindings(point):
    if isinstance(point, EvalPoint):
        return point.bindings()
    return point


def evaluate(e, point) -> float:
    """Evaluate ``e`` at ``point`` (an :class:`EvalPoint` or name->value map)."""
    env = _bindings(point)
    memo = {}

    def ev(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Num):
            out = float(x.value)
        elif isinstance(x, Sym):
            try:
                out = float(env[x.name])
            except KeyError:
                raise UnboundSymbol(f"no value bound for {x.name!r}") from None
        elif isinstance(x, Sum):
            out = math.fsum(ev(t) for t in x.terms)
        elif isinstance(x, Prod):
            out = 1.0
            for f in x.factors:
                out *= ev(f)
        elif isinstance(x, Pow):
            b = ev(x.base)
            if b == 0 and x.exp < 0:
                raise DomainError(f"division by zero in {x}")
            if b < 0 and x.exp.denominator != 1:
                raise DomainError(f"negative base with fractional exponent in {x}")
            try:
                out = b ** int(x.exp) if x.exp.denominator == 1 else b ** float(x.exp)
            except OverflowError:
                raise DomainError(f"overflow in {x}") from None
        elif isinstance(x, Func):
            a = ev(x.arg)
            if x.name == "ln":
                if a <= 0:
                    raise DomainError(f"log of non-positive value in {x}")
                out = math.log(a)
            elif x.name == "exp":
                try:
                    out = math.exp(a)
                except OverflowError:
                    raise DomainError(f"overflow in {x}") from None
            elif x.name == "sin":
                out = math.sin(a)
            elif x.name == "cos":
                out = math.cos(a)
            else:
                out = abs(a)
        else:
            raise TypeError(f"not an expression: {x!r}")
        if not math.isfinite(out):
            raise DomainError(f"non-finite value in {x}")
        memo[x] = out
        return out

    return ev(as_expr(e))


def evaluate_array(e, env: Mapping[str, np.ndarray]) -> np.ndarray:
    """Vectorized evaluation; domain violations come back as NaN."""
    memo = {}
    size = len(next(iter(env.values()))) if env else 1

    def ev(x):
        hit = memo.get(x)
        if hit is not None:
            return hit
        if isinstance(x, Num):
            out = np.full(size, float(x.value))
        elif isinstance(x, Sym):
            try:
                out = np.asarray(env[x.name], dtype=float)
            except KeyError:
                raise UnboundSymbol(f"no value bound for {x.name!r}") from None
        elif isinstance(x, Sum):
            out = ev(x.terms[0]).copy()
            for term in x.terms[1:]:
                out = out + ev(term)
        elif isinstance(x, Prod):
            out = ev(x.factors[0]).copy()
            for f in x.factors[1:]:
                out = out * ev(f)
        elif isinstance(x, Pow):
            b = ev(x.base)
            if x.exp.denominator == 1:
                k = int(x.exp)
                out = np.where(b == 0, np.nan, b) ** k if k < 0 else b ** k
            else:
                out = np.where(b < 0, np.nan, b) ** float(x.exp)
                if x.exp < 0:
                    out = np.where(b == 0, np.nan, out)
        elif isinstance(x, Func):
            a = ev(x.arg)
            if x.name == "ln":
                out = np.log(np.where(a > 0, a, np.nan))
            elif x.name == "exp":
                out = np.exp(a)
            elif x.name == "sin":
                out = np.sin(a)
            elif x.name == "cos":
                out = np.cos(a)
            else:
                out = np.abs(a)
        else:
            raise TypeError(f"not an expression: {x!r}")
        out = np.where(np.isfinite(out), out, np.nan)
        memo[x] = out
        return out

    with np.errstate(all="ignore"):
        return ev(as_expr(e))


# --------------------------------------------------------------------------
# sampling domains

_DEFAULT_RANGES = {"time": (0.0, 2.0), "coord": (0.5, 2.0), "vel": (0.5, 2.0),
                   "accel": (0.5, 2.0), "param": (0.5, 2.0)}


@dataclass(frozen=True)
class SampleDomain:
    """Box of sample ranges plus fixed parameter values.

    Symbols named in ``params`` are held fixed; symbols named in ``box`` are
    drawn uniformly from their range; everything else falls back to the
    default box (``t`` in [0, 2], all other symbols in [0.5, 2]).
    """

    box: Mapping[str, tuple] = field(default_factory=dict)
    params: Mapping[str, float] = field(default_factory=dict)

    def range_of(self, sym: Sym):
        if sym.name in self.box:
            lo, hi = self.box[sym.name]
            return float(lo), float(hi)
        return _DEFAULT_RANGES[sym.kind]

    def sample(self, symbols, count: int, seed: int, offset: int = 0) -> dict:
        """Values of ``symbols`` at points ``offset .. offset+count-1``."""
        env = {}
        ks = range(offset, offset + count)
        for sym in sorted(symbols, key=lambda s: s.sortkey):
            if sym.name in self.params:
                env[sym.name] = np.full(count, float(self.params[sym.name]))
                continue
            lo, hi = self.range_of(sym)
            env[sym.name] = np.array([lo + (hi - lo) * sample_uniform(seed, k, sym.name) for k in ks])
        return env

    def point(self, symbols, k: int, seed: int) -> dict:
        env = self.sample(symbols, 1, seed, offset=k)
        return {name: float(vals[0]) for name, vals in env.items()}

    def with_params(self, **params):
        merged = dict(self.params)
        merged.update(params)
        return SampleDomain(dict(self.box), merged)


# --------------------------------------------------------------------------
# zero test

class Verdict(str, enum.Enum):
    ZERO = "Zero"
    NONZERO = "NonZero"
    INCONCLUSIVE = "Inconclusive"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class ZeroTestConfig:
    samples: int = 32
    tol_abs: float = 1e-10
    tol_rel: float = 1e-9
    seed: int = 0

    def reseeded(self, seed: int) -> "ZeroTestConfig":
        return ZeroTestConfig(self.samples, self.tol_abs, self.tol_rel, seed)


@dataclass(frozen=True)
class ZeroTest:
    verdict: Verdict
    witness: dict | None = None
    value: float | None = None
    domain_failures: int = 0
    by_normalization: bool = False

    @property
    def is_zero(self) -> bool:
        return self.verdict is Verdict.ZERO

    def __bool__(self):
        return self.is_zero

    def to_dict(self):
        out = {"verdict": self.verdict.value}
        if self.witness is not None:
            out["witness"] = {k: self.witness[k] for k in sorted(self.witness)}
            out["value"] = self.value
        if self.domain_failures:
            out["domain_failures"] = self.domain_failures
        return out


def term_scale(e: Expr, env) -> np.ndarray:
    """Pointwise max |term| over the additive terms of ``e``."""
    terms = e.terms if isinstance(e, Sum) else (e,)
    with np.errstate(all="ignore"):
        return np.max(np.abs(np.vstack([evaluate_array(t, env) for t in terms])), axis=0)


def is_zero(e, domain: SampleDomain | None = None, cfg: ZeroTestConfig | None = None) -> ZeroTest:
    """Decide whether ``e`` vanishes identically on ``domain``.

    A literal zero after normalization is Zero outright.  Otherwise ``e`` is
    sampled at ``cfg.samples`` deterministic points and compared against
    ``tol_abs + tol_rel * scale``, where scale is the largest magnitude of
    its additive terms at that point.  The first violating point is returned
    as a witness.  More than half the samples failing to evaluate gives
    Inconclusive.
    """
    e = as_expr(e)
    domain = domain or SampleDomain()
    cfg = cfg or ZeroTestConfig()
    if isinstance(e, Num):
        if e.value == 0:
            return ZeroTest(Verdict.ZERO, by_normalization=True)
        return ZeroTest(Verdict.NONZERO, witness={}, value=float(e.value))
    env = domain.sample(e.free_symbols, cfg.samples, cfg.seed)
    if not env:
        # constant expression: broadcast to the sample count
        env = {"__const__": np.zeros(cfg.samples)}
    values = evaluate_array(e, env)
    scale = term_scale(e, env)
    bad = np.isnan(values) | np.isnan(scale)
    failures = int(bad.sum())
    if failures * 2 > cfg.samples:
        return ZeroTest(Verdict.INCONCLUSIVE, domain_failures=failures)
    tol = cfg.tol_abs + cfg.tol_rel * np.where(bad, 0.0, scale)
    violating = (~bad) & (np.abs(np.where(bad, 0.0, values)) > tol)
    if violating.any():
        k = int(np.argmax(violating))
        witness = {name: float(vals[k]) for name, vals in env.items() if not name.startswith("__")}
        return ZeroTest(Verdict.NONZERO, witness=witness, value=float(values[k]),
                        domain_failures=failures)
    return ZeroTest(Verdict.ZERO, domain_failures=failures)


def all_zero(exprs, domain=None, cfg=None):
    """Zero-test every expression; returns (all_passed, list_of_results)."""
    results = [is_zero(e, domain, cfg) for e in exprs]
    return all(r.is_zero for r in results), results
