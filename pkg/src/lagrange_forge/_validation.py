"""Argument checks shared by the estimator classes."""
from __future__ import annotations

import numbers

from .errors import DimensionMismatch
from .expr import SampleDomain, ZeroTestConfig
from .mechanics import DynamicalSystem, HessianCandidate
from .noether import ConstantOfMotion, SymmetryGenerator, SymmetryGroupAction


def check_system(sys) -> DynamicalSystem:
    if not isinstance(sys, DynamicalSystem):
        raise TypeError(f"expected a DynamicalSystem, got {type(sys).__name__}")
    return sys


def check_symmetry(g, n: int) -> SymmetryGroupAction:
    """Accept a generator, a sequence of generators or a group action; dimensions must match ``n``."""
    if isinstance(g, SymmetryGenerator):
        g = SymmetryGroupAction((g,))
    elif isinstance(g, (list, tuple)) and all(isinstance(x, SymmetryGenerator) for x in g):
        g = SymmetryGroupAction(tuple(g))
    if not isinstance(g, SymmetryGroupAction):
        raise TypeError(f"expected a SymmetryGenerator or SymmetryGroupAction, got {type(g).__name__}")
    for gen in g:
        if gen.n != n:
            raise DimensionMismatch(f"generator has n = {gen.n}, system has n = {n}")
    return g


def check_generator(g, n: int) -> SymmetryGenerator:
    if not isinstance(g, SymmetryGenerator):
        raise TypeError(f"expected a SymmetryGenerator, got {type(g).__name__}")
    if g.n != n:
        raise DimensionMismatch(f"generator has n = {g.n}, system has n = {n}")
    return g


def check_constant(C) -> ConstantOfMotion:
    return C if isinstance(C, ConstantOfMotion) else ConstantOfMotion(C)


def check_hessian(M, n: int) -> HessianCandidate:
    M = M if isinstance(M, HessianCandidate) else HessianCandidate(M)
    if M.n != n:
        raise DimensionMismatch(f"M is {M.n}x{M.n}, system has n = {n}")
    return M


def check_positive_int(value, name: str, allow_none: bool = False):
    if value is None and allow_none:
        return None
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value <= 0:
        raise ValueError(f"{name} must be a positive integer, got {value!r}")
    return int(value)


def check_tolerance(value, name: str) -> float:
    if isinstance(value, bool) or not isinstance(value, numbers.Real) or not 0 < value < 1:
        raise ValueError(f"{name} must lie in (0, 1), got {value!r}")
    return float(value)


def check_seed(value) -> int:
    if isinstance(value, bool) or not isinstance(value, numbers.Integral) or value < 0:
        raise ValueError(f"seed must be a non-negative integer, got {value!r}")
    return int(value)


def check_domain(domain) -> SampleDomain:
    if domain is None:
        return SampleDomain()
    if not isinstance(domain, SampleDomain):
        raise TypeError(f"expected a SampleDomain, got {type(domain).__name__}")
    return domain


def check_zero_test(cfg, seed: int) -> ZeroTestConfig:
    cfg = cfg or ZeroTestConfig()
    if not isinstance(cfg, ZeroTestConfig):
        raise TypeError(f"expected a ZeroTestConfig, got {type(cfg).__name__}")
    return cfg.reseeded(seed) if cfg.seed != seed else cfg
