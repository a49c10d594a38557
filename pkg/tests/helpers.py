"""Shared fixtures: the damped particle, the isotropic oscillator and their Lagrangians."""
from lagrange_forge.expr import SampleDomain, Verdict, ZeroTestConfig, add, is_zero, mul, parse
from lagrange_forge.mechanics import DynamicalSystem, HessianCandidate
from lagrange_forge.noether import SymmetryGenerator

DAMPED = DynamicalSystem(("-lambda*v1",))
OSC = DynamicalSystem(("-omega^2*q1", "-omega^2*q2"))
FREE = DynamicalSystem(("0",))

L1 = "m*v1^2*exp(lambda*t)/2"
L2 = "m*(v1*ln(abs(v1)) - lambda*q1)"
L3 = "m*v1^2/2 + m*lambda*q1*v1*(ln(abs(v1)) - 1) - m*lambda^2*q1^2/2"
L_OSC = "c*(v1^2 + v2^2 - omega^2*q1^2 - omega^2*q2^2)/2"

TRANSLATION = SymmetryGenerator("0", ("1",))
TIME_TRANSLATION = SymmetryGenerator("1", ("0",))
TIME_MAP = SymmetryGenerator("-exp(lambda*t)", ("0",))
DECAYING_SHIFT = SymmetryGenerator("0", ("exp(-lambda*t)",))
ROTATION = SymmetryGenerator("0", ("q2", "-q1"))

# (Lagrangian, generator with boundary term, constant of motion)
TRIPLES = [
    (L1, TRANSLATION, "m*v1*exp(lambda*t)"),
    (L1, TIME_MAP, "m*v1^2*exp(2*lambda*t)/2"),
    (L2, SymmetryGenerator("-exp(lambda*t)", ("0",), "lambda*m*q1*exp(lambda*t)"), "m*v1*exp(lambda*t)"),
    (L2, SymmetryGenerator("0", ("1",), "-lambda*m*t"), "m*ln(abs(v1)) + m + lambda*m*t"),
    (L3, TIME_TRANSLATION, "-m*(v1 + lambda*q1)^2/2"),
    (L1, SymmetryGenerator("0", ("exp(-lambda*t)",), "-lambda*m*q1"), "m*v1 + lambda*m*q1"),
    (L_OSC, ROTATION, "c*(q2*v1 - q1*v2)"),
]

PARAMS = {"lambda": 0.3, "m": 1.0, "omega": 1.0, "c": 1.0}


def verdict(e, domain=None, cfg=None) -> Verdict:
    return is_zero(parse(e) if isinstance(e, str) else e, domain, cfg).verdict


def same(a, b, domain=None) -> bool:
    a = parse(a) if isinstance(a, str) else a
    b = parse(b) if isinstance(b, str) else b
    return is_zero(add(a, mul(-1, b)), domain).is_zero


def scalar(text) -> HessianCandidate:
    return HessianCandidate.scalar(parse(text))


__all__ = ["DAMPED", "OSC", "FREE", "L1", "L2", "L3", "L_OSC", "TRANSLATION", "TIME_TRANSLATION",
           "TIME_MAP", "DECAYING_SHIFT", "ROTATION", "TRIPLES", "PARAMS", "verdict", "same", "scalar",
           "SampleDomain", "ZeroTestConfig", "Verdict"]
