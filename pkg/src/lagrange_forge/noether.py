"""Point symmetries, Noether's identity, Noether constants and the relations
tying a symmetry to the velocity Hessian and a constant of motion.

All d/dt applications here act on functions of (q, t) only, so they use the
acceleration-free chain rule partial_t + v^j partial_q^j and never need the
equations of motion.
"""
from __future__ import annotations

import warnings
from fractions import Fraction
from dataclasses import dataclass

from .errors import DimensionMismatch, NotASymmetryWarning, SingularHessian
from .expr import (ZERO, Expr, SampleDomain, Verdict, ZeroTest, ZeroTestConfig, add, as_expr,
                   coord, diff, is_zero, mul, time, vel)
from .mechanics import HessianCandidate, _as_lagrangian, mat_vec


@dataclass(frozen=True)
class SymmetryGenerator:
    """Coefficients of one parameter: Delta t = T eps, Delta q^i = Q^i eps, boundary F eps."""

    T: Expr
    Q: tuple
    F: Expr = ZERO

    def __post_init__(self):
        T = as_expr(self.T)
        Q = tuple(as_expr(x) for x in self.Q)
        F = as_expr(self.F)
        if not Q:
            raise DimensionMismatch("a generator needs at least one Q component")
        for e in (T, F, *Q):
            for s in e.free_symbols:
                if s.kind in ("vel", "accel"):
                    raise ValueError(f"generator coefficients must depend on (q, t) only; found {s.name}")
                if s.kind == "coord" and s.index > len(Q):
                    raise DimensionMismatch(f"generator uses {s.name} but n = {len(Q)}")
        object.__setattr__(self, "T", T)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "F", F)

    @property
    def n(self):
        return len(self.Q)

    def to_dict(self):
        return {"T": str(self.T), "Q": [str(x) for x in self.Q], "F": str(self.F)}


@dataclass(frozen=True)
class SymmetryGroupAction:
    generators: tuple

    def __post_init__(self):
        gens = tuple(self.generators)
        if len({g.n for g in gens}) > 1:
            raise DimensionMismatch("all generators must share the same n")
        object.__setattr__(self, "generators", gens)

    @property
    def n(self):
        return self.generators[0].n if self.generators else 0

    def __iter__(self):
        return iter(self.generators)

    def __len__(self):
        return len(self.generators)


@dataclass(frozen=True)
class ConstantOfMotion:
    C: Expr
    symmetry_check: ZeroTest | None = None

    def __post_init__(self):
        object.__setattr__(self, "C", as_expr(self.C))

    def __str__(self):
        return str(self.C)


def _as_constant(C):
    return C if isinstance(C, ConstantOfMotion) else ConstantOfMotion(C)


def _as_hessian(M):
    return M if isinstance(M, HessianCandidate) else HessianCandidate(M)


def dt_point(e, n):
    """d/dt of a (q, t)-function: partial_t + v^j partial_q^j."""
    return add(diff(e, time()), *(mul(vel(j), diff(e, coord(j))) for j in range(1, n + 1)))


def delta_q(g: SymmetryGenerator):
    """Form variation at fixed time, per unit parameter: Q^i - v^i T."""
    return tuple(add(Qi, mul(-1, vel(i), g.T)) for i, Qi in enumerate(g.Q, start=1))


def _check_n(*ns):
    if len(set(ns)) > 1:
        raise DimensionMismatch(f"dimension mismatch: {ns}")


def noether_identity_residual(L, g: SymmetryGenerator) -> Expr:
    """Acceleration-free form of Noether's identity; zero iff g is a variational symmetry."""
    lag = _as_lagrangian(L, g.n)
    _check_n(lag.n, g.n)
    n = g.n
    dT = dt_point(g.T, n)
    terms = [mul(diff(lag.L, time()), g.T), mul(lag.L, dT), mul(-1, dt_point(g.F, n))]
    for k in range(1, n + 1):
        terms.append(mul(diff(lag.L, coord(k)), g.Q[k - 1]))
        terms.append(mul(diff(lag.L, vel(k)), add(dt_point(g.Q[k - 1], n), mul(-1, vel(k), dT))))
    return add(*terms)


def noether_constant(L, g: SymmetryGenerator, domain: SampleDomain | None = None,
                     cfg: ZeroTestConfig | None = None, check: bool = True) -> ConstantOfMotion:
    """C = (dL/dv^i) Q^i + (L - (dL/dv^i) v^i) T - F.

    When ``check`` is set the identity residual is zero-tested first and a
    :class:`NotASymmetryWarning` is issued if it fails; the verdict is kept on
    the returned object either way.
    """
    lag = _as_lagrangian(L, g.n)
    _check_n(lag.n, g.n)
    n = g.n
    momenta = [diff(lag.L, vel(i)) for i in range(1, n + 1)]
    energy_like = add(lag.L, *(mul(-1, p, vel(i)) for i, p in enumerate(momenta, start=1)))
    C = add(*(mul(p, Qi) for p, Qi in zip(momenta, g.Q)), mul(energy_like, g.T), mul(-1, g.F))
    verdict = None
    if check:
        verdict = is_zero(noether_identity_residual(lag, g), domain, cfg)
        if not verdict.is_zero:
            warnings.warn(f"generator is not a variational symmetry ({verdict.verdict})",
                          NotASymmetryWarning, stacklevel=2)
    return ConstantOfMotion(C, verdict)


def delta_q_relation_residual(M, C, g: SymmetryGenerator):
    """dC/dv^i - M_ij dq^j for each i."""
    M, C = _as_hessian(M), _as_constant(C)
    _check_n(M.n, g.n)
    dq = delta_q(g)
    Mdq = mat_vec(M.M, dq)
    return tuple(add(diff(C.C, vel(i + 1)), mul(-1, Mdq[i])) for i in range(M.n))


@dataclass(frozen=True)
class Reconstruction:
    """Symmetry coefficients recovered from (M, C) plus their velocity-independence check."""

    T: Expr
    Q: tuple
    velocity_check: ZeroTest

    @property
    def consistent(self):
        return self.velocity_check.is_zero

    def generator(self, F=ZERO):
        return SymmetryGenerator(self.T, self.Q, F)


@dataclass(frozen=True)
class BoundaryTerm:
    F: Expr
    velocity_check: ZeroTest

    @property
    def consistent(self):
        return self.velocity_check.is_zero


def _flow_vector(M, C):
    """W^i = M^ij dC/dv^j and its velocity divergence."""
    n = M.n
    W = mat_vec(M.inverse(), [diff(C.C, vel(j)) for j in range(1, n + 1)])
    div = add(*(diff(W[i], vel(i + 1)) for i in range(n)))
    return W, div


def _velocity_check(exprs, n, domain, cfg):
    """First failing v-partial among ``exprs``, or an overall Zero verdict."""
    worst = ZeroTest(Verdict.ZERO)
    for e in exprs:
        for j in range(1, n + 1):
            res = is_zero(diff(e, vel(j)), domain, cfg)
            if res.verdict is Verdict.NONZERO:
                return res
            if res.verdict is Verdict.INCONCLUSIVE:
                worst = res
    return worst


def _require_regular(M, domain, cfg):
    if not M.is_regular(domain, cfg):
        raise SingularHessian("M is not invertible on the sample box")


def reconstruct_transformation(M, C, domain: SampleDomain | None = None,
                               cfg: ZeroTestConfig | None = None) -> Reconstruction:
    """T = -(1/n) d/dv^i (M^ij dC/dv^j),  Q^i = M^ij dC/dv^j + v^i T.

    The result is flagged inconsistent (not raised) when T or Q keeps a
    velocity dependence, i.e. when (M, C) admits no point symmetry.
    """
    M, C = _as_hessian(M), _as_constant(C)
    _require_regular(M, domain, cfg)
    n = M.n
    W, div = _flow_vector(M, C)
    T = mul(-1, div, Fraction(1, n))
    Q = tuple(add(W[i], mul(vel(i + 1), T)) for i in range(n))
    return Reconstruction(T, Q, _velocity_check((T, *Q), n, domain, cfg))


def boundary_term(L, M, C, domain: SampleDomain | None = None,
                  cfg: ZeroTestConfig | None = None) -> BoundaryTerm:
    """F = (dL/dv^i) M^ij dC/dv^j - (1/n) L d/dv^i(M^ij dC/dv^j) - C."""
    M, C = _as_hessian(M), _as_constant(C)
    lag = _as_lagrangian(L, M.n)
    _check_n(lag.n, M.n)
    _require_regular(M, domain, cfg)
    n = M.n
    W, div = _flow_vector(M, C)
    F = add(*(mul(diff(lag.L, vel(i + 1)), W[i]) for i in range(n)),
            mul(-1, Fraction(1, n), lag.L, div), mul(-1, C.C))
    return BoundaryTerm(F, _velocity_check((F,), n, domain, cfg))


def _variation_of_M(M, g, n, dT):
    """Delta M_ij = (dM_ij/dq^k) Q^k + (dM_ij/dv^k)[dQ^k/dt - v^k dT/dt] + (dM_ij/dt) T."""
    shifts = [add(dt_point(g.Q[k], n), mul(-1, vel(k + 1), dT)) for k in range(n)]
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            m = M.M[i][j]
            terms = [mul(diff(m, time()), g.T)]
            for k in range(n):
                terms.append(mul(diff(m, coord(k + 1)), g.Q[k]))
                terms.append(mul(diff(m, vel(k + 1)), shifts[k]))
            out[i][j] = add(*terms)
    return out, shifts


def compatibility_residual(M, g: SymmetryGenerator, n: int | None = None):
    """Symmetrized compatibility relation between M and a point symmetry.

    R_ij = Delta M_ij + M_ik dQ^k/dq^j + M_jk dQ^k/dq^i
           - M_ik v^k dT/dq^j - M_jk v^k dT/dq^i - M_ij dT/dt
    """
    M = _as_hessian(M)
    _check_n(M.n, g.n, *(() if n is None else (n,)))
    n = M.n
    dT = dt_point(g.T, n)
    dM, _ = _variation_of_M(M, g, n, dT)
    dQ = [[diff(g.Q[k], coord(j + 1)) for j in range(n)] for k in range(n)]
    dTq = [diff(g.T, coord(j + 1)) for j in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = [dM[i][j], mul(-1, M.M[i][j], dT)]
            for k in range(n):
                terms.append(mul(M.M[i][k], dQ[k][j]))
                terms.append(mul(M.M[j][k], dQ[k][i]))
                terms.append(mul(-1, M.M[i][k], vel(k + 1), dTq[j]))
                terms.append(mul(-1, M.M[j][k], vel(k + 1), dTq[i]))
            row.append(add(*terms))
        out.append(tuple(row))
    return tuple(out)


def compatibility_residual_delta_form(M, g: SymmetryGenerator):
    """Same relation written with dq^k = Q^k - v^k T:
    R_ij = Delta M_ij + M_ik d(dq^k)/dq^j + M_jk d(dq^k)/dq^i - M_ij dT/dt."""
    M = _as_hessian(M)
    _check_n(M.n, g.n)
    n = M.n
    dT = dt_point(g.T, n)
    dM, _ = _variation_of_M(M, g, n, dT)
    dq = delta_q(g)
    ddq = [[diff(dq[k], coord(j + 1)) for j in range(n)] for k in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = [dM[i][j], mul(-1, M.M[i][j], dT)]
            for k in range(n):
                terms.append(mul(M.M[i][k], ddq[k][j]))
                terms.append(mul(M.M[j][k], ddq[k][i]))
            row.append(add(*terms))
        out.append(tuple(row))
    return tuple(out)


def compatibility_residual_unsymmetrized(M, g: SymmetryGenerator):
    """The relation before H3/H4 are used to symmetrize it.

    R_ij = (dM_ij/dq^k) Q^k + (dM_jk/dv^i)[dQ^k/dt - v^k dT/dt]
           + M_jk [dQ^k/dq^i - v^k dT/dq^i] + M_ik [dQ^k/dq^j - v^k dT/dq^j]
           + (dM_ij/dt) T - M_ji dT/dt
    Agrees with :func:`compatibility_residual` whenever M satisfies H3 and H4.
    """
    M = _as_hessian(M)
    _check_n(M.n, g.n)
    n = M.n
    dT = dt_point(g.T, n)
    shifts = [add(dt_point(g.Q[k], n), mul(-1, vel(k + 1), dT)) for k in range(n)]
    local = [[add(diff(g.Q[k], coord(i + 1)), mul(-1, vel(k + 1), diff(g.T, coord(i + 1))))
              for i in range(n)] for k in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            m = M.M[i][j]
            terms = [mul(diff(m, time()), g.T), mul(-1, M.M[j][i], dT)]
            for k in range(n):
                terms.append(mul(diff(m, coord(k + 1)), g.Q[k]))
                terms.append(mul(diff(M.M[j][k], vel(i + 1)), shifts[k]))
                terms.append(mul(M.M[j][k], local[k][i]))
                terms.append(mul(M.M[i][k], local[k][j]))
            row.append(add(*terms))
        out.append(tuple(row))
    return tuple(out)


def matrix_is_zero(R, domain=None, cfg=None):
    """Zero-test every entry of a residual matrix; returns (ok, first_failure or None)."""
    for i, row in enumerate(R):
        for j, e in enumerate(row):
            res = is_zero(e, domain, cfg)
            if not res.is_zero:
                return False, ((i + 1, j + 1), res)
    return True, None


def vector_is_zero(vec, domain=None, cfg=None):
    for i, e in enumerate(vec):
        res = is_zero(e, domain, cfg)
        if not res.is_zero:
            return False, (i + 1, res)
    return True, None


__all__ = [
    "SymmetryGenerator", "SymmetryGroupAction", "ConstantOfMotion", "Reconstruction",
    "BoundaryTerm", "delta_q", "dt_point", "noether_identity_residual", "noether_constant",
    "delta_q_relation_residual", "reconstruct_transformation", "boundary_term",
    "compatibility_residual", "compatibility_residual_delta_form",
    "compatibility_residual_unsymmetrized", "matrix_is_zero", "vector_is_zero",
]
