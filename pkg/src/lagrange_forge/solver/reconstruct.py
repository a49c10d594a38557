"""One-dimensional Lagrangian reconstruction from a Hessian M11.

L = I2(M11) + a(q, t) v + b(q, t), where I2 integrates twice in v using a
fixed table and (a, b) are fitted so that the Euler-Lagrange residual
vanishes on the given system.
"""
from __future__ import annotations

import itertools
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .. import _validation as V
from ..errors import DimensionMismatch, NoCompletion, UnsupportedClass
from ..expr import (ONE, ZERO, Func, Pow, Prod, Sum, Sym, abs_, add, coord, diff, is_zero,
                    ln, mul, parse, pow_, time, vel)
from ..mechanics import DynamicalSystem, Lagrangian, euler_lagrange_residual, hessian_of
from .ansatz import sample_columns
from .linalg import normalize_rows, nullspace, snap_vector

V1 = vel(1)


def _split_velocity(term):
    """term = u(q, t) * v1^k; returns (u, k) or raises UnsupportedClass."""
    factors = term.factors if isinstance(term, Prod) else (term,)
    k = Fraction(0)
    rest = []
    for f in factors:
        if f == V1:
            k += 1
        elif isinstance(f, Pow) and f.base == V1:
            k += f.exp
        elif V1 in f.free_symbols:
            raise UnsupportedClass(f"factor {f} depends on v1 outside a plain power")
        else:
            rest.append(f)
    return mul(*rest) if rest else ONE, k


def double_antiderivative(e):
    """I2 with d^2 I2 / dv1^2 = e, from the table
    v^k -> v^(k+2)/((k+1)(k+2)),  v^-1 -> v ln|v| - v,  v^-2 -> -ln|v|."""
    terms = e.terms if isinstance(e, Sum) else (e,)
    out = []
    for term in terms:
        if term == ZERO:
            continue
        u, k = _split_velocity(term)
        if k == -1:
            piece = add(mul(V1, ln(abs_(V1))), mul(-1, V1))
        elif k == -2:
            piece = mul(-1, ln(abs_(V1)))
        else:
            piece = mul(Fraction(1) / ((k + 1) * (k + 2)), pow_(V1, k + 2))
        out.append(mul(u, piece))
    return add(*out)


def _atoms(e):
    """(exp atoms, param monomials, max q1 degree) found across the additive terms of ``e``."""
    terms = e.terms if isinstance(e, Sum) else (e,)
    exps, params, qdeg = set(), set(), 0
    for term in terms:
        factors = term.factors if isinstance(term, Prod) else (term,)
        pfac = []
        for f in factors:
            if isinstance(f, Func) and f.name == "exp":
                exps.add(f)
            elif isinstance(f, Sym) and f.kind == "param" or (
                    isinstance(f, Pow) and isinstance(f.base, Sym) and f.base.kind == "param"):
                pfac.append(f)
            elif f == coord(1):
                qdeg = max(qdeg, 1)
            elif isinstance(f, Pow) and f.base == coord(1) and f.exp.denominator == 1:
                qdeg = max(qdeg, int(f.exp))
        params.add(mul(*pfac) if pfac else ONE)
    return exps, params, qdeg


def default_completion_basis(residual, degree: int = 2):
    """q1-monomials times {1, exp atoms} times the parameter monomials of ``residual``."""
    exps, params, qdeg = _atoms(residual)
    degree = max(degree, qdeg + 1)
    qs = [pow_(coord(1), d) for d in range(degree + 1)]
    factors = [ONE] + sorted(exps, key=lambda x: x.sortkey)
    params = sorted(params, key=lambda x: x.sortkey)
    return [mul(q, f, p) for q, f, p in itertools.product(qs, factors, params)]


def _solve_completion(R, basis_b, basis_a, domain, seed, tol):
    """Coefficients with sum b_k d/dq(B_k) - sum a_k d/dt(A_k) = R, or None."""
    cols = [[diff(b, coord(1))] for b in basis_b] + [[mul(-1, diff(a, time()))] for a in basis_a]
    cols.append([mul(-1, R)])
    K = len(cols) - 1
    mat, _ = sample_columns(cols, domain, max(4 * (K + 1), 64), seed)
    kernel = nullspace(normalize_rows(mat), tol, check_gap=False)
    if kernel.dim == 0:
        return None
    r = kernel.basis[K, :]
    if np.linalg.norm(r) < 1e-8:
        return None
    # minimum-norm solution with unit weight on the residual column
    p = kernel.basis @ r / float(r @ r)
    coeffs, _ = snap_vector(p[:K], max_den=10_000)
    return coeffs


def reconstruct_lagrangian_1d(M, sys: DynamicalSystem, completion_basis=None, *, seed=0,
                              tol_rank=1e-9, domain=None, zero_test=None) -> Lagrangian:
    return LagrangianReconstructor(completion_basis=completion_basis, seed=seed, tol_rank=tol_rank,
                                   domain=domain, zero_test=zero_test).fit(sys, M).lagrangian_


class LagrangianReconstructor(BaseEstimator):
    """Douglas-style reconstruction for n = 1; ``fit(system, hessian)`` sets ``lagrangian_``.

    The completion terms a(q, t) v + b(q, t) are searched in
    ``completion_basis`` (strings or Expr over q1, t and parameters).  The
    default basis is built from the exponential atoms and parameter
    monomials of the residual that has to be cancelled.
    """

    def __init__(self, completion_basis=None, seed=0, tol_rank=1e-9, domain=None, zero_test=None):
        self.completion_basis = completion_basis
        self.seed = seed
        self.tol_rank = tol_rank
        self.domain = domain
        self.zero_test = zero_test

    def fit(self, system, hessian):
        sys = V.check_system(system)
        if sys.n != 1:
            raise DimensionMismatch("reconstruction is implemented for n = 1 only")
        M = V.check_hessian(hessian, 1)
        seed = V.check_seed(self.seed)
        tol = V.check_tolerance(self.tol_rank, "tol_rank")
        domain = V.check_domain(self.domain)
        cfg = V.check_zero_test(self.zero_test, seed)
        m11 = M.M[0][0]
        L0 = double_antiderivative(m11)
        # EL(L0 + a v + b) = EL(L0) + db/dq - da/dt
        R = mul(-1, euler_lagrange_residual(Lagrangian(L0, 1), sys)[0])
        if any(s.kind == "vel" for s in R.free_symbols) and not is_zero(diff(R, V1), domain, cfg).is_zero:
            raise NoCompletion("the Euler-Lagrange residual of the v-antiderivative depends on v1; "
                               "M does not satisfy H1 for this system")
        if is_zero(R, domain, cfg).is_zero:
            L = L0
        else:
            if self.completion_basis is not None:
                basis = [parse(b, 1) if isinstance(b, str) else b for b in self.completion_basis]
            else:
                basis = default_completion_basis(R)
            bad = [b for b in basis if V1 in b.free_symbols]
            if bad:
                raise ValueError(f"completion basis must not depend on v1: {bad[0]}")
            coeffs = _solve_completion(R, basis, [], domain, seed, tol)
            a_part = ZERO
            if coeffs is None:
                coeffs = _solve_completion(R, basis, basis, domain, seed, tol)
                if coeffs is None:
                    raise NoCompletion("no a(q,t) v + b(q,t) in the completion basis cancels the "
                                       "residual; enlarge the basis")
                a_part = add(*(mul(c, a) for c, a in zip(coeffs[len(basis):], basis)))
            b_part = add(*(mul(c, b) for c, b in zip(coeffs[:len(basis)], basis)))
            L = add(L0, mul(a_part, V1), b_part)
        lag = Lagrangian(L, 1)
        self._verify(lag, M, sys, domain, cfg)
        self.lagrangian_ = lag
        self.hessian_ = M
        return self

    def euler_lagrange(self, sys=None):
        """Residuals of the fitted Lagrangian, on-shell when ``sys`` is given."""
        check_is_fitted(self, "lagrangian_")
        return euler_lagrange_residual(self.lagrangian_, sys)

    @staticmethod
    def _verify(lag, M, sys, domain, cfg):
        if not is_zero(add(hessian_of(lag).M[0][0], mul(-1, M.M[0][0])), domain, cfg).is_zero:
            raise NoCompletion("reconstructed Lagrangian does not reproduce M")
        res = is_zero(euler_lagrange_residual(lag, sys)[0], domain, cfg)
        if not res.is_zero:
            raise NoCompletion(f"reconstructed Lagrangian fails the Euler-Lagrange check ({res.verdict})")


__all__ = ["reconstruct_lagrangian_1d", "LagrangianReconstructor", "double_antiderivative",
           "default_completion_basis"]
