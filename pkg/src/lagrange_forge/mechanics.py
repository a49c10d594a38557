"""Dynamical systems, Lagrangians, Euler-Lagrange residuals and Hessians."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from .errors import DimensionMismatch, SingularHessian
from .expr import (ONE, ZERO, Expr, SampleDomain, ZeroTestConfig, accel, add, as_expr,
                   coord, diff, evaluate_array, is_zero, max_index, mul, pow_, time, vel)

MAX_DIM = 4
# H5 regularity threshold on the sample box
DET_FLOOR = 1e-8


def _check_symbols(exprs, n, allow_accel=False, what="expression"):
    for e in exprs:
        for s in e.free_symbols:
            if s.kind in ("coord", "vel", "accel") and s.index > n:
                raise DimensionMismatch(f"{what} uses {s.name} but n = {n}")
            if s.kind == "accel" and not allow_accel:
                raise ValueError(f"{what} must not contain accelerations (found {s.name})")


@dataclass(frozen=True)
class DynamicalSystem:
    """Second-order system q'' = f(q, q', t)."""

    f: tuple
    n: int = None

    def __post_init__(self):
        f = tuple(as_expr(x) for x in self.f)
        n = len(f) if self.n is None else int(self.n)
        if n != len(f):
            raise DimensionMismatch(f"n = {n} but {len(f)} force expressions given")
        if not 1 <= n <= MAX_DIM:
            raise DimensionMismatch(f"dimension must lie in 1..{MAX_DIM}, got {n}")
        _check_symbols(f, n, what="force")
        object.__setattr__(self, "f", f)
        object.__setattr__(self, "n", n)

    def __str__(self):
        return "; ".join(f"a{i + 1} = {fi}" for i, fi in enumerate(self.f))


@dataclass(frozen=True)
class Lagrangian:
    L: Expr
    n: int = None
    params: Mapping[str, float] = field(default_factory=dict)

    def __post_init__(self):
        L = as_expr(self.L)
        n = max(max_index(L), 1) if self.n is None else int(self.n)
        _check_symbols([L], n, what="Lagrangian")
        object.__setattr__(self, "L", L)
        object.__setattr__(self, "n", n)

    def __str__(self):
        return str(self.L)


def _as_lagrangian(L, n=None):
    return L if isinstance(L, Lagrangian) else Lagrangian(L, n)


# --------------------------------------------------------------------------
# symbolic matrices (n <= 4, cofactor formulas)

def mat_det(m):
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return add(mul(m[0][0], m[1][1]), mul(-1, m[0][1], m[1][0]))
    terms = []
    for j in range(n):
        if m[0][j] == ZERO:
            continue
        minor = [row[:j] + row[j + 1:] for row in m[1:]]
        terms.append(mul(-1 if j % 2 else 1, m[0][j], mat_det(minor)))
    return add(*terms)


def mat_inverse(m):
    """Symbolic inverse via adjugate / determinant."""
    n = len(m)
    det = mat_det(m)
    inv_det = pow_(det, -1)
    if n == 1:
        return ((inv_det,),)
    out = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [row[:j] + row[j + 1:] for k, row in enumerate(m) if k != i]
            cof = mul(-1 if (i + j) % 2 else 1, mat_det(minor), inv_det)
            out[j][i] = cof
    return tuple(tuple(r) for r in out)


def mat_vec(m, vec):
    return tuple(add(*(mul(m[i][j], vec[j]) for j in range(len(vec)))) for i in range(len(m)))


@dataclass(frozen=True)
class HessianCandidate:
    """Candidate velocity Hessian M_ij of a Lagrangian."""

    M: tuple

    def __post_init__(self):
        rows = tuple(tuple(as_expr(x) for x in row) for row in self.M)
        n = len(rows)
        if n == 0 or any(len(r) != n for r in rows):
            raise DimensionMismatch("Hessian candidate must be a square matrix")
        if n > MAX_DIM:
            raise DimensionMismatch(f"dimension must lie in 1..{MAX_DIM}")
        _check_symbols([x for r in rows for x in r], n, what="Hessian entry")
        object.__setattr__(self, "M", rows)

    @classmethod
    def scalar(cls, m11):
        return cls(((m11,),))

    @property
    def n(self):
        return len(self.M)

    def __getitem__(self, ij):
        i, j = ij
        return self.M[i][j]

    def det(self):
        return mat_det(self.M)

    def inverse(self):
        return mat_inverse(self.M)

    def min_abs_det(self, domain=None, cfg=None):
        """Smallest |det M| over the sample box (NaN points skipped)."""
        cfg = cfg or ZeroTestConfig()
        domain = domain or SampleDomain()
        det = self.det()
        if not det.free_symbols:
            env = {"__const__": np.zeros(cfg.samples)}
        else:
            env = domain.sample(det.free_symbols, cfg.samples, cfg.seed)
        vals = np.abs(evaluate_array(det, env))
        vals = vals[~np.isnan(vals)]
        return float(vals.min()) if vals.size else float("nan")

    def is_regular(self, domain=None, cfg=None):
        m = self.min_abs_det(domain, cfg)
        return bool(m == m and m > DET_FLOOR)

    def rows(self):
        return [[str(x) for x in r] for r in self.M]

    def __str__(self):
        return "[" + "; ".join(", ".join(str(x) for x in r) for r in self.M) + "]"


# --------------------------------------------------------------------------
# operators

def total_time_derivative(e, sys: DynamicalSystem | None = None, n: int | None = None) -> Expr:
    """d/dt along curves: partial_t + v^i partial_q^i + (a^i or f^i) partial_v^i.

    With ``sys`` the accelerations are eliminated through its right-hand
    sides; without it they stay as symbols ``a<i>``.
    """
    e = as_expr(e)
    if sys is not None:
        if n is not None and n != sys.n:
            raise DimensionMismatch(f"n = {n} does not match system dimension {sys.n}")
        n = sys.n
    elif n is None:
        n = max_index(e)
    if sys is not None:
        _check_symbols([e], n, allow_accel=True)
    terms = [diff(e, time())]
    for i in range(1, n + 1):
        terms.append(mul(vel(i), diff(e, coord(i))))
        dv = diff(e, vel(i))
        if dv != ZERO:
            terms.append(mul(sys.f[i - 1] if sys is not None else accel(i), dv))
        if any(s.kind == "accel" for s in e.free_symbols):
            da = diff(e, accel(i))
            if da != ZERO:
                raise ValueError("total_time_derivative does not handle jerk terms")
    return add(*terms)


def hessian_of(L, n: int | None = None) -> HessianCandidate:
    lag = _as_lagrangian(L, n)
    n = lag.n
    grads = [diff(lag.L, vel(i)) for i in range(1, n + 1)]
    rows = []
    for i in range(n):
        rows.append(tuple(diff(grads[i], vel(j + 1)) if j >= i else None for j in range(n)))
    full = [[rows[i][j] if j >= i else rows[j][i] for j in range(n)] for i in range(n)]
    return HessianCandidate(tuple(tuple(r) for r in full))


def euler_lagrange_residual(L, sys: DynamicalSystem | None = None, n: int | None = None):
    """E_i = dL/dq^i - d/dt dL/dv^i, on-shell when ``sys`` is given."""
    if sys is not None:
        n = sys.n
    lag = _as_lagrangian(L, n)
    if sys is not None and lag.n > sys.n:
        raise DimensionMismatch(f"Lagrangian has n = {lag.n}, system has n = {sys.n}")
    n = sys.n if sys is not None else lag.n
    out = []
    for i in range(1, n + 1):
        p = diff(lag.L, vel(i))
        out.append(add(diff(lag.L, coord(i)), mul(-1, total_time_derivative(p, sys, n))))
    return tuple(out)


def extract_eom(L, domain: SampleDomain | None = None, cfg: ZeroTestConfig | None = None,
                n: int | None = None) -> DynamicalSystem:
    """Solve the Euler-Lagrange equations of a regular Lagrangian for q''."""
    lag = _as_lagrangian(L, n)
    M = hessian_of(lag)
    if not M.is_regular(domain, cfg):
        raise SingularHessian(f"det M vanishes on the sample box (min |det| = {M.min_abs_det(domain, cfg):.3g})")
    n = lag.n
    rhs = []
    for j in range(1, n + 1):
        p = diff(lag.L, vel(j))
        terms = [diff(lag.L, coord(j)), mul(-1, diff(p, time()))]
        for k in range(1, n + 1):
            terms.append(mul(-1, vel(k), diff(p, coord(k))))
        rhs.append(add(*terms))
    f = mat_vec(M.inverse(), rhs)
    return DynamicalSystem(f, n)


def equivalent_mod_total_derivative(L1, L2, domain: SampleDomain | None = None,
                                    cfg: ZeroTestConfig | None = None, n: int | None = None) -> bool:
    """True when L1 - L2 has identically vanishing Euler-Lagrange expressions.

    Accelerations are kept symbolic (and sampled), so this holds exactly when
    the two Lagrangians differ by a total time derivative of some f(q, t).
    """
    l1, l2 = _as_lagrangian(L1, n), _as_lagrangian(L2, n)
    n = max(l1.n, l2.n) if n is None else n
    residual = euler_lagrange_residual(Lagrangian(add(l1.L, mul(-1, l2.L)), n), None, n)
    return all(is_zero(r, domain, cfg).is_zero for r in residual)


def is_generated_by(L, sys: DynamicalSystem, domain=None, cfg=None):
    """Zero-test every on-shell Euler-Lagrange residual; returns (ok, results)."""
    results = [is_zero(r, domain, cfg) for r in euler_lagrange_residual(L, sys)]
    return all(r.is_zero for r in results), results


def symbols_q(n):
    return [coord(i) for i in range(1, n + 1)]


def symbols_v(n):
    return [vel(i) for i in range(1, n + 1)]


def identity(n, scale=ONE):
    return HessianCandidate(tuple(tuple(scale if i == j else ZERO for j in range(n)) for i in range(n)))
