"""Helmholtz conditions H1-H5 for a candidate Hessian and a second-order system."""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

from .errors import DimensionMismatch
from .expr import (Expr, SampleDomain, Verdict, ZeroTest, ZeroTestConfig, add, coord,
                   diff, exp, is_zero, mul, param, parse, pow_, substitute, time, vel)
from .mechanics import DET_FLOOR, DynamicalSystem, HessianCandidate, total_time_derivative

_HALF = Fraction(1, 2)


@dataclass(frozen=True)
class AMatrix:
    """A^k_i stored as ``A[k][i]``."""

    A: tuple

    @property
    def n(self):
        return len(self.A)

    def __getitem__(self, ki):
        k, i = ki
        return self.A[k][i]


def a_matrix(sys: DynamicalSystem) -> AMatrix:
    """A^k_i = d/dt(df^k/dv^i) - 2 df^k/dq^i - 1/2 (df^k/dv^l)(df^l/dv^i)."""
    n = sys.n
    J = [[diff(sys.f[k], vel(i + 1)) for i in range(n)] for k in range(n)]
    rows = []
    for k in range(n):
        row = []
        for i in range(n):
            terms = [total_time_derivative(J[k][i], sys), mul(-2, diff(sys.f[k], coord(i + 1)))]
            terms += [mul(-_HALF, J[k][l], J[l][i]) for l in range(n)]
            row.append(add(*terms))
        rows.append(tuple(row))
    return AMatrix(tuple(rows))


@dataclass(frozen=True)
class Check:
    """Verdict for a group of scalar residuals; ``where`` names the first failing entry."""

    verdict: Verdict
    where: tuple | None = None
    result: ZeroTest | None = None

    @property
    def passed(self):
        return self.verdict is Verdict.ZERO

    def to_dict(self):
        out = {"verdict": self.verdict.value}
        if self.where is not None:
            out["entry"] = list(self.where)
        if self.result is not None and self.result.witness is not None:
            out["witness"] = {k: self.result.witness[k] for k in sorted(self.result.witness)}
            out["value"] = self.result.value
        return out


def _check_entries(entries, domain, cfg) -> Check:
    """entries: iterable of (label, Expr). NonZero beats Inconclusive."""
    pending = None
    for label, e in entries:
        res = is_zero(e, domain, cfg)
        if res.verdict is Verdict.NONZERO:
            return Check(Verdict.NONZERO, label, res)
        if res.verdict is Verdict.INCONCLUSIVE and pending is None:
            pending = Check(Verdict.INCONCLUSIVE, label, res)
    return pending or Check(Verdict.ZERO)


@dataclass(frozen=True)
class HelmholtzReport:
    h1: tuple
    h2: tuple
    h1_check: Check
    h2_check: Check
    h3: Check
    h4: Check
    h5_min_det: float
    h5: bool
    det_relation: Expr
    det_relation_check: Check

    @property
    def overall(self) -> bool:
        return (self.h1_check.passed and self.h2_check.passed and self.h3.passed
                and self.h4.passed and self.h5)

    def failures(self):
        out = []
        for name, chk in (("H1", self.h1_check), ("H2", self.h2_check), ("H3", self.h3), ("H4", self.h4)):
            if not chk.passed:
                out.append(name)
        if not self.h5:
            out.append("H5")
        return out

    def to_dict(self):
        return {
            "H1": {**self.h1_check.to_dict(), "residuals": [[str(x) for x in r] for r in self.h1]},
            "H2": {**self.h2_check.to_dict(), "residuals": [[str(x) for x in r] for r in self.h2]},
            "H3": self.h3.to_dict(),
            "H4": self.h4.to_dict(),
            "H5": {"min_abs_det": self.h5_min_det, "threshold": DET_FLOOR, "passed": self.h5},
            "det_relation": {**self.det_relation_check.to_dict(), "residual": str(self.det_relation)},
            "overall": "pass" if self.overall else "fail",
        }


def h1_residuals(M: HessianCandidate, sys: DynamicalSystem):
    n = M.n
    J = [[diff(sys.f[k], vel(i + 1)) for i in range(n)] for k in range(n)]
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = [total_time_derivative(M.M[i][j], sys)]
            for k in range(n):
                terms.append(mul(_HALF, M.M[i][k], J[k][j]))
                terms.append(mul(_HALF, M.M[j][k], J[k][i]))
            row.append(add(*terms))
        out.append(tuple(row))
    return tuple(out)


def h2_residuals(M: HessianCandidate, A: AMatrix):
    n = M.n
    out = []
    for i in range(n):
        row = []
        for j in range(n):
            terms = []
            for k in range(n):
                terms.append(mul(M.M[i][k], A.A[k][j]))
                terms.append(mul(-1, M.M[j][k], A.A[k][i]))
            row.append(add(*terms))
        out.append(tuple(row))
    return tuple(out)


def h3_entries(M: HessianCandidate):
    n = M.n
    return [((i + 1, j + 1), add(M.M[i][j], mul(-1, M.M[j][i])))
            for i in range(n) for j in range(i + 1, n)]


def h4_entries(M: HessianCandidate):
    """dM_ij/dv^k - dM_ik/dv^j for all i and j < k."""
    n = M.n
    return [((i + 1, j + 1, k + 1), add(diff(M.M[i][j], vel(k + 1)), mul(-1, diff(M.M[i][k], vel(j + 1)))))
            for i in range(n) for j in range(n) for k in range(j + 1, n)]


def det_relation_residual(M: HessianCandidate, sys: DynamicalSystem) -> Expr:
    """d/dt(det M) + det M * df^i/dv^i, a consequence of H1."""
    det = M.det()
    trace = add(*(diff(sys.f[i], vel(i + 1)) for i in range(sys.n)))
    return add(total_time_derivative(det, sys), mul(det, trace))


def _upper_entries(R):
    """(i, j) with i < j; enough for the antisymmetric H2 residual."""
    n = len(R)
    return [((i + 1, j + 1), R[i][j]) for i in range(n) for j in range(i + 1, n)]


def helmholtz_residuals(M, sys: DynamicalSystem, domain: SampleDomain | None = None,
                        cfg: ZeroTestConfig | None = None) -> HelmholtzReport:
    M = M if isinstance(M, HessianCandidate) else HessianCandidate(M)
    if M.n != sys.n:
        raise DimensionMismatch(f"M is {M.n}x{M.n} but the system has n = {sys.n}")
    h1 = h1_residuals(M, sys)
    h2 = h2_residuals(M, a_matrix(sys))
    # H1 is symmetric in (i, j) only when H3 holds, so test the full matrix
    h1_check = _check_entries((((i + 1, j + 1), h1[i][j]) for i in range(M.n) for j in range(M.n)),
                              domain, cfg)
    h2_check = _check_entries(_upper_entries(h2), domain, cfg)
    min_det = M.min_abs_det(domain, cfg)
    det_rel = det_relation_residual(M, sys)
    return HelmholtzReport(
        h1=h1, h2=h2,
        h1_check=h1_check,
        h2_check=h2_check,
        h3=_check_entries(h3_entries(M), domain, cfg),
        h4=_check_entries(h4_entries(M), domain, cfg),
        h5_min_det=min_det,
        h5=bool(min_det == min_det and min_det > DET_FLOOR),
        det_relation=det_rel,
        det_relation_check=_check_entries([((), det_rel)], domain, cfg),
    )


XI1 = param("xi1")
XI2 = param("xi2")


def damped_particle(lam=None) -> DynamicalSystem:
    lam = param("lambda") if lam is None else lam
    return DynamicalSystem((mul(-1, lam, vel(1)),))


def general_h1_solution(G, lam=None) -> Expr:
    """M11 = G(xi1, xi2)/v1 with xi1 = v1 + lambda q1 and xi2 = v1 exp(lambda t)."""
    lam = param("lambda") if lam is None else lam
    G = parse(G) if isinstance(G, str) else G
    bound = substitute(G, {XI1: add(vel(1), mul(lam, coord(1))),
                           XI2: mul(vel(1), exp(mul(lam, time())))})
    return mul(bound, pow_(vel(1), -1))


def general_h1_solution_check(G, sys: DynamicalSystem | None = None, domain=None, cfg=None) -> ZeroTest:
    """Zero-test the H1 residual of M11 = G(xi1, xi2)/v1 for the damped particle."""
    sys = sys or damped_particle()
    if sys.n != 1:
        raise DimensionMismatch("general_h1_solution_check is for the 1D damped particle")
    M = HessianCandidate.scalar(general_h1_solution(G))
    return is_zero(h1_residuals(M, sys)[0][0], domain, cfg)
