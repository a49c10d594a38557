"""Symmetry-constrained inverse problem: Method 1 (symmetry + Helmholtz) and
Method 2 (symmetry + prescribed constant of motion)."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .. import _validation as V
from ..errors import DegenerateVariation, DimensionMismatch, EmptySolution, IllConditioned, NoCompletion, UnsupportedClass
from ..expr import ZERO, ZeroTestConfig, add, diff, is_zero, mul, pow_, vel
from ..helmholtz import (Check, HelmholtzReport, _check_entries, a_matrix, h1_residuals,
                         h2_residuals, h4_entries, helmholtz_residuals)
from ..mechanics import DynamicalSystem, HessianCandidate, mat_vec
from ..noether import compatibility_residual, delta_q
from .ansatz import AnsatzFamily, sample_columns
from .linalg import Kernel, normalize_rows, nullspace, rref_basis, snap_vector

DEFAULT_TOL_RANK = 1e-9


def _upper(R, strict=False):
    n = len(R)
    return [R[i][j] for i in range(n) for j in range(i + (1 if strict else 0), n)]


def imposed_residuals(M: HessianCandidate, sys: DynamicalSystem, generators, A=None):
    """Scalar residuals linear in M: H1 (i<=j), H2 (i<j), H4, compatibility (i<=j) per generator."""
    A = A if A is not None else a_matrix(sys)
    out = _upper(h1_residuals(M, sys))
    out += _upper(h2_residuals(M, A), strict=True)
    out += [e for _, e in h4_entries(M)]
    for g in generators:
        out += _upper(compatibility_residual(M, g))
    return out


def _sample_count(K, samples):
    return samples if samples is not None else max(4 * K, 64)


@dataclass(frozen=True)
class FamilyMember:
    """One canonical basis element of the solution space."""

    coefficients: tuple
    exact: bool
    M: HessianCandidate
    helmholtz: HelmholtzReport
    compatibility: tuple
    extra_checks: tuple = ()

    @property
    def degenerate(self) -> bool:
        return not self.helmholtz.h5

    @property
    def verified(self) -> bool:
        h = self.helmholtz
        return (h.h1_check.passed and h.h2_check.passed and h.h3.passed and h.h4.passed
                and all(c.passed for c in self.compatibility)
                and all(c.passed for c in self.extra_checks))

    def to_dict(self, ansatz: AnsatzFamily | None = None):
        out = {
            "M": self.M.rows(),
            "coefficients": [str(c) if self.exact else float(c) for c in self.coefficients],
            "exact_coefficients": self.exact,
            "verified": self.verified,
            "degenerate": self.degenerate,
            "helmholtz": self.helmholtz.to_dict(),
            "compatibility": [c.to_dict() for c in self.compatibility],
        }
        if self.extra_checks:
            out["constant_relation"] = [c.to_dict() for c in self.extra_checks]
        return out


@dataclass(frozen=True)
class SolutionFamily:
    """Kernel of the sampled constraint system, plus verified canonical members.

    Uniqueness statements are relative to the ansatz that was searched.
    """

    ansatz: AnsatzFamily
    kernel: Kernel
    members: tuple
    samples: int
    seed: int
    tol_rank: float
    dropped_rows: int = 0
    particular: FamilyMember | None = None
    notes: tuple = field(default_factory=tuple)

    @property
    def dim(self) -> int:
        return self.kernel.dim

    @property
    def sound(self) -> bool:
        members = self.members + ((self.particular,) if self.particular else ())
        return all(m.verified for m in members)

    def to_dict(self):
        out = {
            "dimension": self.dim,
            "unknowns": self.ansatz.size,
            "rank": self.kernel.rank,
            "singular_value_gap": _finite(self.kernel.gap),
            "samples_per_residual": self.samples,
            "dropped_rows": self.dropped_rows,
            "solver_seed": self.seed,
            "tol_rank": self.tol_rank,
            "members": [m.to_dict() for m in self.members],
            "sound": self.sound,
            "uniqueness": "relative to the searched ansatz family",
        }
        if self.particular is not None:
            out["particular"] = self.particular.to_dict()
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def _finite(x):
    return x if np.isfinite(x) else "inf"


def _verify_member(M, sys, generators, domain, cfg, extra=()):
    report = helmholtz_residuals(M, sys, domain, cfg)
    compat = tuple(_check_entries(
        (((i + 1, j + 1), R[i][j]) for i in range(M.n) for j in range(i, M.n)), domain, cfg)
        for R in (compatibility_residual(M, g) for g in generators))
    return report, compat


def _fresh(cfg: ZeroTestConfig) -> ZeroTestConfig:
    """Independent re-check seed, distinct from the one used for sampling."""
    return cfg.reseeded((cfg.seed + 0x9E3779B9) & ((1 << 63) - 1))


def _members_from(ansatz, rows, sys, generators, domain, cfg, extra_fn=None):
    members = []
    for row in rows:
        coeffs, exact = snap_vector(row)
        M = ansatz.build(coeffs)
        report, compat = _verify_member(M, sys, generators, domain, cfg)
        extra = extra_fn(M) if extra_fn else ()
        members.append(FamilyMember(tuple(coeffs), exact, M, report, compat, extra))
    return tuple(members)


class Method1(BaseEstimator):
    """Hessian candidates satisfying H1-H4 and the compatibility relation of every generator.

    Parameters mirror the problem-file ``solver`` section.  After
    ``fit(system, symmetry)`` the estimator exposes ``family_`` (a
    :class:`SolutionFamily`), ``ansatz_`` (the family searched), ``kernel_`` (orthonormal kernel basis),
    ``singular_values_`` and ``n_solutions_``.
    """

    def __init__(self, ansatz=None, degree=2, samples=None, tol_rank=DEFAULT_TOL_RANK, seed=0,
                 domain=None, zero_test=None):
        self.ansatz = ansatz
        self.degree = degree
        self.samples = samples
        self.tol_rank = tol_rank
        self.seed = seed
        self.domain = domain
        self.zero_test = zero_test

    def _setup(self, system):
        sys = V.check_system(system)
        ansatz = self.ansatz if self.ansatz is not None else AnsatzFamily.monomial(
            sys.n, V.check_positive_int(self.degree, "degree"))
        if not isinstance(ansatz, AnsatzFamily):
            raise TypeError("ansatz must be an AnsatzFamily")
        if ansatz.n != sys.n:
            raise DimensionMismatch(f"ansatz is for n = {ansatz.n}, system has n = {sys.n}")
        seed = V.check_seed(self.seed)
        tol = V.check_tolerance(self.tol_rank, "tol_rank")
        samples = V.check_positive_int(self.samples, "samples", allow_none=True)
        domain = V.check_domain(self.domain)
        cfg = V.check_zero_test(self.zero_test, seed)
        return sys, ansatz, seed, tol, samples, domain, cfg

    def fit(self, system, symmetry):
        sys, ansatz, seed, tol, samples, domain, cfg = self._setup(system)
        gens = tuple(V.check_symmetry(symmetry, sys.n))
        K = ansatz.size
        if K == 0:
            raise EmptySolution("the ansatz has no unknowns")
        ansatz.gram_rank_check(domain, seed)
        A = a_matrix(sys)
        columns = [imposed_residuals(B, sys, gens, A) for B in ansatz.basis_matrices()]
        S = _sample_count(K, samples)
        mat, dropped = sample_columns(columns, domain, S, seed)
        _require_rows(mat, K)
        kernel = nullspace(normalize_rows(mat), tol)
        if kernel.dim == 0:
            raise EmptySolution("no nonzero Hessian in the ansatz satisfies the imposed conditions")
        rows, _ = rref_basis(kernel.basis)
        members = _members_from(ansatz, rows, sys, gens, domain, _fresh(cfg))
        self.family_ = SolutionFamily(ansatz, kernel, members, S, seed, tol, dropped)
        self.ansatz_ = ansatz
        self.kernel_ = kernel.basis
        self.singular_values_ = kernel.singular_values
        self.n_solutions_ = kernel.dim
        return self

    def candidates(self):
        """Hessian candidates of the fitted family, one per canonical member."""
        check_is_fitted(self, "family_")
        return [m.M for m in self.family_.members]


def _require_rows(mat, K):
    if mat.shape[0] < K:
        raise IllConditioned(f"only {mat.shape[0]} valid sample rows for {K} unknowns; "
                             "adjust the sample box")


def method1(sys, symmetry, ansatz=None, *, samples=None, tol_rank=DEFAULT_TOL_RANK, seed=0,
            domain=None, zero_test=None) -> SolutionFamily:
    return Method1(ansatz=ansatz, samples=samples, tol_rank=tol_rank, seed=seed, domain=domain,
                   zero_test=zero_test).fit(sys, symmetry).family_


# --------------------------------------------------------------------------
# Method 2

@dataclass(frozen=True)
class DirectResult:
    """Outcome of the one-dimensional closed-form path of Method 2."""

    M: HessianCandidate
    helmholtz: HelmholtzReport
    compatibility: Check
    lagrangian: object = None

    @property
    def exists(self) -> bool:
        h = self.helmholtz
        return h.overall and self.compatibility.passed

    @property
    def verdict(self) -> str:
        return "Exists" if self.exists else "NoLagrangian"

    def witness(self):
        """First failing check as a dict, or None."""
        h = self.helmholtz
        for name, chk in (("H1", h.h1_check), ("compatibility", self.compatibility)):
            if not chk.passed:
                return {"check": name, **chk.to_dict()}
        if not h.h5:
            return {"check": "H5", "min_abs_det": h.h5_min_det}
        return None

    def to_dict(self):
        out = {"verdict": self.verdict, "M": self.M.rows(), "helmholtz": self.helmholtz.to_dict(),
               "compatibility": self.compatibility.to_dict()}
        w = self.witness()
        if w is not None:
            out["witness"] = w
        if self.lagrangian is not None:
            out["lagrangian"] = str(self.lagrangian)
        return out


def _constant_relation_entries(M, C, g):
    dq = delta_q(g)
    Mdq = mat_vec(M.M, dq)
    return [((i + 1,), add(diff(C.C, vel(i + 1)), mul(-1, Mdq[i]))) for i in range(M.n)]


class Method2(BaseEstimator):
    """Hessian candidates compatible with a symmetry and a prescribed constant of motion.

    Without an ansatz and for n = 1 the Hessian is fixed directly by
    M11 = (dC/dv) / (Q - v T); ``result_`` is then a :class:`DirectResult`.
    Otherwise Method 1's constraints are augmented with dC/dv^i = M_ij dq^j
    and ``result_`` is a :class:`SolutionFamily` whose ``particular`` member
    carries the prescribed constant.
    """

    def __init__(self, ansatz=None, samples=None, tol_rank=DEFAULT_TOL_RANK, seed=0,
                 domain=None, zero_test=None, reconstruct=True):
        self.ansatz = ansatz
        self.samples = samples
        self.tol_rank = tol_rank
        self.seed = seed
        self.domain = domain
        self.zero_test = zero_test
        self.reconstruct = reconstruct

    def fit(self, system, generator, constant):
        sys = V.check_system(system)
        g = V.check_generator(generator, sys.n)
        C = V.check_constant(constant)
        seed = V.check_seed(self.seed)
        domain = V.check_domain(self.domain)
        cfg = V.check_zero_test(self.zero_test, seed)
        dq = delta_q(g)
        if all(is_zero(x, domain, cfg).is_zero for x in dq):
            raise DegenerateVariation("dq = Q - v T vanishes identically; the constant fixes nothing")
        if self.ansatz is None and sys.n == 1:
            self.result_ = self._direct(sys, g, C, dq[0], domain, cfg)
        else:
            self.result_ = self._augmented(sys, g, C, seed, domain, cfg)
        return self

    def candidate(self):
        """The Hessian fixed by the prescribed constant."""
        check_is_fitted(self, "result_")
        r = self.result_
        return r.M if isinstance(r, DirectResult) else r.particular.M

    def _direct(self, sys, g, C, dq, domain, cfg):
        M = HessianCandidate.scalar(mul(diff(C.C, vel(1)), pow_(dq, -1)))
        report = helmholtz_residuals(M, sys, domain, cfg)
        R = compatibility_residual(M, g)
        compat = _check_entries([((1, 1), R[0][0])], domain, cfg)
        lagrangian = None
        if self.reconstruct and report.overall and compat.passed:
            from .reconstruct import reconstruct_lagrangian_1d
            try:
                lagrangian = reconstruct_lagrangian_1d(M, sys, domain=domain, zero_test=cfg)
            except (UnsupportedClass, NoCompletion):
                lagrangian = None
        return DirectResult(M, report, compat, lagrangian)

    def _augmented(self, sys, g, C, seed, domain, cfg):
        ansatz = self.ansatz if self.ansatz is not None else AnsatzFamily.monomial(sys.n, 2)
        if ansatz.n != sys.n:
            raise DimensionMismatch(f"ansatz is for n = {ansatz.n}, system has n = {sys.n}")
        tol = V.check_tolerance(self.tol_rank, "tol_rank")
        samples = V.check_positive_int(self.samples, "samples", allow_none=True)
        K = ansatz.size
        if K == 0:
            raise EmptySolution("the ansatz has no unknowns")
        ansatz.gram_rank_check(domain, seed)
        A = a_matrix(sys)
        dq = delta_q(g)
        n = sys.n
        columns = []
        for B in ansatz.basis_matrices():
            col = imposed_residuals(B, sys, (g,), A)
            col += list(mat_vec(B.M, dq))
            columns.append(col)
        base_len = len(columns[0]) - n
        # unknown theta_0 multiplies the constant: sum_k theta_k (B_k dq)_i - theta_0 dC/dv^i = 0
        columns.append([ZERO] * base_len + [mul(-1, diff(C.C, vel(i + 1))) for i in range(n)])
        S = _sample_count(K + 1, samples)
        mat, dropped = sample_columns(columns, domain, S, seed)
        _require_rows(mat, K + 1)
        kernel = nullspace(normalize_rows(mat), tol)
        r = kernel.basis[K, :] if kernel.dim else np.zeros(0)
        if kernel.dim == 0 or np.linalg.norm(r) < 1e-8:
            raise EmptySolution("no Hessian in the ansatz reproduces the prescribed constant")
        particular = kernel.basis @ r / float(r @ r)
        fresh = _fresh(cfg)

        def constant_check(M):
            return (_check_entries(_constant_relation_entries(M, C, g), domain, fresh),)

        part = _members_from(ansatz, [particular[:K]], sys, (g,), domain, fresh, constant_check)[0]
        # homogeneous directions: kernel vectors with no constant component
        null_r = _orth_complement(kernel.basis, r)
        rows, _ = rref_basis(null_r[:K]) if null_r.shape[1] else (np.zeros((0, K)), [])
        members = _members_from(ansatz, rows, sys, (g,), domain, fresh)
        inner = Kernel(null_r[:K], kernel.singular_values, kernel.rank, kernel.gap)
        self.family_ = SolutionFamily(ansatz, inner, members, S, seed, tol, dropped, part)
        return self.family_


def _orth_complement(B, r):
    """Columns spanning {B x : x . r = 0}, orthonormal."""
    d = B.shape[1]
    if d <= 1:
        return np.zeros((B.shape[0], 0))
    u = r / np.linalg.norm(r)
    q, _, _ = np.linalg.svd(np.eye(d) - np.outer(u, u))
    return B @ q[:, : d - 1]


def method2(sys, generator, constant, ansatz=None, *, samples=None, tol_rank=DEFAULT_TOL_RANK,
            seed=0, domain=None, zero_test=None):
    return Method2(ansatz=ansatz, samples=samples, tol_rank=tol_rank, seed=seed, domain=domain,
                   zero_test=zero_test).fit(sys, generator, constant).result_
