import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from lagrange_forge.errors import (DegenerateVariation, DimensionMismatch, EmptySolution,
                                   IllConditioned, NoCompletion, UnsupportedClass)
from lagrange_forge.expr import ZERO, SampleDomain, parse
from lagrange_forge.helmholtz import helmholtz_residuals
from lagrange_forge.mechanics import (DynamicalSystem, equivalent_mod_total_derivative, extract_eom,
                                      hessian_of, identity)
from lagrange_forge.noether import SymmetryGenerator, compatibility_residual, matrix_is_zero
from lagrange_forge.solver import (AnsatzFamily, DirectResult, LagrangianReconstructor, Method1, Method2,
                                   double_antiderivative, imposed_residuals, method1, method2, monomials,
                                   nullspace, reconstruct_lagrangian_1d, rref_basis)
from lagrange_forge.solver.linalg import snap, snap_vector

from helpers import (DAMPED, DECAYING_SHIFT, L1, L2, L3, OSC, ROTATION, TIME_MAP, TIME_TRANSLATION,
                     TRANSLATION, same, scalar)

EX1 = AnsatzFamily.from_mapping(1, {"1,1": ["exp(lambda*t)", "1/v1", "1 + lambda*q1/v1"]})


def member_entries(fam):
    return [[[str(x) for x in row] for row in m.M.M] for m in fam.members]


class TestLinalg:
    def test_rank_one(self):
        A = np.array([[1.0, 0.0], [2.0, 0.0], [-3.0, 0.0]])
        k = nullspace(A)
        assert k.dim == 1
        np.testing.assert_allclose(k.basis[:, 0], [0.0, 1.0], atol=1e-15)

    def test_full_rank(self):
        A = np.random.default_rng(0).normal(size=(8, 2))
        assert nullspace(A).dim == 0

    def test_difference_constraint(self):
        A = np.array([[1.0, -1.0]] * 5) * np.arange(1, 6)[:, None]
        k = nullspace(A)
        np.testing.assert_allclose(k.basis[:, 0], [2 ** -0.5, 2 ** -0.5], atol=1e-15)

    def test_ambiguous_gap(self):
        A = np.diag([1.0, 5e-8, 1e-8])
        with pytest.raises(IllConditioned) as info:
            nullspace(A, tol=2e-8)
        assert info.value.gap < 10

    def test_rref(self):
        B = np.array([[1.0, 1.0], [2.0, 0.0], [0.0, 3.0]])
        R, piv = rref_basis(B)
        np.testing.assert_allclose(R, [[1.0, 0.0, 3.0], [0.0, 1.0, -1.5]], atol=1e-12)
        assert piv == [0, 1]

    def test_rref_is_basis_independent(self):
        rng = np.random.default_rng(3)
        B = rng.normal(size=(5, 2))
        C = B @ rng.normal(size=(2, 2))
        np.testing.assert_allclose(rref_basis(B)[0], rref_basis(C)[0], atol=1e-10)

    def test_snap(self):
        assert snap(0.3333333333333) == pytest.approx(1 / 3) and snap(0.5) == 0.5
        assert snap(np.pi) is None
        assert snap_vector([0.5, 0.25])[1] and not snap_vector([0.5, np.pi])[1]


class TestAnsatz:
    def test_monomial_count(self):
        assert len(monomials(["a", "b", "c", "d"], 2)) == 15
        fam = AnsatzFamily.monomial(2, 2)
        assert fam.size == 45

    def test_validation(self):
        with pytest.raises(DimensionMismatch):
            AnsatzFamily.from_mapping(1, {"1,2": ["1"]})
        with pytest.raises(ValueError):
            AnsatzFamily(1, (((1, 1), ("1",)), ((1, 1), ("v1",))))

    def test_build(self):
        M = EX1.build([1, 2, 0])
        assert same(M.M[0][0], "exp(lambda*t) + 2/v1")

    def test_gram_rank(self):
        EX1.gram_rank_check(SampleDomain(), 0)
        bad = AnsatzFamily.from_mapping(1, {"1,1": ["v1", "2*v1"]})
        with pytest.raises(ValueError):
            bad.gram_rank_check(SampleDomain(), 0)


class TestMethod1:
    @pytest.mark.parametrize("g, expected", [
        (TRANSLATION, [["exp(lambda*t)"], ["1/v1"]]),
        (TIME_TRANSLATION, [["1/v1"], ["1 + lambda*q1/v1"]]),
        (DECAYING_SHIFT, [["exp(lambda*t)"]]),
    ])
    def test_example_1(self, g, expected):
        fam = method1(DAMPED, g, EX1)
        assert fam.dim == len(expected) and fam.sound
        for m, e in zip(fam.members, expected):
            assert same(m.M.M[0][0], e[0])
            assert m.exact

    def test_example_2(self):
        est = Method1(degree=2).fit(OSC, ROTATION)
        assert est.n_solutions_ == 1 and est.ansatz_.size == 45
        (M,) = est.candidates()
        assert M.M == identity(2).M
        assert est.family_.to_dict()["uniqueness"] == "relative to the searched ansatz family"

    def test_fixed_omega_has_second_member(self):
        # with omega bound to a number, omega-dependent coefficients become representable
        dom = SampleDomain(params={"omega": 1.0})
        fam = method1(OSC, ROTATION, AnsatzFamily.monomial(2, 2), domain=dom)
        assert fam.dim == 2 and fam.sound
        assert fam.members[0].M.M == identity(2).M
        expected = [["3*q1^2 + q2^2 + 3*v1^2 + v2^2", "2*q1*q2 + 2*v1*v2"],
                    ["2*q1*q2 + 2*v1*v2", "q1^2 + 3*q2^2 + v1^2 + 3*v2^2"]]
        second = fam.members[1].M.M
        for i in range(2):
            for j in range(2):
                assert same(f"3*({second[i][j]})", expected[i][j])

    def test_second_member_is_a_genuine_hessian(self):
        # solved for independently (quartic ansatz in v and omega*q, sympy)
        lag = ("((v1^2 + v2^2)^2 + omega^2*(6*q1^2*v1^2 + 2*q1^2*v2^2 + 8*q1*q2*v1*v2"
               " + 2*q2^2*v1^2 + 6*q2^2*v2^2) - 3*omega^4*(q1^2 + q2^2)^2)/4")
        H = hessian_of(lag, 2)
        assert same(H.M[0][0], "3*v1^2 + v2^2 + omega^2*(3*q1^2 + q2^2)")
        assert same(H.M[0][1], "2*v1*v2 + 2*omega^2*q1*q2")
        assert helmholtz_residuals(H, OSC).overall
        assert all(same(f, g) for f, g in zip(extract_eom(lag, n=2).f, OSC.f))

    def test_empty(self):
        with pytest.raises(EmptySolution):
            method1(DAMPED, TRANSLATION, AnsatzFamily.from_mapping(1, {"1,1": ["1"]}))
        with pytest.raises(EmptySolution):
            method1(DAMPED, TRANSLATION, AnsatzFamily(1, ()))

    def test_degenerate_flag(self):
        # each canonical member of this family is singular; H5 only flags it
        fam = method1(DynamicalSystem(("0", "0")), SymmetryGenerator("0", ("1", "0")),
                      AnsatzFamily.from_mapping(2, {"1,1": ["1"], "2,2": ["1"]}))
        assert fam.dim == 2 and all(m.degenerate and m.verified for m in fam.members)
        assert fam.members[0].M.M == ((parse("1"), ZERO), (ZERO, ZERO))

    def test_soundness_members_reverify(self):
        fam = method1(DAMPED, TRANSLATION, EX1, seed=11)
        for m in fam.members:
            assert m.verified
            assert matrix_is_zero(compatibility_residual(m.M, TRANSLATION))[0]

    def test_seed_invariance(self):
        a = Method1(ansatz=EX1, seed=1).fit(DAMPED, TRANSLATION).family_.kernel
        b = Method1(ansatz=EX1, seed=99).fit(DAMPED, TRANSLATION).family_.kernel
        assert np.linalg.norm(a.projector() - b.projector()) < 1e-6

    def test_imposed_residuals(self):
        res = imposed_residuals(scalar("exp(lambda*t)"), DAMPED, (TRANSLATION,))
        assert all(r == ZERO or same(r, "0") for r in res)

    def test_estimator_api(self):
        est = Method1(ansatz=EX1, seed=3)
        assert est.get_params()["seed"] == 3
        assert clone(est).get_params()["ansatz"] == EX1
        with pytest.raises(NotFittedError):
            est.candidates()

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            method1(OSC, ROTATION, EX1)


class TestMethod2:
    def test_exists(self):
        res = method2(DAMPED, TRANSLATION, "m*v1*exp(lambda*t)")
        assert isinstance(res, DirectResult) and res.verdict == "Exists"
        assert same(res.M.M[0][0], "m*exp(lambda*t)")
        assert res.lagrangian is not None
        assert equivalent_mod_total_derivative(res.lagrangian, L1)

    def test_rejects(self):
        dom = SampleDomain(params={"lambda": 0.3, "m": 1.5})
        res = method2(DAMPED, TRANSLATION, "m*v1", domain=dom)
        assert res.verdict == "NoLagrangian" and same(res.M.M[0][0], "m")
        w = res.witness()
        assert w["check"] == "H1"
        assert w["value"] == pytest.approx(-0.45, rel=1e-9)

    def test_time_map(self):
        res = method2(DAMPED, TIME_MAP, "m*v1^2*exp(2*lambda*t)/2")
        assert res.exists and same(res.M.M[0][0], "m*exp(lambda*t)")

    def test_log_lagrangian_constant(self):
        res = method2(DAMPED, TIME_MAP, "m*v1*exp(lambda*t)")
        assert res.exists and same(res.M.M[0][0], "m/v1")

    def test_degenerate_variation(self):
        with pytest.raises(DegenerateVariation):
            method2(DAMPED, SymmetryGenerator("0", ("0",)), "v1")

    def test_subset_of_method1(self):
        res = method2(DAMPED, TRANSLATION, "m*v1*exp(lambda*t)")
        for r in imposed_residuals(res.M, DAMPED, (TRANSLATION,)):
            assert same(r, "0")

    def test_ansatz_path_2d(self):
        res = method2(OSC, ROTATION, "q2*v1 - q1*v2", AnsatzFamily.monomial(2, 2))
        assert res.sound and res.dim == 0
        assert res.particular.M.M == identity(2).M

    def test_ansatz_path_1d(self):
        res = method2(DAMPED, TRANSLATION, "m*v1*exp(lambda*t)",
                      AnsatzFamily.from_mapping(1, {"1,1": ["m*exp(lambda*t)", "m/v1"]}))
        assert same(res.particular.M.M[0][0], "m*exp(lambda*t)")

    def test_ansatz_cannot_reproduce(self):
        with pytest.raises(EmptySolution):
            method2(DAMPED, TRANSLATION, "m*v1*exp(lambda*t)",
                    AnsatzFamily.from_mapping(1, {"1,1": ["m/v1"]}))

    def test_estimator(self):
        est = Method2(reconstruct=False).fit(DAMPED, TRANSLATION, "m*v1*exp(lambda*t)")
        assert est.result_.lagrangian is None
        assert same(est.candidate().M[0][0], "m*exp(lambda*t)")


class TestReconstruct:
    @pytest.mark.parametrize("M, L", [("m*exp(lambda*t)", L1), ("m/v1", L2),
                                      ("m*(1 + lambda*q1/v1)", L3)])
    def test_damped(self, M, L):
        lag = reconstruct_lagrangian_1d(scalar(M), DAMPED)
        assert equivalent_mod_total_derivative(lag, L)
        assert same(hessian_of(lag).M[0][0], M)
        assert same(extract_eom(lag).f[0], "-lambda*v1")

    def test_oscillator_1d(self):
        sys = DynamicalSystem(("-omega^2*q1",))
        lag = reconstruct_lagrangian_1d(scalar("1"), sys)
        assert equivalent_mod_total_derivative(lag, "v1^2/2 - omega^2*q1^2/2")

    def test_table(self):
        assert same(double_antiderivative(parse("v1^3")), "v1^5/20")
        assert same(double_antiderivative(parse("1/v1")), "v1*ln(abs(v1)) - v1")
        assert same(double_antiderivative(parse("v1^(-2)")), "-ln(abs(v1))")

    def test_unsupported(self):
        with pytest.raises(UnsupportedClass):
            reconstruct_lagrangian_1d(scalar("exp(v1)"), DAMPED)

    def test_no_completion(self):
        with pytest.raises(NoCompletion):
            reconstruct_lagrangian_1d(scalar("m"), DAMPED)

    def test_only_1d(self):
        with pytest.raises(DimensionMismatch):
            LagrangianReconstructor().fit(OSC, identity(2))

    def test_estimator(self):
        est = LagrangianReconstructor().fit(DAMPED, scalar("m/v1"))
        assert all(same(r, "0") for r in est.euler_lagrange(DAMPED))
        assert not all(same(r, "0") for r in est.euler_lagrange())
