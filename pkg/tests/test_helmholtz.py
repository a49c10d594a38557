import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lagrange_forge.errors import DimensionMismatch
from lagrange_forge.expr import ZERO, SampleDomain, Verdict, add, parse
from lagrange_forge.helmholtz import (a_matrix, det_relation_residual, general_h1_solution,
                                      general_h1_solution_check, h1_residuals, h2_residuals,
                                      helmholtz_residuals)
from lagrange_forge.mechanics import DynamicalSystem, HessianCandidate, extract_eom, hessian_of, identity

from helpers import DAMPED, FREE, L1, L2, L3, L_OSC, OSC, same, scalar, verdict


class TestAMatrix:
    def test_damped(self):
        assert same(a_matrix(DAMPED).A[0][0], "-lambda^2/2")

    def test_oscillator(self):
        A = a_matrix(OSC).A
        assert same(A[0][0], "2*omega^2") and same(A[1][1], "2*omega^2")
        assert A[0][1] == ZERO and A[1][0] == ZERO

    def test_free(self):
        assert a_matrix(FREE).A == ((ZERO,),)

    def test_acceleration_free(self):
        sys = DynamicalSystem(("-v1*v2*q1 + t", "sin(q1)*v2^2"))
        for row in a_matrix(sys).A:
            for e in row:
                assert not any(s.kind == "accel" for s in e.free_symbols)


class TestResiduals:
    @pytest.mark.parametrize("M", ["m*exp(lambda*t)", "m/v1", "m*(1 + lambda*q1/v1)"])
    def test_damped_pass(self, M):
        rep = helmholtz_residuals(scalar(M), DAMPED)
        assert rep.overall and rep.failures() == []
        assert rep.det_relation_check.passed

    def test_h1_reduction(self):
        (r,) = h1_residuals(scalar("m*exp(lambda*t)"), DAMPED)[0]
        assert verdict(r) is Verdict.ZERO

    def test_constant_mass_fails(self):
        rep = helmholtz_residuals(scalar("m"), DAMPED, SampleDomain(params={"lambda": 0.3, "m": 1.0}))
        assert not rep.overall and rep.failures() == ["H1"]
        assert same(rep.h1[0][0], "-lambda*m")
        assert rep.h1_check.result.value == pytest.approx(-0.3, rel=1e-12)

    def test_oscillator_identity(self):
        assert helmholtz_residuals(identity(2, parse("c")), OSC).overall

    def test_h3_failure(self):
        M = HessianCandidate((("1", "q1"), ("0", "1")))
        rep = helmholtz_residuals(M, OSC)
        assert "H3" in rep.failures()

    def test_h4_failure(self):
        M = HessianCandidate((("v2", "0"), ("0", "1")))
        rep = helmholtz_residuals(M, DynamicalSystem(("0", "0")))
        assert "H4" in rep.failures()

    def test_h5_failure(self):
        rep = helmholtz_residuals(scalar("0"), DAMPED)
        assert not rep.h5 and "H5" in rep.failures()

    def test_h5_box_dependent(self):
        M = scalar("v1")
        assert helmholtz_residuals(M, FREE).h5
        assert not helmholtz_residuals(M, FREE, SampleDomain({"v1": (-1e-12, 1e-12)})).h5

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            helmholtz_residuals(identity(2), DAMPED)

    def test_report_dict(self):
        d = helmholtz_residuals(scalar("m"), DAMPED).to_dict()
        assert d["overall"] == "fail" and d["H1"]["verdict"] == "NonZero"
        assert set(d) == {"H1", "H2", "H3", "H4", "H5", "det_relation", "overall"}

    @pytest.mark.parametrize("L", [L1, L2, L3, L_OSC, "v1^2/2 + v2^2 + v1*v2/3 + q1*v2 - q1^2*q2^2"])
    def test_necessity(self, L):
        n = 2 if "q2" in L or "v2" in L else 1
        rep = helmholtz_residuals(hessian_of(L, n), extract_eom(L, n=n))
        assert rep.overall and rep.det_relation_check.passed


class TestDetRelation:
    def test_damped(self):
        assert verdict(det_relation_residual(scalar("m/v1"), DAMPED)) is Verdict.ZERO

    def test_failure_mirrors_h1(self):
        r = det_relation_residual(scalar("m"), DAMPED)
        assert same(r, "-lambda*m")


class TestGeneralSolution:
    @pytest.mark.parametrize("G, M", [("1", "1/v1"), ("xi2", "exp(lambda*t)"),
                                      ("xi1", "1 + lambda*q1/v1")])
    def test_named_choices(self, G, M):
        assert same(general_h1_solution(G), M)
        assert general_h1_solution_check(G).is_zero

    @pytest.mark.parametrize("G", ["xi1*xi2", "xi2^2", "exp(xi1)*xi2^3", "ln(abs(xi1)) + 1/xi2"])
    def test_other_choices(self, G):
        assert general_h1_solution_check(G).is_zero

    def test_requires_1d(self):
        with pytest.raises(DimensionMismatch):
            general_h1_solution_check("1", OSC)


SMALL_POLY = st.lists(st.tuples(st.integers(-3, 3), st.integers(0, 2), st.integers(0, 2), st.integers(0, 2)),
                      min_size=1, max_size=4)


def _poly(terms, names):
    return add(*(parse(f"{c}*{names[0]}^{a}*{names[1]}^{b}*{names[2]}^{d}") for c, a, b, d in terms))


@settings(max_examples=40, deadline=None)
@given(SMALL_POLY, SMALL_POLY, SMALL_POLY, SMALL_POLY)
def test_h2_antisymmetric(m11, m12, m22, force):
    sys = DynamicalSystem((_poly(force, ["q1", "v1", "q2"]), _poly(force, ["q2", "v2", "t"])))
    off = _poly(m12, ["q1", "v2", "t"])
    M = HessianCandidate(((_poly(m11, ["q1", "v1", "t"]), off), (off, _poly(m22, ["q2", "v1", "v2"]))))
    R = h2_residuals(M, a_matrix(sys))
    assert add(R[0][1], R[1][0]) == ZERO
    assert R[0][0] == ZERO and R[1][1] == ZERO
