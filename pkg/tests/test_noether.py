import warnings

import pytest

from lagrange_forge.errors import DimensionMismatch, NotASymmetryWarning, SingularHessian
from lagrange_forge.expr import ZERO, Verdict, parse
from lagrange_forge.mechanics import hessian_of, identity
from lagrange_forge.noether import (SymmetryGenerator, SymmetryGroupAction, boundary_term,
                                    compatibility_residual, compatibility_residual_delta_form,
                                    compatibility_residual_unsymmetrized, delta_q,
                                    delta_q_relation_residual, matrix_is_zero, noether_constant,
                                    noether_identity_residual, reconstruct_transformation,
                                    vector_is_zero)

from helpers import (DECAYING_SHIFT, L1, L2, L_OSC, ROTATION, TIME_MAP, TIME_TRANSLATION, TRANSLATION,
                     TRIPLES, same, scalar, verdict)


class TestGenerator:
    def test_rejects_velocities(self):
        with pytest.raises(ValueError):
            SymmetryGenerator("v1", ("0",))

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            SymmetryGenerator("0", ("q2",))
        with pytest.raises(DimensionMismatch):
            SymmetryGroupAction((TRANSLATION, ROTATION))

    def test_to_dict(self):
        assert TIME_MAP.to_dict() == {"T": "-exp(lambda*t)", "Q": ["0"], "F": "0"}


class TestDeltaQ:
    def test_translation(self):
        assert delta_q(TRANSLATION) == (parse("1"),)

    def test_time_map(self):
        assert same(delta_q(TIME_MAP)[0], "v1*exp(lambda*t)")

    def test_time_translation(self):
        assert delta_q(TIME_TRANSLATION) == (parse("-v1"),)


class TestIdentity:
    def test_exact_symmetry(self):
        assert verdict(noether_identity_residual(L1, TRANSLATION)) is Verdict.ZERO

    def test_with_boundary_term(self):
        g = SymmetryGenerator("-exp(lambda*t)", ("0",), "lambda*m*q1*exp(lambda*t)")
        assert verdict(noether_identity_residual(L2, g)) is Verdict.ZERO

    def test_scaling_is_not_a_symmetry(self):
        r = noether_identity_residual(L1, SymmetryGenerator("0", ("q1",)))
        assert same(r, "m*v1^2*exp(lambda*t)")
        assert verdict(r) is Verdict.NONZERO

    @pytest.mark.parametrize("L, g, C", TRIPLES)
    def test_acceleration_free(self, L, g, C):
        r = noether_identity_residual(L, g)
        assert not any(s.kind == "accel" for s in r.free_symbols)

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            noether_identity_residual(L_OSC, TRANSLATION)


class TestConstant:
    @pytest.mark.parametrize("L, g, C", [
        (L1, TRANSLATION, "m*v1*exp(lambda*t)"),
        (L1, TIME_MAP, "m*v1^2*exp(2*lambda*t)/2"),
        (L2, SymmetryGenerator("-exp(lambda*t)", ("0",), "lambda*m*q1*exp(lambda*t)"), "m*v1*exp(lambda*t)"),
    ])
    def test_damped_constants(self, L, g, C):
        with warnings.catch_warnings():
            warnings.simplefilter("error")
            got = noether_constant(L, g)
        assert same(got.C, C)
        assert got.symmetry_check.is_zero

    def test_warns_on_non_symmetry(self):
        with pytest.warns(NotASymmetryWarning):
            c = noether_constant(L2, TRANSLATION)
        assert c.symmetry_check.verdict is Verdict.NONZERO

    @pytest.mark.parametrize("L, g, C", TRIPLES)
    def test_corpus_triples(self, L, g, C):
        assert same(noether_constant(L, g).C, C)


class TestDeltaQRelation:
    def test_translation(self):
        (r,) = delta_q_relation_residual(scalar("m*exp(lambda*t)"), "m*v1*exp(lambda*t)", TRANSLATION)
        assert verdict(r) is Verdict.ZERO

    def test_time_map_log(self):
        (r,) = delta_q_relation_residual(scalar("m/v1"), "m*v1*exp(lambda*t)", TIME_MAP)
        assert verdict(r) is Verdict.ZERO

    def test_wrong_hessian(self):
        (r,) = delta_q_relation_residual(scalar("m"), "m*v1*exp(lambda*t)", TRANSLATION)
        assert same(r, "m*exp(lambda*t) - m")
        assert verdict(r) is Verdict.NONZERO

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            delta_q_relation_residual(identity(2), "v1", TRANSLATION)


class TestReconstruction:
    def test_time_map(self):
        rec = reconstruct_transformation(scalar("m*exp(lambda*t)"), "m*v1^2*exp(2*lambda*t)/2")
        assert rec.consistent
        assert same(rec.T, "-exp(lambda*t)") and rec.Q == (ZERO,)

    def test_translation(self):
        rec = reconstruct_transformation(scalar("m*exp(lambda*t)"), "m*v1*exp(lambda*t)")
        assert rec.consistent and rec.T == ZERO and rec.Q == (parse("1"),)

    def test_free_particle(self):
        rec = reconstruct_transformation(scalar("1"), "v1")
        assert rec.T == ZERO and rec.Q == (parse("1"),)

    def test_log_lagrangian_time_map(self):
        rec = reconstruct_transformation(scalar("m/v1"), "m*v1*exp(lambda*t)")
        assert same(rec.T, "-exp(lambda*t)") and same(rec.Q[0], "0")

    def test_velocity_dependence_flagged(self):
        rec = reconstruct_transformation(scalar("1"), "v1^3")
        assert not rec.consistent
        assert rec.velocity_check.verdict is Verdict.NONZERO

    def test_anisotropic_pair_flagged(self):
        rec = reconstruct_transformation(identity(2), "v1^2")
        assert not rec.consistent

    def test_singular(self):
        with pytest.raises(SingularHessian):
            reconstruct_transformation(scalar("0"), "v1")

    def test_generator_round_trip(self):
        rec = reconstruct_transformation(scalar("m*exp(lambda*t)"), "m*v1*exp(lambda*t)")
        assert verdict(noether_identity_residual(L1, rec.generator())) is Verdict.ZERO


class TestBoundaryTerm:
    def test_log_lagrangian(self):
        bt = boundary_term(L2, scalar("m/v1"), "m*v1*exp(lambda*t)")
        assert bt.consistent and same(bt.F, "lambda*m*q1*exp(lambda*t)")

    def test_exact_symmetry(self):
        bt = boundary_term(L1, scalar("m*exp(lambda*t)"), "m*v1*exp(lambda*t)")
        assert verdict(bt.F) is Verdict.ZERO

    def test_free_particle(self):
        assert boundary_term("v1^2/2", scalar("1"), "v1").F == ZERO

    @pytest.mark.parametrize("L, g, C", TRIPLES)
    def test_corpus_consistency(self, L, g, C):
        n = g.n
        bt = boundary_term(L, hessian_of(L, n), C)
        assert same(bt.F, g.F)


class TestCompatibility:
    def test_xi2_branch(self):
        assert matrix_is_zero(compatibility_residual(scalar("exp(lambda*t)"), TRANSLATION))[0]

    def test_xi1_fails_with_witness(self):
        R = compatibility_residual(scalar("1 + lambda*q1/v1"), TRANSLATION)
        assert same(R[0][0], "lambda/v1")
        ok, (where, res) = matrix_is_zero(R)
        assert not ok and where == (1, 1)
        assert res.value == pytest.approx(res.witness["lambda"] / res.witness["v1"])

    def test_rotation(self):
        assert matrix_is_zero(compatibility_residual(identity(2, parse("c")), ROTATION))[0]

    @pytest.mark.parametrize("M, g, expected", [
        ("exp(lambda*t)", TRANSLATION, True),
        ("1 + lambda*q1/v1", TRANSLATION, False),
        ("m/v1", TIME_MAP, True),
        ("m*exp(lambda*t)", DECAYING_SHIFT, True),
        ("1/v1", TIME_TRANSLATION, True),
        ("exp(lambda*t)", TIME_TRANSLATION, False),
    ])
    def test_three_forms_agree(self, M, g, expected):
        Mc = scalar(M)
        forms = (compatibility_residual, compatibility_residual_delta_form,
                 compatibility_residual_unsymmetrized)
        assert [matrix_is_zero(f(Mc, g))[0] for f in forms] == [expected] * 3

    def test_forms_agree_entrywise(self):
        g = SymmetryGenerator("q1*t", ("q1^2", "t*q2"))
        M = hessian_of("v1^2*exp(q2) + v1*v2*q1 + v2^2*(1 + t^2)", 2)
        a = compatibility_residual(M, g)
        b = compatibility_residual_delta_form(M, g)
        for i in range(2):
            for j in range(2):
                assert same(a[i][j], b[i][j])

    def test_dimension(self):
        with pytest.raises(DimensionMismatch):
            compatibility_residual(identity(2), TRANSLATION)

    def test_vector_is_zero(self):
        assert vector_is_zero([parse("0"), parse("q1 - q1")]) == (True, None)
        ok, (idx, _) = vector_is_zero([parse("0"), parse("q1")])
        assert not ok and idx == 2
