"""One function per CLI command: take a loaded problem, return (results, passed)."""
from __future__ import annotations

from dataclasses import dataclass

from .errors import ProblemFileError
from .expr import ZeroTestConfig, add, mul
from .helmholtz import Check, _check_entries, helmholtz_residuals
from .mechanics import equivalent_mod_total_derivative, euler_lagrange_residual, hessian_of
from .noether import (boundary_term, compatibility_residual, compatibility_residual_delta_form,
                      delta_q_relation_residual, noether_constant, noether_identity_residual,
                      reconstruct_transformation)
from .numeric import FiniteTransformation, action, action_variation_check, conservation_drift, integrate
from .problem import Problem
from .solver import AnsatzFamily, DirectResult, LagrangianReconstructor, Method1, Method2


@dataclass(frozen=True)
class RunContext:
    seed: int
    zero_test: ZeroTestConfig
    csv_path: str | None = None


def _require(prob: Problem, *fields):
    for name in fields:
        value = getattr(prob, name)
        if value is None or value == []:
            raise ProblemFileError(f"{name}: required by this command")


def _match(a, b, domain, cfg) -> Check:
    return _check_entries([((), add(a, mul(-1, b)))], domain, cfg)


def _matrix_match(A, B, domain, cfg) -> Check:
    n = len(A.M)
    return _check_entries((((i + 1, j + 1), add(A.M[i][j], mul(-1, B.M[i][j])))
                           for i in range(n) for j in range(n)), domain, cfg)


def _vector_checks(vec, domain, cfg) -> Check:
    return _check_entries((((i + 1,), e) for i, e in enumerate(vec)), domain, cfg)


def _matrix_checks(R, domain, cfg) -> Check:
    n = len(R)
    return _check_entries((((i + 1, j + 1), R[i][j]) for i in range(n) for j in range(n)), domain, cfg)


def run_verify_lagrangian(prob: Problem, ctx: RunContext):
    _require(prob, "lagrangian")
    dom, cfg = prob.domain, ctx.zero_test
    L, sys = prob.lagrangian, prob.system
    el = euler_lagrange_residual(L, sys)
    el_check = _vector_checks(el, dom, cfg)
    M = hessian_of(L, prob.n)
    report = helmholtz_residuals(M, sys, dom, cfg)
    results = {
        "lagrangian": str(L),
        "euler_lagrange": {**el_check.to_dict(), "residuals": [str(e) for e in el]},
        "hessian": M.rows(),
        "helmholtz": report.to_dict(),
    }
    ok = el_check.passed and report.overall
    if prob.hessian is not None:
        hm = _matrix_match(M, prob.hessian, dom, cfg)
        results["hessian_matches_given"] = hm.to_dict()
        ok = ok and hm.passed
    return results, ok


def run_noether(prob: Problem, ctx: RunContext):
    _require(prob, "lagrangian", "generators")
    dom, cfg = prob.domain, ctx.zero_test
    L = prob.lagrangian
    M = hessian_of(L, prob.n)
    regular = M.is_regular(dom, cfg)
    ok = True
    out = []
    for spec in prob.generators:
        g = spec.generator
        entry = {"generator": g.to_dict()}
        if not spec.F_given and prob.constant is not None:
            if not regular:
                entry["F_source"] = "unavailable (singular Hessian)"
            else:
                bt = boundary_term(L, M, prob.constant, dom, cfg)
                g = type(g)(g.T, g.Q, bt.F)
                entry["F_source"] = "boundary_term"
                entry["generator"] = g.to_dict()
                entry["boundary_term_velocity_free"] = bt.consistent
        else:
            entry["F_source"] = "given" if spec.F_given else "default 0"
        ident = _check_entries([((), noether_identity_residual(L, g))], dom, cfg)
        entry["noether_identity"] = ident.to_dict()
        C = noether_constant(L, g, check=False)
        entry["constant"] = str(C.C)
        if not ident.passed:
            entry["flag"] = "NotASymmetry"
            ok = False
            out.append(entry)
            continue
        if prob.constant is not None:
            cm = _match(C.C, prob.constant, dom, cfg)
            entry["constant_matches_given"] = cm.to_dict()
            ok = ok and cm.passed
        dq = _vector_checks(delta_q_relation_residual(M, C, g), dom, cfg)
        comp = _matrix_checks(compatibility_residual(M, g), dom, cfg)
        comp_dq = _matrix_checks(compatibility_residual_delta_form(M, g), dom, cfg)
        entry["relations"] = {"delta_q": dq.to_dict(), "compatibility": comp.to_dict(),
                              "compatibility_delta_form": comp_dq.to_dict()}
        ok = ok and dq.passed and comp.passed and comp_dq.passed
        if regular:
            rec = reconstruct_transformation(M, C, dom, cfg)
            t_ok = _match(rec.T, g.T, dom, cfg)
            q_ok = _vector_checks([add(a, mul(-1, b)) for a, b in zip(rec.Q, g.Q)], dom, cfg)
            bt = boundary_term(L, M, C, dom, cfg)
            f_ok = _match(bt.F, g.F, dom, cfg)
            entry["cross_checks"] = {
                "reconstructed_T": str(rec.T), "reconstructed_Q": [str(x) for x in rec.Q],
                "T_matches": t_ok.to_dict(), "Q_matches": q_ok.to_dict(),
                "boundary_term": str(bt.F), "boundary_term_matches": f_ok.to_dict(),
            }
            ok = ok and t_ok.passed and q_ok.passed and f_ok.passed
        out.append(entry)
    return {"lagrangian": str(L), "hessian": M.rows(), "regular": regular, "generators": out}, ok


def _solver_kwargs(prob: Problem, ctx: RunContext):
    kw = {"seed": ctx.seed, "domain": prob.domain, "zero_test": ctx.zero_test}
    if "samples" in prob.solver:
        kw["samples"] = prob.solver["samples"]
    if "tol_rank" in prob.solver:
        kw["tol_rank"] = prob.solver["tol_rank"]
    return kw


def run_method1(prob: Problem, ctx: RunContext):
    _require(prob, "generators")
    ansatz = prob.ansatz or AnsatzFamily.monomial(prob.n, prob.ansatz_degree)
    est = Method1(ansatz=ansatz, **_solver_kwargs(prob, ctx))
    est.fit(prob.system, tuple(s.generator for s in prob.generators))
    fam = est.family_
    return {"ansatz": ansatz.to_dict(), "family": fam.to_dict()}, fam.sound


def run_method2(prob: Problem, ctx: RunContext):
    _require(prob, "generators", "constant")
    if len(prob.generators) != 1:
        raise ProblemFileError("symmetry.generators: method2 takes exactly one generator")
    est = Method2(ansatz=prob.ansatz, **_solver_kwargs(prob, ctx))
    est.fit(prob.system, prob.generators[0].generator, prob.constant)
    res = est.result_
    if isinstance(res, DirectResult):
        return {"path": "direct", **res.to_dict()}, res.exists
    return {"path": "ansatz", "family": res.to_dict()}, res.sound


def run_reconstruct(prob: Problem, ctx: RunContext):
    _require(prob, "hessian")
    kw = _solver_kwargs(prob, ctx)
    kw.pop("samples", None)
    est = LagrangianReconstructor(completion_basis=prob.completion_basis, **kw)
    est.fit(prob.system, prob.hessian)
    L = est.lagrangian_
    results = {"lagrangian": str(L.L), "hessian_reproduced": True, "euler_lagrange": "Zero"}
    ok = True
    if prob.lagrangian is not None:
        eq = equivalent_mod_total_derivative(L, prob.lagrangian, prob.domain, ctx.zero_test, prob.n)
        results["reference"] = str(prob.lagrangian)
        results["equivalent_to_reference"] = eq
        ok = eq
    return results, ok


def run_simulate(prob: Problem, ctx: RunContext):
    num = prob.numeric
    if "q0" not in num or "v0" not in num:
        raise ProblemFileError("numeric.q0 and numeric.v0: required by simulate")
    t0 = num.get("t0", 0.0)
    t1 = num.get("t1", t0 + 1.0)
    h = num.get("h", 1e-3)
    traj = integrate(prob.system, num["q0"], num["v0"], t0, t1, h, prob.params)
    if ctx.csv_path:
        traj.to_csv(ctx.csv_path)
    results = {
        "steps": len(traj) - 1,
        "h": traj.h,
        "final": {"t": float(traj.times[-1]), "q": traj.q[-1].tolist(), "v": traj.v[-1].tolist()},
    }
    ok = True
    if "expect_final" in num:
        ef = num["expect_final"]
        tol = ef.get("tol", 1e-7)
        err = 0.0
        for key, arr in (("q", traj.q[-1]), ("v", traj.v[-1])):
            if key in ef:
                err = max(err, *(abs(a - b) for a, b in zip(arr, ef[key])))
        results["final_error"] = err
        ok = ok and err <= tol
    if prob.constant is not None:
        drift = conservation_drift(prob.constant, traj)
        tol = num.get("drift_tol", 1e-7)
        results["drift"] = {"constant": str(prob.constant), "max_relative_drift": drift, "tolerance": tol}
        ok = ok and drift < tol
    if prob.lagrangian is not None:
        value, adjusted = action(prob.lagrangian, traj, with_note=True)
        results["action"] = {"value": value, "odd_interval_adjustment": adjusted}
    if prob.finite_transformation is not None:
        if prob.lagrangian is None:
            raise ProblemFileError("finite_transformation: requires a lagrangian")
        spec = prob.finite_transformation
        ft = FiniteTransformation(spec["t_map"], spec["q_maps"])
        pts = [(float(t), tuple(q)) for t, q in zip(traj.times[:: max(1, len(traj) // 10)][:10],
                                                   traj.q[:: max(1, len(traj) // 10)][:10])]
        ident = ft.identity_defect(pts, prob.params)
        chk = action_variation_check(prob.lagrangian, ft, spec["F"], traj, spec["alphas"])
        results["finite_transformation"] = {**chk.to_dict(), "identity_defect": ident,
                                            "expected_symmetry": spec["symmetry"]}
        good = chk.classification in ("exact", "second-order")
        ok = ok and ident <= 1e-10 and (good if spec["symmetry"] else chk.classification == "first-order")
    return results, ok


RUNNERS = {
    "verify-lagrangian": run_verify_lagrangian,
    "noether": run_noether,
    "method1": run_method1,
    "method2": run_method2,
    "reconstruct": run_reconstruct,
    "simulate": run_simulate,
}
