"""Problem files: YAML documents describing a system plus whatever a command needs.

See ``docs/problem-format.md`` for the field list.
"""
from __future__ import annotations

import hashlib
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import LagrangeForgeError, ProblemFileError
from .expr import ZERO, Expr, SampleDomain, Sym, parse
from .mechanics import MAX_DIM, DynamicalSystem, HessianCandidate
from .noether import SymmetryGenerator
from .solver.ansatz import AnsatzFamily

SCHEMA_VERSION = 1
# keys understood by the corpus runner when comparing a report with expectations
EXPECT_KEYS = {"exit", "dimension", "members", "verdict", "M", "witness_value", "constants",
               "boundary_terms", "flag", "classification", "max_drift"}
COMMANDS = ("verify-lagrangian", "noether", "method1", "method2", "reconstruct", "simulate")
_TOP_KEYS = {"version", "name", "description", "command", "system", "params", "box", "lagrangian",
             "hessian", "symmetry", "constant_of_motion", "ansatz", "solver", "numeric",
             "finite_transformation", "expect"}


@dataclass(frozen=True)
class GeneratorSpec:
    generator: SymmetryGenerator
    F_given: bool


@dataclass
class Problem:
    version: int
    name: str
    n: int
    system: DynamicalSystem
    params: dict
    domain: SampleDomain
    input_hash: str
    command: str | None = None
    description: str = ""
    lagrangian: Expr | None = None
    hessian: HessianCandidate | None = None
    generators: list = field(default_factory=list)
    constant: Expr | None = None
    ansatz: AnsatzFamily | None = None
    ansatz_degree: int = 2
    completion_basis: list | None = None
    solver: dict = field(default_factory=dict)
    numeric: dict = field(default_factory=dict)
    finite_transformation: dict | None = None
    expect: dict = field(default_factory=dict)
    path: str | None = None


def _number(value, where):
    if isinstance(value, bool):
        raise ProblemFileError(f"{where}: expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return value
    if isinstance(value, str):
        try:
            return float(value)
        except ValueError:
            pass
    raise ProblemFileError(f"{where}: expected a number, got {value!r}")


def _int(value, where, minimum=None):
    if isinstance(value, bool) or not isinstance(value, int):
        raise ProblemFileError(f"{where}: expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ProblemFileError(f"{where}: must be >= {minimum}")
    return value


def _expr(value, n, where):
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = repr(value)
    if not isinstance(value, str):
        raise ProblemFileError(f"{where}: expected an expression string, got {value!r}")
    try:
        e = parse(value, n)
    except LagrangeForgeError as exc:
        raise ProblemFileError(f"{where}: {exc}") from exc
    if any(s.kind == "accel" for s in e.free_symbols):
        raise ProblemFileError(f"{where}: accelerations are not allowed")
    return e


def _mapping(value, where):
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ProblemFileError(f"{where}: expected a mapping")
    return value


def _list(value, where):
    if not isinstance(value, list):
        raise ProblemFileError(f"{where}: expected a list")
    return value


def _check_keys(mapping, allowed, where):
    extra = set(mapping) - set(allowed)
    if extra:
        raise ProblemFileError(f"{where}: unknown key(s) {', '.join(sorted(map(str, extra)))}")


def load_problem(path) -> Problem:
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise ProblemFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    problem = loads_problem(raw, name=path.stem)
    problem.path = str(path)
    return problem


def loads_problem(raw, name: str = "problem") -> Problem:
    if isinstance(raw, str):
        raw = raw.encode()
    digest = hashlib.sha256(raw).hexdigest()
    try:
        doc = yaml.safe_load(raw)
    except yaml.YAMLError as exc:
        raise ProblemFileError(f"invalid YAML: {exc}") from exc
    if not isinstance(doc, dict):
        raise ProblemFileError("problem file must be a mapping")
    _check_keys(doc, _TOP_KEYS, "top level")
    version = _int(doc.get("version"), "version")
    if version != SCHEMA_VERSION:
        raise ProblemFileError(f"unsupported version {version} (expected {SCHEMA_VERSION})")

    system = _mapping(doc.get("system"), "system")
    if not system:
        raise ProblemFileError("system: required")
    _check_keys(system, {"n", "f"}, "system")
    f_list = _list(system.get("f"), "system.f")
    n = _int(system.get("n", len(f_list)), "system.n", 1)
    if n > MAX_DIM:
        raise ProblemFileError(f"system.n: at most {MAX_DIM}")
    if len(f_list) != n:
        raise ProblemFileError(f"system.f: expected {n} expressions, got {len(f_list)}")
    f = [_expr(x, n, f"system.f[{i}]") for i, x in enumerate(f_list)]
    sys = DynamicalSystem(tuple(f), n)

    params = {str(k): float(_number(v, f"params.{k}")) for k, v in _mapping(doc.get("params"), "params").items()}
    box = {}
    for key, rng in _mapping(doc.get("box"), "box").items():
        rng = _list(rng, f"box.{key}")
        if len(rng) != 2:
            raise ProblemFileError(f"box.{key}: expected [lo, hi]")
        lo, hi = (float(_number(x, f"box.{key}")) for x in rng)
        if not lo < hi:
            raise ProblemFileError(f"box.{key}: lo must be below hi")
        try:
            _expr(str(key), n, f"box.{key}")
        except ProblemFileError:
            raise ProblemFileError(f"box.{key}: not a symbol name") from None
        box[str(key)] = (lo, hi)

    prob = Problem(version=version, name=str(doc.get("name", name)), n=n, system=sys,
                   params=params, domain=SampleDomain(box, params), input_hash=digest,
                   description=str(doc.get("description", "")))
    command = doc.get("command")
    if command is not None and command not in COMMANDS:
        raise ProblemFileError(f"command: must be one of {', '.join(COMMANDS)}")
    prob.command = command

    if doc.get("lagrangian") is not None:
        prob.lagrangian = _expr(doc["lagrangian"], n, "lagrangian")
    if doc.get("hessian") is not None:
        rows = _list(doc["hessian"], "hessian")
        if len(rows) != n or any(not isinstance(r, list) or len(r) != n for r in rows):
            raise ProblemFileError(f"hessian: expected a {n}x{n} matrix")
        prob.hessian = HessianCandidate(tuple(tuple(_expr(x, n, f"hessian[{i}][{j}]") for j, x in enumerate(r))
                                              for i, r in enumerate(rows)))
    if doc.get("symmetry") is not None:
        sym = _mapping(doc["symmetry"], "symmetry")
        _check_keys(sym, {"generators"}, "symmetry")
        for k, g in enumerate(_list(sym.get("generators"), "symmetry.generators")):
            g = _mapping(g, f"symmetry.generators[{k}]")
            _check_keys(g, {"T", "Q", "F"}, f"symmetry.generators[{k}]")
            where = f"symmetry.generators[{k}]"
            Q = _list(g.get("Q"), f"{where}.Q")
            if len(Q) != n:
                raise ProblemFileError(f"{where}.Q: expected {n} entries")
            T = _expr(g.get("T", "0"), n, f"{where}.T")
            Qe = [_expr(x, n, f"{where}.Q[{i}]") for i, x in enumerate(Q)]
            F = _expr(g["F"], n, f"{where}.F") if "F" in g else ZERO
            try:
                gen = SymmetryGenerator(T, tuple(Qe), F)
            except (ValueError, LagrangeForgeError) as exc:
                raise ProblemFileError(f"{where}: {exc}") from exc
            prob.generators.append(GeneratorSpec(gen, "F" in g))
    if doc.get("constant_of_motion") is not None:
        prob.constant = _expr(doc["constant_of_motion"], n, "constant_of_motion")
    if doc.get("ansatz") is not None:
        a = _mapping(doc["ansatz"], "ansatz")
        _check_keys(a, {"entries", "degree", "completion_basis"}, "ansatz")
        if "degree" in a:
            prob.ansatz_degree = _int(a["degree"], "ansatz.degree", 0)
        if "entries" in a:
            entries = {}
            for key, basis in _mapping(a["entries"], "ansatz.entries").items():
                try:
                    i, j = (int(x) for x in str(key).split(","))
                except ValueError:
                    raise ProblemFileError(f"ansatz.entries: bad key {key!r} (use \"i,j\")") from None
                entries[(i, j)] = [_expr(b, n, f"ansatz.entries[{key}]") for b in _list(basis or [], f"ansatz.entries[{key}]")]
            try:
                prob.ansatz = AnsatzFamily(n, tuple(entries.items()))
            except (ValueError, LagrangeForgeError) as exc:
                raise ProblemFileError(f"ansatz: {exc}") from exc
        if "completion_basis" in a:
            prob.completion_basis = [_expr(b, n, "ansatz.completion_basis") for b in _list(a["completion_basis"], "ansatz.completion_basis")]
    solver = _mapping(doc.get("solver"), "solver")
    _check_keys(solver, {"samples", "seed", "tol_rank"}, "solver")
    prob.solver = {}
    if "samples" in solver:
        prob.solver["samples"] = _int(solver["samples"], "solver.samples", 1)
    if "seed" in solver:
        prob.solver["seed"] = _int(solver["seed"], "solver.seed", 0)
    if "tol_rank" in solver:
        prob.solver["tol_rank"] = float(_number(solver["tol_rank"], "solver.tol_rank"))
    numeric = _mapping(doc.get("numeric"), "numeric")
    _check_keys(numeric, {"h", "t0", "t1", "q0", "v0", "drift_tol", "expect_final"}, "numeric")
    prob.numeric = {}
    for key in ("h", "t0", "t1", "drift_tol"):
        if key in numeric:
            prob.numeric[key] = float(_number(numeric[key], f"numeric.{key}"))
    for key in ("q0", "v0"):
        if key in numeric:
            vals = [float(_number(x, f"numeric.{key}")) for x in _list(numeric[key], f"numeric.{key}")]
            if len(vals) != n:
                raise ProblemFileError(f"numeric.{key}: expected {n} values")
            prob.numeric[key] = vals
    if "expect_final" in numeric:
        ef = _mapping(numeric["expect_final"], "numeric.expect_final")
        _check_keys(ef, {"q", "v", "tol"}, "numeric.expect_final")
        prob.numeric["expect_final"] = {
            k: ([float(_number(x, f"numeric.expect_final.{k}")) for x in _list(ef[k], f"numeric.expect_final.{k}")]
                if k != "tol" else float(_number(ef[k], "numeric.expect_final.tol")))
            for k in ef}
    if doc.get("finite_transformation") is not None:
        ft = _mapping(doc["finite_transformation"], "finite_transformation")
        _check_keys(ft, {"t_map", "q_maps", "F", "alphas", "symmetry"}, "finite_transformation")
        q_maps = _list(ft.get("q_maps"), "finite_transformation.q_maps")
        if len(q_maps) != n:
            raise ProblemFileError(f"finite_transformation.q_maps: expected {n} entries")
        prob.finite_transformation = {
            "t_map": _expr(ft.get("t_map", "t"), n, "finite_transformation.t_map"),
            "q_maps": [_expr(x, n, f"finite_transformation.q_maps[{i}]") for i, x in enumerate(q_maps)],
            "F": _expr(ft.get("F", "0"), n, "finite_transformation.F"),
            "alphas": [float(_number(a, "finite_transformation.alphas"))
                       for a in _list(ft.get("alphas", [1e-2, 1e-3, 1e-4]), "finite_transformation.alphas")],
            "symmetry": bool(ft.get("symmetry", True)),
        }
    prob.expect = _mapping(doc.get("expect"), "expect")
    _check_keys(prob.expect, EXPECT_KEYS, "expect")
    _check_params(prob)
    return prob


def _check_params(prob: Problem):
    """Reserved names cannot be declared as parameters."""
    for name in prob.params:
        try:
            sym = parse(name)
        except LagrangeForgeError:
            sym = None
        if not isinstance(sym, Sym) or sym.kind != "param":
            raise ProblemFileError(f"params.{name}: not a parameter name")


__all__ = ["Problem", "GeneratorSpec", "load_problem", "loads_problem", "COMMANDS", "SCHEMA_VERSION"]
