"""Command-line driver: ``lagrange-forge <command> FILE [options]``.

Exit codes: 0 all checks passed, 1 a check failed (or no solution exists),
2 the input could not be used.
"""
from __future__ import annotations

import argparse
import math
import os
import sys
from importlib import resources
from pathlib import Path

from .errors import DimensionMismatch, LagrangeForgeError, ParseError, ProblemFileError
from .expr import ZeroTestConfig, is_zero, parse, add, mul
from .pipelines import RUNNERS, RunContext
from .problem import COMMANDS, load_problem
from .report import provenance, to_json, to_text

EXIT_PASS, EXIT_FAIL, EXIT_INPUT = 0, 1, 2
SEED_ENV = "LAGRANGE_FORGE_SEED"


class InputError(Exception):
    pass


def _resolve_seed(args, prob=None) -> int:
    if args.seed is not None:
        return args.seed
    env = os.environ.get(SEED_ENV)
    if env is not None and env.strip():
        try:
            value = int(env)
        except ValueError:
            raise InputError(f"{SEED_ENV} must be an integer, got {env!r}") from None
        if value < 0:
            raise InputError(f"{SEED_ENV} must be non-negative")
        return value
    if prob is not None and "seed" in prob.solver:
        return prob.solver["seed"]
    return 0


def _zero_test(args, seed) -> ZeroTestConfig:
    base = ZeroTestConfig()
    return ZeroTestConfig(samples=args.samples or base.samples,
                          tol_abs=base.tol_abs,
                          tol_rel=args.tol if args.tol is not None else base.tol_rel,
                          seed=seed)


def _error(exc):
    return {"type": type(exc).__name__, "message": str(exc)}


def run_problem(prob, command: str, args, csv_path=None):
    """Run one command on a loaded problem; returns (report dict, exit code)."""
    seed = _resolve_seed(args, prob)
    cfg = _zero_test(args, seed)
    ctx = RunContext(seed, cfg, csv_path)
    report = {"command": command, "problem": prob.name}
    try:
        results, ok = RUNNERS[command](prob, ctx)
        report["results"] = results
        code = EXIT_PASS if ok else EXIT_FAIL
    except (ProblemFileError, ParseError, DimensionMismatch) as exc:
        report["error"] = _error(exc)
        code = EXIT_INPUT
    except LagrangeForgeError as exc:
        report["error"] = _error(exc)
        code = EXIT_FAIL
    report["status"] = {EXIT_PASS: "pass", EXIT_FAIL: "fail", EXIT_INPUT: "error"}[code]
    report["exit_code"] = code
    extra = {}
    if prob.solver:
        extra["solver"] = dict(prob.solver)
    report["provenance"] = provenance(seed, cfg, prob.input_hash, extra)
    return report, code


# --------------------------------------------------------------------------
# corpus expectations

def _close(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def _same_expr(text, expected, n, domain, cfg):
    diff = add(parse(str(text), n), mul(-1, parse(str(expected), n)))
    return is_zero(diff, domain, cfg).is_zero


def _same_matrix(rows, expected, n, domain, cfg):
    if len(rows) != len(expected):
        return False
    return all(_same_expr(a, b, n, domain, cfg)
               for ra, rb in zip(rows, expected) for a, b in zip(ra, rb))


def check_expectations(prob, report, code, cfg):
    """Compare a report with the problem's ``expect`` block; returns mismatch messages."""
    exp = prob.expect
    out = []
    want = exp.get("exit", 0)
    if code != want:
        detail = report.get("error", {}).get("message", "")
        out.append(f"exit code {code}, expected {want}" + (f" ({detail})" if detail else ""))
        return out
    res = report.get("results", {})
    n, dom = prob.n, prob.domain
    if "dimension" in exp:
        got = res.get("family", {}).get("dimension")
        if got != exp["dimension"]:
            out.append(f"dimension {got}, expected {exp['dimension']}")
    if "members" in exp:
        members = res.get("family", {}).get("members", [])
        if len(members) != len(exp["members"]) or not all(
                _same_matrix(m["M"], e, n, dom, cfg) for m, e in zip(members, exp["members"])):
            out.append("family members differ from expectation")
    if "verdict" in exp and res.get("verdict") != exp["verdict"]:
        out.append(f"verdict {res.get('verdict')}, expected {exp['verdict']}")
    if "M" in exp:
        got = res.get("M") or res.get("hessian")
        if got is None or not _same_matrix(got, exp["M"], n, dom, cfg):
            out.append("Hessian differs from expectation")
    if "witness_value" in exp:
        w = res.get("witness") or {}
        if "value" not in w or not _close(w["value"], float(exp["witness_value"])):
            out.append(f"witness value {w.get('value')}, expected {exp['witness_value']}")
    gens = res.get("generators", [])
    for key, field in (("constants", "constant"), ("boundary_terms", None)):
        if key not in exp:
            continue
        if len(gens) != len(exp[key]):
            out.append(f"{key}: {len(gens)} generators, expected {len(exp[key])}")
            continue
        for k, (g, e) in enumerate(zip(gens, exp[key])):
            got = g.get(field) if field else g.get("generator", {}).get("F")
            if got is None or not _same_expr(got, e, n, dom, cfg):
                out.append(f"{key}[{k}] = {got}, expected {e}")
    if "flag" in exp:
        flags = [g.get("flag") for g in gens]
        if exp["flag"] not in flags:
            out.append(f"flag {exp['flag']} not raised")
    if "classification" in exp:
        got = res.get("finite_transformation", {}).get("classification")
        if got != exp["classification"]:
            out.append(f"classification {got}, expected {exp['classification']}")
    if "max_drift" in exp:
        got = res.get("drift", {}).get("max_relative_drift", math.inf)
        if not got <= float(exp["max_drift"]):
            out.append(f"drift {got} above {exp['max_drift']}")
    return out


def bundled_corpus() -> Path:
    return Path(str(resources.files("lagrange_forge") / "corpus"))


def run_corpus(directory, args):
    label = "bundled" if directory is None else str(directory)
    directory = bundled_corpus() if directory is None else Path(directory)
    if not directory.is_dir():
        raise InputError(f"corpus directory not found: {directory}")
    files = sorted(p for p in directory.iterdir() if p.suffix in (".yaml", ".yml"))
    if not files:
        raise InputError(f"no problem files in {directory}")
    entries = []
    failed = 0
    for path in files:
        entry = {"file": path.name}
        try:
            prob = load_problem(path)
        except (ProblemFileError, ParseError, DimensionMismatch) as exc:
            entry.update({"status": "mismatch", "mismatches": [f"input error: {exc}"]})
            failed += 1
            entries.append(entry)
            continue
        command = prob.command
        if command is None:
            entry.update({"status": "mismatch", "mismatches": ["no command given"]})
            failed += 1
            entries.append(entry)
            continue
        report, code = run_problem(prob, command, args)
        cfg = _zero_test(args, _resolve_seed(args, prob))
        mismatches = check_expectations(prob, report, code, cfg)
        entry.update({"command": command, "exit_code": code,
                      "status": "ok" if not mismatches else "mismatch"})
        if mismatches:
            entry["mismatches"] = mismatches
            failed += 1
        entries.append(entry)
    seed = _resolve_seed(args)
    report = {
        "command": "corpus",
        "corpus": label,
        "files": entries,
        "passed": len(entries) - failed,
        "failed": failed,
        "status": "pass" if not failed else "fail",
        "exit_code": EXIT_PASS if not failed else EXIT_FAIL,
        "provenance": provenance(seed, _zero_test(args, seed), None),
    }
    return report, report["exit_code"]


# --------------------------------------------------------------------------
# argument handling

def _nonneg_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return value


def _pos_int(text):
    value = int(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be positive")
    return value


def _unit_float(text):
    value = float(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError("must lie in (0, 1)")
    return value


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_nonneg_int, default=None,
                        help=f"sampling seed (fallback: ${SEED_ENV}, then the file's solver.seed, then 0)")
    common.add_argument("--tol", type=_unit_float, default=None,
                        help="relative tolerance of the zero test (default 1e-9)")
    common.add_argument("--samples", type=_pos_int, default=None,
                        help="sample points per zero test (default 32)")
    common.add_argument("--out", default=None, help="also write the report to this path")
    common.add_argument("--format", choices=("text", "structured"), default="text",
                        help="report format: text or structured (JSON)")
    common.add_argument("--quiet", action="store_true", help="print nothing; rely on the exit code")

    parser = argparse.ArgumentParser(prog="lagrange-forge",
                                     description="Construct and verify Lagrangians under imposed symmetries.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")
    helps = {
        "verify-lagrangian": "Euler-Lagrange, Hessian and Helmholtz checks for a Lagrangian",
        "noether": "Noether identity, constants and boundary terms for given generators",
        "method1": "Hessians compatible with a symmetry and Helmholtz's conditions",
        "method2": "Hessian fixed by a symmetry and a prescribed constant of motion",
        "reconstruct": "1D Lagrangian from a Hessian",
        "simulate": "RK4 trajectory, conservation drift, action and finite-map checks",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, parents=[common], help=helps[name], description=helps[name])
        p.add_argument("file", help="problem file (YAML)")
        if name == "simulate":
            p.add_argument("--csv", default=None, help="write the trajectory as CSV")
    p = sub.add_parser("corpus", parents=[common], help="run every problem file of a corpus directory")
    p.add_argument("directory", nargs="?", default=None, help="directory of problem files (default: bundled)")
    return parser


def _emit(report, args):
    text = to_json(report) if args.format == "structured" else to_text(report)
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    if not args.quiet:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "corpus":
            report, code = run_corpus(args.directory, args)
        else:
            try:
                prob = load_problem(args.file)
            except (ProblemFileError, ParseError, DimensionMismatch) as exc:
                raise InputError(str(exc)) from exc
            report, code = run_problem(prob, args.command, args, getattr(args, "csv", None))
    except InputError as exc:
        if not args.quiet:
            print(f"lagrange-forge: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if code == EXIT_INPUT and not args.quiet:
        print(f"lagrange-forge: error: {report['error']['message']}", file=sys.stderr)
    try:
        _emit(report, args)
    except OSError as exc:
        if not args.quiet:
            print(f"lagrange-forge: error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
