"""Command line: ``unirel analyze | classify | permutations | verify``.

Every command prints a JSON report on stdout (or writes it with ``--out``).
Exit codes: 0 success / equivalent, 1 disproved / a residual over tolerance,
2 undecided, 3 invalid input or a library error.
"""
from __future__ import annotations

import argparse
import dataclasses
import hashlib
import json
import sys
import time

import numpy as np

from .config import DEFAULT_SEARCH, SearchConfig, Tolerances
from .characters import core_subspaces, describe_core, kernel_dimension
from .equivalence import (DISPROVED, EQUIVALENT, EXCHANGE_EQUIVALENT, UNDECIDED, canonical_d3,
                          decide_numeric, decide_permutation, verify_certificate)
from .errors import UnirelError
from .fock import MEMORY_CAP_MB
from .perms import REPRESENTATIVES_2x2, format_cycles, parse_cycles, permutation_classes
from .relations import parse_json_text
from .verify import SUITES, run_suites

EXIT_INPUT_ERROR = 3
EXIT_CODES = {EQUIVALENT: 0, EXCHANGE_EQUIVALENT: 0, DISPROVED: 1, UNDECIDED: 2}
CASE_LABELS = {0: "I", 1: "II", 2: "III", 3: "IV", 4: "V"}


def _jsonable(x):
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if isinstance(x, (list, tuple)):
        return [_jsonable(v) for v in x]
    if isinstance(x, np.ndarray):
        return _jsonable(x.tolist())
    if isinstance(x, (complex, np.complexfloating)):
        return [float(x.real), float(x.imag)]
    if isinstance(x, np.integer):
        return int(x)
    if isinstance(x, np.floating):
        return float(x)
    if isinstance(x, np.bool_):
        return bool(x)
    return x


def _claim(value, tol):
    return {"value": float(value), "tolerance": float(tol), "passed": bool(value <= tol)}


def _read(path):
    with open(path, "rb") as fh:
        raw = fh.read()
    return raw.decode("utf-8"), hashlib.sha256(raw).hexdigest()


def _load(path, tol):
    text, digest = _read(path)
    rel, perm = parse_json_text(text, tol.unitary)
    return rel, perm, digest


def _tolerances(args):
    return Tolerances(**{f.name: getattr(args, f"tol_{f.name}") for f in dataclasses.fields(Tolerances)})


# --- n = m = 2 case labels ---

def _coordinate_shape(basis, letter):
    """Symbols like ["0", "w1"] when the subspace is spanned by coordinate axes, else None."""
    dim, k = basis.shape
    weight = np.sum(np.abs(basis) ** 2, axis=1)
    if not np.all((weight < 1e-9) | (weight > 1 - 1e-9)) or int(round(weight.sum())) != k:
        return None
    return [f"{letter}{i + 1}" if weight[i] > 0.5 else "0" for i in range(dim)]


def core_shape(sub):
    z = _coordinate_shape(sub.Z, "z")
    w = _coordinate_shape(sub.W, "w")
    if z is None or w is None:
        return None
    free = [s for s in z + w if s != "0"]
    if not free:
        return "{(0,0)}" if len(z) == len(w) == 2 else "{0}"
    return "{(" + ",".join(z + w) + ")}"


def case_report(rel, sub, tol):
    d = sub.d_kernel
    out = {"case": CASE_LABELS[d], "d_kernel": d, "core_shape": core_shape(sub)}
    if d == 3:
        form = canonical_d3(rel)
        out["canonical"] = {"a": form.a, "lambda": form.lam}
        if form.a <= tol.eigen_cluster:
            out["core_description"] = "{(z1,0,w1,0): |z1| <= 1, |w1| <= 1}"
        else:
            out["core_description"] = "{(0,0)}"
    return out


# --- commands ---

def cmd_analyze(args, tol):
    rel, perm, digest = _load(args.file, tol)
    sub = core_subspaces(rel, tol.rank)
    result = {
        "n": rel.n,
        "m": rel.m,
        "unitarity_residual": _claim(rel.unitarity_residual(), tol.unitary),
        "spectrum": np.linalg.eigvals(rel.u),
        "d_kernel": {"value": kernel_dimension(rel, tol.eigen_cluster), "tolerance": tol.eigen_cluster},
        "core": {
            "dim_Z": sub.dim_z,
            "dim_W": sub.dim_w,
            "Z_basis": sub.Z.T,
            "W_basis": sub.W.T,
            "rank_tolerance": tol.rank,
            "description": describe_core(rel, sub),
            "warnings": list(sub.warnings),
        },
    }
    if perm is not None:
        result["permutation"] = format_cycles(perm, rel.n, rel.m)
    if (rel.n, rel.m) == (2, 2):
        result["case"] = case_report(rel, sub, tol)
    return {args.file: digest}, result, 0


def cmd_classify(args, tol):
    u, pu, du = _load(args.u, tol)
    v, pv, dv = _load(args.v, tol)
    digests = {args.u: du, args.v: dv}
    config = SearchConfig(restarts=args.restarts, max_iter=args.max_iter, seed=args.seed,
                          success=tol.certificate, init=args.init)
    exact = pu is not None and pv is not None and (u.n, u.m) == (v.n, v.m)
    verdict = decide_permutation(pu, pv, u.n, u.m) if exact else None
    if verdict is None or verdict.status == UNDECIDED:
        exact = False
        verdict = decide_numeric(u, v, config, tol)
    result = {"status": verdict.status, "search": config.as_dict(), "details": verdict.details}
    if verdict.certificate is not None:
        cert = verdict.certificate
        result["certificate"] = {
            "A": cert.A,
            "B": cert.B,
            "exchange": cert.exchange,
            "residual": _claim(cert.residual, tol.certificate),
            "independently_verified": verify_certificate(u, v, cert, tol.certificate),
        }
    if verdict.witness is not None:
        w = verdict.witness
        if exact:
            # exact combinatorial witness
            result["witness"] = {"invariant": w.invariant, "u": format_cycles(pu, u.n, u.m),
                                 "v": format_cycles(pv, v.n, v.m)}
        else:
            result["witness"] = {"invariant": w.invariant, "u": w.value_u, "v": w.value_v,
                                 "tolerance": tol.eigen_cluster}
    return digests, result, EXIT_CODES[verdict.status]


def cmd_permutations(args, tol):
    n, m = args.n, args.m
    classes = permutation_classes(n, m)
    result = {
        "n": n,
        "m": m,
        "with_tilde": n == m,
        "class_count": len(classes),
        "classes": [{"representative": format_cycles(c[0], n, m), "size": len(c)} for c in classes],
    }
    code = 0
    if (n, m) == (2, 2):
        where = {}
        for name, text in REPRESENTATIVES_2x2.items():
            perm = parse_cycles(text, n, m)
            where[name] = next(k for k, c in enumerate(classes) if perm in c)
        counts = [sum(1 for k in where.values() if k == c) for c in range(len(classes))]
        ok = len(classes) == 9 and all(c == 1 for c in counts)
        result["listed_representatives"] = {name: {"cycles": REPRESENTATIVES_2x2[name], "class": k}
                                            for name, k in where.items()}
        result["matches_listed_representatives"] = ok
        code = 0 if ok else 1
    return {}, result, code


def cmd_verify(args, tol):
    rel, _, digest = _load(args.file, tol)
    rows = run_suites(rel, args.suite, args.degree, args.seed, tol, args.memory_cap)
    failed = [r for r in rows if not r.passed]
    result = {
        "suite": args.suite,
        "degree": args.degree,
        "checks": [r.as_dict() for r in rows],
        "failed": len(failed),
        "passed": not failed,
    }
    return {args.file: digest}, result, 1 if failed else 0


COMMANDS = {"analyze": cmd_analyze, "classify": cmd_classify, "permutations": cmd_permutations,
            "verify": cmd_verify}


def build_parser():
    p = argparse.ArgumentParser(prog="unirel", description=__doc__.splitlines()[0])
    p.add_argument("--out", help="write the JSON report to this file instead of stdout")
    p.add_argument("--no-timings", action="store_true", help="omit wall-clock timings from the report")
    tols = p.add_argument_group("tolerances")
    for f in dataclasses.fields(Tolerances):
        tols.add_argument(f"--tol-{f.name.replace('_', '-')}", dest=f"tol_{f.name}", type=float,
                          default=f.default, metavar="X")
    # the output flags are also accepted after the subcommand
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    common.add_argument("--no-timings", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    sub = p.add_subparsers(dest="command", required=True)

    a = sub.add_parser("analyze", parents=[common], help="spectrum, kernel dimension and core of a relation matrix")
    a.add_argument("file")

    c = sub.add_parser("classify", parents=[common], help="decide product unitary equivalence of two relation matrices")
    c.add_argument("u")
    c.add_argument("v")
    c.add_argument("--restarts", type=int, default=DEFAULT_SEARCH.restarts)
    c.add_argument("--seed", type=int, default=DEFAULT_SEARCH.seed)
    c.add_argument("--max-iter", type=int, default=DEFAULT_SEARCH.max_iter)
    c.add_argument("--init", choices=("subspace", "random"), default=DEFAULT_SEARCH.init)

    q = sub.add_parser("permutations", parents=[common], help="product-conjugacy classes of permutation relations")
    q.add_argument("n", type=int)
    q.add_argument("m", type=int)

    v = sub.add_parser("verify", parents=[common], help="run residual suites on truncated Fock space")
    v.add_argument("file")
    v.add_argument("--suite", choices=SUITES + ("all",), default="all")
    v.add_argument("--degree", "-N", type=int, default=4)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--memory-cap", type=float, default=MEMORY_CAP_MB, help="MB of operator storage")
    return p


def run(argv):
    """Run the command line ``argv`` (a list) and return (report dict, exit code, parsed args)."""
    args = build_parser().parse_args(argv)
    tol = _tolerances(args)
    start = time.perf_counter()
    report = {"command": list(argv)}
    try:
        digests, result, code = COMMANDS[args.command](args, tol)
    except UnirelError as exc:
        report.update({"error": {"type": type(exc).__name__, "message": str(exc)}})
        for key in ("line", "col"):
            if getattr(exc, key, None) is not None:
                report["error"][key] = getattr(exc, key)
        report["tolerances"] = tol.as_dict()
        return report, EXIT_INPUT_ERROR, args
    except OSError as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        return report, EXIT_INPUT_ERROR, args
    report["inputs"] = {"sha256": digests}
    report["result"] = _jsonable(result)
    report["tolerances"] = tol.as_dict()
    if not args.no_timings:
        report["timings"] = {"wall_seconds": time.perf_counter() - start}
    report["exit_code"] = code
    return report, code, args


def main(argv=None):
    report, code, args = run(list(sys.argv[1:] if argv is None else argv))
    text = json.dumps(report, indent=2)
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    if "error" in report:
        err = report["error"]
        where = f" (line {err['line']}, column {err['col']})" if "line" in err else ""
        print(f"unirel: {err['type']}: {err['message']}{where}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
