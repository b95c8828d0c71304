"""Command-line front end.

Exit codes: 0 completed (whatever the verdict), 2 input error, 3 numerical
failure, 4 a bundled example did not reproduce its expected verdict.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Any

import numpy as np

from .channel import CodeCertificate, dfs_analyze, schmidt_space_of_projector
from .instances import EXAMPLES
from .ket import KetSyntaxError
from .linalg import ContractViolation, NumericalFailure, tolerance
from .oracle import SearchBudget, search_zero_block, verify_certificate
from .problem import ProblemError, load_problem, parse_code_dims
from .report import decode_matrix, dfs_report_dict, encode, lambda_label, render_analysis

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_GOLDEN = 0, 2, 3, 4


def _shared() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--dims", type=int, help="local dimension (must match the file)")
    p.add_argument("--code", help="code shape MxN, overrides the file")
    p.add_argument("--lambda", dest="lam", choices=["+1", "-1", "both", "auto"], help="eigenvalue branches to run")
    p.add_argument("--tol", type=float, help="certificate acceptance tolerance")
    p.add_argument("--seed", type=int)
    p.add_argument("--restarts", type=int)
    p.add_argument("--grid", type=int, help="grid points per angle for the search")
    p.add_argument("--format", choices=["text", "json"], default="text")
    p.add_argument("--quiet", action="store_true", help="print only the overall status")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="macdfs", description="Product decoherence-free codes for two-sender random unitary noise.")
    sub = parser.add_subparsers(dest="command", required=True)
    shared = _shared()
    a = sub.add_parser("analyze", parents=[shared], help="decide and construct codes")
    a.add_argument("problem")
    v = sub.add_parser("verify", parents=[shared], help="recheck a certificate against a problem")
    v.add_argument("problem")
    v.add_argument("certificate")
    o = sub.add_parser("oracle", parents=[shared], help="run only the brute-force search")
    o.add_argument("problem")
    sub.add_parser("examples", parents=[shared], help="reproduce the six bundled examples")
    return parser


def _load(args):
    prob = load_problem(args.problem)
    if args.dims is not None and args.dims != prob.d:
        raise ProblemError(f"--dims {args.dims} disagrees with d = {prob.d} in the file")
    if args.code:
        prob.code_dims = parse_code_dims(args.code)
        m, n = prob.code_dims
        if not (1 <= m <= prob.d and 1 <= n <= prob.d):
            raise ProblemError(f"code dims {m}x{n} out of range for d = {prob.d}")
    if args.lam:
        prob.lam = args.lam
    if args.seed is not None:
        prob.seed = args.seed
    return prob


def _budget(prob, args) -> SearchBudget:
    return prob.search_budget(restarts=args.restarts, grid_density=args.grid, seed=prob.seed)


def _lambdas(lam: str):
    return {"auto": "auto", "both": "all", "+1": [1.0], "-1": [-1.0]}[lam]


def cmd_analyze(args) -> tuple[dict[str, Any], int]:
    prob = _load(args)
    model = prob.model()
    t0 = time.perf_counter()
    rep = dfs_analyze(model, *prob.code_dims, budget=_budget(prob, args), lambdas=_lambdas(prob.lam))
    data = dfs_report_dict(rep)
    data["timing_s"] = time.perf_counter() - t0
    return data, EXIT_OK


def _read_certificate(path) -> CodeCertificate:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path} is not valid JSON: {exc}") from exc
    if isinstance(raw, dict) and "branches" in raw:
        certs = [b["certificate"] for b in raw["branches"] if b.get("certificate")]
        if not certs:
            raise ProblemError("report contains no certificate")
        raw = certs[0]
    try:
        lam = raw.get("lambda", [1.0, 0.0])
        lam = complex(lam[0], lam[1]) if isinstance(lam, list) else complex(lam)
        return CodeCertificate(decode_matrix(raw["r"]), decode_matrix(raw["r_prime"]), lam, float("nan"))
    except (KeyError, TypeError, ValueError, IndexError) as exc:
        raise ProblemError(f"malformed certificate: {exc}") from exc


def cmd_verify(args) -> tuple[dict[str, Any], int]:
    prob = _load(args)
    model = prob.model()
    cert = _read_certificate(args.certificate)
    n = prob.d
    if cert.r.shape[0] != n or cert.r_prime.shape[0] != n:
        raise ProblemError("certificate dimensions do not match the problem")
    eig = [proj for mu, proj in model.eigen_decomposition() if abs(mu - cert.lam) < 1e-9]
    proj = eig[0] if eig else np.zeros((n * n, n * n), dtype=complex)
    space = schmidt_space_of_projector(np.eye(n * n) - proj, n)
    tol = args.tol if args.tol is not None else 1e-8
    rep = verify_certificate(space, cert, model, tol=tol)
    data = {"status": "PASS" if rep.passed else "FAIL", "lambda": lambda_label(cert.lam), **rep.as_dict()}
    return encode(data), EXIT_OK


def cmd_oracle(args) -> tuple[dict[str, Any], int]:
    prob = _load(args)
    model = prob.model()
    budget = _budget(prob, args)
    m, nn = prob.code_dims
    n = prob.d
    lams = _lambdas(prob.lam)
    eig = model.eigen_decomposition()
    if lams == "auto":
        wanted = model.default_lambdas()
    elif lams == "all":
        wanted = [mu for mu, _ in eig]
    else:
        wanted = [complex(x) for x in lams]
    out = []
    for lam in wanted:
        proj = next((p for mu, p in eig if abs(mu - lam) < 1e-9), np.zeros((n * n, n * n)))
        space = schmidt_space_of_projector(np.eye(n * n) - proj, n)
        res = search_zero_block(space, m, nn, budget)
        out.append({
            "lambda": lambda_label(lam),
            "status": res.status,
            "min_f": res.min_f,
            "residual": res.residual,
            "mode": res.mode,
            "evaluations": res.evaluations,
            "min_f_profile": res.profile,
            "u1": res.u1,
            "v2": res.v2,
        })
    return encode({"d": n, "code_dims": [m, nn], "seed": budget.seed, "branches": out}), EXIT_OK


def _example_check(ex, budget) -> dict[str, Any]:
    model = ex.model()
    rep = dfs_analyze(model, 2, 2, budget=budget)
    certs = rep.certificates
    got = bool(certs)
    ok = got == ex.expect_code
    info: dict[str, Any] = {"name": ex.name, "expected": "code" if ex.expect_code else "no code",
                            "got": "code" if got else "no code"}
    layers = {lambda_label(b.lam): f"{b.verdict.value} via {b.layer}" for b in rep.branches}
    info["branches"] = layers
    if ok and ex.expect_code:
        cert = certs[0]
        info["lambda"] = lambda_label(cert.lam)
        ok &= abs(cert.lam - ex.expect_lambda) < 1e-9 and len(certs) == 1
        diag_r = np.real(np.diag(cert.r @ cert.r.conj().T))
        diag_rp = np.real(np.diag(cert.r_prime @ cert.r_prime.conj().T))
        want_r = np.isin(np.arange(ex.d), ex.expect_local[0]).astype(float)
        want_rp = np.isin(np.arange(ex.d), ex.expect_local[1]).astype(float)
        loc_err = max(np.max(np.abs(cert.r @ cert.r.conj().T - np.diag(want_r))),
                      np.max(np.abs(cert.r_prime @ cert.r_prime.conj().T - np.diag(want_rp))))
        info["code_support"] = [np.flatnonzero(diag_r > 0.5).tolist(), np.flatnonzero(diag_rp > 0.5).tolist()]
        # the code must be annihilated by the complementary eigenprojector
        comp = next(p for mu, p in model.eigen_decomposition() if abs(mu - cert.lam) > 1e-9)
        pi = cert.projector
        info["complement_residual"] = float(np.max(np.abs(pi @ comp @ pi)))
        ok &= loc_err <= 1e-10 and info["complement_residual"] <= 1e-10
    info["match"] = bool(ok)
    return info


def cmd_examples(args) -> tuple[dict[str, Any], int]:
    budget = SearchBudget(seed=args.seed or 0, restarts=args.restarts or 256, grid_density=args.grid or 24)
    t0 = time.perf_counter()
    results = [_example_check(ex, budget) for ex in EXAMPLES]
    matched = sum(r["match"] for r in results)
    data = {"examples": results, "matched": matched, "total": len(results), "timing_s": time.perf_counter() - t0}
    return encode(data), EXIT_OK if matched == len(results) else EXIT_GOLDEN


def _render(command: str, data: dict[str, Any]) -> str:
    if command == "analyze":
        return render_analysis(data)
    if command == "verify":
        lines = [f"{data['status']} (lambda {data['lambda']}, tol {data['tol']:.1e})"]
        lines += [f"  {k}: {v:.3e}" for k, v in data["residuals"].items()]
        return "\n".join(lines)
    if command == "oracle":
        lines = []
        for b in data["branches"]:
            lines.append(f"lambda {b['lambda']}: {b['status']}  min f {b['min_f']:.3e}  ({b['mode']}, {b['evaluations']} evaluations)")
            if b["min_f_profile"]:
                prof = " ".join(f"{x:.3f}" for x in b["min_f_profile"])
                lines.append(f"  min f per polar slice: {prof}")
        return "\n".join(lines)
    lines = []
    for r in data["examples"]:
        mark = "match" if r["match"] else "MISMATCH"
        extra = f"  lambda {r['lambda']}  support {r['code_support']}" if "lambda" in r else ""
        lines.append(f"{r['name']:<26} expected {r['expected']:<8} got {r['got']:<8} {mark}{extra}")
    lines.append(f"{data['matched']}/{data['total']} match  ({data['timing_s']:.2f} s)")
    return "\n".join(lines)


def _summary(command: str, data: dict[str, Any]) -> str:
    if command == "analyze":
        return data["verdict"]
    if command == "verify":
        return data["status"]
    if command == "oracle":
        return " ".join(f"{b['lambda']}:{b['status']}" for b in data["branches"])
    return f"{data['matched']}/{data['total']}"


HANDLERS = {"analyze": cmd_analyze, "verify": cmd_verify, "oracle": cmd_oracle, "examples": cmd_examples}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.tol is not None and args.tol <= 0:
            raise ProblemError("--tol must be positive")
        overrides = {"certificate": args.tol} if args.tol is not None else {}
        with tolerance(**overrides):
            data, code = HANDLERS[args.command](args)
    except (ProblemError, KetSyntaxError, ContractViolation) as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    data = encode(data)
    if args.quiet:
        print(_summary(args.command, data))
    elif args.format == "json":
        print(json.dumps(data, indent=2, sort_keys=True))
    else:
        print(_render(args.command, data))
    return code


if __name__ == "__main__":
    raise SystemExit(main())
