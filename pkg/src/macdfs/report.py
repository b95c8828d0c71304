"""Serialization of analysis results: JSON-ready dicts and plain-text rendering.

Complex numbers become ``[re, im]`` pairs and matrices nested row-major lists
of such pairs.
"""
from __future__ import annotations

import enum
import math
from typing import Any

import numpy as np


def encode(obj: Any) -> Any:
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        if np.iscomplexobj(obj):
            return encode(obj.tolist())
        return obj.tolist()
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, dict):
        return {str(k): encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    return obj


def decode_matrix(rows) -> np.ndarray:
    out = []
    for row in rows:
        out.append([complex(x[0], x[1]) if isinstance(x, (list, tuple)) else complex(x) for x in row])
    return np.array(out, dtype=complex)


def lambda_label(lam: complex) -> str:
    lam = complex(lam)
    if abs(lam.imag) < 1e-12 and abs(abs(lam.real) - 1) < 1e-12:
        return "+1" if lam.real > 0 else "-1"
    return f"exp({np.angle(lam):.6f}i)"


def certificate_dict(cert) -> dict[str, Any]:
    return {
        "lambda": encode(complex(cert.lam)),
        "code_dims": list(cert.dims),
        "r": encode(cert.r),
        "r_prime": encode(cert.r_prime),
        "residual": encode(cert.residual),
        "layer": cert.layer,
    }


def dfs_report_dict(rep) -> dict[str, Any]:
    branches = []
    for b in rep.branches:
        branches.append({
            "lambda": lambda_label(b.lam),
            "lambda_value": encode(b.lam),
            "verdict": b.verdict.value,
            "layer": b.layer,
            "block_shape": list(b.block_shape),
            "eigenspace_rank": b.eigenspace_rank,
            "space_dim": b.space_dim,
            "bounds": encode(b.bounds),
            "details": encode(b.details),
            "certificate": certificate_dict(b.certificate) if b.certificate is not None else None,
        })
    return {
        "model": rep.kind,
        "d": rep.d,
        "code_dims": [rep.M, rep.N],
        "verdict": rep.verdict.value,
        "seed": rep.seed,
        "branches": branches,
    }


def _fmt_matrix(m, indent: str) -> list[str]:
    m = np.asarray(m)
    lines = []
    for row in m:
        cells = []
        for x in row:
            x = complex(x)
            cells.append(f"{x.real:+.6f}{x.imag:+.6f}j")
        lines.append(indent + "  ".join(cells))
    return lines


def render_analysis(data: dict[str, Any]) -> str:
    lines = [
        f"model {data['model']}  d={data['d']}  code {data['code_dims'][0]}x{data['code_dims'][1]}  seed={data['seed']}",
        f"overall: {data['verdict']}",
    ]
    for b in data["branches"]:
        bd = b["bounds"]
        lines.append(
            f"  lambda {b['lambda']}: {b['verdict']} via {b['layer']}  "
            f"(eigenspace rank {b['eigenspace_rank']}, zero block {b['block_shape'][0]}x{b['block_shape'][1]}, "
            f"max rank {bd['max_rank']} vs bound {bd['rank_bound']}, sufficient={bd['sufficient']})"
        )
        cert = b["certificate"]
        if cert:
            lines.append(f"    residual {cert['residual']:.3e}")
            lines.append("    r =")
            lines += _fmt_matrix(decode_matrix(cert["r"]), "      ")
            lines.append("    r' =")
            lines += _fmt_matrix(decode_matrix(cert["r_prime"]), "      ")
    if "timing_s" in data:
        lines.append(f"time {data['timing_s']:.3f} s")
    return "\n".join(lines)
