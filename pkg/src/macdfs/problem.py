"""JSON problem files describing a noise model, the code shape and search settings.

Example::

    {
      "d": 3,
      "noise": {"states": ["1/sqrt(2)(|02>+|10>)", "1/sqrt(2)(|01>+|20>)"]},
      "code_dims": [2, 2],
      "lambda": "auto",
      "p": 0.5,
      "budget": {"restarts": 256, "grid_density": 24},
      "seed": 0
    }

``noise`` takes exactly one of:

* ``states``: kets spanning the -1 eigenspace of ``U = I - 2 Q``;
* ``unitary``: the full ``d^2 x d^2`` hermitian unitary (entries are numbers
  or ``[re, im]`` pairs);
* ``phased``: ``{"p0_states": [...], "blocks": [{"delta": x, "states": [...]}]}``,
  with ``P0`` defaulting to the complement of the blocks;
* ``multi``: ``{"blocks": [{"states": [...], "phase_u": x, "phase_v": y}],
  "p": .., "q": ..}`` for a three-term mixture sharing ``P0``.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from .channel import HermitianUnitary, MultiUnitary, PhasedProjectors, projector_onto
from .ket import KetSyntaxError, parse_ket
from .linalg import ContractViolation
from .oracle import SearchBudget

LAMBDA_CHOICES = ("auto", "both", "+1", "-1")


class ProblemError(ValueError):
    """Malformed or inconsistent problem description."""


@dataclass
class ProblemFile:
    d: int
    noise: dict[str, Any]
    code_dims: tuple[int, int] = (2, 2)
    lam: str = "auto"
    p: float = 0.5
    budget: dict[str, Any] = field(default_factory=dict)
    seed: int = 0

    def search_budget(self, **overrides) -> SearchBudget:
        opts = {**self.budget, **{k: v for k, v in overrides.items() if v is not None}}
        opts.setdefault("seed", self.seed)
        try:
            return SearchBudget(**opts)
        except (TypeError, ValueError) as exc:
            raise ProblemError(f"bad budget: {exc}") from exc

    def model(self):
        try:
            return build_model(self.noise, self.d, self.p)
        except (KetSyntaxError, ContractViolation) as exc:
            raise ProblemError(str(exc)) from exc


def parse_code_dims(value) -> tuple[int, int]:
    if isinstance(value, str):
        parts = value.lower().replace(" ", "").split("x")
        if len(parts) != 2:
            raise ProblemError(f"code dims must look like MxN, got {value!r}")
        value = parts
    try:
        m, n = (int(x) for x in value)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"code dims must be two integers, got {value!r}") from exc
    return m, n


def _complex_matrix(rows) -> np.ndarray:
    def entry(x):
        if isinstance(x, (list, tuple)):
            if len(x) != 2:
                raise ProblemError("complex entries must be [re, im]")
            return complex(float(x[0]), float(x[1]))
        return complex(x)

    try:
        return np.array([[entry(x) for x in row] for row in rows], dtype=complex)
    except (TypeError, ValueError) as exc:
        raise ProblemError(f"bad matrix entry: {exc}") from exc


def _span(states, d: int) -> np.ndarray:
    if not states:
        raise ProblemError("empty list of states")
    vecs = []
    for s in states:
        st = parse_ket(s, d)
        if st.norm <= 0:
            raise ProblemError(f"state {s!r} is the zero vector")
        vecs.append(st.amps)
    return projector_onto(np.column_stack(vecs))


def build_model(noise: dict[str, Any], d: int, p: float = 0.5):
    if not isinstance(noise, dict) or len(noise) != 1:
        raise ProblemError("noise must have exactly one of: states, unitary, phased, multi")
    kind, body = next(iter(noise.items()))
    n = d * d
    if kind == "states":
        return HermitianUnitary.from_projector(_span(body, d), d, p)
    if kind == "unitary":
        return HermitianUnitary(_complex_matrix(body), d, p)
    if kind in ("phased", "multi"):
        blocks = body.get("blocks") or []
        if not blocks:
            raise ProblemError(f"{kind} noise needs at least one block")
        projs = [_span(b.get("states"), d) for b in blocks]
        if "p0_states" in body:
            p0 = _span(body["p0_states"], d)
        else:
            p0 = np.eye(n) - sum(projs)
        if kind == "phased":
            return PhasedProjectors(p0, tuple((float(b["delta"]), q) for b, q in zip(blocks, projs)), d, p)
        pu = tuple(float(b["phase_u"]) for b in blocks)
        pv = tuple(float(b["phase_v"]) for b in blocks)
        return MultiUnitary(p0, tuple(projs), pu, pv, d, float(body.get("p", 1 / 3)), float(body.get("q", 1 / 3)))
    raise ProblemError(f"unknown noise kind {kind!r}")


def problem_from_dict(raw: dict[str, Any]) -> ProblemFile:
    if not isinstance(raw, dict):
        raise ProblemError("problem file must contain a JSON object")
    unknown = set(raw) - {"d", "noise", "code_dims", "lambda", "p", "budget", "seed"}
    if unknown:
        raise ProblemError(f"unknown fields: {sorted(unknown)}")
    for key in ("d", "noise"):
        if key not in raw:
            raise ProblemError(f"missing field {key!r}")
    d = raw["d"]
    if not isinstance(d, int) or not 1 <= d <= 9:
        raise ProblemError("d must be an integer in 1..9")
    lam = str(raw.get("lambda", "auto"))
    if lam not in LAMBDA_CHOICES:
        raise ProblemError(f"lambda must be one of {LAMBDA_CHOICES}")
    m, n = parse_code_dims(raw.get("code_dims", (2, 2)))
    if not (1 <= m <= d and 1 <= n <= d):
        raise ProblemError(f"code dims {m}x{n} out of range for d = {d}")
    budget = raw.get("budget", {}) or {}
    if not isinstance(budget, dict):
        raise ProblemError("budget must be an object")
    prob = ProblemFile(d, raw["noise"], (m, n), lam, float(raw.get("p", 0.5)), dict(budget), int(raw.get("seed", 0)))
    prob.model()  # validate early
    return prob


def load_problem(path: str | Path) -> ProblemFile:
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise ProblemError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ProblemError(f"{path} is not valid JSON: {exc}") from exc
    return problem_from_dict(raw)
