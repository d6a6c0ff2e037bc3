"""Solver configuration, thresholds, statistics and the solution report."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any, Dict, List, Mapping, Optional

SOLVER_MODES = ("exact", "randomized", "bruteforce")
FAMILY_MODES = ("exhaustive", "perfect-hash", "randomized")

YES = "yes"
NO = "no"
UNKNOWN = "unknown-monte-carlo"


@dataclass(frozen=True)
class SolverConfig:
    """Knobs shared by every solver.

    ``mode="randomized"`` forces randomized covering families; ``mode="exact"``
    uses ``family``.  ``q_override`` and ``t_override`` replace the theoretical
    thresholds so the recursive and high-connectivity phases run on small inputs.
    """

    mode: str = "exact"
    family: str = "exhaustive"
    delta: float = 1e-6
    seed: int = 0
    q_override: Optional[int] = None
    t_override: Optional[int] = None
    threads: int = 1

    def __post_init__(self) -> None:
        if self.mode not in SOLVER_MODES:
            raise ValueError(f"unknown solver mode {self.mode!r}")
        if self.family not in FAMILY_MODES:
            raise ValueError(f"unknown family mode {self.family!r}")
        if not 0 < self.delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        for name in ("q_override", "t_override"):
            value = getattr(self, name)
            if value is not None and value < 1:
                raise ValueError(f"{name} must be at least 1")
        if self.threads < 1:
            raise ValueError("threads must be positive")

    @property
    def family_mode(self) -> str:
        return "randomized" if self.mode == "randomized" else self.family

    @property
    def deterministic(self) -> bool:
        return self.family_mode != "randomized"


# ------------------------------------------------------------------ thresholds
def steiner_q(k: int) -> int:
    return k * (2 * k) ** (2 * k) * 2 ** (2 * k) * (k + 2) + 1


def mwcu_q(k: int) -> int:
    return k * (2 * k**3 + 6 * k**2 + 1) ** (2 * k) + k


def mwcu_t(q: int, k: int) -> int:
    return (2 * q + 2) * (2**k - 1) + 2 * k + 1


def ulc_q(k: int, s: int) -> int:
    return k * (s + 1) ** (4 * k) + 2 * k


def ulc_t(q: int, k: int) -> int:
    return (2 * q + 2) * (2**k - 1) + 4 * k + 1


# ---------------------------------------------------------------------- stats
class Stats:
    """Named integer counters plus a running maximum of recursion depth."""

    def __init__(self) -> None:
        self.counters: Dict[str, int] = {}
        self.exact = True

    def bump(self, name: str, by: int = 1) -> None:
        self.counters[name] = self.counters.get(name, 0) + by

    def high(self, name: str, value: int) -> None:
        if value > self.counters.get(name, 0):
            self.counters[name] = value

    def merge(self, other: "Stats") -> None:
        for name, value in other.counters.items():
            if name.startswith("max_"):
                self.high(name, value)
            else:
                self.bump(name, value)
        self.exact = self.exact and other.exact

    def as_dict(self) -> Dict[str, int]:
        return dict(sorted(self.counters.items()))


# --------------------------------------------------------------------- report
@dataclass
class SolutionReport:
    """Outcome of one solver run.

    ``solution`` lists deleted edge ids (edge problems) or vertex ids (node
    problems) in the instance's own numbering; ``labeling`` is set for label
    cover problems.
    """

    problem: str
    answer: str
    solution: List[int] = field(default_factory=list)
    labeling: Optional[Dict[int, int]] = None
    provenance: Dict[str, Any] = field(default_factory=dict)
    stats: Dict[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> Optional[int]:
        return len(self.solution) if self.answer == YES else None

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {
            "problem": self.problem,
            "answer": self.answer,
            "size": self.size,
            "solution": sorted(self.solution),
        }
        if self.labeling is not None:
            out["labeling"] = {str(v): a for v, a in sorted(self.labeling.items())}
        out["provenance"] = self.provenance
        out["stats"] = self.stats
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "SolutionReport":
        labeling = data.get("labeling")
        return cls(
            problem=str(data["problem"]),
            answer=str(data["answer"]),
            solution=[int(x) for x in data.get("solution", [])],
            labeling=None if labeling is None else {int(v): int(a) for v, a in labeling.items()},
            provenance=dict(data.get("provenance", {})),
            stats=dict(data.get("stats", {})),
        )


def provenance(cfg: SolverConfig, **extra: Any) -> Dict[str, Any]:
    out: Dict[str, Any] = {
        "mode": cfg.mode,
        "family": cfg.family_mode,
        "seed": cfg.seed,
        "delta": cfg.delta if not cfg.deterministic else None,
        "q_override": cfg.q_override,
        "t_override": cfg.t_override,
    }
    out.update(extra)
    return out
