"""Admissible-input sets and synthesis results shared by the synthesis modules."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterator

from .dynamics import FeedbackLaw
from .errors import SearchSpaceTooLarge
from .stp import LogicalMatrix


@dataclass(frozen=True)
class ControlCandidateSets:
    """C_k: admissible inputs per unit (substate or full state).

    With ``per="substate"`` every full state inside substate ``k`` picks its own
    input from ``C[k]``, so the controller count is Π |C_k|^completions.
    """

    C: dict[int, tuple[int, ...]]
    per: str
    num_inputs: int
    completions: int = 1

    def column_choices(self) -> list[tuple[int, ...]]:
        if self.per == "state":
            return [self.C[x] for x in sorted(self.C)]
        return [self.C[k] for k in sorted(self.C) for _ in range(self.completions)]

    @property
    def controller_count(self) -> int:
        return math.prod(len(c) for c in self.column_choices())

    @property
    def complete(self) -> bool:
        return all(self.C.values())

    def empty_units(self) -> list[int]:
        return [k for k in sorted(self.C) if not self.C[k]]

    def laws(self, budget: int | None = None) -> Iterator[FeedbackLaw]:
        """Every controller in lexicographic order of its column list."""
        if budget is not None and self.controller_count > budget:
            raise SearchSpaceTooLarge(self.controller_count, budget)
        for combo in itertools.product(*self.column_choices()):
            yield FeedbackLaw("state", LogicalMatrix(self.num_inputs, combo))

    def sample(self) -> FeedbackLaw | None:
        """The lexicographically first controller, if any."""
        if not self.complete:
            return None
        return FeedbackLaw("state", LogicalMatrix(self.num_inputs, tuple(c[0] for c in self.column_choices())))

    def admits(self, law: FeedbackLaw) -> bool:
        return all(u in choices for u, choices in zip(law.M.cols, self.column_choices()))

    def as_dict(self) -> dict:
        return {
            "per": self.per,
            "C": {str(k): list(v) for k, v in sorted(self.C.items())},
            "controller_count": self.controller_count,
        }


@dataclass
class SynthesisResult:
    feasible: bool
    candidates: ControlCandidateSets
    sample_controller: FeedbackLaw | None
    diagnostics: dict[int, str] = field(default_factory=dict)
    online_only: bool = False
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "candidates": self.candidates.as_dict(),
            "sample_controller": None if self.sample_controller is None else list(self.sample_controller.M.cols),
            "diagnostics": {str(k): v for k, v in sorted(self.diagnostics.items())},
            "online_only": self.online_only,
            **self.extra,
        }
