"""Behavioural equivalence between a Boolean network and a control network."""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass, field

from .dynamics import FeedbackLaw, attractors
from .errors import DimensionMismatch, SearchSpaceTooLarge
from .network import BooleanControlNetwork, BooleanNetwork
from .stp import LogicalMatrix

CRITERIA = ("stateTransition", "outputSequence", "attractor", "outputSteadyState")
REGIMES = ("allInputs", "stateFeedback", "outputFeedback")
DISTURBANCE_MODES = ("none", "bcnOnly", "both")
DEFAULT_BUDGET = 2 ** 24


@dataclass(frozen=True)
class EquivalenceQuery:
    criterion: str
    regime: str = "allInputs"
    law: FeedbackLaw | None = None
    disturbance_mode: str = "none"

    def __post_init__(self):
        if self.criterion not in CRITERIA:
            raise ValueError(f"unknown criterion {self.criterion!r}")
        if self.regime not in REGIMES:
            raise ValueError(f"unknown regime {self.regime!r}")
        if self.disturbance_mode not in DISTURBANCE_MODES:
            raise ValueError(f"unknown disturbance mode {self.disturbance_mode!r}")
        if (self.regime == "allInputs") != (self.law is None):
            raise ValueError("feedback regimes need a law, allInputs must not have one")


@dataclass
class EquivalenceReport:
    verdict: bool
    witness: tuple[int, int | None, int] | None = None  # (state, input, step)
    details: dict = field(default_factory=dict)


class _Pair:
    """Shared stepping logic for the BN and the (possibly fed back) BCN."""

    def __init__(self, bn: BooleanNetwork, bcn: BooleanControlNetwork, q: EquivalenceQuery):
        if bn.n != bcn.n:
            raise DimensionMismatch(f"BN has n={bn.n}, BCN has n={bcn.n}")
        if bcn.is_subsystem:
            raise DimensionMismatch("equivalence needs the full-state matrix of the BCN")
        mode = q.disturbance_mode
        if mode == "none" and (bcn.tail_size > 1 or bn.tail_bits):
            raise DimensionMismatch("disturbance mode 'none' needs tail-free networks")
        if mode == "bcnOnly" and bn.tail_bits:
            raise DimensionMismatch("disturbance mode 'bcnOnly' needs a tail-free BN")
        if mode == "both" and 2 ** bn.tail_bits != bcn.tail_size:
            raise DimensionMismatch("disturbance mode 'both' needs matching tail sizes")
        if q.law is not None:
            q.law.check(bcn)
            expected = {"stateFeedback": "state", "outputFeedback": "output"}[q.regime]
            if q.law.kind != expected:
                raise DimensionMismatch(f"regime {q.regime} needs a {expected} law")
        self.bn, self.bcn, self.q = bn, bcn, q

    def inputs(self, x: int) -> list[int]:
        if self.q.law is None:
            return list(range(1, self.bcn.num_inputs + 1))
        return [self.q.law.input_for(self.bcn, x)]

    def tails(self) -> range:
        return range(1, self.bcn.tail_size + 1)

    def bn_step(self, x: int, tail: int) -> int:
        return self.bn.step(x, tail if self.bn.tail_bits else 1)

    def bcn_step(self, u: int, x: int, tail: int) -> int:
        return self.bcn.next_row(u, x, tail)

    def out(self, x: int) -> int:
        return self.bcn.output_of_state(x)

    def autonomous_pairs(self):
        """(input, tail, BN map, BCN map) for every constant input/tail choice."""
        size = self.bcn.num_states
        inputs = range(1, self.bcn.num_inputs + 1) if self.q.law is None else [None]
        for u in inputs:
            for tail in self.tails():
                bn_map = LogicalMatrix(size, tuple(self.bn_step(x, tail) for x in range(1, size + 1)))
                bcn_map = LogicalMatrix(size, tuple(
                    self.bcn_step(u if u is not None else self.q.law.input_for(self.bcn, x), x, tail)
                    for x in range(1, size + 1)
                ))
                yield u, tail, bn_map, bcn_map


def _state_transition(pair: _Pair) -> EquivalenceReport:
    for x in range(1, pair.bcn.num_states + 1):
        for u in pair.inputs(x):
            for tail in pair.tails():
                a, b = pair.bn_step(x, tail), pair.bcn_step(u, x, tail)
                if a != b:
                    return EquivalenceReport(False, (x, u, 1), {"tail": tail, "bn_next": a, "bcn_next": b})
    return EquivalenceReport(True)


def _output_sequence(pair: _Pair) -> EquivalenceReport:
    for x0 in range(1, pair.bcn.num_states + 1):
        seen = {(x0, x0)}
        queue = deque([(x0, x0, 0)])
        while queue:
            a, b, depth = queue.popleft()
            for u in pair.inputs(b):
                for tail in pair.tails():
                    na, nb = pair.bn_step(a, tail), pair.bcn_step(u, b, tail)
                    if pair.out(na) != pair.out(nb):
                        return EquivalenceReport(False, (x0, u, depth + 1), {
                            "bn_output": pair.out(na), "bcn_output": pair.out(nb), "tail": tail,
                        })
                    if (na, nb) not in seen:
                        seen.add((na, nb))
                        queue.append((na, nb, depth + 1))
    return EquivalenceReport(True)


def _min_rotation(seq: tuple[int, ...]) -> tuple[int, ...]:
    # shortest period first, so (1, 1) and (1,) describe the same steady output
    for period in range(1, len(seq) + 1):
        if len(seq) % period == 0 and seq == seq[:period] * (len(seq) // period):
            seq = seq[:period]
            break
    return min(seq[i:] + seq[:i] for i in range(len(seq)))


def _attractor_based(pair: _Pair, outputs_only: bool) -> EquivalenceReport:
    for u, tail, bn_map, bcn_map in pair.autonomous_pairs():
        rep_a, rep_b = attractors(bn_map), attractors(bcn_map)
        if not outputs_only and set(rep_a.attractors) != set(rep_b.attractors):
            missing = sorted(set(rep_a.attractors) ^ set(rep_b.attractors))
            x = missing[0][0]
            return EquivalenceReport(False, (x, u, 0), {
                "tail": tail,
                "bn_attractors": [list(c) for c in rep_a.attractors],
                "bcn_attractors": [list(c) for c in rep_b.attractors],
            })
        for x in range(1, pair.bcn.num_states + 1):
            ca, cb = rep_a.attractor_of(x), rep_b.attractor_of(x)
            if outputs_only:
                oa = _min_rotation(tuple(pair.out(y) for y in ca))
                ob = _min_rotation(tuple(pair.out(y) for y in cb))
                if oa != ob:
                    return EquivalenceReport(False, (x, u, rep_a.distance[x]), {
                        "tail": tail, "bn_output_cycle": list(oa), "bcn_output_cycle": list(ob),
                    })
            elif ca != cb:
                return EquivalenceReport(False, (x, u, rep_a.distance[x]), {
                    "tail": tail, "bn_attractor": list(ca), "bcn_attractor": list(cb),
                })
    return EquivalenceReport(True)


def check_equivalence(bn: BooleanNetwork, bcn: BooleanControlNetwork,
                      q: EquivalenceQuery) -> EquivalenceReport:
    pair = _Pair(bn, bcn, q)
    if q.criterion == "stateTransition":
        return _state_transition(pair)
    if q.criterion == "outputSequence":
        return _output_sequence(pair)
    return _attractor_based(pair, outputs_only=q.criterion == "outputSteadyState")


def enumerate_laws(kind: str, rows: int, cols: int, budget: int = DEFAULT_BUDGET):
    """All feedback laws of a kind in lexicographic order of their column lists."""
    total = rows ** cols
    if total > budget:
        raise SearchSpaceTooLarge(total, budget)
    for combo in itertools.product(range(1, rows + 1), repeat=cols):
        yield FeedbackLaw(kind, LogicalMatrix(rows, combo))


def search_equivalence_feedback(bn: BooleanNetwork, bcn: BooleanControlNetwork, criterion: str,
                                kind: str = "state", disturbance_mode: str = "none",
                                budget: int = DEFAULT_BUDGET) -> list[FeedbackLaw]:
    """Exhaustive search for feedback laws under which ``bcn`` behaves like ``bn``."""
    if kind == "state":
        regime, cols = "stateFeedback", bcn.num_states
    elif kind == "output":
        if bcn.H is None:
            raise DimensionMismatch("output feedback needs H")
        regime, cols = "outputFeedback", bcn.num_outputs
    else:
        raise ValueError(f"unknown feedback kind {kind!r}")
    found = []
    for law in enumerate_laws(kind, bcn.num_inputs, cols, budget):
        q = EquivalenceQuery(criterion, regime, law, disturbance_mode)
        if check_equivalence(bn, bcn, q).verdict:
            found.append(law)
    return found
