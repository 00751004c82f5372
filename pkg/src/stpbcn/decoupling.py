"""Disturbance decoupling: checks, synthesis, output-feedback stabilization and verification."""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from typing import Iterable

from .candidates import ControlCandidateSets, SynthesisResult
from .dynamics import FeedbackLaw, apply_output_feedback
from .errors import DimensionMismatch, SearchSpaceTooLarge
from .network import BooleanControlNetwork
from .reachability import (
    build_reachability_graph,
    decomposition_controllers,
    distances_to,
    invariant_set_decomposition,
)
from .stp import LogicalMatrix

DD_MODES = ("mapping", "invariant", "cleanReach", "definiteReach", "indefiniteReach", "iteration")
DEFAULT_BUDGET = 2 ** 24


def _row_output(net: BooleanControlNetwork, row: int) -> int:
    return net.output_of_substate(net.project(row))


def _substate_block(net: BooleanControlNetwork, u: int, k: int) -> tuple[int, ...]:
    """Raw rows of L over all completions and tails of substate ``k`` under input ``u``."""
    width = net.completions * net.tail_size
    start = net.column_index(u, net.states_of_substate(k)[0], 1) - 1
    return net.L.cols[start:start + width]


@dataclass
class RankConditionReport:
    per_substate: dict[int, tuple[int, ...]]
    verdict: bool


def rank_condition_dd(net: BooleanControlNetwork) -> RankConditionReport:
    """Baseline test: each substate needs an input whose sub-block has identical columns."""
    per = {}
    for k in range(1, net.num_substates + 1):
        per[k] = tuple(u for u in range(1, net.num_inputs + 1)
                       if len(set(_substate_block(net, u, k))) == 1)
    return RankConditionReport(per, all(per.values()))


def dd_output_equation_check(net: BooleanControlNetwork, Ltilde: LogicalMatrix | None = None) -> bool:
    """Every substate block of the closed loop lands in a single output group."""
    Ltilde = net.L if Ltilde is None else Ltilde
    width = net.completions * net.tail_size
    if Ltilde.rows != net.L.rows or Ltilde.ncols != net.num_substates * width:
        raise DimensionMismatch(
            f"closed loop must be {net.L.rows}x{net.num_substates * width}, got {Ltilde.rows}x{Ltilde.ncols}"
        )
    for k in range(1, net.num_substates + 1):
        if len({_row_output(net, c) for c in Ltilde.block(k, width)}) != 1:
            return False
    return True


# -- synthesis ------------------------------------------------------------------

def _mode_sets(net: BooleanControlNetwork, mode: str, target: int | None) -> tuple[dict, dict, dict]:
    inputs = range(1, net.num_inputs + 1)
    C: dict[int, tuple[int, ...]] = {}
    why: dict[int, str] = {}
    extra: dict = {}
    subs = range(1, net.num_substates + 1)
    if mode == "mapping":
        for k in subs:
            C[k] = tuple(u for u in inputs if len(net.successor_outputs(k, u)) == 1)
            if not C[k]:
                why[k] = "every input lets the disturbance choose between outputs"
    elif mode == "invariant":
        for k in subs:
            own = net.output_of_substate(k)
            C[k] = tuple(u for u in inputs if net.successor_outputs(k, u) == {own})
            if not C[k]:
                why[k] = f"no input keeps the output at {own} with certainty"
    elif mode == "cleanReach":
        for k in subs:
            C[k] = tuple(u for u in inputs if net.successor_outputs(k, u) == {target})
            if not C[k]:
                why[k] = f"no input moves to output {target} with certainty"
    elif mode in ("definiteReach", "indefiniteReach"):
        kind = "definite" if mode == "definiteReach" else "indefinite"
        graph = build_reachability_graph(net, kind, "outputSets")
        dist = distances_to(graph, target)
        plan = {}
        for j in graph.vertices:
            if j not in dist:
                continue
            if dist[j] == 1:
                plan[j] = target
            else:
                plan[j] = min(b for b in graph.successors(j) if dist.get(b) == dist[j] - 1)
        extra["plan"] = {str(j): plan[j] for j in sorted(plan)}
        for k in subs:
            own = net.output_of_substate(k)
            nxt = plan.get(own)
            if nxt is None:
                C[k] = ()
                why[k] = f"output group {own} cannot reach output {target}"
            elif kind == "definite":
                C[k] = tuple(u for u in inputs if net.successor_outputs(k, u) == {nxt})
            else:
                C[k] = tuple(u for u in inputs if nxt in net.successor_outputs(k, u))
            if nxt is not None and not C[k]:
                why[k] = f"no input steers toward output group {nxt}"
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return C, why, extra


def dd_synthesize(net: BooleanControlNetwork, mode: str = "mapping", target: int | None = None,
                  strict: bool = False) -> SynthesisResult:
    """Admissible inputs per substate for the requested decoupling goal.

    ``mode="iteration"`` uses the layered invariant-set decomposition; the other
    modes work from the successor output sets O_{k+}^i.
    """
    if mode not in DD_MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {DD_MODES}")
    if mode in ("cleanReach", "definiteReach", "indefiniteReach"):
        if target is None or not 1 <= target <= net.num_outputs:
            raise ValueError(f"mode {mode} needs a target output in [1, {net.num_outputs}]")
    if mode == "iteration":
        layers = invariant_set_decomposition(net)
        extra = {"decomposition": layers.as_dict()}
        if layers.remainder:
            C = {k: () for k in layers.remainder}
            for k in range(1, net.num_substates + 1):
                C.setdefault(k, tuple(sorted(layers.witness.get(k, ()))))
            cands = ControlCandidateSets(dict(sorted(C.items())), "substate", net.num_inputs, net.completions)
            why = {k: "cannot be driven into the invariant layers" for k in sorted(layers.remainder)}
            return SynthesisResult(False, cands, None, why, extra=extra)
        cands = decomposition_controllers(net, layers, strict=strict)
        why = {k: "no admissible input" for k in cands.empty_units()}
        return SynthesisResult(cands.complete, cands, cands.sample(), why, extra=extra)

    C, why, extra = _mode_sets(net, mode, target)
    cands = ControlCandidateSets(C, "substate", net.num_inputs, net.completions)
    return SynthesisResult(cands.complete, cands, cands.sample(), why,
                           online_only=mode == "indefiniteReach", extra=extra)


def _group_laws(net: BooleanControlNetwork, admissible: dict[int, set[int]], by_state: bool,
                budget: int) -> list[FeedbackLaw]:
    """Output feedback laws choosing, per output group, an input admissible for all members."""
    groups = net.output_sets() if by_state else net.substate_output_sets()
    choices = []
    for group in groups:
        common = set(range(1, net.num_inputs + 1))
        for k in group:
            common &= admissible[k]
        choices.append(sorted(common))
    total = math.prod(len(c) for c in choices)
    if total > budget:
        raise SearchSpaceTooLarge(total, budget)
    return [FeedbackLaw.output(net.num_inputs, combo) for combo in itertools.product(*choices)]


def dd_output_feedback_synthesize(net: BooleanControlNetwork, condition: str = "output_eq",
                                  budget: int = DEFAULT_BUDGET) -> list[FeedbackLaw]:
    """Output feedback laws whose closed loop decouples the disturbance.

    ``condition`` is ``"output_eq"`` (each substate block stays in one output
    group) or ``"rank"`` (each substate block has identical columns).
    """
    if net.H is None:
        raise DimensionMismatch("output feedback needs H")
    admissible = {}
    for k in range(1, net.num_substates + 1):
        ok = set()
        for u in range(1, net.num_inputs + 1):
            block = _substate_block(net, u, k)
            if condition == "rank":
                passed = len(set(block)) == 1
            elif condition == "output_eq":
                passed = len({_row_output(net, c) for c in block}) == 1
            else:
                raise ValueError(f"unknown condition {condition!r}")
            if passed:
                ok.add(u)
        admissible[k] = ok
    return _group_laws(net, admissible, by_state=False, budget=budget)


def _closed_loop_map(net: BooleanControlNetwork, law: FeedbackLaw) -> tuple[int, ...]:
    return apply_output_feedback(net, law).cols


def _stabilizes(step: tuple[int, ...], target: frozenset[int]) -> bool:
    # the target must be one cycle of the closed loop and attract every state
    if any(step[x - 1] not in target for x in target):
        return False
    start = min(target)
    cycle = {start}
    x = step[start - 1]
    while x != start:
        cycle.add(x)
        x = step[x - 1]
    if cycle != target:
        return False
    for x0 in range(1, len(step) + 1):
        x = x0
        for _ in range(len(step)):
            if x in target:
                break
            x = step[x - 1]
        if x not in target:
            return False
    return True


def stabilization_synthesize(net: BooleanControlNetwork, target: int | Iterable[int] | LogicalMatrix,
                             budget: int = DEFAULT_BUDGET) -> list[FeedbackLaw]:
    """Output feedback laws reaching a target.

    ``target`` is a state (fixed point attracting everything), a set of states
    (a single attracting cycle) or a full closed-loop matrix to reproduce.
    """
    if net.d or net.t:
        raise DimensionMismatch("stabilization expects a network without disturbances or faults")
    if net.H is None or net.is_subsystem:
        raise DimensionMismatch("stabilization needs H and the full-state matrix")
    inputs = range(1, net.num_inputs + 1)
    states = range(1, net.num_states + 1)
    if isinstance(target, LogicalMatrix):
        if target.rows != net.num_states or target.ncols != net.num_states:
            raise DimensionMismatch("target behaviour must be a square state map")
        # a required column absent from L rules everything out before any search
        present = set(net.L.cols)
        if any(c not in present for c in target.cols):
            return []
        admissible = {x: {u for u in inputs if net.next_row(u, x) == target.col(x)} for x in states}
        return _group_laws(net, admissible, by_state=True, budget=budget)

    goal = frozenset([target]) if isinstance(target, int) else frozenset(target)
    if not goal or not all(1 <= x <= net.num_states for x in goal):
        raise ValueError("target states out of range")
    if len(goal) == 1:
        (x_star,) = goal
        if not any(net.next_row(u, x_star) == x_star for u in inputs):
            return []
    total = net.num_inputs ** net.num_outputs
    if total > budget:
        raise SearchSpaceTooLarge(total, budget)
    found = []
    for combo in itertools.product(inputs, repeat=net.num_outputs):
        law = FeedbackLaw.output(net.num_inputs, combo)
        if _stabilizes(_closed_loop_map(net, law), goal):
            found.append(law)
    return found


def enumerate_output_feedback(net: BooleanControlNetwork, budget: int = DEFAULT_BUDGET):
    total = net.num_inputs ** net.num_outputs
    if total > budget:
        raise SearchSpaceTooLarge(total, budget)
    for combo in itertools.product(range(1, net.num_inputs + 1), repeat=net.num_outputs):
        yield FeedbackLaw.output(net.num_inputs, combo)


# -- verification ---------------------------------------------------------------

@dataclass
class DDVerdict:
    holds: bool | None
    k_star: int | None
    runs: int
    exhaustive: bool
    coverage: float
    counterexample: dict | None = None
    hit_fraction: float | None = None
    details: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "holds": self.holds, "k_star": self.k_star, "runs": self.runs,
            "exhaustive": self.exhaustive, "coverage": self.coverage,
            "counterexample": self.counterexample, "hit_fraction": self.hit_fraction,
        }


def _controller_input(net: BooleanControlNetwork, law: FeedbackLaw | None, x: int) -> int:
    if law is None:
        if net.m:
            raise DimensionMismatch("a controller is required when the network has inputs")
        return 1
    return law.input_for(net, x)


def verify_dd(net: BooleanControlNetwork, controller: FeedbackLaw | None, horizon: int,
              mode: str = "iteration", target: int | None = None,
              budget: int = 2 ** 22, seed: int = 0) -> DDVerdict:
    """Brute-force check of a controller against every start state and disturbance word.

    A step is *settled* when the next output is fixed by the current substate and
    input alone, whatever the disturbance, fault or unmodelled state bits do.
    ``mapping`` needs every step settled; ``iteration`` reports the first step
    k* after which all steps of all runs are settled; ``invariant`` also needs the
    output to stay constant (at ``target`` when given) from k* on.  ``reach``
    (the online indefinite-reach policy) only reports the fraction of runs that
    hit the target output, never a verdict.
    """
    if mode not in ("mapping", "iteration", "invariant", "reach"):
        raise ValueError(f"unknown verification mode {mode!r}")
    if controller is not None:
        controller.check(net)
    if horizon < 1:
        raise ValueError("horizon must be at least 1")

    # next outputs per (substate, input) pair, over everything the controller cannot see
    next_outputs: dict[tuple[int, int], set[int]] = {}
    for x in range(1, net.num_states + 1):
        u = _controller_input(net, controller, x)
        key = (net.substate_of(x), u)
        bucket = next_outputs.setdefault(key, set())
        for tail in range(1, net.tail_size + 1):
            bucket.add(_row_output(net, net.next_row(u, x, tail)))
    settled = {key: len(v) == 1 for key, v in next_outputs.items()}

    extra = net.completions if net.is_subsystem else 1
    alphabet = [(tail, r) for tail in range(1, net.tail_size + 1) for r in range(1, extra + 1)]
    total_runs = net.num_states * len(alphabet) ** horizon
    exhaustive = total_runs <= budget
    if exhaustive:
        words = lambda: itertools.product(alphabet, repeat=horizon)  # noqa: E731
        runs = [(x0, w) for x0 in range(1, net.num_states + 1) for w in words()]
    else:
        rng = random.Random(seed)
        runs = [(rng.randint(1, net.num_states), tuple(rng.choice(alphabet) for _ in range(horizon)))
                for _ in range(budget)]

    worst, witness, hits = -1, None, 0
    for x0, word in runs:
        states, flags = [x0], []
        for tail, r in word:
            x = states[-1]
            u = _controller_input(net, controller, x)
            flags.append(settled[(net.substate_of(x), u)])
            row = net.next_row(u, x, tail)
            states.append((row - 1) * net.completions + r if net.is_subsystem else row)
        outputs = [net.output_of_state(x) for x in states]
        if mode == "reach":
            hits += target in outputs
            continue
        k = horizon
        while k > 0 and flags[k - 1]:
            k -= 1
        if mode == "invariant":
            goal = outputs[-1] if target is None else target
            k = max(k, _constant_from(outputs, goal))
        if k > worst:
            worst = k
            witness = {"x0": x0, "word": [list(p) for p in word], "states": states, "outputs": outputs}

    coverage = min(1.0, len(runs) / total_runs)
    if mode == "reach":
        return DDVerdict(None, None, len(runs), exhaustive, coverage, None, hits / len(runs))
    limit = 0 if mode == "mapping" else horizon - 1
    holds = worst <= limit
    return DDVerdict(holds, worst if worst <= horizon else None, len(runs), exhaustive, coverage,
                     None if holds else witness)


def _constant_from(outputs: list[int], goal: int) -> int:
    """Smallest k with outputs[k:] all equal to ``goal`` (len(outputs) if none)."""
    k = len(outputs)
    while k > 0 and outputs[k - 1] == goal:
        k -= 1
    return k
