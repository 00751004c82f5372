"""Fault detection: reflective/redundant variable tests, impossible outputs,
instantaneous fault detection synthesis and a set-membership observer.

Fault index 1 is taken as the fault-free value throughout (see ``FAULT_FREE``);
every function that needs it accepts an override.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .candidates import ControlCandidateSets, SynthesisResult
from .dynamics import FeedbackLaw
from .errors import DimensionMismatch, InconsistentTrace
from .network import BooleanControlNetwork
from .stp import LogicalMatrix, log2_exact

FAULT_FREE = 1


def reflective_check(M_G: LogicalMatrix, r: int, s_redundant: int = 0) -> bool:
    """Rank test on a logical map M_G of n variables.

    With ``s_redundant == 0`` the trailing n - r variables are jointly reflective
    when each of the 2^r blocks has distinct columns. With ``s_redundant > 0``
    the next s variables must also be redundant: inside each block the 2^s
    sub-blocks are identical and have distinct columns.
    """
    n = log2_exact(M_G.ncols)
    if r < 0 or s_redundant < 0 or r + s_redundant > n:
        raise DimensionMismatch(f"r + s = {r + s_redundant} exceeds n = {n}")
    block_width = 2 ** (n - r)
    sub_width = 2 ** (n - r - s_redundant)
    for b in range(1, 2 ** r + 1):
        block = M_G.block(b, block_width)
        subs = [block[i:i + sub_width] for i in range(0, block_width, sub_width)]
        if any(sub != subs[0] for sub in subs):
            return False
        if len(set(subs[0])) != sub_width:
            return False
    return True


def output_matrix(net: BooleanControlNetwork, Ltilde: LogicalMatrix) -> LogicalMatrix:
    """M^O = H L̃: the closed loop read through the outputs."""
    return LogicalMatrix(net.num_outputs, tuple(_row_output(net, c) for c in Ltilde.cols))


def _row_output(net: BooleanControlNetwork, row: int) -> int:
    return net.output_of_substate(net.project(row))


def impossible_output_sets(Ltilde: LogicalMatrix, H: LogicalMatrix) -> dict[int, frozenset[int]]:
    """I_m(O_si): outputs that can never directly follow output i under ``Ltilde``."""
    states = H.ncols
    if Ltilde.rows != states or Ltilde.ncols % states:
        raise DimensionMismatch("closed loop and H disagree on the state count")
    tail = Ltilde.ncols // states
    seen: dict[int, set[int]] = {i: set() for i in range(1, H.rows + 1)}
    for x in range(1, states + 1):
        here = H.cols[x - 1]
        for j in range(tail):
            seen[here].add(H.cols[Ltilde.cols[(x - 1) * tail + j] - 1])
    everything = set(range(1, H.rows + 1))
    return {i: frozenset(everything - seen[i]) for i in sorted(seen)}


def fault_free_loop(net: BooleanControlNetwork, controller: FeedbackLaw | None,
                    fault_free: int = FAULT_FREE) -> LogicalMatrix:
    """Closed loop over (x, disturbance) with the fault held at its fault-free value."""
    cols = []
    for x in range(1, net.num_states + 1):
        u = 1 if controller is None else controller.input_for(net, x)
        for dist in range(1, 2 ** net.d + 1):
            cols.append(net.next_row(u, x, net.tail_index(dist, fault_free)))
    return LogicalMatrix(net.L.rows, tuple(cols))


def fault_output_map(net: BooleanControlNetwork, controller: FeedbackLaw | None) -> dict[tuple[int, int], tuple[int, ...]]:
    """Per (state, disturbance): the next output for each fault value."""
    table = {}
    for x in range(1, net.num_states + 1):
        u = 1 if controller is None else controller.input_for(net, x)
        for dist in range(1, 2 ** net.d + 1):
            table[(x, dist)] = tuple(
                _row_output(net, net.next_row(u, x, net.tail_index(dist, f)))
                for f in range(1, 2 ** net.t + 1)
            )
    return table


def _divisions(net: BooleanControlNetwork, u: int, x: int) -> list[tuple[int, ...]]:
    """Next outputs of state ``x`` under ``u``: one tuple over faults per disturbance value."""
    return [
        tuple(_row_output(net, net.next_row(u, x, net.tail_index(dist, f))) for f in range(1, 2 ** net.t + 1))
        for dist in range(1, 2 ** net.d + 1)
    ]


def _fault_sets(net: BooleanControlNetwork) -> tuple[dict[int, tuple[int, ...]], dict[int, str]]:
    C, why = {}, {}
    for x in range(1, net.num_states + 1):
        ok = []
        for u in range(1, net.num_inputs + 1):
            divisions = _divisions(net, u, x)
            identical = all(div == divisions[0] for div in divisions)
            distinct = len(set(divisions[0])) == len(divisions[0])
            if identical and distinct:
                ok.append(u)
        C[x] = tuple(ok)
        if not ok:
            why[x] = "no input separates every fault value in the next output" + (
                " independently of the disturbance" if net.d else "")
    return C, why


def ifd_synthesize(net: BooleanControlNetwork) -> SynthesisResult:
    """Inputs per state under which each fault value yields its own next output."""
    if net.t < 1:
        raise DimensionMismatch("fault detection needs at least one fault variable")
    if net.d:
        raise DimensionMismatch("network has disturbances; use dd_ifd_synthesize")
    return _synthesize(net)


def dd_ifd_synthesize(net: BooleanControlNetwork) -> SynthesisResult:
    """Like :func:`ifd_synthesize`, and the disturbance may not change the next output."""
    return _synthesize(net)


def _synthesize(net: BooleanControlNetwork) -> SynthesisResult:
    C, why = _fault_sets(net)
    cands = ControlCandidateSets(C, "state", net.num_inputs)
    return SynthesisResult(cands.complete, cands, cands.sample(), why,
                           extra={"fault_output_invertible": cands.complete})


@dataclass
class FaultVerdict:
    holds: bool
    witness: dict | None = None

    def as_dict(self) -> dict:
        return {"holds": self.holds, "witness": self.witness}


def verify_fault_detection(net: BooleanControlNetwork, controller: FeedbackLaw | None,
                           mode: str = "stateKnown", fault_free: int = FAULT_FREE) -> FaultVerdict:
    """Exhaustive scan over every (state, disturbance, fault) tuple."""
    if controller is not None:
        controller.check(net)
    table = fault_output_map(net, controller)
    if mode == "stateKnown":
        for x in range(1, net.num_states + 1):
            reference = table[(x, 1)]
            for dist in range(1, 2 ** net.d + 1):
                outs = table[(x, dist)]
                for f, out in enumerate(outs, start=1):
                    if out != reference[f - 1]:
                        return FaultVerdict(False, {"state": x, "fault": f, "disturbances": [1, dist]})
                for f1 in range(len(outs)):
                    for f2 in range(f1 + 1, len(outs)):
                        if outs[f1] == outs[f2]:
                            return FaultVerdict(False, {"state": x, "disturbance": dist,
                                                        "faults": [f1 + 1, f2 + 1], "output": outs[f1]})
        return FaultVerdict(True)
    if mode == "outputOnly":
        if net.H is None:
            H = LogicalMatrix(net.num_outputs, tuple(net.substate_of(x) for x in range(1, net.num_states + 1)))
        else:
            H = net.H
        loop = fault_free_loop(net, controller, fault_free)
        if net.is_subsystem:
            raise DimensionMismatch("output-only detection needs the full-state matrix")
        impossible = impossible_output_sets(loop, H)
        for (x, dist), outs in sorted(table.items()):
            here = net.output_of_state(x)
            for f, out in enumerate(outs, start=1):
                if f != fault_free and out not in impossible[here]:
                    return FaultVerdict(False, {"state": x, "disturbance": dist, "fault": f,
                                                "output": out, "current_output": here})
        return FaultVerdict(True)
    raise ValueError(f"unknown mode {mode!r}")


# -- observer -------------------------------------------------------------------

@dataclass(frozen=True)
class ObserverState:
    step: int
    possible: frozenset[int]
    last_input: int | None
    fault_flag: bool = False

    @property
    def reconstructed(self) -> bool:
        return len(self.possible) == 1 and not self.fault_flag

    def as_dict(self) -> dict:
        return {"step": self.step, "possible": sorted(self.possible), "input": self.last_input,
                "reconstructed": self.reconstructed, "fault": self.fault_flag}


def predicted_states(net: BooleanControlNetwork, possible: frozenset[int], u: int,
                     fault_free: int = FAULT_FREE) -> frozenset[int]:
    """Fault-free successors of a set of states under input ``u``, over all disturbances."""
    return frozenset(
        net.next_row(u, x, net.tail_index(dist, fault_free))
        for x in possible for dist in range(1, 2 ** net.d + 1)
    )


def best_input(net: BooleanControlNetwork, possible: frozenset[int], fault_free: int = FAULT_FREE) -> int:
    """Input minimizing the largest possible-set that any next output could leave behind."""
    groups = net.output_sets()

    def worst(u: int) -> int:
        succ = predicted_states(net, possible, u, fault_free)
        return max(len(succ & g) for g in groups)

    return min(range(1, net.num_inputs + 1), key=lambda u: (worst(u), u))


def observer_run(net: BooleanControlNetwork, observed_outputs: Sequence[int],
                 applied_inputs: Sequence[int | None] | None = None,
                 policy: FeedbackLaw | str | None = None,
                 fault_free: int = FAULT_FREE) -> list[ObserverState]:
    """Track the set of states consistent with the observed outputs.

    Inputs come from ``applied_inputs``, from an output-feedback ``policy`` or,
    with ``policy="auto"``, from :func:`best_input`. A recorded input that
    disagrees with the policy raises :class:`InconsistentTrace`. The run stops at
    the first observation no fault-free state can explain.
    """
    if net.is_subsystem:
        raise DimensionMismatch("the observer needs the full-state matrix")
    if not observed_outputs:
        raise ValueError("need at least one observation")
    groups = net.output_sets()
    possible = groups[observed_outputs[0] - 1]
    trace = [ObserverState(0, possible, None, fault_flag=not possible)]
    if not possible:
        return trace
    for k, y_next in enumerate(observed_outputs[1:]):
        recorded = None
        if applied_inputs is not None and k < len(applied_inputs):
            recorded = applied_inputs[k]
        if policy == "auto":
            u = best_input(net, possible, fault_free)
        elif isinstance(policy, FeedbackLaw):
            u = policy.M.cols[observed_outputs[k] - 1] if policy.kind == "output" else policy.M.cols[0]
        elif net.m == 0:
            u = 1
        else:
            u = None
        if recorded is not None:
            if u is not None and recorded != u:
                raise InconsistentTrace(f"step {k}: recorded input {recorded} but the policy picks {u}")
            u = recorded
        if u is None:
            raise InconsistentTrace(f"step {k}: no input recorded and no policy given")
        nxt = predicted_states(net, possible, u, fault_free) & groups[y_next - 1]
        if not nxt:
            trace.append(ObserverState(k + 1, possible, u, fault_flag=True))
            break
        possible = nxt
        trace.append(ObserverState(k + 1, possible, u))
    return trace
