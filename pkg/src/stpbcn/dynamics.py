"""Closed-loop composition, simulation, matrix powers and attractors."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .errors import DimensionMismatch
from .network import BooleanControlNetwork, BooleanNetwork
from .stp import LogicalMatrix, log2_exact


@dataclass(frozen=True)
class FeedbackLaw:
    """u = M x (state), u = M y (output) or a constant input (pinning)."""

    kind: str
    M: LogicalMatrix

    def __post_init__(self):
        if self.kind not in ("state", "output", "pinning"):
            raise ValueError(f"unknown feedback kind {self.kind!r}")
        if self.kind == "pinning" and self.M.ncols != 1:
            raise DimensionMismatch("a pinning law has a single column")

    @classmethod
    def state(cls, rows: int, cols: Sequence[int]) -> "FeedbackLaw":
        return cls("state", LogicalMatrix(rows, tuple(cols)))

    @classmethod
    def output(cls, rows: int, cols: Sequence[int]) -> "FeedbackLaw":
        return cls("output", LogicalMatrix(rows, tuple(cols)))

    @classmethod
    def pinning(cls, rows: int, u: int) -> "FeedbackLaw":
        return cls("pinning", LogicalMatrix(rows, (u,)))

    def input_for(self, net: BooleanControlNetwork, x: int) -> int:
        if self.kind == "state":
            return self.M.cols[x - 1]
        if self.kind == "output":
            return self.M.cols[net.output_of_state(x) - 1]
        return self.M.cols[0]

    def check(self, net: BooleanControlNetwork) -> None:
        if self.M.rows != net.num_inputs:
            raise DimensionMismatch(f"feedback has {self.M.rows} rows, network has {net.num_inputs} inputs")
        expected = {"state": net.num_states, "output": net.num_outputs, "pinning": 1}[self.kind]
        if self.kind == "output" and net.H is None:
            raise DimensionMismatch("output feedback needs an output matrix H")
        if self.M.ncols != expected:
            raise DimensionMismatch(f"{self.kind} feedback needs {expected} columns, got {self.M.ncols}")

    def __str__(self) -> str:
        return str(self.M)


def expand_substate_law(net: BooleanControlNetwork, per_substate: Sequence[int]) -> FeedbackLaw:
    """State feedback that applies one input per substate to all its completions."""
    if len(per_substate) != net.num_substates:
        raise DimensionMismatch("need one input per substate")
    cols = [u for u in per_substate for _ in range(net.completions)]
    return FeedbackLaw.state(net.num_inputs, cols)


def apply_feedback(net: BooleanControlNetwork, law: FeedbackLaw) -> LogicalMatrix:
    """Closed-loop matrix over (x, tail): picks, per state, the column block of its input."""
    law.check(net)
    tail = net.tail_size
    cols = []
    for x in range(1, net.num_states + 1):
        u = law.input_for(net, x)
        start = net.column_index(u, x, 1) - 1
        cols.extend(net.L.cols[start:start + tail])
    return LogicalMatrix(net.L.rows, tuple(cols))


def apply_state_feedback(net: BooleanControlNetwork, M_x: FeedbackLaw | LogicalMatrix) -> LogicalMatrix:
    law = M_x if isinstance(M_x, FeedbackLaw) else FeedbackLaw("state", M_x)
    if law.kind != "state":
        raise DimensionMismatch("expected a state feedback law")
    if law.M.ncols == net.num_substates and net.completions > 1:
        law = expand_substate_law(net, law.M.cols)
    return apply_feedback(net, law)


def apply_output_feedback(net: BooleanControlNetwork, M_y: FeedbackLaw | LogicalMatrix) -> LogicalMatrix:
    law = M_y if isinstance(M_y, FeedbackLaw) else FeedbackLaw("output", M_y)
    if law.kind != "output":
        raise DimensionMismatch("expected an output feedback law")
    return apply_feedback(net, law)


def closed_loop_network(net: BooleanControlNetwork, law: FeedbackLaw) -> BooleanControlNetwork:
    """The closed loop as an input-free network (m = 0) with the same outputs."""
    return BooleanControlNetwork(
        n=net.n, L=apply_feedback(net, law), m=0, d=net.d, t=net.t, H=net.H, s=net.s,
        order=net.order, name=net.name,
    )


@dataclass
class Trajectory:
    states: list[int]
    outputs: list[int]
    inputs: list[int] = field(default_factory=list)
    disturbances: list[int] = field(default_factory=list)
    faults: list[int] = field(default_factory=list)


def simulate(net: BooleanControlNetwork, x0: int, horizon: int,
             inputs: Sequence[int] | None = None, feedback: FeedbackLaw | None = None,
             disturbances: Sequence[int] | None = None,
             faults: Sequence[int] | None = None) -> Trajectory:
    """Run ``horizon`` steps from ``x0``.

    Inputs come from ``inputs`` or ``feedback`` (exactly one when m > 0);
    disturbance and fault sequences default to index 1 only when the
    corresponding dimension is zero.
    """
    if net.is_subsystem:
        raise DimensionMismatch("cannot simulate a subsystem matrix: the remaining state is not modelled")
    if not 1 <= x0 <= net.num_states:
        raise DimensionMismatch(f"x0={x0} outside [1, {net.num_states}]")

    def sequence(values, dim, label):
        if values is None:
            if dim and horizon:
                raise DimensionMismatch(f"a {label} sequence of length {horizon} is required")
            return [1] * horizon
        if len(values) < horizon:
            raise DimensionMismatch(f"{label} sequence shorter than the horizon")
        return list(values[:horizon])

    dist = sequence(disturbances, net.d, "disturbance")
    flt = sequence(faults, net.t, "fault")
    if feedback is not None:
        feedback.check(net)
    elif inputs is None and net.m == 0:
        inputs = [1] * horizon
    elif inputs is None:
        raise DimensionMismatch("either inputs or a feedback law is required")
    elif len(inputs) < horizon:
        raise DimensionMismatch("input sequence shorter than the horizon")

    states = [x0]
    used_inputs = []
    for k in range(horizon):
        x = states[-1]
        u = feedback.input_for(net, x) if feedback is not None else inputs[k]
        used_inputs.append(u)
        states.append(net.next_row(u, x, net.tail_index(dist[k], flt[k])))
    outputs = [net.output_of_state(x) for x in states]
    return Trajectory(states, outputs, used_inputs, dist, flt)


def closed_loop_power(Ltilde: LogicalMatrix, k: int) -> LogicalMatrix:
    """(L̃)^k over x_0 and the tail word ξ_0 … ξ_{k-1} (ξ_0 most significant)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    states = Ltilde.rows
    if Ltilde.ncols % states:
        raise DimensionMismatch("columns must be rows times a tail size")
    tail = Ltilde.ncols // states
    log2_exact(tail)
    current = list(range(1, states + 1))  # one entry per (x0, word) prefix
    for _ in range(k):
        current = [Ltilde.cols[(x - 1) * tail + j] for x in current for j in range(tail)]
    return LogicalMatrix(states, tuple(current))


@dataclass(frozen=True)
class AttractorReport:
    attractors: tuple[tuple[int, ...], ...]
    basin: dict[int, int]
    distance: dict[int, int]

    def attractor_of(self, x: int) -> tuple[int, ...]:
        return self.attractors[self.basin[x] - 1]


def attractors(bn: BooleanNetwork | LogicalMatrix) -> AttractorReport:
    """Cycles of the state map, their basins (1-based ids) and entry distances."""
    L = bn.L if isinstance(bn, BooleanNetwork) else bn
    if isinstance(bn, BooleanNetwork) and bn.tail_bits:
        raise DimensionMismatch("attractors need a network without a tail")
    size = L.rows
    if L.ncols != size:
        raise DimensionMismatch("attractors need a square state map")
    step = L.cols

    on_cycle: dict[int, tuple[int, ...]] = {}
    color = [0] * (size + 1)  # 0 new, 1 on the current walk, 2 done
    for start in range(1, size + 1):
        walk = []
        x = start
        while color[x] == 0:
            color[x] = 1
            walk.append(x)
            x = step[x - 1]
        if color[x] == 1:
            cycle = walk[walk.index(x):]
            pivot = cycle.index(min(cycle))
            canon = tuple(cycle[pivot:] + cycle[:pivot])
            for y in cycle:
                on_cycle[y] = canon
        for y in walk:
            color[y] = 2

    cycles = sorted(set(on_cycle.values()), key=lambda c: c[0])
    ids = {c: i for i, c in enumerate(cycles, start=1)}
    basin: dict[int, int] = {}
    distance: dict[int, int] = {}
    for x in on_cycle:
        basin[x] = ids[on_cycle[x]]
        distance[x] = 0

    def resolve(x: int) -> None:
        path = []
        while x not in basin:
            path.append(x)
            x = step[x - 1]
        for y in reversed(path):
            nxt = step[y - 1]
            basin[y] = basin[nxt]
            distance[y] = distance[nxt] + 1

    for x in range(1, size + 1):
        resolve(x)
    return AttractorReport(tuple(cycles), dict(sorted(basin.items())), dict(sorted(distance.items())))
