"""Clean, definite and indefinite reachability, and the layered invariant-set decomposition."""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .candidates import ControlCandidateSets
from .errors import IndexOutOfRange, Unclassifiable
from .network import BooleanControlNetwork


def clean_reach(net: BooleanControlNetwork, b: int, a: int) -> tuple[bool, tuple[int, ...]]:
    """Whether substate ``b`` moves to ``a`` with certainty in one step, and the inputs that do it."""
    for k in (a, b):
        if not 1 <= k <= net.num_substates:
            raise IndexOutOfRange(f"substate {k} outside [1, {net.num_substates}]")
    inputs = tuple(u for u in range(1, net.num_inputs + 1) if net.successors(b, u) == {a})
    return bool(inputs), inputs


def clean_reach_output(net: BooleanControlNetwork, b: int, target: int) -> tuple[int, ...]:
    """Inputs under which every successor of substate ``b`` has output ``target``."""
    return tuple(u for u in range(1, net.num_inputs + 1) if net.successor_outputs(b, u) == {target})


@dataclass
class ReachabilityGraph:
    kind: str  # "definite" or "indefinite"
    vertex_mode: str  # "substates" or "outputSets"
    vertices: tuple[int, ...]
    edges: dict[tuple[int, int], frozenset[int]]
    # for output-set graphs: per edge, the inputs each member of the source group may use
    member_inputs: dict[tuple[int, int], dict[int, frozenset[int]]] = field(default_factory=dict)

    def label(self, v: int) -> str:
        return f"X_{v}" if self.vertex_mode == "substates" else f"O_S{v}"

    def successors(self, v: int) -> list[int]:
        return sorted(b for (a, b) in self.edges if a == v)


def build_reachability_graph(net: BooleanControlNetwork, kind: str = "definite",
                             vertex_mode: str = "substates") -> ReachabilityGraph:
    if kind not in ("definite", "indefinite"):
        raise ValueError(f"unknown graph kind {kind!r}")
    edges: dict[tuple[int, int], set[int]] = {}
    members: dict[tuple[int, int], dict[int, frozenset[int]]] = {}
    if vertex_mode == "substates":
        vertices = tuple(range(1, net.num_substates + 1))
        for a in vertices:
            for u in range(1, net.num_inputs + 1):
                succ = net.successors(a, u)
                if kind == "definite" and len(succ) != 1:
                    continue
                for b in succ:
                    edges.setdefault((a, b), set()).add(u)
    elif vertex_mode == "outputSets":
        groups = net.substate_output_sets()
        vertices = tuple(j for j, g in enumerate(groups, start=1) if g)
        for i in vertices:
            for j in vertices:
                per_member = {}
                for k in sorted(groups[i - 1]):
                    if kind == "definite":
                        ok = [u for u in range(1, net.num_inputs + 1) if net.successor_outputs(k, u) == {j}]
                    else:
                        ok = [u for u in range(1, net.num_inputs + 1) if j in net.successor_outputs(k, u)]
                    if not ok:
                        break
                    per_member[k] = frozenset(ok)
                else:
                    edges[(i, j)] = set().union(*per_member.values())
                    members[(i, j)] = per_member
    else:
        raise ValueError(f"unknown vertex mode {vertex_mode!r}")
    frozen = {e: frozenset(v) for e, v in sorted(edges.items())}
    return ReachabilityGraph(kind, vertex_mode, vertices, frozen, members)


def reach_query(g: ReachabilityGraph, src: int, dst: int) -> tuple[bool, list[int]]:
    """Directed path of length at least one from ``src`` to ``dst`` (shortest, smallest ids first)."""
    adjacency = {v: g.successors(v) for v in g.vertices}
    parent: dict[int, int] = {}
    queue = deque()
    for nxt in adjacency.get(src, []):
        if nxt not in parent:
            parent[nxt] = src
            queue.append(nxt)
    while queue:
        v = queue.popleft()
        if v == dst:
            path = [v]
            while True:
                prev = parent[path[-1]]
                path.append(prev)
                if prev == src and len(path) > 1:
                    break
            return True, path[::-1]
        for nxt in adjacency.get(v, []):
            if nxt not in parent:
                parent[nxt] = v
                queue.append(nxt)
    return False, []


def distances_to(g: ReachabilityGraph, target: int) -> dict[int, int]:
    """Length of the shortest non-empty path from each vertex to ``target``."""
    reverse: dict[int, list[int]] = {v: [] for v in g.vertices}
    for (a, b) in g.edges:
        reverse[b].append(a)
    dist: dict[int, int] = {}
    queue = deque()
    for a in sorted(reverse.get(target, [])):
        dist[a] = 1
        queue.append(a)
    while queue:
        v = queue.popleft()
        for a in sorted(reverse[v]):
            if a not in dist:
                dist[a] = dist[v] + 1
                queue.append(a)
    return dist


@dataclass
class DecompositionLayers:
    layers: tuple[frozenset[int], ...]
    remainder: frozenset[int]
    witness: dict[int, frozenset[int]]

    def layer_of(self, k: int) -> int | None:
        for i, layer in enumerate(self.layers, start=1):
            if k in layer:
                return i
        return None

    def as_dict(self) -> dict:
        return {
            "layers": [sorted(layer) for layer in self.layers],
            "remainder": sorted(self.remainder),
            "witness": {str(k): sorted(v) for k, v in sorted(self.witness.items())},
        }


def _clean_graph(net: BooleanControlNetwork) -> dict[int, set[int]]:
    graph: dict[int, set[int]] = {k: set() for k in range(1, net.num_substates + 1)}
    for k in graph:
        for u in range(1, net.num_inputs + 1):
            succ = net.successors(k, u)
            if len(succ) == 1:
                graph[k] |= succ
    return graph


def recurrent_substates(net: BooleanControlNetwork) -> frozenset[int]:
    """Substates lying on a cycle of certain one-step moves.

    From these the trajectory can be kept, disturbance-free, inside the set forever.
    """
    graph = _clean_graph(net)
    on_cycle = set()
    for v in graph:
        seen = set()
        stack = list(graph[v])
        while stack:
            w = stack.pop()
            if w == v:
                on_cycle.add(v)
                break
            if w not in seen:
                seen.add(w)
                stack.extend(graph[w])
    return frozenset(on_cycle)


def invariant_set_decomposition(net: BooleanControlNetwork) -> DecompositionLayers:
    """Layers S_1, S_2, ... of substates ordered by how many steps they need to settle.

    S_1 holds the substates on cycles of certain moves; each later layer holds the
    substates with an input whose whole successor set falls in earlier layers.
    """
    inputs = range(1, net.num_inputs + 1)
    first = recurrent_substates(net)
    witness: dict[int, frozenset[int]] = {}
    for k in first:
        witness[k] = frozenset(u for u in inputs
                               if len(net.successors(k, u)) == 1 and net.successors(k, u) <= first)
    layers = [first] if first else []
    settled = set(first)
    remaining = set(range(1, net.num_substates + 1)) - settled
    while layers and remaining:
        layer = set()
        for k in sorted(remaining):
            ok = frozenset(u for u in inputs if net.successors(k, u) <= settled)
            if ok:
                layer.add(k)
                witness[k] = ok
        if not layer:
            break
        layers.append(frozenset(layer))
        settled |= layer
        remaining -= layer
    return DecompositionLayers(tuple(layers), frozenset(remaining), dict(sorted(witness.items())))


def decomposition_controllers(net: BooleanControlNetwork, layers: DecompositionLayers,
                              strict: bool = False) -> ControlCandidateSets:
    """Admissible inputs per substate for settling into S_1.

    For later layers an input must send every successor into earlier layers.
    For S_1 the default admits every input with a single certain successor
    (the rank-one sub-block rule); ``strict=True`` also demands that successor
    lie in S_1, which is what keeps closed-loop runs inside S_1.
    """
    if layers.remainder:
        raise Unclassifiable(layers.remainder)
    inputs = range(1, net.num_inputs + 1)
    C: dict[int, tuple[int, ...]] = {}
    earlier: set[int] = set()
    for index, layer in enumerate(layers.layers):
        for k in sorted(layer):
            if index == 0:
                C[k] = tuple(u for u in inputs if len(net.successors(k, u)) == 1
                             and (not strict or net.successors(k, u) <= layer))
            else:
                C[k] = tuple(u for u in inputs if net.successors(k, u) <= earlier)
        earlier |= layer
    return ControlCandidateSets(dict(sorted(C.items())), "substate", net.num_inputs, net.completions)
