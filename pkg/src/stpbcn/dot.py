"""Graphviz DOT rendering of reachability graphs, state graphs and decomposition layers."""

from __future__ import annotations

from .network import BooleanControlNetwork, BooleanNetwork
from .reachability import DecompositionLayers, ReachabilityGraph


def _quote(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _render(name: str, attrs: dict[str, str], nodes: list[str],
            edges: list[tuple[str, str, str | None]]) -> str:
    lines = [f"digraph {_quote(name)} {{"]
    for key, value in sorted(attrs.items()):
        lines.append(f"  {key}={_quote(value)};")
    for node in nodes:
        lines.append(f"  {_quote(node)};")
    for a, b, label in edges:
        suffix = f" [label={_quote(label)}]" if label else ""
        lines.append(f"  {_quote(a)} -> {_quote(b)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def _inputs_label(inputs) -> str:
    return "u=" + ",".join(str(u) for u in sorted(inputs))


def reachability_dot(g: ReachabilityGraph) -> str:
    nodes = [g.label(v) for v in g.vertices]
    edges = [(g.label(a), g.label(b), _inputs_label(us)) for (a, b), us in sorted(g.edges.items())]
    return _render("reachability", {"flavor": g.kind, "vertices": g.vertex_mode}, nodes, edges)


def state_graph_dot(net: BooleanNetwork | BooleanControlNetwork) -> str:
    """Transition graph of the states; edges are merged over inputs and tails."""
    if isinstance(net, BooleanNetwork):
        tails = 2 ** net.tail_bits
        moves = {(x, net.step(x, j)): None for x in range(1, net.num_states + 1) for j in range(1, tails + 1)}
        flavor = "autonomous"
    else:
        found: dict[tuple[int, int], set[int]] = {}
        for x in range(1, net.num_states + 1):
            for u in range(1, net.num_inputs + 1):
                for j in range(1, net.tail_size + 1):
                    found.setdefault((x, net.next_row(u, x, j)), set()).add(u)
        moves = {e: (_inputs_label(us) if net.m else None) for e, us in found.items()}
        flavor = "subsystem" if net.is_subsystem else "control"
    sources = range(1, net.num_states + 1)
    targets = range(1, net.L.rows + 1)
    nodes = sorted({f"x{x}" for x in sources} | {f"x{x}" for x in targets}, key=lambda s: int(s[1:]))
    edges = [(f"x{a}", f"x{b}", label) for (a, b), label in sorted(moves.items())]
    return _render("states", {"flavor": flavor}, nodes, edges)


def layers_dot(layers: DecompositionLayers) -> str:
    """Chain S_{i+1} -> S_i with a self-loop on S_1."""
    names = [f"S_{i}" for i in range(1, len(layers.layers) + 1)]
    nodes = names + (["S_rs"] if layers.remainder else [])
    edges: list[tuple[str, str, str | None]] = []
    if names:
        edges.append((names[0], names[0], None))
    for i in range(1, len(names)):
        edges.append((names[i], names[i - 1], None))
    attrs = {"flavor": "decomposition"}
    for name, layer in zip(names, layers.layers):
        attrs[f"members_{name}"] = ",".join(str(k) for k in sorted(layer))
    if layers.remainder:
        attrs["members_S_rs"] = ",".join(str(k) for k in sorted(layers.remainder))
    return _render("layers", attrs, nodes, edges)


def export_dot(obj) -> str:
    if isinstance(obj, ReachabilityGraph):
        return reachability_dot(obj)
    if isinstance(obj, DecompositionLayers):
        return layers_dot(obj)
    if isinstance(obj, (BooleanNetwork, BooleanControlNetwork)):
        return state_graph_dot(obj)
    raise TypeError(f"cannot render {type(obj).__name__} as DOT")
