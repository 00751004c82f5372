"""Command-line front end: ``bcn <subcommand> [options] <network-file>``.

Every subcommand is a thin dispatch to one library call. Reports are plain text
by default and a deterministic JSON document with ``--json``. Exit codes: 0 for
success or a positive verdict, 1 for infeasible or negative verdicts, 2 for
usage and input errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Sequence

from . import combinatorics, decoupling, faults
from .dot import export_dot
from .dynamics import FeedbackLaw, attractors, closed_loop_network, expand_substate_law, simulate
from .equivalence import (
    CRITERIA,
    DISTURBANCE_MODES,
    REGIMES,
    EquivalenceQuery,
    check_equivalence,
    search_equivalence_feedback,
)
from .errors import BCNError
from .netfile import fingerprint, load_network
from .network import BooleanControlNetwork, BooleanNetwork
from .reachability import build_reachability_graph, invariant_set_decomposition, reach_query
from .stp import parse_delta


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


# -- helpers --------------------------------------------------------------------

def _ints(text: str | None) -> list[int] | None:
    if text is None:
        return None
    return [int(v) for v in text.replace(",", " ").split()]


def _controller(net: BooleanControlNetwork, args, required: bool = False) -> FeedbackLaw | None:
    text = getattr(args, "controller", None)
    if text is None:
        if required and net.m:
            raise UsageError("--controller is required")
        return None
    M = parse_delta(text, rows=net.num_inputs)
    kind = args.controller_kind
    if kind == "state" and M.ncols == net.num_substates and net.completions > 1:
        law = expand_substate_law(net, M.cols)
    else:
        law = FeedbackLaw(kind, M)
    law.check(net)
    return law


def _as_bn(net: BooleanControlNetwork) -> BooleanNetwork:
    if net.m or net.is_subsystem:
        raise UsageError("expected an input-free full-state network")
    return BooleanNetwork(net.n, net.L, net.d + net.t)


def _law_list(laws) -> list[list[int]]:
    return [list(law.M.cols) for law in laws]


def _autonomous(net: BooleanControlNetwork, args) -> BooleanControlNetwork:
    law = _controller(net, args)
    if law is not None:
        return closed_loop_network(net, law)
    if net.m:
        raise UsageError("the network has inputs; pass --controller to close the loop")
    return net


# -- subcommands ----------------------------------------------------------------
# each returns (exit code, payload)

def cmd_info(net, args):
    return 0, {
        "states": net.num_states, "inputs": net.num_inputs, "outputs": net.num_outputs,
        "substates": net.num_substates, "subsystem": net.is_subsystem,
        "signal_order": list(net.order),
        "output_sets": [sorted(g) for g in net.output_sets()],
    }


def cmd_attractors(net, args):
    closed = _autonomous(net, args)
    if closed.tail_size > 1:
        raise UsageError("attractors need a network without disturbances or faults")
    rep = attractors(_as_bn(closed))
    return 0, {
        "attractors": [list(c) for c in rep.attractors],
        "basin": {str(x): b for x, b in rep.basin.items()},
        "distance": {str(x): k for x, k in rep.distance.items()},
    }


def cmd_simulate(net, args):
    if args.horizon is None:
        raise UsageError("--horizon is required")
    traj = simulate(net, args.x0, args.horizon, inputs=_ints(args.inputs), feedback=_controller(net, args),
                    disturbances=_ints(args.disturbances), faults=_ints(args.faults))
    return 0, {"states": traj.states, "outputs": traj.outputs, "inputs": traj.inputs,
               "disturbances": traj.disturbances, "faults": traj.faults}


def cmd_equiv(net, args):
    bn = _as_bn(load_network(args.bn))
    if args.search:
        laws = search_equivalence_feedback(bn, net, args.criterion, kind=args.search,
                                           disturbance_mode=args.disturbance_mode, budget=args.budget)
        return (0 if laws else 1), {"criterion": args.criterion, "laws": _law_list(laws)}
    law = _controller(net, args)
    q = EquivalenceQuery(args.criterion, args.regime, law, args.disturbance_mode)
    rep = check_equivalence(bn, net, q)
    witness = None
    if rep.witness is not None:
        witness = {"state": rep.witness[0], "input": rep.witness[1], "step": rep.witness[2]}
    return (0 if rep.verdict else 1), {"criterion": args.criterion, "regime": args.regime,
                                        "verdict": rep.verdict, "witness": witness, "details": rep.details}


def cmd_reach(net, args):
    g = build_reachability_graph(net, args.kind, args.vertices)
    payload = {
        "kind": g.kind, "vertices": [g.label(v) for v in g.vertices],
        "edges": [{"from": g.label(a), "to": g.label(b), "inputs": sorted(us)} for (a, b), us in g.edges.items()],
    }
    code = 0
    if args.source is not None or args.dest is not None:
        if args.source is None or args.dest is None:
            raise UsageError("--from and --to go together")
        ok, path = reach_query(g, args.source, args.dest)
        payload["query"] = {"from": args.source, "to": args.dest, "reachable": ok,
                            "path": [g.label(v) for v in path]}
        code = 0 if ok else 1
    return code, payload


def cmd_dd_check(net, args):
    closed = _autonomous(net, args)
    if args.baseline:
        rep = decoupling.rank_condition_dd(closed)
        return (0 if rep.verdict else 1), {
            "condition": "rank", "verdict": rep.verdict,
            "inputs_per_substate": {str(k): list(v) for k, v in sorted(rep.per_substate.items())},
        }
    verdict = decoupling.dd_output_equation_check(closed)
    return (0 if verdict else 1), {"condition": "output_eq", "verdict": verdict}


def cmd_dd_synth(net, args):
    if args.output_feedback:
        laws = decoupling.dd_output_feedback_synthesize(net, args.output_feedback, budget=args.budget)
        return (0 if laws else 1), {"condition": args.output_feedback, "laws": _law_list(laws)}
    res = decoupling.dd_synthesize(net, args.mode, args.target, strict=args.strict)
    return (0 if res.feasible else 1), {"mode": args.mode, **res.as_dict()}


def cmd_stabilize(net, args):
    if args.behaviour is not None:
        target = parse_delta(args.behaviour, rows=net.num_states)
    elif args.target_set is not None:
        target = _ints(args.target_set)
    elif args.target is not None:
        target = args.target
    else:
        raise UsageError("one of --target, --target-set or --behaviour is required")
    laws = decoupling.stabilization_synthesize(net, target, budget=args.budget)
    return (0 if laws else 1), {"feasible": bool(laws), "laws": _law_list(laws)}


def cmd_ifd_synth(net, args):
    res = faults.ifd_synthesize(net)
    return (0 if res.feasible else 1), res.as_dict()


def cmd_ddifd_synth(net, args):
    res = faults.dd_ifd_synthesize(net)
    return (0 if res.feasible else 1), res.as_dict()


def cmd_verify(net, args):
    law = _controller(net, args, required=True)
    if args.property == "dd":
        if args.horizon is None:
            raise UsageError("--horizon is required")
        verdict = decoupling.verify_dd(net, law, args.horizon, args.mode, args.target, budget=args.budget)
        code = 0 if verdict.holds in (True, None) else 1
        return code, {"property": "dd", "mode": args.mode, **verdict.as_dict()}
    verdict = faults.verify_fault_detection(net, law, args.fault_mode)
    return (0 if verdict.holds else 1), {"property": "fault", "mode": args.fault_mode, **verdict.as_dict()}


def _read_log(path: str) -> tuple[list[int], list[int | None]]:
    outputs, inputs = [], []
    for number, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise UsageError(f"{path}:{number}: expected 'step input output'")
        step, u, y = parts
        if int(step) != len(outputs):
            raise UsageError(f"{path}:{number}: step {step} out of sequence")
        inputs.append(None if u == "-" else int(u))
        outputs.append(int(y))
    return outputs, inputs


def cmd_observe(net, args):
    if args.log is None:
        raise UsageError("--log is required")
    outputs, inputs = _read_log(args.log)
    policy = "auto" if args.policy == "auto" else _controller(net, args)
    trace = faults.observer_run(net, outputs, inputs, policy=policy)
    last = trace[-1]
    return (1 if last.fault_flag else 0), {
        "trace": [s.as_dict() for s in trace],
        "reconstructed": last.reconstructed, "fault": last.fault_flag,
    }


def cmd_count(args):
    rep = combinatorics.count_structures(args.sc, args.sr)
    payload = rep.as_dict()
    if args.brute:
        payload["brute_force"] = combinatorics.brute_force_structure_count(args.sc, args.sr)
    return 0, payload


def cmd_export_dot(net, args):
    if args.graph == "states":
        return 0, export_dot(net)
    if args.graph == "layers":
        return 0, export_dot(invariant_set_decomposition(net))
    return 0, export_dot(build_reachability_graph(net, args.kind, args.vertices))


# -- parser ---------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--json", action="store_true", help="emit the structured JSON report")
    common.add_argument("--out", help="write the report to FILE instead of stdout")
    common.add_argument("--budget", type=int, default=2 ** 22, help="enumeration budget")

    def with_net(p):
        p.add_argument("network", help="network file (JSON)")
        return p

    def with_controller(p):
        p.add_argument("--controller", help="feedback matrix, e.g. 'δ_4[1 3 3 4]'")
        p.add_argument("--controller-kind", choices=("state", "output", "pinning"), default="state")
        return p

    parser = _Parser(prog="bcn", description="Boolean control network analysis and synthesis")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    with_net(sub.add_parser("info", parents=[common]))
    with_controller(with_net(sub.add_parser("attractors", parents=[common])))

    p = with_controller(with_net(sub.add_parser("simulate", parents=[common])))
    p.add_argument("--x0", type=int, required=True)
    p.add_argument("--horizon", type=int)
    p.add_argument("--inputs")
    p.add_argument("--disturbances")
    p.add_argument("--faults")

    p = with_controller(with_net(sub.add_parser("equiv", parents=[common])))
    p.add_argument("--bn", required=True, help="input-free network file to compare against")
    p.add_argument("--criterion", choices=CRITERIA, required=True)
    p.add_argument("--regime", choices=REGIMES, default="allInputs")
    p.add_argument("--disturbance-mode", choices=DISTURBANCE_MODES, default="none")
    p.add_argument("--search", choices=("state", "output"), help="search all feedback laws of this kind")

    p = with_net(sub.add_parser("reach", parents=[common]))
    p.add_argument("--kind", choices=("definite", "indefinite"), default="definite")
    p.add_argument("--vertices", choices=("substates", "outputSets"), default="substates")
    p.add_argument("--from", dest="source", type=int)
    p.add_argument("--to", dest="dest", type=int)

    dd = sub.add_parser("dd").add_subparsers(dest="action", required=True, parser_class=_Parser)
    p = with_controller(with_net(dd.add_parser("check", parents=[common])))
    group = p.add_mutually_exclusive_group()
    group.add_argument("--baseline", action="store_true", help="block-rank condition")
    group.add_argument("--output-eq", action="store_true", help="output-equation condition (default)")
    p = with_net(dd.add_parser("synth", parents=[common]))
    p.add_argument("--mode", choices=decoupling.DD_MODES, default="mapping")
    p.add_argument("--target", type=int)
    p.add_argument("--strict", action="store_true", help="keep S_1 inputs inside S_1")
    p.add_argument("--output-feedback", choices=("output_eq", "rank"),
                   help="enumerate output feedback laws instead of state feedback sets")

    p = with_net(sub.add_parser("stabilize", parents=[common]))
    p.add_argument("--target", type=int, help="state to stabilize at")
    p.add_argument("--target-set", help="states of the attracting cycle")
    p.add_argument("--behaviour", help="closed-loop matrix to reproduce")

    with_net(sub.add_parser("ifd", parents=[]).add_subparsers(
        dest="action", required=True, parser_class=_Parser).add_parser("synth", parents=[common]))
    with_net(sub.add_parser("ddifd", parents=[]).add_subparsers(
        dest="action", required=True, parser_class=_Parser).add_parser("synth", parents=[common]))

    p = with_controller(with_net(sub.add_parser("verify", parents=[common])))
    p.add_argument("--property", choices=("dd", "fault"), default="dd")
    p.add_argument("--mode", choices=("mapping", "iteration", "invariant", "reach"), default="iteration")
    p.add_argument("--target", type=int)
    p.add_argument("--horizon", type=int)
    p.add_argument("--fault-mode", choices=("stateKnown", "outputOnly"), default="stateKnown")

    p = with_controller(with_net(sub.add_parser("observe", parents=[common])))
    p.add_argument("--log", help="observation log: 'step input output' per line, '-' for no input")
    p.add_argument("--policy", choices=("recorded", "auto"), default="recorded")

    p = sub.add_parser("count", parents=[common])
    p.add_argument("--sc", type=int, required=True)
    p.add_argument("--sr", type=int, required=True)
    p.add_argument("--brute", action="store_true", help="also run the enumeration oracle")

    p = with_net(sub.add_parser("export-dot", parents=[common]))
    p.add_argument("--graph", choices=("states", "reach", "layers"), default="states")
    p.add_argument("--kind", choices=("definite", "indefinite"), default="definite")
    p.add_argument("--vertices", choices=("substates", "outputSets"), default="substates")
    return parser


HANDLERS = {
    "info": cmd_info, "attractors": cmd_attractors, "simulate": cmd_simulate, "equiv": cmd_equiv,
    "reach": cmd_reach, "dd check": cmd_dd_check, "dd synth": cmd_dd_synth, "stabilize": cmd_stabilize,
    "ifd synth": cmd_ifd_synth, "ddifd synth": cmd_ddifd_synth, "verify": cmd_verify,
    "observe": cmd_observe, "export-dot": cmd_export_dot,
}


def _text(value, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    for key, item in value.items():
        if isinstance(item, dict) and item and all(not isinstance(v, (dict, list)) for v in item.values()):
            lines.append(f"{pad}{key}: " + ", ".join(f"{k}={json.dumps(v)}" for k, v in item.items()))
        elif isinstance(item, dict) and item:
            lines.append(f"{pad}{key}:")
            lines.extend(_text(item, indent + 1))
        else:
            lines.append(f"{pad}{key}: {json.dumps(item, ensure_ascii=False)}")
    return lines


def run_command(argv: Sequence[str]) -> tuple[int, str]:
    """Parse ``argv``, run the command and return (exit code, report text)."""
    code, text, _ = _execute(list(argv))
    return code, text


def _execute(argv: list[str]) -> tuple[int, str, str | None]:
    try:
        args = build_parser().parse_args(argv)
    except UsageError as exc:
        return 2, f"usage error: {exc}\n", None
    except SystemExit as exc:  # --help
        return int(exc.code or 0), "", None
    code, text = _dispatch(args, argv)
    return code, text, (args.out if code != 2 else None)


def _dispatch(args, argv: list[str]) -> tuple[int, str]:
    name = args.command + (f" {args.action}" if getattr(args, "action", None) else "")
    try:
        if name == "count":
            code, payload = cmd_count(args)
            net_info = None
        else:
            net = load_network(args.network)
            net_info = fingerprint(net)
            code, payload = HANDLERS[name](net, args)
    except (UsageError, BCNError, ValueError, OSError) as exc:
        return 2, f"error: {exc}\n"

    if isinstance(payload, str):  # DOT documents are emitted as is
        return code, payload
    report = {"command": name, "argv": argv, "network": net_info, "result": payload, "exit": code}
    if args.json:
        return code, json.dumps(report, sort_keys=True, ensure_ascii=False, indent=2) + "\n"
    lines = [f"command: {name}"]
    if net_info is not None:
        lines.append(f"network: {net_info['name'] or '-'} (sha256 {net_info['sha256']})")
    lines.extend(_text(payload))
    return code, "\n".join(lines) + "\n"


def main(argv: Sequence[str] | None = None) -> None:
    argv = list(sys.argv[1:] if argv is None else argv)
    code, text, out = _execute(argv)
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        (sys.stderr if code == 2 else sys.stdout).write(text)
    sys.exit(code)


if __name__ == "__main__":
    main()
