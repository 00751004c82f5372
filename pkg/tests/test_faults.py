import itertools
import random

import pytest

from oracles import assignments, brute_reflective
from stpbcn.dynamics import FeedbackLaw, closed_loop_network, simulate
from stpbcn.errors import DimensionMismatch, InconsistentTrace
from stpbcn.faults import (
    FAULT_FREE,
    dd_ifd_synthesize,
    fault_output_map,
    ifd_synthesize,
    impossible_output_sets,
    observer_run,
    output_matrix,
    reflective_check,
    verify_fault_detection,
)
from stpbcn.network import BooleanControlNetwork, random_network
from stpbcn.stp import LogicalMatrix, delta, encode_state

TWO_LAYER_LOOP = delta(4, [3, 4, 3, 4, 4, 4, 3, 3])


def test_reflective_examples():
    assert reflective_check(delta(2, [1, 2, 1, 2]), 1)
    assert not reflective_check(delta(2, [1, 1, 2, 2]), 1)
    assert reflective_check(delta(2, [1, 2, 1, 2]), 0, 1)
    with pytest.raises(DimensionMismatch):
        reflective_check(delta(2, [1, 2]), 1, 1)


def test_reflective_matches_brute_force_definition():
    rng = random.Random(2)
    for _ in range(400):
        n = rng.randint(1, 4)
        rows = 2 ** rng.randint(1, 4)
        r = rng.randint(0, n)
        s = rng.randint(0, n - r)
        if rng.random() < 0.5:
            # bias toward positive cases: a random injective tail, copied across redundant sub-blocks
            width = 2 ** (n - r - s)
            if width > rows:
                continue
            cols = []
            for _ in range(2 ** r):
                sub = rng.sample(range(1, rows + 1), width)
                cols += sub * 2 ** s
            M = LogicalMatrix(rows, tuple(cols))
        else:
            M = LogicalMatrix(rows, tuple(rng.randint(1, rows) for _ in range(2 ** n)))
        values = {bits: M.cols[encode_state(bits) - 1] for bits in assignments(n)}
        assert reflective_check(M, r, s) == brute_reflective(values, n, r, s)


def test_impossible_output_sets():
    H = delta(2, [1, 1, 2, 2])
    # every successor sits in {3, 4}, so output 1 follows neither output
    assert impossible_output_sets(TWO_LAYER_LOOP, H) == {1: frozenset({1}), 2: frozenset({1})}
    ident = delta(4, [1, 2, 3, 4])
    Hid = delta(4, [1, 2, 3, 4])
    assert impossible_output_sets(ident, Hid) == {i: frozenset({1, 2, 3, 4} - {i}) for i in range(1, 5)}
    full = delta(4, [1, 3, 2, 4, 1, 3, 2, 4])
    assert all(not v for v in impossible_output_sets(full, H).values())


def test_fault_candidate_sets(load):
    faulty = load("fault_detection")
    res = ifd_synthesize(faulty)
    assert res.candidates.C == {1: (1, 2, 3, 4), 2: (1, 3), 3: (1, 3), 4: (1, 3), 5: (3, 4),
                                6: (2,), 7: (1,), 8: (3, 4)}
    assert res.candidates.controller_count == 128
    assert verify_fault_detection(faulty, FeedbackLaw.state(4, [4, 3, 3, 3, 4, 2, 1, 4])).holds
    bad = verify_fault_detection(faulty, FeedbackLaw.state(4, [4, 3, 3, 3, 4, 1, 1, 4]))
    assert not bad.holds and bad.witness["state"] == 6 and bad.witness["faults"] == [1, 2]


def test_decoupled_fault_candidate_sets(load):
    decoupled = load("fault_detection_decoupled")
    res = dd_ifd_synthesize(decoupled)
    assert res.candidates.C == {1: (1,), 2: (1, 3), 3: (3,), 4: (4,)}
    laws = [law.M.cols for law in res.candidates.laws()]
    assert laws == [(1, 1, 3, 4), (1, 3, 3, 4)]
    for cols in laws:
        assert verify_fault_detection(decoupled, FeedbackLaw.state(4, cols)).holds


def test_ifd_trivial_cases():
    # t = 1, every sub-block under every input is constant: no fault is visible
    net = BooleanControlNetwork(1, delta(2, [1, 1, 2, 2, 1, 1, 2, 2]), m=1, t=1)
    res = ifd_synthesize(net)
    assert not res.feasible and 1 in res.diagnostics
    net = BooleanControlNetwork(1, delta(2, [1, 2, 2, 1, 1, 1, 1, 1]), m=1, t=1)
    assert all(1 in c for c in ifd_synthesize(net).candidates.C.values())
    with pytest.raises(DimensionMismatch):
        ifd_synthesize(BooleanControlNetwork(1, delta(2, [1, 2]), ))


def _all_state_laws(net):
    for combo in itertools.product(range(1, net.num_inputs + 1), repeat=net.num_states):
        yield FeedbackLaw.state(net.num_inputs, combo)


def test_synthesis_soundness_and_completeness():
    rng = random.Random(13)
    for _ in range(80):
        n = rng.randint(1, 2)
        m, d, t = rng.randint(1, 2), rng.randint(0, 1), 1
        net = random_network(rng, n, m, d, t, p=rng.randint(1, n), order=rng.choice([("u", "x", "d", "f"),
                                                                                    ("u", "x", "f", "d")]))
        res = dd_ifd_synthesize(net)
        for law in _all_state_laws(net):
            assert res.candidates.admits(law) == verify_fault_detection(net, law).holds


def test_fault_output_invertibility():
    rng = random.Random(19)
    for _ in range(60):
        net = random_network(rng, 2, 2, 1, 1, p=2)
        res = dd_ifd_synthesize(net)
        if not res.feasible:
            continue
        for law in itertools.islice(res.candidates.laws(), 10):
            for outs in fault_output_map(net, law).values():
                assert len(set(outs)) == len(outs)


def test_output_only_detection(load):
    base = BooleanControlNetwork(2, TWO_LAYER_LOOP, d=1, H=delta(2, [1, 1, 2, 2]))
    assert impossible_output_sets(base.L, base.H)[1] == {1}
    # tail order (fault, disturbance); the fault sends states 1 and 2 to state 1 and leaves 3, 4 alone
    cols = []
    for x in range(1, 5):
        clean = list(TWO_LAYER_LOOP.block(x, 2))
        cols += clean + ([1, 1] if x <= 2 else clean)
    faulty = BooleanControlNetwork(2, delta(4, cols), d=1, t=1, H=delta(2, [1, 1, 2, 2]), order=("u", "x", "f", "d"))
    v = verify_fault_detection(faulty, None, "outputOnly")
    assert not v.holds and v.witness["state"] == 3 and v.witness["fault"] == 2
    only_early = [c for x in range(1, 5) for c in list(TWO_LAYER_LOOP.block(x, 2)) + [1, 1]]
    detect = BooleanControlNetwork(2, delta(4, only_early), d=1, t=1, H=delta(2, [1, 1, 2, 2]),
                                   order=("u", "x", "f", "d"))
    assert verify_fault_detection(detect, None, "outputOnly").holds


def test_output_matrix(load):
    net = BooleanControlNetwork(2, TWO_LAYER_LOOP, d=1, H=delta(2, [1, 1, 2, 2]))
    assert output_matrix(net, TWO_LAYER_LOOP).cols == (2, 2, 2, 2, 2, 2, 2, 2)


# -- observer -------------------------------------------------------------------

def test_observer_permutation_output_reconstructs_immediately():
    net = BooleanControlNetwork(2, delta(4, [2, 3, 4, 1]), H=delta(4, [3, 1, 4, 2]))
    trace = observer_run(net, [1])
    assert trace[0].reconstructed and trace[0].possible == {2}


def test_observer_two_output_groups(load):
    groups = load("reach_output_groups")
    trace = observer_run(groups, [2, 1], [1])
    assert trace[0].possible == {1, 3}
    assert trace[1].possible == {2, 4} and not trace[1].reconstructed


def test_observer_flags_impossible_transition():
    net = BooleanControlNetwork(2, TWO_LAYER_LOOP, d=1, H=delta(2, [1, 1, 2, 2]))
    trace = observer_run(net, [1, 1])
    assert trace[-1].fault_flag and trace[-1].possible == {1, 2}


def test_observer_trace_errors(load):
    groups = load("reach_output_groups")
    with pytest.raises(InconsistentTrace):
        observer_run(groups, [2, 1])  # no input and no policy
    auto = observer_run(groups, [2, 1], policy="auto")
    with pytest.raises(InconsistentTrace):
        observer_run(groups, [2, 1], [2 if auto[1].last_input == 1 else 1], policy="auto")


def test_observer_soundness():
    rng = random.Random(29)
    for _ in range(25):
        n = rng.randint(1, 3)
        m, d = rng.randint(0, 1), rng.randint(0, 1)
        net = random_network(rng, n, m, d, p=rng.randint(1, n))
        horizon = 3
        for x0 in range(1, net.num_states + 1):
            for inputs in itertools.product(range(1, net.num_inputs + 1), repeat=horizon):
                for dist in itertools.product(range(1, 2 ** d + 1), repeat=horizon):
                    traj = simulate(net, x0, horizon, inputs=list(inputs), disturbances=list(dist) if d else None)
                    trace = observer_run(net, traj.outputs, list(inputs))
                    assert len(trace) == horizon + 1
                    for state, true_x in zip(trace, traj.states):
                        assert not state.fault_flag and true_x in state.possible


def test_observer_detects_faults_after_reconstruction():
    rng = random.Random(53)
    checked = 0
    for _ in range(200):
        net = random_network(rng, 2, 1, 0, 1, p=2)
        res = ifd_synthesize(net)
        if not res.feasible:
            continue
        law = res.sample_controller
        for x0 in range(1, net.num_states + 1):
            for fault in range(1, 2 ** net.t + 1):
                if fault == FAULT_FREE:
                    continue
                # one fault-free step, then the fault strikes
                traj = simulate(net, x0, 2, feedback=law, faults=[FAULT_FREE, fault])
                trace = observer_run(net, traj.outputs, traj.inputs)
                if trace[1].reconstructed:
                    assert trace[-1].fault_flag
                    checked += 1
    assert checked > 10


def test_observer_needs_full_state(load):
    with pytest.raises(DimensionMismatch):
        observer_run(load("decoupling_subsystem_layers"), [1])


def test_closed_loop_observer_with_output_policy(load):
    groups = load("reach_output_groups")
    law = FeedbackLaw.output(2, [1, 1])
    trace = observer_run(groups, [2, 1], policy=law)
    assert trace[1].last_input == 1
    assert closed_loop_network(groups, law).m == 0
