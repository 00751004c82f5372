"""Acceptance gate: one test per criterion, each printing a single pass/fail line."""

import itertools
import random
import time
from contextlib import contextmanager

from conftest import ACCEPTANCE_LINES
from oracles import assignments, brute_reflective, columns_of, dense, dense_stp
from stpbcn.combinatorics import brute_force_structure_count, count_structures
from stpbcn.decoupling import (
    dd_output_equation_check,
    dd_synthesize,
    enumerate_output_feedback,
    rank_condition_dd,
    verify_dd,
)
from stpbcn.dynamics import (
    FeedbackLaw,
    apply_output_feedback,
    apply_state_feedback,
    closed_loop_power,
    expand_substate_law,
    simulate,
)
from stpbcn.faults import dd_ifd_synthesize, fault_output_map, ifd_synthesize, observer_run, reflective_check, \
    verify_fault_detection
from stpbcn.network import BooleanControlNetwork, random_network
from stpbcn.reachability import decomposition_controllers, invariant_set_decomposition
from stpbcn.stp import LogicalMatrix, delta, encode_state, power_reducing_matrix, stp_logical


@contextmanager
def criterion(number: int, title: str, limit: float):
    start = time.perf_counter()
    ok = False
    try:
        yield
        elapsed = time.perf_counter() - start
        assert elapsed < limit, f"took {elapsed:.2f}s, limit {limit}s"
        ok = True
    finally:
        elapsed = time.perf_counter() - start
        line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {title} ({elapsed:.2f}s, limit {limit}s)"
        ACCEPTANCE_LINES.append(line)
        print(line)


def test_criterion_1_two_layer_decoupling(load):
    with criterion(1, "two-layer decomposition, candidates, controller and closed loop", 1.0):
        net = load("decoupling_two_layers")
        assert net.L == delta(4, [1, 2, 3, 4, 1, 2, 3, 3, 3, 4, 1, 3, 4, 4, 2, 3])
        layers = invariant_set_decomposition(net)
        assert layers.layers == (frozenset({3, 4}), frozenset({1, 2})) and not layers.remainder
        cands = decomposition_controllers(net, layers)
        assert cands.C == {1: (2,), 2: (1,), 3: (2,), 4: (1,)}
        law = cands.sample()
        assert law.M == delta(2, [2, 1, 2, 1])
        loop = apply_state_feedback(net, law)
        assert loop == delta(4, [3, 4, 3, 4, 4, 4, 3, 3])
        assert all(len(set(loop.block(i, 2))) == 1 for i in (3, 4))


def test_criterion_2_three_layer_decoupling(load):
    with criterion(2, "three-layer decomposition, controller and settling in two steps", 1.0):
        net = load("decoupling_three_layers")
        layers = invariant_set_decomposition(net)
        assert layers.layers == (frozenset({3}), frozenset({1, 2}), frozenset({4}))
        law = decomposition_controllers(net, layers).sample()
        assert law.M == delta(2, [1, 2, 2, 1])
        assert closed_loop_power(apply_state_feedback(net, law), 2) == delta(4, [3] * 16)


def test_criterion_3_subsystem_layers(load):
    with criterion(3, "subsystem layers, candidates, 1024 controllers, sample verified exhaustively", 5.0):
        net = load("decoupling_subsystem_layers")
        res = dd_synthesize(net, "iteration")
        assert res.extra["decomposition"]["layers"] == [[2, 3, 4], [1]]
        assert res.candidates.C == {1: (2, 4), 2: (2, 4), 3: (1, 2), 4: (1, 2, 3, 4)}
        assert res.candidates.controller_count == 1024
        v = verify_dd(net, res.sample_controller, 3, "iteration")
        # 8 full states x every disturbance word of length 3 (the unmodelled bit is enumerated too)
        assert v.exhaustive and v.runs == 8 * 4 ** 3
        assert v.holds, v.counterexample


def test_reference_sample_controller_leaves_first_layer(load):
    # this sample leaves S_1 from substate 3 under input 2
    net = load("decoupling_subsystem_layers")
    v = verify_dd(net, FeedbackLaw.state(4, [2, 2, 4, 4, 2, 2, 3, 3]), 3, "iteration")
    assert not v.holds
    assert net.successors(3, 2) == {1}


def test_criterion_4_fault_detection(load):
    with criterion(4, "fault candidate sets, 128 controllers, reference controller verified", 5.0):
        net = load("fault_detection")
        res = ifd_synthesize(net)
        assert res.candidates.C == {1: (1, 2, 3, 4), 2: (1, 3), 3: (1, 3), 4: (1, 3), 5: (3, 4), 6: (2,),
                                    7: (1,), 8: (3, 4)}
        assert res.candidates.controller_count == 128
        assert verify_fault_detection(net, FeedbackLaw.state(4, [4, 3, 3, 3, 4, 2, 1, 4]), "stateKnown").holds


def test_criterion_5_decoupled_fault_detection(load):
    with criterion(5, "decoupled fault detection: exactly two controllers, both verified", 5.0):
        net = load("fault_detection_decoupled")
        res = dd_ifd_synthesize(net)
        assert res.candidates.C == {1: (1,), 2: (1, 3), 3: (3,), 4: (4,)}
        laws = list(res.candidates.laws())
        assert [law.M.cols for law in laws] == [(1, 1, 3, 4), (1, 3, 3, 4)]
        for law in laws:
            assert verify_fault_detection(net, law, "stateKnown").holds
            table = fault_output_map(net, law)
            for x in range(1, net.num_states + 1):
                assert table[(x, 1)] == table[(x, 2)]  # disturbance never alters the next output
                assert len(set(table[(x, 1)])) == 2  # each fault value gives its own output


def test_criterion_6_output_feedback_decoupling(load):
    with criterion(6, "output feedback under both output maps meets the block-rank condition", 1.0):
        expected = delta(8, [2, 2, 4, 4, 6, 6, 8, 8, 3, 3, 4, 4, 5, 5, 7, 7])
        for name, law in (("decoupling_output_fb_coarse", [1, 2]), ("decoupling_output_fb_fine", [1, 1, 2, 2])):
            net = load(name)
            loop = apply_output_feedback(net, FeedbackLaw.output(2, law))
            assert loop == expected
            assert rank_condition_dd(BooleanControlNetwork(3, loop, d=1, H=net.H)).verdict


def test_criterion_7_stabilization(load):
    with criterion(7, "output feedback closed loops; unreachable target confirmed by exhaustive search", 10.0):
        assert apply_output_feedback(load("stabilize_two_inputs"), delta(4, [1, 3, 4, 2])) == delta(8, [2, 3, 3, 4, 5, 5, 3, 3])
        assert apply_output_feedback(load("stabilize_one_input"), delta(2, [2, 1])) == delta(8, [1, 3, 3, 4, 4, 7, 3, 4])
        unreachable = load("stabilize_unreachable")
        target = delta(8, [3, 3, 3, 5, 6, 7, 3, 3])
        candidates = list(enumerate_output_feedback(unreachable))
        assert len(candidates) == 4 ** 4
        assert not [law for law in candidates if apply_output_feedback(unreachable, law) == target]


def test_criterion_8_output_equation_strictness(load):
    with criterion(8, "output-equation check passes where the rank condition fails", 1.0):
        net = load("decoupling_output_equation")
        assert net.L == delta(4, [1, 3, 1, 1, 2, 4, 4, 2, 3, 1, 3, 3, 2, 2, 2, 4])
        assert tuple(net.output_of_substate(k) for k in range(1, 5)) == (1, 2, 1, 2)
        assert dd_output_equation_check(net)
        assert not rank_condition_dd(net).verdict


# -- criterion 9: property suite ------------------------------------------------

def _random_logical(rng):
    rows = 2 ** rng.randint(0, 3)
    return LogicalMatrix(rows, tuple(rng.randint(1, rows) for _ in range(2 ** rng.randint(0, 3))))


def _prop_stp(rng):
    for _ in range(500):
        a, b = (_random_logical(rng) for _ in range(2))
        assert stp_logical(a, b).cols == columns_of(dense_stp(dense(a.rows, a.cols), dense(b.rows, b.cols)))


def _prop_feedback(rng):
    for _ in range(60):
        while True:
            n, m, d, t = rng.randint(1, 4), rng.randint(0, 2), rng.randint(0, 2), rng.randint(0, 1)
            if n + m + d + t <= 8:
                break
        net = random_network(rng, n, m, d, t, p=rng.randint(1, n))
        psi_n = power_reducing_matrix(n)
        psi = dense(psi_n.rows, psi_n.cols)
        Mx = FeedbackLaw.state(2 ** m, [rng.randint(1, 2 ** m) for _ in range(2 ** n)])
        oracle = dense_stp(dense_stp(dense(net.L.rows, net.L.cols), dense(Mx.M.rows, Mx.M.cols)), psi)
        assert apply_state_feedback(net, Mx).cols == columns_of(oracle)
        My = FeedbackLaw.output(2 ** m, [rng.randint(1, 2 ** m) for _ in range(net.num_outputs)])
        H = dense(net.H.rows, net.H.cols)
        oracle = dense_stp(dense(net.L.rows, net.L.cols), dense_stp(dense_stp(dense(My.M.rows, My.M.cols), H), psi))
        assert apply_output_feedback(net, My).cols == columns_of(oracle)


def _prop_dd(rng):
    for _ in range(40):
        n = rng.randint(1, 3)
        s = rng.randint(1, min(n, 2))
        net = random_network(rng, n, rng.randint(0, 1), rng.randint(0, 1), s=s, p=1, subsystem=True)
        res = dd_synthesize(net, "mapping")
        admitted = set(itertools.product(*[res.candidates.C[k] for k in sorted(res.candidates.C)]))
        valid = set()
        for combo in itertools.product(range(1, net.num_inputs + 1), repeat=net.num_substates):
            law = expand_substate_law(net, combo) if net.m else None
            if verify_dd(net, law, 2, "mapping").holds:
                valid.add(combo)
        assert admitted == valid


def _prop_observer(rng):
    for _ in range(10):
        n = rng.randint(1, 3)
        d = rng.randint(0, 1)
        net = random_network(rng, n, 1, d, p=rng.randint(1, n))
        for x0 in range(1, net.num_states + 1):
            for inputs in itertools.product((1, 2), repeat=3):
                for dist in itertools.product(range(1, 2 ** d + 1), repeat=3):
                    traj = simulate(net, x0, 3, inputs=list(inputs), disturbances=list(dist) if d else None)
                    trace = observer_run(net, traj.outputs, list(inputs))
                    assert all(x in st.possible for st, x in zip(trace, traj.states))


def _prop_reflective(rng):
    for _ in range(300):
        n = rng.randint(1, 4)
        rows = 2 ** rng.randint(1, 4)
        r = rng.randint(0, n)
        s = rng.randint(0, n - r)
        M = LogicalMatrix(rows, tuple(rng.randint(1, rows) for _ in range(2 ** n)))
        values = {bits: M.cols[encode_state(bits) - 1] for bits in assignments(n)}
        assert reflective_check(M, r, s) == brute_reflective(values, n, r, s)


def _prop_counting():
    for s_r in range(0, 6):
        assert brute_force_structure_count(1, s_r) >= count_structures(1, s_r).N_mod_c
    assert brute_force_structure_count(1, 2) == count_structures(1, 2).N_mod_c == 3


def test_criterion_9_properties():
    with criterion(9, "property suite: STP, feedback, DD, observer, reflectivity, counting", 120.0):
        rng = random.Random(2024)
        _prop_stp(rng)
        _prop_feedback(rng)
        _prop_dd(rng)
        _prop_observer(rng)
        _prop_reflective(rng)
        _prop_counting()
