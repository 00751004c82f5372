import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import columns_of, dense, dense_stp, naive_kron, vec
from stpbcn.errors import DimensionMismatch, NotLogicalResult
from stpbcn.stp import (
    LogicalMatrix,
    basis,
    decode_state,
    delta,
    dummy_operator,
    encode_state,
    identity,
    khatri_rao,
    kronecker,
    log2_exact,
    logical_kron,
    parse_delta,
    power_reducing_matrix,
    rank,
    stp,
    stp_chain,
    stp_logical,
    structure_matrix,
)


def logical(draw, rows_exp, cols_exp):
    rows, cols = 2 ** rows_exp, 2 ** cols_exp
    return LogicalMatrix(rows, tuple(draw(st.lists(st.integers(1, rows), min_size=cols, max_size=cols))))


@st.composite
def logical_pairs(draw):
    a = logical(draw, draw(st.integers(0, 3)), draw(st.integers(0, 3)))
    b = logical(draw, draw(st.integers(0, 3)), draw(st.integers(0, 3)))
    return a, b


def test_kronecker_identity_and_basis():
    assert (kronecker(np.eye(2, dtype=int), np.eye(2, dtype=int)) == np.eye(4)).all()
    assert columns_of(kronecker(basis(2, 1).dense(), basis(2, 2).dense())) == (2,)


def test_kronecker_matches_naive_expansion():
    a = delta(2, [1, 2]).dense()
    assert (kronecker(a, np.eye(2, dtype=np.int64)) == naive_kron(a, np.eye(2, dtype=np.int64))).all()
    rng = np.random.default_rng(3)
    for _ in range(20):
        x = rng.integers(-3, 4, size=tuple(rng.integers(1, 4, size=2)))
        y = rng.integers(-3, 4, size=tuple(rng.integers(1, 4, size=2)))
        assert (kronecker(x, y) == naive_kron(x, y)).all()


def test_negation_of_true_is_false():
    assert columns_of(stp(structure_matrix("negation").dense(), basis(2, 1).dense())) == (2,)


def test_stp_reduces_to_matrix_product_when_conformable():
    a = np.arange(6).reshape(2, 3)
    b = np.arange(12).reshape(3, 4)
    assert (stp(a, b) == a @ b).all()
    assert (stp(a, np.eye(3, dtype=int)) == a).all()


def test_stp_associative_on_random_integer_matrices():
    rng = np.random.default_rng(0)
    dims = [1, 2, 3, 4, 6]
    for _ in range(50):
        shapes = [tuple(rng.choice(dims, size=2)) for _ in range(3)]
        a, b, c = (rng.integers(-2, 3, size=s) for s in shapes)
        assert (dense_stp(dense_stp(a, b), c) == dense_stp(a, dense_stp(b, c))).all()
        assert (stp(stp(a, b), c) == stp(a, stp(b, c))).all()


@settings(max_examples=600, deadline=None)
@given(logical_pairs())
def test_stp_logical_matches_dense_oracle(pair):
    a, b = pair
    expected = columns_of(dense_stp(dense(a.rows, a.cols), dense(b.rows, b.cols)))
    got = stp_logical(a, b)
    assert got.cols == expected
    assert got.rows == a.rows * max(1, b.rows // a.ncols)


def test_conjunction_examples():
    both = stp_logical(basis(2, 1), basis(2, 2))
    assert stp_logical(structure_matrix("conjunction"), both) == basis(2, 2)
    assert stp_logical(delta(2, [1, 2]), delta(2, [1, 2])) == delta(2, [1, 2])


def test_structure_matrices():
    assert structure_matrix("negation").cols == (2, 1)
    assert structure_matrix("conjunction").cols == (1, 2, 2, 2)
    assert structure_matrix("disjunction").cols == (1, 1, 1, 2)
    # every binary operator agrees with its truth table
    table = {
        "conjunction": lambda p, q: p and q, "disjunction": lambda p, q: p or q,
        "xor": lambda p, q: p != q, "implication": lambda p, q: (not p) or q,
        "equivalence": lambda p, q: p == q,
    }
    for name, fn in table.items():
        m = structure_matrix(name)
        for p in (True, False):
            for q in (True, False):
                col = columns_of(dense_stp(m.dense(), vec((p, q))))
                assert col == ((1,) if fn(p, q) else (2,))


def test_power_reducing_matrix():
    assert power_reducing_matrix(1).cols == (1, 4)
    assert power_reducing_matrix(2).cols == (1, 6, 11, 16)
    psi = power_reducing_matrix(2)
    for i in range(1, 5):
        x = basis(4, i)
        assert stp_logical(psi, x) == stp_logical(x, x)


def test_dummy_operator():
    assert dummy_operator(1).cols == (1, 2, 1, 2)
    assert stp_chain(dummy_operator(1), basis(2, 2), basis(2, 1)) == basis(2, 1)
    e2 = dummy_operator(2)
    for w in range(1, 5):
        for q in (1, 2):
            assert stp_chain(e2, basis(4, w), basis(2, q)) == basis(2, q)


def test_encode_decode():
    assert encode_state([True, True]) == 1
    assert encode_state([False, False]) == 4
    assert encode_state([True, False]) == 2
    assert stp_logical(basis(2, 1), basis(2, 2)) == basis(4, 2)
    for n in range(1, 5):
        for i in range(1, 2 ** n + 1):
            bits = decode_state(i, n)
            assert encode_state(bits) == i
            assert columns_of(vec(bits)) == (i,)


def test_parse_delta_and_str():
    m = parse_delta("δ_4[2 4 1 3]")
    assert m == delta(4, [2, 4, 1, 3])
    assert parse_delta(str(m)) == m
    assert parse_delta("[1 2]", rows=2) == identity(2)


def test_logical_kron_and_khatri_rao_against_dense():
    a, b = delta(2, [2, 1]), delta(4, [3, 1])
    assert logical_kron(a, b).cols == columns_of(naive_kron(a.dense(), b.dense()))
    kr = khatri_rao(a, b)
    for j in range(2):
        assert kr.cols[j] == columns_of(naive_kron(dense(2, [a.cols[j]]), dense(4, [b.cols[j]])))[0]


def test_errors_and_helpers():
    with pytest.raises(NotLogicalResult):
        LogicalMatrix.from_dense(np.array([[1, 1], [0, 0], [0, 1]]))
    with pytest.raises(DimensionMismatch):
        log2_exact(6)
    assert rank([1, 3, 1]) == 2
