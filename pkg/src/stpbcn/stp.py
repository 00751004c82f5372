"""Logical-matrix calculus over the semi-tensor product.

Logical matrices are stored as 1-based column indices (``delta(4, [2, 4, 1, 3])``
is the 4x4 matrix whose j-th column is the basis vector picked by the j-th entry).
Dense matrices are plain numpy integer arrays; they only back the reference
``stp`` used to cross-check the index arithmetic in :func:`stp_logical`.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import DimensionMismatch, NotLogicalResult


@dataclass(frozen=True)
class LogicalMatrix:
    """A matrix with exactly one 1 per column, kept in index form."""

    rows: int
    cols: tuple[int, ...]

    def __post_init__(self) -> None:
        cols = tuple(int(c) for c in self.cols)
        object.__setattr__(self, "cols", cols)
        if self.rows < 1:
            raise DimensionMismatch(f"row count must be positive, got {self.rows}")
        for j, c in enumerate(cols, start=1):
            if not 1 <= c <= self.rows:
                raise DimensionMismatch(
                    f"column {j} points at row {c}, outside [1, {self.rows}]"
                )

    @property
    def ncols(self) -> int:
        return len(self.cols)

    def col(self, j: int) -> int:
        """Row index selected by 1-based column ``j``."""
        return self.cols[j - 1]

    def dense(self) -> np.ndarray:
        out = np.zeros((self.rows, self.ncols), dtype=np.int64)
        for j, c in enumerate(self.cols):
            out[c - 1, j] = 1
        return out

    @classmethod
    def from_dense(cls, arr: np.ndarray) -> "LogicalMatrix":
        arr = np.asarray(arr)
        if arr.ndim != 2:
            raise DimensionMismatch("expected a 2-D array")
        cols = []
        for j in range(arr.shape[1]):
            column = arr[:, j]
            hits = np.flatnonzero(column)
            if len(hits) != 1 or column[hits[0]] != 1:
                raise NotLogicalResult(f"column {j + 1} is not a basis vector")
            cols.append(int(hits[0]) + 1)
        return cls(arr.shape[0], tuple(cols))

    def block(self, index: int, width: int) -> tuple[int, ...]:
        """Columns of the 1-based ``index``-th block of ``width`` consecutive columns."""
        start = (index - 1) * width
        return self.cols[start:start + width]

    def __str__(self) -> str:
        return f"δ_{self.rows}[{' '.join(map(str, self.cols))}]"


def delta(rows: int, cols: Iterable[int]) -> LogicalMatrix:
    """Shorthand for ``δ_rows[cols...]``."""
    return LogicalMatrix(rows, tuple(cols))


def basis(dim: int, index: int) -> LogicalMatrix:
    """The column vector δ_dim^index as a one-column logical matrix."""
    return LogicalMatrix(dim, (index,))


_DELTA_RE = re.compile(r"^\s*(?:δ|delta|d)_?(\d+)\s*\[([\d\s,]*)\]\s*$", re.IGNORECASE)


def parse_delta(text: str, rows: int | None = None) -> LogicalMatrix:
    """Read ``"δ_4[1 2 3]"`` or a bare list such as ``"1 2 3"`` (then ``rows`` is required)."""
    match = _DELTA_RE.match(text)
    if match:
        if rows is not None and rows != int(match.group(1)):
            raise DimensionMismatch(f"expected {rows} rows, {text!r} has {match.group(1)}")
        rows = int(match.group(1))
        body = match.group(2)
    else:
        if rows is None:
            raise ValueError(f"cannot infer row count from {text!r}")
        body = text.strip().removeprefix("[").removesuffix("]")
    cols = [int(tok) for tok in re.split(r"[\s,]+", body.strip()) if tok]
    return LogicalMatrix(rows, tuple(cols))


def identity(n: int) -> LogicalMatrix:
    return LogicalMatrix(n, tuple(range(1, n + 1)))


def kronecker(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense Kronecker product (exact integer arithmetic)."""
    return np.kron(np.asarray(a, dtype=np.int64), np.asarray(b, dtype=np.int64))


def stp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Dense semi-tensor product: (A ⊗ I_{t/n})(B ⊗ I_{t/p}) with t = lcm(n, p)."""
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    n, p = a.shape[1], b.shape[0]
    t = math.lcm(n, p)
    left = kronecker(a, np.eye(t // n, dtype=np.int64))
    right = kronecker(b, np.eye(t // p, dtype=np.int64))
    return left @ right


def stp_logical(a: LogicalMatrix, b: LogicalMatrix) -> LogicalMatrix:
    """Semi-tensor product of two logical matrices, computed on indices only.

    Column ``(j, r)`` of ``B ⊗ I_k`` hits row ``(B_j - 1)k + r``; feeding that row
    number through ``A ⊗ I_h`` gives the result without building dense forms.
    """
    n, p = a.ncols, b.rows
    t = math.lcm(n, p)
    k = t // p  # padding on B
    h = t // n  # padding on A
    out = []
    for bj in b.cols:
        for r in range(k):
            mid = (bj - 1) * k + r  # 0-based row of B ⊗ I_k, i.e. column of A ⊗ I_h
            acol, aoff = divmod(mid, h)
            out.append((a.cols[acol] - 1) * h + aoff + 1)
    return LogicalMatrix(a.rows * h, tuple(out))


def stp_chain(*factors: LogicalMatrix) -> LogicalMatrix:
    """Left-to-right STP of several logical factors."""
    if not factors:
        raise ValueError("need at least one factor")
    acc = factors[0]
    for f in factors[1:]:
        acc = stp_logical(acc, f)
    return acc


def logical_kron(a: LogicalMatrix, b: LogicalMatrix) -> LogicalMatrix:
    cols = [(ca - 1) * b.rows + cb for ca in a.cols for cb in b.cols]
    return LogicalMatrix(a.rows * b.rows, tuple(cols))


def khatri_rao(a: LogicalMatrix, b: LogicalMatrix) -> LogicalMatrix:
    """Column-wise Kronecker product; both factors need the same column count."""
    if a.ncols != b.ncols:
        raise DimensionMismatch("Khatri-Rao factors need equal column counts")
    cols = [(ca - 1) * b.rows + cb for ca, cb in zip(a.cols, b.cols)]
    return LogicalMatrix(a.rows * b.rows, tuple(cols))


def power_reducing_matrix(n: int) -> LogicalMatrix:
    """ψ_n, the matrix with ψ_n ⋉ x = x ⋉ x for every x in Δ_{2^n}."""
    if n < 1:
        raise ValueError("n must be at least 1")
    size = 2 ** n
    return LogicalMatrix(size * size, tuple((i - 1) * size + i for i in range(1, size + 1)))


def dummy_operator(k: int = 1, r: int = 1) -> LogicalMatrix:
    """E_du for ``k`` leading dummy variables in front of an ``r``-variable argument.

    ``dummy_operator(k, r) ⋉ w ⋉ q = q`` for ``w`` in Δ_{2^k} and ``q`` in Δ_{2^r}.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    tail = 2 ** r
    return LogicalMatrix(tail, tuple(list(range(1, tail + 1)) * 2 ** k))


STRUCTURE_MATRICES = {
    "negation": (2, 1),
    "conjunction": (1, 2, 2, 2),
    "disjunction": (1, 1, 1, 2),
    "xor": (2, 1, 1, 2),
    "implication": (1, 2, 1, 1),
    "equivalence": (1, 2, 2, 1),
}


def structure_matrix(op: str) -> LogicalMatrix:
    try:
        return LogicalMatrix(2, STRUCTURE_MATRICES[op])
    except KeyError:
        raise ValueError(f"unknown operator {op!r}") from None


def encode_state(bits: Sequence[bool]) -> int:
    """Index of the basis vector for ``bits``; true is δ_2^1, leftmost bit most significant."""
    index = 0
    for b in bits:
        index = 2 * index + (0 if b else 1)
    return index + 1


def decode_state(index: int, n: int) -> tuple[bool, ...]:
    size = 2 ** n
    if not 1 <= index <= size:
        raise DimensionMismatch(f"index {index} outside [1, {size}]")
    value = index - 1
    return tuple(not (value >> (n - 1 - i)) & 1 for i in range(n))


def rank(columns: Sequence[int]) -> int:
    """Rank of a logical matrix given by its column indices (number of distinct columns)."""
    return len(set(columns))


def is_power_of_two(value: int) -> bool:
    return value >= 1 and value & (value - 1) == 0


def log2_exact(value: int) -> int:
    if not is_power_of_two(value):
        raise DimensionMismatch(f"{value} is not a power of two")
    return value.bit_length() - 1
