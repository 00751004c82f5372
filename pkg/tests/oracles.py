"""Independent brute-force oracles used by the tests.

They work from dense 0/1 arrays or plain Python truth tables and deliberately
avoid the index arithmetic of the library.
"""

from __future__ import annotations

import itertools
from math import gcd

import numpy as np


def dense(rows: int, cols) -> np.ndarray:
    out = np.zeros((rows, len(cols)), dtype=np.int64)
    for j, c in enumerate(cols):
        out[c - 1, j] = 1
    return out


def naive_kron(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    p, q = a.shape
    r, s = b.shape
    out = np.zeros((p * r, q * s), dtype=np.int64)
    for i in range(p):
        for j in range(q):
            for k in range(r):
                for l in range(s):
                    out[i * r + k, j * s + l] = a[i, j] * b[k, l]
    return out


def dense_stp(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    n, p = a.shape[1], b.shape[0]
    t = n * p // gcd(n, p)
    return naive_kron(a, np.eye(t // n, dtype=np.int64)) @ naive_kron(b, np.eye(t // p, dtype=np.int64))


def columns_of(m: np.ndarray) -> tuple[int, ...]:
    assert (m.sum(axis=0) == 1).all() and set(np.unique(m)) <= {0, 1}
    return tuple(int(np.argmax(m[:, j])) + 1 for j in range(m.shape[1]))


def vec(bits) -> np.ndarray:
    """Dense basis vector of a bit tuple: True first, leftmost variable most significant."""
    v = np.array([[1]], dtype=np.int64)
    for b in bits:
        v = naive_kron(v, np.array([[1], [0]] if b else [[0], [1]], dtype=np.int64))
    return v


def assignments(n: int):
    return list(itertools.product([True, False], repeat=n))


def brute_reflective(values: dict, n: int, r: int, s: int) -> bool:
    """Variables r+1..r+s redundant and r+s+1..n jointly reflective, by assignment enumeration.

    ``values`` maps every bit tuple of length n to the map's value.
    """
    for head in assignments(r):
        for mid_a in assignments(s):
            for mid_b in assignments(s):
                for tail in assignments(n - r - s):
                    if values[head + mid_a + tail] != values[head + mid_b + tail]:
                        return False
        for mid in assignments(s):
            seen = {values[head + mid + tail] for tail in assignments(n - r - s)}
            if len(seen) != 2 ** (n - r - s):
                return False
    return True
