"""Counting Boolean networks and sub-networks that funnel into a fixed core."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import comb, factorial

from .errors import SearchSpaceTooLarge


def total_networks(n: int) -> int:
    """Number of distinct Boolean networks on n variables, 2^(n·2^n)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    return 2 ** (n * 2 ** n)


def total_functional_maps(size: int) -> int:
    return size ** size


@dataclass(frozen=True)
class StructureCountReport:
    S_c: int
    S_r: int
    N_mod: int
    N_mod_inv: int
    N_1: int
    N_loops: dict[int, int]
    N_mod_c: int
    N_T: int

    def as_dict(self) -> dict:
        return {
            "S_c": self.S_c, "S_r": self.S_r, "N_mod": self.N_mod, "N_mod_inv": self.N_mod_inv,
            "N_1": self.N_1, "N_loops": {str(k): v for k, v in self.N_loops.items()},
            "N_mod_c": self.N_mod_c, "N_T": self.N_T,
        }


def count_structures(S_c: int, S_r: int) -> StructureCountReport:
    """Closed-form counts for S_r free states around a contracted core of S_c states.

    N_mod_c subtracts, from all S_r^S_r maps of the free states, those containing a
    loop of length n among free states, counted once per loop. Maps holding several
    loops are subtracted more than once, so this is a lower estimate.
    """
    if S_c < 1 or S_r < 0:
        raise ValueError("need S_c >= 1 and S_r >= 0")
    n_mod = (S_r + 1) ** (S_r + 1)
    n_1 = S_r ** S_r  # 0**0 == 1
    loops = {n: comb(S_r, n) * factorial(n - 1) * S_r ** (S_r - n) for n in range(2, S_r + 1)}
    n_mod_c = n_1 - sum(loops.values())
    return StructureCountReport(S_c, S_r, n_mod, n_mod // (S_r + 1), n_1, loops, n_mod_c, S_c * n_mod_c)


def brute_force_structure_count(S_c: int, S_r: int, limit: int = 6) -> int:
    """Count maps on the free states (plus the absorbing core) in which every free state reaches the core."""
    if S_r > limit:
        raise SearchSpaceTooLarge((S_r + 1) ** S_r, (limit + 1) ** limit)
    core = S_r  # free states are 0..S_r-1
    count = 0
    for image in itertools.product(range(S_r + 1), repeat=S_r):
        if all(_reaches_core(image, v, core) for v in range(S_r)):
            count += 1
    return count


def _reaches_core(image: tuple[int, ...], v: int, core: int) -> bool:
    for _ in range(len(image) + 1):
        if v == core:
            return True
        v = image[v]
    return v == core
