"""Boolean (control) network model and the algebraic-form compiler.

Columns of ``L`` are indexed by the signals in ``order`` (input, state, then
disturbance and fault in declared order), each factor most-significant first.
``L`` has either ``2**n`` rows (full state) or ``2**s`` rows, in which case it
only describes the output-friendly substate made of the first ``s`` variables.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from typing import Sequence

from .errors import ArityMismatch, DimensionMismatch, IndexOutOfRange, SchemaError
from .expr import Expr, Var, Not, BinOp, evaluate, expression_matrix, parse_expression, variables_of
from .stp import LogicalMatrix, decode_state, encode_state, khatri_rao, log2_exact

MAX_SIGNAL_BITS = 24
ORDERS = (("u", "x", "d", "f"), ("u", "x", "f", "d"))


@dataclass(frozen=True)
class BooleanNetwork:
    """Autonomous network x(t+1) = L x(t), optionally with a disturbance tail.

    With ``tail_bits > 0`` the columns of ``L`` run over (state, tail) pairs.
    """

    n: int
    L: LogicalMatrix
    tail_bits: int = 0

    def __post_init__(self):
        size = 2 ** self.n
        if self.L.rows != size or self.L.ncols != size * 2 ** self.tail_bits:
            raise DimensionMismatch(
                f"BN with n={self.n} needs a {size}x{size * 2 ** self.tail_bits} matrix, got "
                f"{self.L.rows}x{self.L.ncols}"
            )

    @property
    def num_states(self) -> int:
        return 2 ** self.n

    def step(self, x: int, tail: int = 1) -> int:
        return self.L.cols[(x - 1) * 2 ** self.tail_bits + tail - 1]


@dataclass(frozen=True)
class RuleSet:
    """Parsed update rules together with their source text."""

    state: tuple[Expr, ...]
    output: tuple[Expr, ...] = ()
    state_text: tuple[str, ...] = ()
    output_text: tuple[str, ...] = ()


@dataclass(frozen=True)
class BooleanControlNetwork:
    n: int
    L: LogicalMatrix
    m: int = 0
    d: int = 0
    t: int = 0
    H: LogicalMatrix | None = None
    s: int | None = None
    order: tuple[str, ...] = ("u", "x", "d", "f")
    name: str = ""
    rules: RuleSet | None = field(default=None, compare=False)
    state_permutation: tuple[int, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.s is None:
            object.__setattr__(self, "s", self.n)
        object.__setattr__(self, "order", tuple(self.order))
        n, s = self.n, self.s
        if min(self.n, self.m, self.d, self.t) < 0 or self.n < 1:
            raise DimensionMismatch("signal counts must be non-negative and n >= 1")
        if self.n + self.m + self.d + self.t > MAX_SIGNAL_BITS:
            raise DimensionMismatch(
                f"n+m+d+t = {self.n + self.m + self.d + self.t} exceeds {MAX_SIGNAL_BITS}"
            )
        if not 1 <= s <= n:
            raise DimensionMismatch(f"s={s} must lie in [1, n={n}]")
        if self.order not in ORDERS:
            raise DimensionMismatch(f"unsupported signal order {self.order}")
        if self.L.ncols != 2 ** (self.m + n + self.d + self.t):
            raise DimensionMismatch(
                f"L has {self.L.ncols} columns, expected 2^(m+n+d+t) = "
                f"{2 ** (self.m + n + self.d + self.t)}"
            )
        if self.L.rows not in (2 ** n, 2 ** s):
            raise DimensionMismatch(f"L has {self.L.rows} rows, expected 2^n or 2^s")
        if self.H is not None:
            log2_exact(self.H.rows)
            H = self.H
            if H.ncols == 2 ** s and s < n:
                spread = 2 ** (n - s)
                H = LogicalMatrix(H.rows, tuple(c for c in H.cols for _ in range(spread)))
                object.__setattr__(self, "H", H)
            if H.ncols != 2 ** n:
                raise DimensionMismatch(f"H has {H.ncols} columns, expected 2^n = {2 ** n}")
            spread = 2 ** (n - s)
            for k in range(2 ** s):
                if len(set(H.cols[k * spread:(k + 1) * spread])) != 1:
                    raise DimensionMismatch(
                        f"H depends on variables beyond the first s={s} (substate {k + 1})"
                    )

    # -- sizes ---------------------------------------------------------------
    @property
    def p(self) -> int:
        return 0 if self.H is None else log2_exact(self.H.rows)

    @property
    def num_states(self) -> int:
        return 2 ** self.n

    @property
    def num_inputs(self) -> int:
        return 2 ** self.m

    @property
    def num_substates(self) -> int:
        return 2 ** self.s

    @property
    def completions(self) -> int:
        """Number of full states sharing one substate."""
        return 2 ** (self.n - self.s)

    @property
    def tail_size(self) -> int:
        return 2 ** (self.d + self.t)

    @property
    def num_outputs(self) -> int:
        return self.H.rows if self.H is not None else self.num_substates

    @property
    def is_subsystem(self) -> bool:
        """True when L only tracks the substate (rows 2^s with s < n)."""
        return self.L.rows != 2 ** self.n

    # -- index arithmetic ----------------------------------------------------
    def tail_index(self, dist: int = 1, fault: int = 1) -> int:
        if self.order[2] == "d":
            return (dist - 1) * 2 ** self.t + fault
        return (fault - 1) * 2 ** self.d + dist

    def split_tail(self, tail: int) -> tuple[int, int]:
        """Inverse of :meth:`tail_index`: (disturbance, fault)."""
        if self.order[2] == "d":
            dist, fault = divmod(tail - 1, 2 ** self.t)
        else:
            fault, dist = divmod(tail - 1, 2 ** self.d)
        return dist + 1, fault + 1

    def column_index(self, u: int, x: int, tail: int = 1) -> int:
        return (u - 1) * 2 ** (self.n + self.d + self.t) + (x - 1) * self.tail_size + tail

    def next_row(self, u: int, x: int, tail: int = 1) -> int:
        """Raw row of L (full state or substate, depending on L's height)."""
        return self.L.cols[self.column_index(u, x, tail) - 1]

    def project(self, row: int) -> int:
        """Map a row of L to a substate index."""
        if self.is_subsystem:
            return row
        return (row - 1) // self.completions + 1

    def substate_of(self, x: int) -> int:
        return (x - 1) // self.completions + 1

    def states_of_substate(self, k: int) -> range:
        base = (k - 1) * self.completions
        return range(base + 1, base + self.completions + 1)

    def output_of_state(self, x: int) -> int:
        if self.H is None:
            return self.substate_of(x)
        return self.H.cols[x - 1]

    def output_of_substate(self, k: int) -> int:
        if self.H is None:
            return k
        return self.H.cols[(k - 1) * self.completions]

    # -- derived tables ------------------------------------------------------
    @cached_property
    def _successor_table(self) -> dict[tuple[int, int], frozenset[int]]:
        table = {}
        for u in range(1, self.num_inputs + 1):
            for k in range(1, self.num_substates + 1):
                succ = set()
                for x in self.states_of_substate(k):
                    for tail in range(1, self.tail_size + 1):
                        succ.add(self.project(self.next_row(u, x, tail)))
                table[(k, u)] = frozenset(succ)
        return table

    def successors(self, k: int, u: int) -> frozenset[int]:
        """Successor substates of substate ``k`` under input ``u`` over all completions."""
        if not 1 <= k <= self.num_substates:
            raise IndexOutOfRange(f"substate {k} outside [1, {self.num_substates}]")
        if not 1 <= u <= self.num_inputs:
            raise IndexOutOfRange(f"input {u} outside [1, {self.num_inputs}]")
        return self._successor_table[(k, u)]

    def successor_outputs(self, k: int, u: int) -> frozenset[int]:
        """O_{k+}^u: outputs the successors of substate ``k`` can produce under ``u``."""
        return frozenset(self.output_of_substate(j) for j in self.successors(k, u))

    def output_sets(self) -> tuple[frozenset[int], ...]:
        """O_s1 ... over full states: entry ``i-1`` holds the states with output ``i``."""
        groups: list[set[int]] = [set() for _ in range(self.num_outputs)]
        for x in range(1, self.num_states + 1):
            groups[self.output_of_state(x) - 1].add(x)
        return tuple(frozenset(g) for g in groups)

    def substate_output_sets(self) -> tuple[frozenset[int], ...]:
        groups: list[set[int]] = [set() for _ in range(self.num_outputs)]
        for k in range(1, self.num_substates + 1):
            groups[self.output_of_substate(k) - 1].add(k)
        return tuple(frozenset(g) for g in groups)

    def with_H(self, H: LogicalMatrix | None) -> "BooleanControlNetwork":
        return BooleanControlNetwork(
            n=self.n, L=self.L, m=self.m, d=self.d, t=self.t, H=H, s=self.s,
            order=self.order, name=self.name,
        )

    def pinned(self, u: int) -> BooleanNetwork:
        """The autonomous network obtained by holding input ``u`` constant."""
        if self.is_subsystem:
            raise DimensionMismatch("a subsystem matrix cannot be run as a full network")
        width = 2 ** (self.n + self.d + self.t)
        block = self.L.cols[(u - 1) * width:u * width]
        return BooleanNetwork(self.n, LogicalMatrix(self.L.rows, block), self.d + self.t)


def output_sets(net: BooleanControlNetwork) -> tuple[frozenset[int], ...]:
    return net.output_sets()


def subsystem_successors(net: BooleanControlNetwork, k: int, i: int) -> frozenset[int]:
    return net.successors(k, i)


# -- compiling rules ----------------------------------------------------------

def signal_names(n: int, m: int = 0, d: int = 0, t: int = 0,
                 order: Sequence[str] = ("u", "x", "d", "f")) -> list[str]:
    """Variable names in column order."""
    groups = {
        "u": [f"u{i}" for i in range(1, m + 1)],
        "x": [f"x{i}" for i in range(1, n + 1)],
        "d": [f"d{i}" for i in range(1, d + 1)],
        "f": [f"f{i}" for i in range(1, t + 1)],
    }
    return [name for key in order for name in groups[key]]


def _rename(expr: Expr, mapping: dict[str, str]) -> Expr:
    if isinstance(expr, Var):
        return Var(mapping.get(expr.name, expr.name))
    if isinstance(expr, Not):
        return Not(_rename(expr.arg, mapping))
    if isinstance(expr, BinOp):
        return BinOp(expr.op, _rename(expr.left, mapping), _rename(expr.right, mapping))
    return expr


def _strip_lhs(text: str) -> str:
    # rules may be written as "x1+ = rhs", "x1 = rhs" or just "rhs"
    head, sep, rest = text.partition("=")
    if sep and not rest.startswith(">") and not head.endswith(("<", "=")):
        lhs = head.strip().rstrip("+").strip()
        if lhs.isidentifier():
            return rest
    return text


def parse_rules(state: Sequence[str], output: Sequence[str], n: int, m: int = 0,
                d: int = 0, t: int = 0) -> RuleSet:
    names = signal_names(n, m, d, t)
    states_only = signal_names(n)
    if len(state) != n:
        raise ArityMismatch(f"{len(state)} state rules given for n={n}")
    state_exprs = tuple(parse_expression(_strip_lhs(r), names) for r in state)
    output_exprs = tuple(parse_expression(_strip_lhs(r), states_only) for r in output)
    return RuleSet(state_exprs, output_exprs, tuple(state), tuple(output))


def reorder_output_friendly(rules: RuleSet, n: int) -> tuple[RuleSet, tuple[int, ...], int]:
    """Renumber state variables so those read by the outputs come first.

    Returns the renamed rules, the permutation (new position -> old variable
    number) and the number of output-friendly variables.
    """
    used = set()
    for expr in rules.output:
        used |= {int(v[1:]) for v in variables_of(expr) if v.startswith("x")}
    front = sorted(used)
    perm = tuple(front + [i for i in range(1, n + 1) if i not in used])
    mapping = {f"x{old}": f"x{new}" for new, old in enumerate(perm, start=1)}
    state = tuple(_rename(rules.state[old - 1], mapping) for old in perm)
    output = tuple(_rename(e, mapping) for e in rules.output)
    renamed = RuleSet(state, output)
    if perm == tuple(range(1, n + 1)):
        renamed = RuleSet(state, output, rules.state_text, rules.output_text)
    return renamed, perm, max(len(used), 1)


def compile_algebraic_form(rules: RuleSet, n: int, m: int = 0, d: int = 0, t: int = 0,
                           order: Sequence[str] = ("u", "x", "d", "f"), s: int | None = None,
                           method: str = "evaluate", name: str = "") -> BooleanControlNetwork:
    """Build L (and H, when output rules exist) from update rules.

    ``method="evaluate"`` fills each column from a truth-table evaluation;
    ``method="stp"`` multiplies structure matrices instead. Both give the same network.
    """
    if len(rules.state) != n:
        raise ArityMismatch(f"{len(rules.state)} state rules given for n={n}")
    names = signal_names(n, m, d, t, order)
    state_names = signal_names(n)
    total = len(names)
    if method == "evaluate":
        cols = []
        for c in range(1, 2 ** total + 1):
            env = dict(zip(names, decode_state(c, total)))
            cols.append(encode_state([evaluate(e, env) for e in rules.state]))
        L = LogicalMatrix(2 ** n, tuple(cols))
        H = None
        if rules.output:
            hcols = []
            for x in range(1, 2 ** n + 1):
                env = dict(zip(state_names, decode_state(x, n)))
                hcols.append(encode_state([evaluate(e, env) for e in rules.output]))
            H = LogicalMatrix(2 ** len(rules.output), tuple(hcols))
    elif method == "stp":
        L = _stack([expression_matrix(e, names) for e in rules.state])
        H = _stack([expression_matrix(e, state_names) for e in rules.output]) if rules.output else None
    else:
        raise ValueError(f"unknown method {method!r}")
    return BooleanControlNetwork(n=n, L=L, m=m, d=d, t=t, H=H, s=s, order=tuple(order),
                                 name=name, rules=rules)


def _stack(mats: list[LogicalMatrix]) -> LogicalMatrix:
    acc = mats[0]
    for mat in mats[1:]:
        acc = khatri_rao(acc, mat)
    return acc


def random_network(rng, n: int, m: int = 0, d: int = 0, t: int = 0, s: int | None = None,
                   p: int | None = None, subsystem: bool = False,
                   order: Sequence[str] = ("u", "x", "d", "f")) -> BooleanControlNetwork:
    """Uniformly random network with the given dimensions (``rng``: ``random.Random``)."""
    s = n if s is None else s
    rows = 2 ** s if subsystem else 2 ** n
    L = LogicalMatrix(rows, tuple(rng.randint(1, rows) for _ in range(2 ** (m + n + d + t))))
    H = None
    if p is not None:
        sub = [rng.randint(1, 2 ** p) for _ in range(2 ** s)]
        H = LogicalMatrix(2 ** p, tuple(sub))
    return BooleanControlNetwork(n=n, L=L, m=m, d=d, t=t, H=H, s=s, order=tuple(order))
