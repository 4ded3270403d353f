"""Witness machinery: the doubling recurrence, the constant grid, and the
witness axioms that give every existential sentence a named example.

Row i of the grid holds constants c_{i j} for 0 <= j <= a_i, where a_0 = 1
and a_{i+1} = a_i(a_i + 1).  Each constant is produced by a deterministic
allocator keyed by the code of a defining disjunction, so equal keys share
a constant and distinct keys never collide.  The witness axiom for the
n-th one-free-variable formula says: if something satisfies it, one of the
row-n constants does.

Allocated constants are fresh, disjoint from the constants naming carrier
elements, so they denote nothing in the finite model; their meaning comes
entirely from the axioms.
"""

import itertools
from dataclasses import dataclass

from .coding import Coder, one_free_variable_formulas
from .syntax import (
    Const,
    Expr,
    Ex,
    Imp,
    Not,
    Var,
    disjunction,
    free_vars,
    is_formula,
    substitute,
)

A_CAP = 8  # a_8 already has 52 digits


def a_sequence(i_max: int) -> list[int]:
    """Prefix a_0..a_{i_max} of the doubling recurrence."""
    if i_max < 0 or i_max > A_CAP:
        raise ValueError(f"row index must lie in [0, {A_CAP}]")
    a = [1]
    for _ in range(i_max):
        a.append(a[-1] * (a[-1] + 1))
    return a


def tuple_of_rank(i: int, r: int) -> tuple[int, ...]:
    """The rank-r tuple (j_0..j_i), 0 <= j_k <= a_k, ascending lexicographic.

    There are exactly a_{i+1} such tuples because the interval sizes a_k + 1
    multiply out to a_{i+1}."""
    a = a_sequence(i)
    total = 1
    for ak in a:
        total *= ak + 1
    if not 0 <= r < total:
        raise ValueError(f"rank {r} out of range [0, {total})")
    out = []
    for ak in reversed(a):
        r, jk = divmod(r, ak + 1)
        out.append(jk)
    return tuple(reversed(out))


def rank_of_tuple(components: tuple[int, ...]) -> int:
    if not components:
        raise ValueError("empty tuple has no rank")
    a = a_sequence(len(components) - 1)
    rank = 0
    for jk, ak in zip(components, a):
        if not 0 <= jk <= ak:
            raise ValueError(f"component {jk} outside [0, {ak}]")
        rank = rank * (ak + 1) + jk
    return rank


class ConstantAllocator:
    """Deterministic fresh-constant dispenser keyed by formula code.

    The first allocated index is one past every reserved index, so grid
    constants never collide with the constants naming carrier elements."""

    def __init__(self, reserved: tuple[int, ...] = ()):
        self.assigned: dict[int, int] = {}
        self.next = max(reserved) + 1 if reserved else 0

    def allocate(self, key_code: int) -> int:
        got = self.assigned.get(key_code)
        if got is None:
            got = self.next
            self.assigned[key_code] = got
            self.next += 1
        return got


def the_free_var(phi: Expr) -> int:
    fv = free_vars(phi)
    if len(fv) != 1:
        raise ValueError("expected exactly one free variable")
    return next(iter(fv))


def _swap_var(e: Expr, old: int, new: int) -> Expr:
    if e.kind == "var":
        return Var(new) if e.index == old else e
    index = e.index
    if e.kind in ("all", "ex") and e.index == old:
        index = new
    if not e.parts and index == e.index:
        return e
    return Expr(e.kind, parts=tuple(_swap_var(p, old, new) for p in e.parts), index=index, name=e.name)


def _max_index(e: Expr) -> int:
    own = e.index if e.kind in ("var", "all", "ex") else -1
    return max([own] + [_max_index(p) for p in e.parts]) if e.parts else own


def canonical_v0(phi: Expr) -> Expr:
    """Rename the single free variable to v0, alpha-renaming any bound v0
    out of the way first so nothing gets captured."""
    x = the_free_var(phi)
    if x == 0:
        return phi
    out = phi
    if _occurs(out, 0):
        out = _swap_var(out, 0, _max_index(out) + 1)  # bound v0 only: x != 0 is the one free var
    return _swap_var(out, x, 0)


def _occurs(e: Expr, i: int) -> bool:
    if e.kind == "var" and e.index == i:
        return True
    if e.kind in ("all", "ex") and e.index == i:
        return True
    return any(_occurs(p, i) for p in e.parts)


class HenkinGrid:
    """Rows of witness constants plus the machinery that names them."""

    def __init__(self, coder: Coder, psi: list[Expr], reserved: tuple[int, ...]):
        for f in psi:
            if not is_formula(f):
                raise ValueError("witness formulas must be formulas")
            the_free_var(f)
        self.coder = coder
        self.psi = list(psi)
        self.a = a_sequence(min(len(psi) - 1, A_CAP)) if psi else [1]
        self.allocator = ConstantAllocator(reserved)
        self.grid: dict[tuple[int, int], int] = {}
        self.keys: dict[tuple[int, int], Expr] = {}
        self.rows_built = -1

    def constant(self, i: int, j: int) -> int:
        got = self.grid.get((i, j))
        if got is None:
            raise KeyError(f"grid slot ({i}, {j}) not built")
        return got

    def _instantiated(self, k: int, jk: int) -> Expr:
        # the jk-th option for row k: jk = 0 drops out, jk >= 1 names slot jk - 1
        phi = self.psi[k]
        return substitute(phi, the_free_var(phi), Const(self.constant(k, jk - 1)))

    def _fill_row(self, row: int) -> None:
        a_row = self.a[row]
        if row == 0:
            key = Not(self.psi[0])
            for j in range(a_row + 1):
                self._set(0, j, key)
            return
        ranks = a_row
        for j in range(a_row + 1):
            rank = 0 if j == ranks else j  # the slot past the last rank reuses the all-zero key
            comps = tuple_of_rank(row - 1, rank)
            parts = [Not(self._instantiated(k, jk)) for k, jk in enumerate(comps) if jk > 0]
            parts.append(Not(self.psi[row]))
            self._set(row, j, disjunction(parts))

    def _set(self, i: int, j: int, key: Expr) -> None:
        self.grid[(i, j)] = self.allocator.allocate(self.coder.encode(key))
        self.keys[(i, j)] = key


def make_grid(coder: Coder, consts: tuple[int, ...], count: int) -> HenkinGrid:
    """Grid over the first `count` one-free-variable formulas, by code.

    count = 0 builds an empty grid, the degenerate case for signatures with
    no one-free-variable formulas at all."""
    if count < 0:
        raise ValueError("count must be nonnegative")
    bound = 24**3
    psi: list[Expr] = []
    while len(psi) < count:
        if bound > 24**6:
            raise ValueError("witness formula enumeration exhausted")
        psi = one_free_variable_formulas(coder, consts, bound)
        bound *= 24
    return HenkinGrid(coder, psi[:count], consts)


def build_grid(g: HenkinGrid, i_max: int) -> HenkinGrid:
    """Fill rows 0..i_max; construction is sequential since row i looks up
    constants of rows below it."""
    if i_max >= len(g.psi):
        raise ValueError("not enough witness formulas enumerated")
    if i_max >= len(g.a):
        g.a = a_sequence(i_max)
    for row in range(g.rows_built + 1, i_max + 1):
        g._fill_row(row)
        g.rows_built = row
    return g


def build_F(g: HenkinGrid, n: int) -> Expr:
    """Witness axiom n: an existential example implies a named one."""
    if n > g.rows_built:
        raise ValueError(f"grid row {n} not built")
    psi = canonical_v0(g.psi[n])
    disjuncts = [substitute(psi, 0, Const(g.constant(n, j))) for j in range(g.a[n] + 1)]
    axiom = Imp(Ex(0, psi), disjunction(disjuncts))
    assert g.coder.encode(axiom) > n, "witness axiom codes must outgrow their index"
    return axiom


def star_sequence(g: HenkinGrid, ms: tuple[int, ...], base: list[Expr]) -> list[Expr]:
    """The unique correct sequence for increasing positions ms over base.

    Each entry instantiates the next negated base formula at the constant
    the allocator assigns to the disjunction of everything so far; shared
    prefixes therefore share constants exactly."""
    _check_increasing(ms, len(base))
    out: list[Expr] = []
    for m in ms:
        phi = base[m - 1]
        key = disjunction(out + [Not(phi)])
        c = g.allocator.allocate(g.coder.encode(key))
        out.append(Not(substitute(phi, the_free_var(phi), Const(c))))
    return out


def prec(ms_a: tuple[int, ...], ms_b: tuple[int, ...], w: int) -> int:
    """Order on increasing sequences over {1..w}: negative when ms_a comes
    strictly earlier.  First disagreement decides; on a shared prefix the
    extension comes earlier, so (1..w) is least and the empty sequence is
    greatest."""
    _check_increasing(ms_a, w)
    _check_increasing(ms_b, w)
    for x, y in zip(ms_a, ms_b):
        if x != y:
            return -1 if x < y else 1
    if len(ms_a) == len(ms_b):
        return 0
    return -1 if len(ms_a) > len(ms_b) else 1


def _check_increasing(ms: tuple[int, ...], w: int) -> None:
    if any(not 1 <= m <= w for m in ms):
        raise ValueError(f"positions must lie in [1, {w}]")
    if any(a >= b for a, b in itertools.pairwise(ms)):
        raise ValueError("positions must be strictly increasing")


def grid_dump(g: HenkinGrid) -> dict:
    """JSON-ready view: every slot with its constant and defining key."""
    slots = {
        f"{i},{j}": {"constant": g.grid[(i, j)], "key": g.coder.encode(g.keys[(i, j)])}
        for (i, j) in sorted(g.grid)
    }
    return {
        "a": g.a[: g.rows_built + 1],
        "psi": [g.coder.encode(f) for f in g.psi],
        "rows_built": g.rows_built,
        "slots": slots,
        "allocator": {str(code): idx for code, idx in sorted(g.allocator.assigned.items())},
    }
