"""Bounded binary tree of truth assignments and the extracted truth set.

A node is a finite 0/1 string indexed by codes.  Four clauses decide
membership: 1-bits sit only on sentence codes; every forced axiom below the
length carries 1; complementary sentence pairs below the length carry
complementary bits; and every well-formed coded derivation below the length
whose cited assumptions all carry 1 forces a 1 onto each of its sentence
steps.  The forced axiom set combines bounded provability with the witness
scheme axioms of a Henkin grid.

Pool enumeration is exact below EXACT_BOUND, so node checking and closure
are exact there.  For longer assignments the pair and derivation clauses are
additionally probed with derivations rebuilt directly from the 1-bits, which
refutes the standard violations but cannot certify a node exhaustively.
"""

from __future__ import annotations

from bisect import bisect_left
from dataclasses import dataclass
from functools import lru_cache

from .coding import (
    Coder,
    CodingError,
    L_AXL,
    L_AXT,
    L_DRV,
    L_GEN,
    L_MP,
    L_STEP,
    sentences_below,
    string_value,
)
from .henkin import HenkinGrid, build_F
from .kernel import is_consistent_bounded, schema_matches
from .models import ModelDomainError, evaluate
from .omega import OmegaContext
from .syntax import All, Expr, Imp, Not, is_sentence

EXACT_BOUND = 24**6  # code pools are enumerated exactly below this


class PathNotFoundError(RuntimeError):
    """No node of the requested length exists or survives verification."""


class TruthSetError(RuntimeError):
    """A truth-set postcondition failed."""

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = tuple(violations)


# -- truth assignments -------------------------------------------------------


@dataclass(frozen=True)
class TruthAssignment:
    """0/1 bits over all codes below length, stored as the set of 1-bits."""

    length: int
    ones: frozenset[int]

    def __post_init__(self):
        if self.length < 0:
            raise ValueError("length must be nonnegative")
        for c in self.ones:
            if not 0 <= c < self.length:
                raise ValueError(f"bit index {c} outside [0, {self.length})")

    def bit(self, code: int) -> int:
        if not 0 <= code < self.length:
            raise IndexError(f"code {code} outside [0, {self.length})")
        return 1 if code in self.ones else 0

    def prefix(self, k: int) -> "TruthAssignment":
        if k > self.length:
            raise ValueError("prefix cannot be longer than the assignment")
        return TruthAssignment(k, frozenset(c for c in self.ones if c < k))

    def runs(self) -> tuple[tuple[int, int], ...]:
        """Maximal runs of 1-bits as half-open (start, stop) pairs."""
        out: list[list[int]] = []
        for c in sorted(self.ones):
            if out and out[-1][1] == c:
                out[-1][1] = c + 1
            else:
                out.append([c, c + 1])
        return tuple((a, b) for a, b in out)

    @classmethod
    def from_runs(cls, length: int, runs) -> "TruthAssignment":
        ones: set[int] = set()
        for a, b in runs:
            ones.update(range(a, b))
        return cls(length, frozenset(ones))


# -- code pools --------------------------------------------------------------
#
# Pools are cached per power-of-24 bucket and sliced, so sweeping many
# nearby bounds (the level sweep, prefix checks) shares one enumeration.


def _bucket(bound: int) -> int:
    b = 24**2
    while b < bound:
        b *= 24
    return b


@lru_cache(maxsize=None)
def _sentence_bucket(coder: Coder, consts: tuple[int, ...], bucket: int):
    pool = tuple(sentences_below(coder, consts, bucket))
    return pool, tuple(c for c, _ in pool)


def _sentences_upto(coder: Coder, consts: tuple[int, ...], bound: int):
    if bound > EXACT_BOUND:
        raise ValueError("sentence pool too large to enumerate exactly")
    pool, codes = _sentence_bucket(coder, consts, _bucket(bound))
    return pool[: bisect_left(codes, bound)]


@dataclass(frozen=True)
class SurveyedDerivation:
    """A well-formed coded derivation, reduced to what the tree clause reads:
    the codes cited as assumptions and the codes of its sentence steps."""

    code: int
    assumptions: tuple[int, ...]
    sentence_steps: tuple[int, ...]


def _survey(coder: Coder, code: int, steps) -> SurveyedDerivation | None:
    # structural validity only: assumption steps are taken as given rather
    # than looked up in any theory
    for k, (f, just) in enumerate(steps):
        tag = just[0]
        if tag == "axl":
            if not schema_matches(just[1], f):
                return None
        elif tag == "mp":
            i, j = just[1], just[2]
            if not (0 <= i < k and 0 <= j < k):
                return None
            if steps[j][0] != Imp(steps[i][0], f):
                return None
        elif tag == "gen":
            i = just[1]
            if not 0 <= i < k:
                return None
            if f.kind != "all" or f.parts[0] != steps[i][0]:
                return None
        elif tag != "axt":
            return None
    assumptions = sorted({coder.encode(f) for f, just in steps if just[0] == "axt"})
    sentences = sorted({coder.encode(f) for f, _ in steps if is_sentence(f)})
    return SurveyedDerivation(code, tuple(assumptions), tuple(sentences))


@lru_cache(maxsize=None)
def _derivation_bucket(coder: Coder, bucket: int):
    # every derivation string starts DRV STEP <justification letter>; sweep
    # only those prefix ranges, letter count by letter count
    found: list[SurveyedDerivation] = []
    letters = 4
    while string_value([L_DRV, L_STEP, L_AXL] + [1] * (letters - 3)) < bucket:
        for just in (L_AXL, L_AXT, L_MP, L_GEN):
            lo = string_value([L_DRV, L_STEP, just] + [1] * (letters - 3))
            hi = string_value([L_DRV, L_STEP, just] + [24] * (letters - 3))
            for code in range(lo, min(hi, bucket - 1) + 1):
                try:
                    steps = coder.decode_derivation(code)
                except CodingError:
                    continue
                d = _survey(coder, code, steps)
                if d is not None:
                    found.append(d)
        letters += 1
    found.sort(key=lambda d: d.code)
    return tuple(found), tuple(d.code for d in found)


def coded_derivations_below(coder: Coder, bound: int) -> tuple[SurveyedDerivation, ...]:
    """Every well-formed coded derivation with code < bound, ascending."""
    if bound > EXACT_BOUND:
        raise ValueError("derivation pool too large to enumerate exactly")
    pool, codes = _derivation_bucket(coder, _bucket(bound))
    return pool[: bisect_left(codes, bound)]


# -- the forced axiom set ----------------------------------------------------


@dataclass(frozen=True)
class AxiomSetAM:
    """Sentences the tree must affirm below a universe bound, each tagged
    with the reason it is in: bounded-provable, or a witness scheme axiom."""

    universe: int
    entries: tuple[tuple[int, str], ...]

    def __post_init__(self):
        codes = [c for c, _ in self.entries]
        if codes != sorted(set(codes)):
            raise ValueError("entries must be strictly ascending by code")
        if codes and (codes[0] < 0 or codes[-1] >= self.universe):
            raise ValueError("entry code outside the universe")
        object.__setattr__(self, "_codes", frozenset(codes))

    def __contains__(self, code: int) -> bool:
        return code in self._codes

    def codes(self) -> frozenset[int]:
        return self._codes


def build_AM(ctx: OmegaContext, g: HenkinGrid, universe: int) -> AxiomSetAM:
    """Collect every sentence below universe provable at the context's proof
    bound, plus every witness scheme axiom whose code lands below universe.

    A model on the context lets false sentences skip the proof search: the
    kernel never proves anything that fails in a model of the theory.
    """
    first_unbuilt = g.rows_built + 1
    if first_unbuilt < len(g.psi) and first_unbuilt < universe:
        raise ValueError("grid rows not built far enough for this universe")
    entries: dict[int, str] = {}
    for n in range(g.rows_built + 1):
        c = ctx.coder.encode(build_F(g, n))
        if c < universe:
            entries[c] = f"witness-scheme:{n}"
    for c, s in _sentences_upto(ctx.coder, ctx.consts, universe):
        if c in entries:
            continue
        if ctx.model is not None:
            try:
                if evaluate(ctx.model, s) == 0:
                    continue
            except (ModelDomainError, ValueError):
                pass
        if ctx.provable(s):
            entries[c] = "provable"
    return AxiomSetAM(universe, tuple(sorted(entries.items())))


# -- node checking -----------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    clause: str  # sentence-bit | axiom-bit | pair | derivation
    code: int
    detail: str


def _one_bit_probes(coder: Coder, t: TruthAssignment):
    """Derivations rebuilt from the 1-bits, for lengths past the exact sweep:
    one generalization per 1-bit and one modus ponens per matching pair."""
    decoded = []
    for c in sorted(t.ones):
        s = coder.try_decode_sentence(c)
        if s is not None:
            decoded.append((c, s))
    for c, s in decoded:
        yield [(s, ("axt",)), (All(0, s), ("gen", 0))]
        for c2, s2 in decoded:
            if s2.kind == "imp" and s2.parts[0] == s:
                yield [(s, ("axt",)), (s2, ("axt",)), (s2.parts[1], ("mp", 0, 1))]


def node_violations(
    t: TruthAssignment, am: AxiomSetAM, ctx: OmegaContext, limit: int | None = None
) -> tuple[Violation, ...]:
    """Clause violations in clause order; exact below EXACT_BOUND.

    Forced axioms are checked over the axiom set's own enumerated range, so
    exactness of the axiom clause also needs am.universe >= t.length.
    """
    coder = ctx.coder
    out: list[Violation] = []

    def full() -> bool:
        return limit is not None and len(out) >= limit

    for c in sorted(t.ones):
        if coder.try_decode_sentence(c) is None:
            out.append(Violation("sentence-bit", c, "1-bit on a non-sentence code"))
            if full():
                return tuple(out)

    for c, prov in am.entries:
        if c < t.length and c not in t.ones:
            out.append(Violation("axiom-bit", c, f"forced axiom ({prov}) carries 0"))
            if full():
                return tuple(out)

    swept = min(t.length, EXACT_BOUND)
    for c, s in _sentences_upto(coder, ctx.consts, swept):
        nc = coder.encode(Not(s))
        if nc < t.length and t.bit(c) == t.bit(nc):
            word = "both carry 1" if t.bit(c) else "both carry 0"
            out.append(Violation("pair", c, f"complement {nc}: {word}"))
            if full():
                return tuple(out)
    if t.length > EXACT_BOUND:
        for c in sorted(t.ones):
            if c < swept:
                continue  # already swept
            s = coder.try_decode_sentence(c)
            if s is None:
                continue  # clause (i) reported it
            nc = coder.encode(Not(s))
            if nc < t.length and nc in t.ones:
                out.append(Violation("pair", c, f"complement {nc}: both carry 1"))
                if full():
                    return tuple(out)

    derivations = list(coded_derivations_below(coder, swept))
    if t.length > EXACT_BOUND:
        for steps in _one_bit_probes(coder, t):
            code = coder.encode_derivation(steps)
            if swept <= code < t.length:
                d = _survey(coder, code, steps)
                if d is not None:
                    derivations.append(d)
    for d in derivations:
        if all(a in t.ones for a in d.assumptions):
            for s in d.sentence_steps:
                if s not in t.ones:
                    out.append(
                        Violation("derivation", s, f"derivation {d.code} forces 1")
                    )
                    if full():
                        return tuple(out)
    return tuple(out)


def is_node(t: TruthAssignment, am: AxiomSetAM, ctx: OmegaContext) -> bool:
    """True when no clause violation is found (exact below EXACT_BOUND)."""
    return not node_violations(t, am, ctx, limit=1)


# -- closure and path search -------------------------------------------------


class _Conflict(Exception):
    def __init__(self, code: int):
        super().__init__(f"conflicting bits at code {code}")
        self.code = code


class _State:
    """Partial assignment with a trail for backtracking.  Pair edges carry
    the complementary-bit constraint; derivations fire once their cited
    assumptions are all set to 1."""

    def __init__(self, adj, derivations, trace=None):
        self.adj = adj
        self.derivations = derivations
        self.trace = trace
        self.bits: dict[int, int] = {}
        self.trail: list[int] = []
        self.queue: list[int] = []
        self.constrained = sorted(adj)
        self.cursor = 0

    def assign(self, code: int, b: int, why: str) -> None:
        cur = self.bits.get(code)
        if cur is not None:
            if cur != b:
                raise _Conflict(code)
            return
        self.bits[code] = b
        self.trail.append(code)
        self.queue.append(code)
        if self.trace is not None:
            self.trace.setdefault(code, why)

    def propagate(self) -> None:
        while True:
            while self.queue:
                c = self.queue.pop()
                b = self.bits[c]
                for nb in self.adj.get(c, ()):
                    self.assign(nb, 1 - b, f"complement:{c}")
            fired = False
            for d in self.derivations:
                if all(self.bits.get(a) == 1 for a in d.assumptions):
                    for s in d.sentence_steps:
                        if self.bits.get(s) != 1:
                            self.assign(s, 1, f"derivation:{d.code}")
                            fired = True
            if not fired and not self.queue:
                return

    def next_unresolved(self) -> int | None:
        while self.cursor < len(self.constrained):
            c = self.constrained[self.cursor]
            if c not in self.bits:
                return c
            self.cursor += 1
        return None

    def mark(self) -> int:
        return len(self.trail)

    def undo(self, mark: int) -> None:
        for c in self.trail[mark:]:
            del self.bits[c]
        del self.trail[mark:]
        self.queue.clear()


def _complete(state: _State) -> bool:
    """Deterministic depth-first completion: lowest unresolved code first,
    bit 1 before bit 0.  True when state holds a full assignment."""
    try:
        state.propagate()
    except _Conflict:
        return False
    frames: list[tuple[int, list[int], int, int]] = []
    while True:
        code = state.next_unresolved()
        if code is None:
            return True
        frames.append((code, [1, 0], state.mark(), state.cursor))
        while frames:
            code, options, mark, cursor = frames[-1]
            if not options:
                frames.pop()
                continue
            state.undo(mark)
            state.cursor = cursor
            b = options.pop(0)
            try:
                state.assign(code, b, "choice:least-completion")
                state.propagate()
            except _Conflict:
                continue
            break
        else:
            return False


def _pair_edges(coder: Coder, consts: tuple[int, ...], k: int) -> dict[int, list[int]]:
    adj: dict[int, list[int]] = {}
    for c, s in _sentences_upto(coder, consts, k):
        nc = coder.encode(Not(s))
        if nc < k:
            adj.setdefault(c, []).append(nc)
            adj.setdefault(nc, []).append(c)
    return adj


def _base_state(k, seed, am, ctx, trace=None) -> _State | None:
    """Axiom bits installed and propagated, then the seed on top.  None when
    the axiom bits alone conflict under closure; a conflicting seed is a
    precondition error, whether it hits a forced bit directly or only after
    propagation."""
    coder = ctx.coder
    state = _State(
        _pair_edges(coder, ctx.consts, k),
        coded_derivations_below(coder, k),
        trace=trace,
    )
    for c, prov in am.entries:
        if c < k:
            state.assign(c, 1, f"axiom:{prov}")
    try:
        state.propagate()
    except _Conflict:
        return None
    for code in sorted(seed):
        b = seed[code]
        if not 0 <= code < k:
            raise ValueError(f"seed code {code} outside [0, {k})")
        if b not in (0, 1):
            raise ValueError(f"seed bit for code {code} must be 0 or 1")
        if b == 1 and coder.try_decode_sentence(code) is None:
            raise ValueError(f"seed puts 1 on non-sentence code {code}")
        try:
            state.assign(code, b, "seed")
        except _Conflict:
            raise ValueError(f"seed bit at code {code} conflicts with a forced bit")
    try:
        state.propagate()
    except _Conflict as c:
        raise ValueError(f"seed conflicts with forced bits at code {c.code}")
    return state


def k_closure(k: int, seed, am: AxiomSetAM, ctx: OmegaContext) -> TruthAssignment | None:
    """Least node of length k extending the seed bits, or None when every
    sign assignment of the unresolved pairs conflicts.

    Procedure: start from zeros, force the axiom bits and the seed, close
    under pair complementation and coded derivations below k, then resolve
    remaining complementary pairs depth-first (lowest code first, bit 1
    first).  A seed that contradicts a forced bit is a precondition error.
    """
    if k > EXACT_BOUND:
        raise ValueError("closure universe too large to enumerate exactly")
    state = _base_state(k, seed, am, ctx)
    if state is None or not _complete(state):
        return None
    ones = frozenset(c for c, b in state.bits.items() if b == 1)
    t = TruthAssignment(k, ones)
    breach = node_violations(t, am, ctx, limit=1)
    if breach:
        raise AssertionError(f"completion failed verification: {breach[0]}")
    return t


def replay_trace(t: TruthAssignment, seed, am: AxiomSetAM, ctx: OmegaContext) -> dict[int, str]:
    """Reason per explicitly assigned bit of a closure result, rebuilt by a
    deterministic replay; codes never assigned default to 0 and are absent."""
    trace: dict[int, str] = {}
    state = _base_state(t.length, seed, am, ctx, trace=trace)
    if state is None:
        raise AssertionError("axiom bits conflict, yet a node was produced")
    state.propagate()
    while True:
        code = state.next_unresolved()
        if code is None:
            break
        state.assign(code, t.bit(code), "choice:least-completion")
        state.propagate()
    if frozenset(c for c, b in state.bits.items() if b == 1) != t.ones:
        raise AssertionError("replay does not reproduce the assignment")
    return trace


def _prefix_samples(k: int) -> list[int]:
    samples = {0, 1, k // 8, k // 4, k // 2, (3 * k) // 4, max(k - 1, 0), k}
    return sorted(c for c in samples if 0 <= c <= k)


def find_path(K: int, am: AxiomSetAM, ctx: OmegaContext) -> TruthAssignment:
    """Deterministic node of length K, checked to restrict to a node at
    sampled prefix lengths.  The axiom set is first checked for bounded
    consistency; an inconsistent set can have no node above its codes."""
    sentences = [ctx.coder.decode_expression(c) for c, _ in am.entries]
    if not is_consistent_bounded(
        sentences, ctx.coder, ctx.proof_bound, ctx.consts, ctx.model
    ):
        raise PathNotFoundError("forced axioms are inconsistent at the proof bound")
    t = k_closure(K, {}, am, ctx)
    if t is None:
        raise PathNotFoundError(
            f"no node of length {K}: every sign assignment conflicts"
        )
    for length in _prefix_samples(K):
        bad = node_violations(t.prefix(length), am, ctx, limit=1)
        if bad:
            raise PathNotFoundError(
                f"prefix of length {length} is not a node: "
                f"{bad[0].clause} at code {bad[0].code}"
            )
    return t


def path_with_trace(K: int, am: AxiomSetAM, ctx: OmegaContext):
    """The find_path result together with its per-bit reason trace."""
    t = find_path(K, am, ctx)
    return t, replay_trace(t, {}, am, ctx)


# -- the truth set ------------------------------------------------------------


def extract_T(p: TruthAssignment, am: AxiomSetAM, ctx: OmegaContext) -> frozenset[int]:
    """The 1-bit codes of a full node.

    Verified before returning: no complementary pair carries two 1s, every
    pair below the length is decided, coded derivations below the length are
    respected, and every forced axiom below the length (provable sentences
    and witness scheme axioms alike) is affirmed.  Any failure raises
    TruthSetError carrying the violations.
    """
    violations = node_violations(p, am, ctx)
    if violations:
        raise TruthSetError(
            f"truth set fails {len(violations)} postcondition check(s)", violations
        )
    return frozenset(p.ones)
