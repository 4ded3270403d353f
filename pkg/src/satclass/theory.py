"""Theories: named finite axiom lists plus registered axiom schemes.

Scheme generators are referenced by name and instantiated only up to a code
bound, so theory-axiom membership stays decidable and enumerable in
increasing code order.
"""

from __future__ import annotations

from dataclasses import dataclass

from .coding import Coder, sentences_below
from .syntax import Expr, Not, Or, is_sentence


@dataclass(frozen=True)
class SchemeRef:
    name: str
    bound: int

    def __post_init__(self):
        if self.name not in SCHEME_GENERATORS:
            raise ValueError(f"unknown scheme {self.name!r}")
        if self.bound <= 0:
            raise ValueError("scheme bound must be positive")


@dataclass(frozen=True)
class Theory:
    name: str
    axioms: tuple[Expr, ...]
    schemes: tuple[SchemeRef, ...] = ()

    def __post_init__(self):
        for a in self.axioms:
            if not is_sentence(a):
                raise ValueError(f"theory axiom must be a closed formula: {a!r}")

    def is_axiom(self, coder: Coder, consts: tuple[int, ...], f: Expr) -> bool:
        if f in self.axioms:
            return True
        return any(
            SCHEME_GENERATORS[s.name].contains(coder, f, s.bound) for s in self.schemes
        )

    def axioms_below(self, coder: Coder, consts: tuple[int, ...], bound: int):
        """All theory axioms with code < bound, ascending by code."""
        seen = {}
        for a in self.axioms:
            c = coder.encode(a)
            if c < bound:
                seen[c] = a
        for s in self.schemes:
            for c, f in SCHEME_GENERATORS[s.name].instances_below(
                coder, consts, min(bound, s.bound)
            ):
                seen.setdefault(c, f)
        return sorted(seen.items())


class _ExcludedMiddle:
    """Instances (or s (not s)) for sentences s, instance code < bound."""

    def contains(self, coder: Coder, f: Expr, bound: int) -> bool:
        if f.kind != "or" or f.parts[1] != Not(f.parts[0]) or not is_sentence(f):
            return False
        return coder.encode(f) < bound

    def instances_below(self, coder: Coder, consts: tuple[int, ...], bound: int):
        out = []
        for _, s in sentences_below(coder, consts, bound):
            inst = Or(s, Not(s))
            c = coder.encode(inst)
            if c < bound:
                out.append((c, inst))
        return out


SCHEME_GENERATORS = {"excluded-middle": _ExcludedMiddle()}
