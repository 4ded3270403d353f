"""Text formats: formulas, signature files, theory files, model files.

Formulas are s-expressions: `(and (p v0) (not (q c3)))`, `(all v0 (p v0))`,
bare `bot` / `top`, nullary predicates as `(q)`.  Every parse error carries a
line and column.  The file formats are line-oriented; `#` starts a comment.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

from .models import FiniteModel, make_model
from .syntax import (
    BOT,
    TOP,
    All,
    And,
    Const,
    Eq,
    Ex,
    Expr,
    Fun,
    Imp,
    Not,
    Or,
    Pred,
    Signature,
    Var,
    is_formula,
    is_sentence,
    is_term,
    validate,
)
from .theory import SchemeRef, Theory


class ParseError(ValueError):
    def __init__(self, msg: str, line: int, col: int):
        super().__init__(f"line {line}, column {col}: {msg}")
        self.line = line
        self.col = col


@dataclass(frozen=True)
class _Tok:
    text: str
    line: int
    col: int


def _tokenize(text: str, line0: int = 1) -> list[_Tok]:
    toks = []
    line, col = line0, 1
    i = 0
    while i < len(text):
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
        elif ch in " \t\r":
            col += 1
            i += 1
        elif ch == "#":
            while i < len(text) and text[i] != "\n":
                i += 1
        elif ch in "()":
            toks.append(_Tok(ch, line, col))
            col += 1
            i += 1
        else:
            j = i
            while j < len(text) and text[j] not in " \t\r\n()#":
                j += 1
            toks.append(_Tok(text[i:j], line, col))
            col += j - i
            i = j
    return toks


def _atom_expr(tok: _Tok) -> Expr:
    t = tok.text
    if t == "bot":
        return BOT
    if t == "top":
        return TOP
    if len(t) > 1 and t[0] in "vc" and t[1:].isdigit():
        return Var(int(t[1:])) if t[0] == "v" else Const(int(t[1:]))
    raise ParseError(f"unexpected atom {t!r}", tok.line, tok.col)


class _FormulaParser:
    def __init__(self, sig: Signature, toks: list[_Tok]):
        self.sig = sig
        self.toks = toks
        self.pos = 0

    def _fail(self, msg: str, tok: _Tok | None = None):
        if tok is None:
            tok = self.toks[-1] if self.toks else _Tok("", 1, 1)
        raise ParseError(msg, tok.line, tok.col)

    def next(self) -> _Tok:
        if self.pos >= len(self.toks):
            self._fail("unexpected end of input")
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def parse(self) -> Expr:
        e = self.expr()
        if self.pos < len(self.toks):
            t = self.toks[self.pos]
            self._fail(f"trailing input {t.text!r}", t)
        return e

    def expr(self) -> Expr:
        tok = self.next()
        if tok.text != "(":
            if tok.text == ")":
                self._fail("unexpected ')'", tok)
            if self.sig.is_pred(tok.text) and self.sig.pred_arity(tok.text) == 0:
                return Pred(tok.text)
            return _atom_expr(tok)
        head = self.next()
        if head.text in ("(", ")"):
            self._fail("expected an operator or symbol name", head)
        e = self.compound(head)
        close = self.next()
        if close.text != ")":
            self._fail(f"expected ')', got {close.text!r}", close)
        return e

    def compound(self, head: _Tok) -> Expr:
        h = head.text
        if h == "not":
            return Not(self.formula_arg(head))
        if h in ("and", "or", "imp"):
            a = self.formula_arg(head)
            b = self.formula_arg(head)
            return {"and": And, "or": Or, "imp": Imp}[h](a, b)
        if h in ("all", "ex"):
            v = self.next()
            if not (len(v.text) > 1 and v.text[0] == "v" and v.text[1:].isdigit()):
                self._fail(f"{h} needs a variable, got {v.text!r}", v)
            body = self.formula_arg(head)
            return (All if h == "all" else Ex)(int(v.text[1:]), body)
        if h == "eq":
            if not self.sig.has_equality:
                self._fail("signature has no equality", head)
            return Eq(self.term_arg(head), self.term_arg(head))
        if self.sig.is_pred(h):
            n = self.sig.pred_arity(h)
            return Pred(h, *(self.term_arg(head) for _ in range(n)))
        if self.sig.is_fun(h):
            n = self.sig.fun_arity(h)
            return Fun(h, *(self.term_arg(head) for _ in range(n)))
        self._fail(f"unknown operator or symbol {h!r}", head)

    def formula_arg(self, ctx: _Tok) -> Expr:
        tok = self.toks[self.pos] if self.pos < len(self.toks) else ctx
        e = self.expr()
        if not is_formula(e):
            self._fail(f"expected a formula inside ({ctx.text} ...)", tok)
        return e

    def term_arg(self, ctx: _Tok) -> Expr:
        tok = self.toks[self.pos] if self.pos < len(self.toks) else ctx
        e = self.expr()
        if not is_term(e):
            self._fail(f"expected a term inside ({ctx.text} ...)", tok)
        return e


def parse_formula(sig: Signature, text: str, line0: int = 1) -> Expr:
    toks = _tokenize(text, line0)
    if not toks:
        raise ParseError("empty formula", line0, 1)
    e = _FormulaParser(sig, toks).parse()
    try:
        validate(sig, e)
    except ValueError as exc:
        raise ParseError(str(exc), toks[0].line, toks[0].col) from None
    return e


def formula_text(e: Expr) -> str:
    k = e.kind
    if k == "bot" or k == "top":
        return k
    if k == "var":
        return f"v{e.index}"
    if k == "const":
        return f"c{e.index}"
    if k in ("pred", "fun"):
        inner = " ".join([e.name] + [formula_text(p) for p in e.parts])
        return f"({inner})"
    if k == "eq":
        return f"(eq {formula_text(e.parts[0])} {formula_text(e.parts[1])})"
    if k == "not":
        return f"(not {formula_text(e.parts[0])})"
    if k in ("and", "or", "imp"):
        return f"({k} {formula_text(e.parts[0])} {formula_text(e.parts[1])})"
    if k in ("all", "ex"):
        return f"({k} v{e.index} {formula_text(e.parts[0])})"
    raise ValueError(f"unknown kind {k!r}")


# -- line-oriented files -----------------------------------------------------


def _content_lines(text: str):
    for ln, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0].rstrip()
        if body.strip():
            yield ln, body


def parse_signature(text: str) -> Signature:
    preds: list[tuple[str, int]] = []
    funs: list[tuple[str, int]] = []
    has_eq = False
    for ln, body in _content_lines(text):
        parts = body.split()
        if parts[0] == "equality" and len(parts) == 1:
            has_eq = True
        elif parts[0] in ("pred", "fun") and len(parts) == 3:
            name = parts[1]
            if not parts[2].isdigit():
                raise ParseError(f"arity must be a natural, got {parts[2]!r}", ln, 1)
            (preds if parts[0] == "pred" else funs).append((name, int(parts[2])))
        else:
            raise ParseError(f"expected 'pred NAME ARITY', 'fun NAME ARITY' or 'equality', got {body.strip()!r}", ln, 1)
    try:
        return Signature(predicates=tuple(preds), functions=tuple(funs), has_equality=has_eq)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1) from None


def signature_text(sig: Signature) -> str:
    lines = [f"pred {n} {a}" for n, a in sig.predicates]
    lines += [f"fun {n} {a}" for n, a in sig.functions]
    if sig.has_equality:
        lines.append("equality")
    return "\n".join(lines) + "\n"


def parse_theory(sig: Signature, text: str) -> Theory:
    name = None
    axioms: list[Expr] = []
    schemes: list[SchemeRef] = []
    for ln, body in _content_lines(text):
        parts = body.split()
        if name is None:
            if parts[0] != "theory" or len(parts) != 2:
                raise ParseError("theory file must start with 'theory NAME'", ln, 1)
            name = parts[1]
        elif parts[0] == "scheme":
            if len(parts) != 3 or not parts[2].isdigit():
                raise ParseError("expected 'scheme NAME BOUND'", ln, 1)
            try:
                schemes.append(SchemeRef(parts[1], int(parts[2])))
            except ValueError as exc:
                raise ParseError(str(exc), ln, 1) from None
        else:
            f = parse_formula(sig, body, line0=ln)
            if not is_sentence(f):
                raise ParseError(f"theory axiom must be closed: {body.strip()!r}", ln, 1)
            axioms.append(f)
    if name is None:
        raise ParseError("empty theory file", 1, 1)
    return Theory(name=name, axioms=tuple(axioms), schemes=tuple(schemes))


def theory_text(t: Theory) -> str:
    lines = [f"theory {t.name}"]
    lines += [formula_text(a) for a in t.axioms]
    lines += [f"scheme {s.name} {s.bound}" for s in t.schemes]
    return "\n".join(lines) + "\n"


def _parse_tuple(ln: int, txt: str) -> tuple[int, ...]:
    txt = txt.strip()
    if not (txt.startswith("(") and txt.endswith(")")):
        raise ParseError(f"expected a tuple like (0 1), got {txt!r}", ln, 1)
    inner = txt[1:-1].split()
    if not all(p.isdigit() for p in inner):
        raise ParseError(f"tuple entries must be naturals: {txt!r}", ln, 1)
    return tuple(int(p) for p in inner)


def parse_model(sig: Signature, text: str) -> FiniteModel:
    carrier: list[int] | None = None
    preds: dict[str, set[tuple[int, ...]]] = {}
    funs: dict[str, dict[tuple[int, ...], int]] = {}
    for ln, body in _content_lines(text):
        parts = body.split()
        if parts[0] == "carrier":
            if carrier is not None:
                raise ParseError("duplicate carrier line", ln, 1)
            if len(parts) < 2 or not all(p.isdigit() for p in parts[1:]):
                raise ParseError("expected 'carrier N N ...'", ln, 1)
            carrier = [int(p) for p in parts[1:]]
        elif parts[0] == "table":
            rest = body.split(None, 1)[1]
            if ":" not in rest:
                raise ParseError("expected 'table NAME: (..) (..)'", ln, 1)
            name, rows_txt = rest.split(":", 1)
            name = name.strip()
            if not sig.is_pred(name):
                raise ParseError(f"unknown predicate {name!r}", ln, 1)
            rows = set()
            for chunk in _tuple_chunks(ln, rows_txt):
                rows.add(_parse_tuple(ln, chunk))
            if name in preds:
                raise ParseError(f"duplicate table for {name!r}", ln, 1)
            preds[name] = rows
        elif parts[0] == "fun":
            rest = body.split(None, 1)[1]
            if ":" not in rest:
                raise ParseError("expected 'fun NAME: (..)->N ...'", ln, 1)
            name, graph_txt = rest.split(":", 1)
            name = name.strip()
            if not sig.is_fun(name):
                raise ParseError(f"unknown function {name!r}", ln, 1)
            graph: dict[tuple[int, ...], int] = {}
            for chunk in graph_txt.split():
                if "->" not in chunk:
                    raise ParseError(f"expected (..)->N, got {chunk!r}", ln, 1)
                args_txt, val_txt = chunk.split("->", 1)
                if not val_txt.isdigit():
                    raise ParseError(f"function value must be a natural: {chunk!r}", ln, 1)
                graph[_parse_tuple(ln, args_txt)] = int(val_txt)
            if name in funs:
                raise ParseError(f"duplicate table for {name!r}", ln, 1)
            funs[name] = graph
        else:
            raise ParseError(f"expected 'carrier', 'table' or 'fun' line, got {body.strip()!r}", ln, 1)
    if carrier is None:
        raise ParseError("model file needs a carrier line", 1, 1)
    for name, _ in sig.predicates:
        preds.setdefault(name, set())
    try:
        return make_model(sig, carrier, preds, funs)
    except ValueError as exc:
        raise ParseError(str(exc), 1, 1) from None


def _tuple_chunks(ln: int, txt: str):
    txt = txt.strip()
    depth = 0
    start = None
    for i, ch in enumerate(txt):
        if ch == "(":
            if depth == 0:
                start = i
            depth += 1
        elif ch == ")":
            depth -= 1
            if depth < 0:
                raise ParseError("unbalanced ')'", ln, i + 1)
            if depth == 0:
                yield txt[start : i + 1]
        elif depth == 0 and ch not in " \t":
            raise ParseError(f"unexpected text {txt[i:].split()[0]!r} between tuples", ln, i + 1)
    if depth != 0:
        raise ParseError("unbalanced '('", ln, len(txt))


def model_text(m: FiniteModel) -> str:
    lines = ["carrier " + " ".join(str(a) for a in m.carrier)]
    for name, rows in m.predicates:
        cells = " ".join("(" + " ".join(str(x) for x in r) + ")" for r in rows)
        lines.append(f"table {name}:" + (" " + cells if cells else ""))
    for name, graph in m.functions:
        cells = " ".join(
            "(" + " ".join(str(x) for x in args) + ")->" + str(v) for args, v in graph
        )
        lines.append(f"fun {name}:" + (" " + cells if cells else ""))
    return "\n".join(lines) + "\n"


# -- JSON artifacts ----------------------------------------------------------


def write_json(path: str, obj) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    os.replace(tmp, path)


def read_json(path: str):
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def runs_of_ones(bits: list[int]) -> list[list[int]]:
    """[[start, length], ...] for the maximal runs of 1 bits."""
    out: list[list[int]] = []
    i = 0
    while i < len(bits):
        if bits[i] == 1:
            j = i
            while j < len(bits) and bits[j] == 1:
                j += 1
            out.append([i, j - i])
            i = j
        else:
            i += 1
    return out


def bits_from_runs(length: int, runs: list[list[int]]) -> list[int]:
    bits = [0] * length
    for start, n in runs:
        if start < 0 or n <= 0 or start + n > length:
            raise ValueError(f"run {[start, n]} out of range for length {length}")
        for i in range(start, start + n):
            bits[i] = 1
    return bits
