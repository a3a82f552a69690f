"""Group and rack presentations: data types, text syntax, and the Env / operator-group emitters.

Text syntax::

    presentation := "<" gens "|" rels ">"
    gens         := name ("," name)*
    rels         := rel ("," rel)* | empty
    rel          := "(" word "," name ")" "=" "(" word "," name ")"     (rack)
                  | word                                                (group relator)
    word         := "1" | name ["^-1"] ("*" name ["^-1"])*
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field

import sympy

from .freerack import FRElement
from .inn import harvest_relations
from .rackcore import Rack, check_rack_axioms, InvalidRack
from .words import Word, conj, exponent_sums, format_word, inv, mul


class PresentationSyntaxError(ValueError):
    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class RackPresentation:
    generators: list
    relations: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.generators)
        for lhs, rhs in self.relations:
            for side in (lhs, rhs):
                bad = [i for i in side.u.symbols() | {side.a} if i >= n]
                if bad:
                    raise ValueError(f"relation uses undeclared generator index {bad[0]}")


@dataclass
class GroupPresentation:
    generators: list
    relators: list = field(default_factory=list)

    def __post_init__(self):
        n = len(self.generators)
        for r in self.relators:
            if any(i >= n for i in r.symbols()):
                raise ValueError(f"relator {r} uses an undeclared generator")


# ---------------------------------------------------------------------------
# Tokenizer / parser

_TOKEN = re.compile(r"\s*(?:(?P<inv>\^-1)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<one>1)|(?P<punct>[<>|,()=*]))")


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.tokens = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if not m or m.end() == pos:
                rest = text[pos:]
                if rest.strip():
                    off = pos + len(rest) - len(rest.lstrip())
                    self._fail(f"unexpected character {text[off]!r}", off)
                break
            kind = m.lastgroup
            value = m.group(kind)
            self.tokens.append((kind, value, m.start(kind)))
            pos = m.end()
        self.tokens.append(("eof", "", len(text)))
        self.k = 0
        self.names = {}

    def _linecol(self, offset: int):
        line = self.text.count("\n", 0, offset) + 1
        col = offset - (self.text.rfind("\n", 0, offset) + 1) + 1
        return line, col

    def _fail(self, msg: str, offset: int | None = None):
        if offset is None:
            offset = self.tokens[self.k][2]
        raise PresentationSyntaxError(msg, *self._linecol(offset))

    def peek(self):
        return self.tokens[self.k]

    def take(self, value=None, kind=None):
        tok = self.tokens[self.k]
        if (value is not None and tok[1] != value) or (kind is not None and tok[0] != kind):
            want = repr(value) if value is not None else kind
            got = repr(tok[1]) if tok[0] != "eof" else "end of input"
            self._fail(f"expected {want}, got {got}")
        self.k += 1
        return tok

    def header(self) -> list:
        self.take("<")
        gens = []
        while True:
            tok = self.take(kind="name")
            if tok[1] in self.names:
                self._fail(f"duplicate generator {tok[1]!r}", tok[2])
            self.names[tok[1]] = len(gens)
            gens.append(tok[1])
            if self.peek()[1] != ",":
                break
            self.take(",")
        self.take("|")
        return gens

    def name(self) -> int:
        tok = self.take(kind="name")
        if tok[1] not in self.names:
            self._fail(f"undeclared generator {tok[1]!r}", tok[2])
        return self.names[tok[1]]

    def word(self) -> Word:
        if self.peek()[0] == "one":
            self.take(kind="one")
            return Word()
        codes = []
        while True:
            i = self.name()
            sign = 1
            if self.peek()[0] == "inv":
                self.take(kind="inv")
                sign = -1
            codes.append(sign * (i + 1))
            if self.peek()[1] != "*":
                return Word(codes)
            self.take("*")

    def fr(self) -> FRElement:
        self.take("(")
        u = self.word()
        self.take(",")
        a = self.name()
        self.take(")")
        return FRElement(u, a)

    def finish(self):
        self.take(">")
        if self.peek()[0] != "eof":
            self._fail("trailing input after presentation")


def parse_rack_presentation(text: str) -> RackPresentation:
    p = _Parser(text)
    gens = p.header()
    rels = []
    if p.peek()[1] != ">":
        while True:
            lhs = p.fr()
            p.take("=")
            rhs = p.fr()
            rels.append((lhs, rhs))
            if p.peek()[1] != ",":
                break
            p.take(",")
    p.finish()
    return RackPresentation(gens, rels)


def parse_group_presentation(text: str) -> GroupPresentation:
    p = _Parser(text)
    gens = p.header()
    rels = []
    if p.peek()[1] != ">":
        while True:
            rels.append(p.word())
            if p.peek()[1] != ",":
                break
            p.take(",")
    p.finish()
    return GroupPresentation(gens, rels)


def emit_text(P) -> str:
    names = list(P.generators)
    head = "< " + ", ".join(names) + " |"
    if isinstance(P, RackPresentation):
        body = ", ".join(f"({format_word(l.u, names)}, {names[l.a]}) = ({format_word(r.u, names)}, {names[r.a]})"
                         for l, r in P.relations)
    else:
        body = ", ".join(format_word(r, names) for r in P.relators)
    return f"{head} {body} >" if body else f"{head} >"


# ---------------------------------------------------------------------------
# Emitters


def env_from_presentation(P: RackPresentation) -> GroupPresentation:
    """Each rack relation (u, a) = (v, b) becomes the relator u a u^-1 (v b v^-1)^-1."""
    relators = []
    for (l, r) in P.relations:
        rel = mul(conj(l.u, Word.gen(l.a)), inv(conj(r.u, Word.gen(r.a))))
        if rel:
            relators.append(rel)
    return GroupPresentation(list(P.generators), relators)


def element_names(X: Rack) -> list:
    return [f"x{i}" for i in range(len(X.table))]


def env_from_table(X: Rack) -> GroupPresentation:
    """One generator per element; relator x_a x_b x_a^-1 x_{a▷b}^-1 per ordered pair, empty ones dropped."""
    t = X.table
    report = check_rack_axioms(t)
    if not report.is_rack:
        raise InvalidRack(f"not a rack: {report}")
    n = len(t)
    relators = []
    for a in range(n):
        for b in range(n):
            rel = Word([a + 1, b + 1, -(a + 1), -(t[a][b] + 1)])
            if rel:
                relators.append(rel)
    return GroupPresentation(element_names(X), relators)


def present_operator_group(X: Rack, max_len: int | None = None) -> GroupPresentation:
    """Generators the elements of X, relators the harvested words with φ_w = id."""
    return GroupPresentation(element_names(X), harvest_relations(X, max_len).relators)


def exponent_sum_matrix(P: GroupPresentation) -> list:
    n = len(P.generators)
    return [exponent_sums(r, n) for r in P.relators]


def abelianization_rank(P: GroupPresentation) -> int:
    """Free rank of the abelianization: generators minus the rank of the exponent-sum matrix."""
    rows = exponent_sum_matrix(P)
    if not rows:
        return len(P.generators)
    return len(P.generators) - sympy.Matrix(rows).rank()
