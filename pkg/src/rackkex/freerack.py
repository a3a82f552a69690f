"""The free rack FR(A) = F(A) x A, the free quandle, and evaluation maps into Con(F(A))."""
from __future__ import annotations

import struct
from dataclasses import dataclass
from typing import Mapping, Sequence

from .words import (Word, canonical_bytes as word_bytes, conj, format_word, inv, is_positive,
                    mul, parse_word, read_canonical_bytes)


@dataclass(frozen=True)
class FRElement:
    """The pair (u, a): u a reduced word, a a symbol index."""

    u: Word
    a: int

    def __post_init__(self):
        if self.a < 0:
            raise ValueError("symbol index must be non-negative")

    def __str__(self):
        return format_fr(self)


# free-quandle classes use the same pair shape, restricted to canonical representatives
FQElement = FRElement


def fr_op(x: FRElement, y: FRElement) -> FRElement:
    """(u, a) ▷ (v, b) = (u a u^-1 v, b)."""
    return FRElement(mul(conj(x.u, Word.gen(x.a)), y.u), y.a)


def fr_ldiv(x: FRElement, z: FRElement) -> FRElement:
    """The unique y with x ▷ y = z: (u a^-1 u^-1 w, b)."""
    return FRElement(mul(conj(x.u, Word.gen(x.a, -1)), z.u), z.a)


def fq_canonical(x: FRElement) -> FRElement:
    """Representative of the free-quandle class of x under (w, a) = (w a, a).

    Trailing a^{+-1} letters of w are stripped.
    """
    codes = x.u.codes
    a = x.a + 1
    k = len(codes)
    while k and abs(codes[k - 1]) == a:
        k -= 1
    return FRElement(Word._trusted(codes[:k]), x.a)


def is_fq_canonical(x: FRElement) -> bool:
    return not x.u.codes or abs(x.u.codes[-1]) != x.a + 1


def fq_op(x: FRElement, y: FRElement) -> FRElement:
    return fq_canonical(fr_op(x, y))


def fq_embed(x: FRElement) -> Word:
    """(w, a) -> w a w^-1 in Con(F(A))."""
    if not is_fq_canonical(x):
        raise ValueError(f"{x} is not a canonical free-quandle representative")
    return conj(x.u, Word.gen(x.a))


def fplus_eval(U: Word, p: Word, alphabet: Mapping[int, Word] | Sequence[Word]) -> Word:
    """Evaluate the FR(F(A)+) element (U, p) in Con(F(A)).

    ``alphabet`` maps the symbols of ``U`` to positive words; the result is
    eval(U) p eval(U)^-1.
    """
    if not p or not is_positive(p):
        raise ValueError(f"{format_word(p)} is not a positive word")
    lookup = dict(alphabet) if isinstance(alphabet, Mapping) else dict(enumerate(alphabet))
    for i in U.symbols():
        if i not in lookup:
            raise ValueError(f"symbol {i} of U has no positive word assigned")
        if not lookup[i] or not is_positive(lookup[i]):
            raise ValueError(f"alphabet entry {i} is not a positive word")
    e = Word()
    for c in U.codes:
        w = lookup[abs(c) - 1]
        e = mul(e, w if c > 0 else inv(w))
    return conj(e, p)


def canonical_bytes(x: FRElement) -> bytes:
    return word_bytes(x.u) + struct.pack(">I", x.a)


def from_canonical_bytes(data: bytes) -> FRElement:
    u, rest = read_canonical_bytes(data)
    if len(rest) != 4:
        raise ValueError("free rack element encoding must end with a 4-byte symbol")
    return FRElement(u, struct.unpack(">I", rest)[0])


def format_fr(x: FRElement, names: Sequence[str] | None = None) -> str:
    a = names[x.a] if names is not None else f"a{x.a}"
    return f"({format_word(x.u, names)}, {a})"


def parse_fr(text: str, names: Sequence[str] | None = None) -> FRElement:
    text = text.strip()
    if not (text.startswith("(") and text.endswith(")")):
        raise ValueError(f"free rack element must look like (word, symbol): {text!r}")
    body = text[1:-1]
    if "," not in body:
        raise ValueError(f"missing ',' in {text!r}")
    wtext, atext = body.rsplit(",", 1)
    u = parse_word(wtext, names)
    a = parse_word(atext, names)
    if len(a.codes) != 1 or a.codes[0] < 0:
        raise ValueError(f"second component must be a single generator: {atext!r}")
    return FRElement(u, a.codes[0] - 1)
