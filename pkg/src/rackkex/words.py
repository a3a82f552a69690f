"""Free group words.

A letter is stored as a nonzero signed integer ``sign * (index + 1)``, so the
generator ``a_i`` is ``i + 1`` and its formal inverse is ``-(i + 1)``.  This is
also exactly the integer written to the wire by :func:`canonical_bytes`.
"""
from __future__ import annotations

import re
import struct
from dataclasses import dataclass
from typing import Iterable, Sequence


@dataclass(frozen=True)
class Symbol:
    index: int
    display_name: str = ""

    def __post_init__(self):
        if self.index < 0:
            raise ValueError(f"symbol index must be non-negative, got {self.index}")
        if not self.display_name:
            object.__setattr__(self, "display_name", f"a{self.index}")

    def __str__(self):
        return self.display_name


@dataclass(frozen=True)
class Letter:
    symbol: int
    sign: int = 1

    def __post_init__(self):
        if self.sign not in (1, -1):
            raise ValueError(f"sign must be +1 or -1, got {self.sign}")
        if self.symbol < 0:
            raise ValueError(f"symbol index must be non-negative, got {self.symbol}")

    @property
    def code(self) -> int:
        return self.sign * (self.symbol + 1)

    @classmethod
    def from_code(cls, code: int) -> "Letter":
        if code == 0:
            raise ValueError("letter code 0 is not a letter")
        return cls(abs(code) - 1, 1 if code > 0 else -1)

    def inverse(self) -> "Letter":
        return Letter(self.symbol, -self.sign)


def _as_code(x) -> int:
    if isinstance(x, Letter):
        return x.code
    if isinstance(x, int) and x != 0:
        return x
    raise TypeError(f"not a letter: {x!r}")


def _free_reduce(codes: Iterable[int]) -> tuple:
    out: list[int] = []
    for c in codes:
        if out and out[-1] == -c:
            out.pop()
        else:
            out.append(c)
    return tuple(out)


class Word:
    """A freely reduced word; the empty word is the identity."""

    __slots__ = ("codes", "_hash")

    def __init__(self, letters: Iterable = ()):
        self.codes = _free_reduce(_as_code(x) for x in letters)
        self._hash = None

    @classmethod
    def _trusted(cls, codes: tuple) -> "Word":
        w = cls.__new__(cls)
        w.codes = codes
        w._hash = None
        return w

    @classmethod
    def gen(cls, index: int, sign: int = 1) -> "Word":
        return cls._trusted((Letter(index, sign).code,))

    @property
    def letters(self) -> tuple:
        return tuple(Letter.from_code(c) for c in self.codes)

    def symbols(self) -> set:
        return {abs(c) - 1 for c in self.codes}

    def __len__(self):
        return len(self.codes)

    def __bool__(self):
        return bool(self.codes)

    def __iter__(self):
        return iter(self.letters)

    def __eq__(self, other):
        return isinstance(other, Word) and self.codes == other.codes

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(("Word", self.codes))
        return self._hash

    def __lt__(self, other: "Word"):
        return canonical_bytes(self) < canonical_bytes(other)

    def __mul__(self, other: "Word") -> "Word":
        return mul(self, other)

    def __invert__(self) -> "Word":
        return inv(self)

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else inv(self)
        out = Word()
        for _ in range(abs(n)):
            out = mul(out, base)
        return out

    def __repr__(self):
        return f"Word({format_word(self)!r})"

    def __str__(self):
        return format_word(self)


IDENTITY = Word()


def reduce(letters: Iterable) -> Word:
    """Free reduction of a letter sequence (``Letter`` objects or signed codes)."""
    return Word(letters)


def mul(u: Word, v: Word) -> Word:
    a, b = u.codes, v.codes
    k = 0
    n = min(len(a), len(b))
    while k < n and a[len(a) - 1 - k] == -b[k]:
        k += 1
    return Word._trusted(a[: len(a) - k] + b[k:])


def inv(w: Word) -> Word:
    return Word._trusted(tuple(-c for c in reversed(w.codes)))


def conj(g: Word, h: Word) -> Word:
    """g h g^-1."""
    return mul(mul(g, h), inv(g))


def _order_key(code: int) -> int:
    # a0 < a0^-1 < a1 < a1^-1 < ...
    return 2 * (abs(code) - 1) + (0 if code > 0 else 1)


def is_positive(w: Word) -> bool:
    """Membership in the positive half F(A)+.

    ``w`` is positive when it precedes its inverse letter-wise under the order
    a0 < a0^-1 < a1 < a1^-1 < ...  For a non-empty reduced word exactly one of
    ``w`` and ``inv(w)`` is positive.
    """
    if not w.codes:
        raise ValueError("positivity is only defined for non-empty words")
    mine = [_order_key(c) for c in w.codes]
    theirs = [_order_key(c) for c in inv(w).codes]
    return mine < theirs


def canonical_bytes(w: Word) -> bytes:
    return struct.pack(f">I{len(w.codes)}i", len(w.codes), *w.codes)


def from_canonical_bytes(data: bytes) -> Word:
    w, rest = read_canonical_bytes(data)
    if rest:
        raise ValueError(f"{len(rest)} trailing bytes after word encoding")
    return w


def read_canonical_bytes(data: bytes) -> tuple:
    """Decode one word from the front of ``data``; returns (word, remainder)."""
    if len(data) < 4:
        raise ValueError("truncated word encoding")
    (n,) = struct.unpack_from(">I", data)
    end = 4 + 4 * n
    if len(data) < end:
        raise ValueError("truncated word encoding")
    codes = struct.unpack_from(f">{n}i", data, 4)
    if 0 in codes:
        raise ValueError("letter code 0 in word encoding")
    w = Word(codes)
    if w.codes != codes:
        raise ValueError("word encoding is not freely reduced")
    return w, data[end:]


def format_word(w: Word, names: Sequence[str] | None = None) -> str:
    if not w.codes:
        return "1"
    parts = []
    for c in w.codes:
        i = abs(c) - 1
        name = names[i] if names is not None else f"a{i}"
        parts.append(name if c > 0 else name + "^-1")
    return "*".join(parts)


_DEFAULT_NAME = re.compile(r"[A-Za-z_]+(\d+)\Z")


def parse_word(text: str, names: Sequence[str] | None = None) -> Word:
    """Parse ``a0*b0^-1`` style text.

    With ``names`` given, each factor must be one of them and maps to its
    position.  Without, a factor is any identifier ending in digits and the
    digits give the symbol index (``a3`` -> index 3).
    """
    text = text.strip()
    if text == "1" or text == "":
        return IDENTITY
    lookup = {n: i for i, n in enumerate(names)} if names is not None else None
    codes = []
    for raw in text.split("*"):
        tok = raw.strip()
        sign = 1
        if tok.endswith("^-1"):
            tok, sign = tok[:-3].strip(), -1
        elif tok.endswith("^1"):
            tok = tok[:-2].strip()
        if lookup is not None:
            if tok not in lookup:
                raise ValueError(f"unknown generator {tok!r} in {text!r}")
            idx = lookup[tok]
        else:
            m = _DEFAULT_NAME.match(tok)
            if not m:
                raise ValueError(f"cannot parse generator {tok!r} in {text!r}")
            idx = int(m.group(1))
        codes.append(sign * (idx + 1))
    return Word(codes)


def exponent_sums(w: Word, n: int) -> list:
    out = [0] * n
    for c in w.codes:
        out[abs(c) - 1] += 1 if c > 0 else -1
    return out
