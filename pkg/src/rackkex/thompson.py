"""Thompson's group F on generators a0, a1, a2, ... with a_j a_i = a_i a_{j+1} (i < j).

Elements are kept in the unique normal form

    a_{i1}^{r1} ... a_{ik}^{rk} a_{jl}^{-sl} ... a_{j1}^{-s1}

with i1 < ... < ik, j1 < ... < jl, and whenever an index occurs in both parts
its successor occurs in at least one part.
"""
from __future__ import annotations

import bisect
import struct
from typing import Iterable

from .words import Word, format_word, parse_word

MAX_INDEX = 2**31 - 1


def _pairs(sorted_indices: list) -> tuple:
    out = []
    for i in sorted_indices:
        if out and out[-1][0] == i:
            out[-1][1] += 1
        else:
            out.append([i, 1])
    return tuple((i, r) for i, r in out)


def _expand(pairs) -> list:
    out = []
    for i, r in pairs:
        out.extend([i] * r)
    return out


class TElement:
    """An element of F in normal form.

    ``positive_part`` and ``negative_part`` are tuples of ``(index, exponent)``
    with strictly increasing indices.  The negative part ((j1, s1), ..., (jl, sl))
    stands for the factor a_{jl}^{-sl} ... a_{j1}^{-s1}.
    """

    __slots__ = ("positive_part", "negative_part")

    def __init__(self, positive_part=(), negative_part=()):
        pos = _pairs(sorted(_expand(positive_part)))
        neg = _pairs(sorted(_expand(negative_part)))
        p, n = _cancel(_expand(pos), _expand(neg))
        self.positive_part = _pairs(p)
        self.negative_part = _pairs(n)

    @classmethod
    def _from_lists(cls, p: list, n: list) -> "TElement":
        e = cls.__new__(cls)
        e.positive_part = _pairs(p)
        e.negative_part = _pairs(n)
        return e

    def is_identity(self) -> bool:
        return not self.positive_part and not self.negative_part

    def to_word(self) -> Word:
        codes = [i + 1 for i in _expand(self.positive_part)]
        codes += [-(j + 1) for j in reversed(_expand(self.negative_part))]
        return Word._trusted(tuple(codes))

    def __eq__(self, other):
        return (isinstance(other, TElement) and self.positive_part == other.positive_part
                and self.negative_part == other.negative_part)

    def __hash__(self):
        return hash((self.positive_part, self.negative_part))

    def __mul__(self, other: "TElement") -> "TElement":
        return t_mul(self, other)

    def __invert__(self) -> "TElement":
        return t_inv(self)

    def __repr__(self):
        return f"TElement({format_word(self.to_word())!r})"

    def __str__(self):
        return format_word(self.to_word())


def _right_mul_letter(p: list, n: list, code: int):
    """In place: (p, n) <- seminormal form of p n^-1 a^code."""
    b = abs(code) - 1
    if code < 0:
        # p (a_b n)^-1: push a_b right through sorted n
        k = 0
        while k < len(n) and n[k] < b:
            b += 1
            k += 1
        n.insert(k, b)
    else:
        # move a_b left through n^-1 = a_{n_m}^-1 ... a_{n_1}^-1, smallest first
        for k in range(len(n)):
            a = n[k]
            if a == b:
                del n[k]
                return
            if a < b:
                b += 1
            else:
                for m in range(k, len(n)):
                    n[m] += 1
                break
        # a_b now stands between p and n^-1; sort it into p
        k = bisect.bisect_right(p, b)
        for m in range(k, len(p)):
            p[m] += 1
        p.insert(k, b)
    if b > MAX_INDEX:
        raise OverflowError("generator index exceeds 2^31 - 1")


def _cancel(p: list, n: list):
    """Reduce a seminormal pair to normal form."""
    while True:
        pset, nset = set(p), set(n)
        bad = [i for i in pset & nset if i + 1 not in pset and i + 1 not in nset]
        if not bad:
            return p, n
        i = max(bad)
        # drop the last a_i of each part, shift larger indices down
        kp = bisect.bisect_right(p, i) - 1
        kn = bisect.bisect_right(n, i) - 1
        p = p[:kp] + [x - 1 for x in p[kp + 1:]]
        n = n[:kn] + [x - 1 for x in n[kn + 1:]]


def _seminormal(codes: Iterable[int], p=None, n=None):
    p = [] if p is None else p
    n = [] if n is None else n
    for c in codes:
        _right_mul_letter(p, n, c)
    return p, n


def t_from_word(w: Word) -> TElement:
    """Normal form of the element named by ``w`` (symbol index i means a_i)."""
    p, n = _cancel(*_seminormal(w.codes))
    return TElement._from_lists(p, n)


def t_mul(g: TElement, h: TElement) -> TElement:
    p, n = _seminormal(h.to_word().codes, _expand(g.positive_part), _expand(g.negative_part))
    p, n = _cancel(p, n)
    return TElement._from_lists(p, n)


def t_inv(g: TElement) -> TElement:
    # (p n^-1)^-1 = n p^-1, already sorted in both parts
    return TElement._from_lists(_expand(g.negative_part), _expand(g.positive_part))


def t_conj(g: TElement, h: TElement) -> TElement:
    """g h g^-1."""
    return t_mul(t_mul(g, h), t_inv(g))


def is_normal(g: TElement) -> bool:
    p, n = _expand(g.positive_part), _expand(g.negative_part)
    return _cancel(list(p), list(n)) == (p, n)


def canonical_bytes(g: TElement) -> bytes:
    out = [struct.pack(">I", len(g.positive_part))]
    out += [struct.pack(">II", i, r) for i, r in g.positive_part]
    out.append(struct.pack(">I", len(g.negative_part)))
    out += [struct.pack(">II", j, s) for j, s in g.negative_part]
    return b"".join(out)


def read_canonical_bytes(data: bytes) -> tuple:
    parts = []
    off = 0
    for _ in range(2):
        if len(data) < off + 4:
            raise ValueError("truncated Thompson element encoding")
        (k,) = struct.unpack_from(">I", data, off)
        off += 4
        if len(data) < off + 8 * k:
            raise ValueError("truncated Thompson element encoding")
        pairs = tuple(struct.unpack_from(">II", data, off + 8 * m) for m in range(k))
        off += 8 * k
        if any(r == 0 for _, r in pairs) or any(a[0] >= b[0] for a, b in zip(pairs, pairs[1:])):
            raise ValueError("Thompson element encoding is not in normal form")
        parts.append(pairs)
    g = TElement._from_lists(_expand(parts[0]), _expand(parts[1]))
    if not is_normal(g):
        raise ValueError("Thompson element encoding is not in normal form")
    return g, data[off:]


def from_canonical_bytes(data: bytes) -> TElement:
    g, rest = read_canonical_bytes(data)
    if rest:
        raise ValueError(f"{len(rest)} trailing bytes after Thompson element encoding")
    return g


IDENTITY = TElement()


def parse(text: str) -> TElement:
    return t_from_word(parse_word(text))


def generator(i: int, sign: int = 1) -> TElement:
    return t_from_word(Word.gen(i, sign))
