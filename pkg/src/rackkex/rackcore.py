"""Racks: the common interface, finite operation tables and conjugation racks.

Elements are plain Python values (``int`` for table racks, :class:`Perm`,
:class:`Word`, :class:`TElement`, ``(base, i)`` pairs for extensions).  Each
rack knows how to encode its elements canonically; two elements are equal
exactly when their canonical bytes are.
"""
from __future__ import annotations

import hashlib
import json
import random
import struct
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Iterable, Sequence

from . import permgroups, thompson, words
from .permgroups import Perm, PermGroup
from .thompson import TElement
from .words import Word


class RackError(ValueError):
    pass


class MembershipError(RackError):
    pass


class ShapeError(RackError):
    pass


class InvalidRack(RackError):
    pass


class SamplingUnavailable(RuntimeError):
    pass


class Rack:
    """Base class.  Subclasses implement ``_op``, ``_ldiv`` and the element codec."""

    kind = "rack"
    finite = True

    # -- to implement --------------------------------------------------------
    def _op(self, a, b):
        raise NotImplementedError

    def _ldiv(self, a, c):
        raise NotImplementedError

    def contains(self, x) -> bool:
        raise NotImplementedError

    def encode(self, x) -> bytes:
        raise NotImplementedError

    def decode(self, data: bytes):
        raise NotImplementedError

    def format(self, x) -> str:
        return str(x)

    def parse(self, text: str):
        raise NotImplementedError

    def descriptor(self) -> dict:
        raise NotImplementedError

    def elements(self) -> list:
        raise SamplingUnavailable(f"{self.kind} rack is not enumerable")

    def sample(self, rng: random.Random):
        if not self.finite:
            raise SamplingUnavailable(f"no sampling rule configured for {self.kind} rack")
        return rng.choice(self.elements())

    # -- shared --------------------------------------------------------------
    def check(self, x):
        if not self.contains(x):
            raise MembershipError(f"{x!r} is not an element of this {self.kind} rack")
        return x

    def op(self, a, b):
        """a ▷ b."""
        return self._op(self.check(a), self.check(b))

    def ldiv(self, a, c):
        """The unique b with a ▷ b = c."""
        return self._ldiv(self.check(a), self.check(c))

    def decode_member(self, data: bytes):
        try:
            x = self.decode(data)
        except (ValueError, struct.error) as exc:
            raise MembershipError(f"undecodable element: {exc}") from exc
        return self.check(x)

    def __len__(self):
        return len(self.elements())

    @cached_property
    def _index(self) -> dict:
        return {x: i for i, x in enumerate(self.elements())}

    def index(self, x) -> int:
        try:
            return self._index[x]
        except KeyError:
            raise MembershipError(f"{x!r} is not an element of this {self.kind} rack") from None

    @cached_property
    def table(self) -> list:
        """Operation table over element indices (finite racks only)."""
        els = self.elements()
        idx = self._index
        return [[idx[self._op(a, b)] for b in els] for a in els]

    def is_quandle(self) -> bool:
        return all(row[i] == i for i, row in enumerate(self.table))


# ---------------------------------------------------------------------------
# Table racks


def _index_bytes(i: int) -> bytes:
    return struct.pack(">I", i)


class TableRack(Rack):
    kind = "table"

    def __init__(self, table: Sequence[Sequence[int]], check: bool = True):
        _check_shape(table)
        self.n = len(table)
        self._table = tuple(tuple(row) for row in table)
        if check:
            report = check_rack_axioms(self._table)
            if not report.is_rack:
                raise InvalidRack(f"table is not a rack: {report}")
        self._ldiv_table = None

    @property
    def table(self) -> list:
        return [list(r) for r in self._table]

    @property
    def rows(self) -> tuple:
        return self._table

    def elements(self) -> list:
        return list(range(self.n))

    def index(self, x) -> int:
        self.check(x)
        return x

    def contains(self, x) -> bool:
        return isinstance(x, int) and not isinstance(x, bool) and 0 <= x < self.n

    def _op(self, a, b):
        return self._table[a][b]

    def _ldiv(self, a, c):
        if self._ldiv_table is None:
            inv = [[None] * self.n for _ in range(self.n)]
            for x in range(self.n):
                for y in range(self.n):
                    inv[x][self._table[x][y]] = y
            self._ldiv_table = inv
        b = self._ldiv_table[a][c]
        if b is None:
            raise RackError(f"row {a} is not a bijection; no left quotient for {c}")
        return b

    def encode(self, x) -> bytes:
        return _index_bytes(x)

    def decode(self, data: bytes):
        if len(data) != 4:
            raise ValueError("table element encoding must be 4 bytes")
        return struct.unpack(">I", data)[0]

    def parse(self, text: str):
        return int(text)

    def descriptor(self) -> dict:
        return {"type": "table", "n": self.n, "table": self.table}

    def __repr__(self):
        return f"TableRack(n={self.n})"


def dihedral(n: int) -> TableRack:
    """i ▷ j = 2i - j mod n."""
    return TableRack([[(2 * i - j) % n for j in range(n)] for i in range(n)])


def cyclic(n: int) -> TableRack:
    """i ▷ j = j + 1 mod n; a rack that is not a quandle for n > 1."""
    return TableRack([[(j + 1) % n for j in range(n)] for _ in range(n)])


def trivial(n: int) -> TableRack:
    return TableRack([list(range(n)) for _ in range(n)])


def as_table_rack(X: Rack) -> TableRack:
    if isinstance(X, TableRack):
        return X
    return TableRack(X.table, check=False)


# ---------------------------------------------------------------------------
# Axiom checks


@dataclass(frozen=True)
class AxiomCheck:
    ok: bool
    witness: tuple | None = None


@dataclass(frozen=True)
class AxiomReport:
    a1: AxiomCheck
    a2: AxiomCheck
    a3: AxiomCheck

    @property
    def is_rack(self) -> bool:
        return self.a1.ok and self.a2.ok

    @property
    def is_quandle(self) -> bool:
        return self.is_rack and self.a3.ok

    def __str__(self):
        parts = []
        for name, c in (("A1", self.a1), ("A2", self.a2), ("A3", self.a3)):
            parts.append(f"{name} ok" if c.ok else f"{name} FAIL {c.witness}")
        s = " ".join(parts)
        if self.is_quandle:
            s += " (quandle)"
        elif self.is_rack:
            s += " (rack)"
        else:
            s += " (not a rack)"
        return s


def _check_shape(table):
    n = len(table)
    for r, row in enumerate(table):
        if len(row) != n:
            raise ShapeError(f"row {r} has length {len(row)}, expected {n}")
        for c, v in enumerate(row):
            if not isinstance(v, int) or not 0 <= v < n:
                raise ShapeError(f"entry ({r},{c}) = {v!r} out of range for size {n}")


def check_rack_axioms(table: Sequence[Sequence[int]]) -> AxiomReport:
    """Exhaustive check of left distributivity (A1), bijective rows (A2), idempotence (A3).

    Witnesses: A1 (a, b, c); A2 (a, b1, b2) with a▷b1 = a▷b2; A3 (a, a▷a).
    """
    _check_shape(table)
    t = table
    n = len(t)
    rng = range(n)

    a1 = AxiomCheck(True)
    for a in rng:
        ta = t[a]
        for b in rng:
            tab = t[ta[b]]
            tb = t[b]
            for c in rng:
                if ta[tb[c]] != tab[ta[c]]:
                    a1 = AxiomCheck(False, (a, b, c))
                    break
            if not a1.ok:
                break
        if not a1.ok:
            break

    a2 = AxiomCheck(True)
    for a in rng:
        seen = {}
        for b in rng:
            v = t[a][b]
            if v in seen:
                a2 = AxiomCheck(False, (a, seen[v], b))
                break
            seen[v] = b
        if not a2.ok:
            break

    a3 = AxiomCheck(True)
    for a in rng:
        if t[a][a] != a:
            a3 = AxiomCheck(False, (a, t[a][a]))
            break
    return AxiomReport(a1, a2, a3)


# ---------------------------------------------------------------------------
# Conjugation racks


class PermOps:
    name = "perm"

    def __init__(self, degree: int):
        self.degree = degree

    def mul(self, g, h):
        return permgroups.compose(g, h)

    def inv(self, g):
        return permgroups.inverse(g)

    def conj(self, g, h):
        return permgroups.conj(g, h)

    def valid(self, g) -> bool:
        return isinstance(g, Perm) and g.degree == self.degree

    def encode(self, g) -> bytes:
        return permgroups.canonical_bytes(g)

    def decode(self, data: bytes):
        return permgroups.from_canonical_bytes(data)

    def format(self, g) -> str:
        return permgroups.format_cycles(g)

    def parse(self, text: str):
        return permgroups.parse_cycles(text, self.degree)

    def identity(self):
        return Perm.identity(self.degree)


class FreeOps:
    name = "free"

    def mul(self, g, h):
        return words.mul(g, h)

    def inv(self, g):
        return words.inv(g)

    def conj(self, g, h):
        return words.conj(g, h)

    def valid(self, g) -> bool:
        return isinstance(g, Word)

    def encode(self, g) -> bytes:
        return words.canonical_bytes(g)

    def decode(self, data: bytes):
        return words.from_canonical_bytes(data)

    def format(self, g) -> str:
        return words.format_word(g)

    def parse(self, text: str):
        return words.parse_word(text)

    def identity(self):
        return words.IDENTITY


class ThompsonOps:
    name = "thompson"

    def mul(self, g, h):
        return thompson.t_mul(g, h)

    def inv(self, g):
        return thompson.t_inv(g)

    def conj(self, g, h):
        return thompson.t_conj(g, h)

    def valid(self, g) -> bool:
        return isinstance(g, TElement) and thompson.is_normal(g)

    def encode(self, g) -> bytes:
        return thompson.canonical_bytes(g)

    def decode(self, data: bytes):
        return thompson.from_canonical_bytes(data)

    def format(self, g) -> str:
        return str(g)

    def parse(self, text: str):
        return thompson.parse(text)

    def identity(self):
        return thompson.IDENTITY


class ConjRack(Rack):
    """A conjugation-closed subset of a group with a ▷ b = a b a^-1.

    Finite when built from an explicit element list; otherwise membership is
    the ambient group's validity rule and ``sampler`` supplies random elements.
    """

    kind = "conjugation"

    def __init__(self, ops, elements: Iterable | None = None,
                 sampler: Callable | None = None, descriptor: dict | None = None):
        self.ops = ops
        self.finite = elements is not None
        self._elements = None
        if elements is not None:
            self._elements = sorted(set(elements), key=ops.encode)
            self._members = set(self._elements)
        self._sampler = sampler
        self._descriptor = descriptor

    def elements(self) -> list:
        if self._elements is None:
            raise SamplingUnavailable("infinite conjugation rack is not enumerable")
        return list(self._elements)

    def contains(self, x) -> bool:
        if not self.ops.valid(x):
            return False
        return x in self._members if self.finite else True

    def _op(self, a, b):
        return self.ops.conj(a, b)

    def _ldiv(self, a, c):
        return self.ops.conj(self.ops.inv(a), c)

    def encode(self, x) -> bytes:
        return self.ops.encode(x)

    def decode(self, data: bytes):
        return self.ops.decode(data)

    def format(self, x) -> str:
        return self.ops.format(x)

    def parse(self, text: str):
        return self.ops.parse(text)

    def sample(self, rng: random.Random):
        if self._sampler is not None:
            return self._sampler(rng)
        return super().sample(rng)

    def descriptor(self) -> dict:
        if self._descriptor is None:
            raise RackError("this conjugation rack has no descriptor")
        return self._descriptor

    def __repr__(self):
        size = len(self._elements) if self.finite else "inf"
        return f"ConjRack({self.ops.name}, size={size})"


def conj_closure(ops, seed: Iterable, cap: int = permgroups.DEFAULT_CAP,
                 descriptor: dict | None = None) -> ConjRack:
    """Smallest superset of ``seed`` closed under a ▷ b = a b a^-1."""
    seed = list(seed)
    if not seed:
        raise ValueError("conjugation closure needs a nonempty seed")
    found = []
    seen = set()

    def add(x):
        if x not in seen:
            if len(seen) >= cap:
                raise permgroups.ClosureOverflow(f"conjugation closure exceeds cap of {cap} elements")
            seen.add(x)
            found.append(x)

    for x in seed:
        add(x)
    k = 0
    while k < len(found):
        x = found[k]
        for y in list(found[: k + 1]):
            add(ops.conj(x, y))
            add(ops.conj(y, x))
        k += 1
    return ConjRack(ops, found, descriptor=descriptor)


def conj_perm_rack(degree: int, seed: Sequence[Perm], cap: int = permgroups.DEFAULT_CAP) -> ConjRack:
    desc = {"type": "conj_perm", "degree": degree,
            "seed": [permgroups.format_cycles(p) for p in seed]}
    return conj_closure(PermOps(degree), seed, cap, descriptor=desc)


def group_rack(G: PermGroup) -> ConjRack:
    desc = {"type": "group_rack_perm", "degree": G.degree,
            "generators": [permgroups.format_cycles(g) for g in G.generators]}
    return ConjRack(PermOps(G.degree), G.elements, descriptor=desc)


def random_word_sampler(ops, generators: Sequence, length: int) -> Callable:
    """Products of ``length`` uniformly chosen generators or inverses."""
    letters = list(generators) + [ops.inv(g) for g in generators]

    def sample(rng: random.Random):
        x = ops.identity()
        for _ in range(length):
            x = ops.mul(x, rng.choice(letters))
        return x

    return sample


def thompson_group_rack(max_gen: int = 8, sample_len: int = 16) -> ConjRack:
    """Con(F) with membership by normal form; samples are products of ``sample_len`` letters."""
    ops = ThompsonOps()
    gens = [thompson.generator(i) for i in range(max_gen + 1)]
    desc = {"type": "group_rack_thompson", "max_gen": max_gen, "sample_len": sample_len}
    return ConjRack(ops, None, random_word_sampler(ops, gens, sample_len), desc)


def free_group_rack(n_symbols: int = 2, sample_len: int = 8) -> ConjRack:
    """Con(F(A)) on symbols a0..a_{n-1}."""
    ops = FreeOps()
    gens = [Word.gen(i) for i in range(n_symbols)]
    desc = {"type": "group_rack_free", "symbols": n_symbols, "sample_len": sample_len}
    return ConjRack(ops, None, random_word_sampler(ops, gens, sample_len), desc)


# ---------------------------------------------------------------------------
# Generic helpers


def rack_op(X: Rack, a, b):
    return X.op(a, b)


def rack_ldiv(X: Rack, a, c):
    return X.ldiv(a, c)


def sample_random(X: Rack, rng: random.Random):
    return X.sample(rng)


def hom_check(f, X: Rack, Y: Rack) -> bool:
    """True iff f(a ▷ b) = f(a) ▷ f(b) for all a, b in the finite rack X.

    ``f`` is a callable or a mapping on elements of X.
    """
    fn = f.__getitem__ if hasattr(f, "__getitem__") and not callable(f) else f
    els = X.elements()
    img = {}
    for a in els:
        y = fn(a)
        if not Y.contains(y):
            raise MembershipError(f"image {y!r} of {a!r} is not in the target rack")
        img[a] = y
    for a in els:
        for b in els:
            if img[X._op(a, b)] != Y._op(img[a], img[b]):
                return False
    return True


# ---------------------------------------------------------------------------
# Descriptors


def canonical_descriptor_bytes(desc: dict) -> bytes:
    """Canonical JSON bytes of a descriptor (fields in the rack's canonical order)."""
    return json.dumps(rack_from_descriptor(desc).descriptor(), separators=(",", ":"),
                      ensure_ascii=True).encode()


def descriptor_hash(desc: dict) -> bytes:
    return hashlib.sha256(canonical_descriptor_bytes(desc)).digest()


def rack_from_descriptor(desc: dict) -> Rack:
    kind = desc.get("type")
    if kind == "table":
        rack = TableRack(desc["table"])
        if "n" in desc and desc["n"] != rack.n:
            raise ShapeError(f"descriptor says n={desc['n']} but table has {rack.n} rows")
        return rack
    if kind == "conj_perm":
        deg = desc["degree"]
        return conj_perm_rack(deg, [permgroups.parse_cycles(s, deg) for s in desc["seed"]])
    if kind == "group_rack_perm":
        deg = desc["degree"]
        gens = [permgroups.parse_cycles(s, deg) for s in desc["generators"]]
        return group_rack(PermGroup(gens, deg))
    if kind == "group_rack_thompson":
        return thompson_group_rack(desc.get("max_gen", 8), desc.get("sample_len", 16))
    if kind == "group_rack_free":
        return free_group_rack(desc.get("symbols", 2), desc.get("sample_len", 8))
    if kind == "extension":
        from .ext import extension_from_descriptor
        return extension_from_descriptor(desc)
    raise RackError(f"unknown rack descriptor type {kind!r}")


def load_rack(path) -> Rack:
    with open(path) as fh:
        return rack_from_descriptor(json.load(fh))
