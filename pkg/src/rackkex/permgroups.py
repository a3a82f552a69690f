"""Permutations of {0, ..., n-1} and small permutation groups by closure."""
from __future__ import annotations

import re
import struct
from collections import deque
from typing import Iterable, Sequence

DEFAULT_CAP = 10**6


class ClosureOverflow(RuntimeError):
    """Raised when a closure would exceed its element cap."""


class Perm:
    __slots__ = ("images",)

    def __init__(self, images: Iterable[int]):
        images = tuple(images)
        if sorted(images) != list(range(len(images))):
            raise ValueError(f"not a permutation: {images}")
        self.images = images

    @classmethod
    def _trusted(cls, images: tuple) -> "Perm":
        p = cls.__new__(cls)
        p.images = images
        return p

    @classmethod
    def identity(cls, n: int) -> "Perm":
        return cls._trusted(tuple(range(n)))

    @classmethod
    def from_cycles(cls, n: int, cycles: Sequence[Sequence[int]]) -> "Perm":
        images = list(range(n))
        seen = set()
        for cyc in cycles:
            for p in cyc:
                if not 0 <= p < n or p in seen:
                    raise ValueError(f"bad cycle {cyc} for degree {n}")
                seen.add(p)
            for k, p in enumerate(cyc):
                images[p] = cyc[(k + 1) % len(cyc)]
        return cls._trusted(tuple(images))

    @property
    def degree(self) -> int:
        return len(self.images)

    def __call__(self, i: int) -> int:
        return self.images[i]

    def __eq__(self, other):
        return isinstance(other, Perm) and self.images == other.images

    def __hash__(self):
        return hash(self.images)

    def __lt__(self, other: "Perm"):
        return (len(self.images), self.images) < (len(other.images), other.images)

    def __mul__(self, other: "Perm") -> "Perm":
        return compose(self, other)

    def __invert__(self) -> "Perm":
        return inverse(self)

    def is_identity(self) -> bool:
        return all(i == x for i, x in enumerate(self.images))

    def cycles(self) -> list:
        seen = set()
        out = []
        for start in range(len(self.images)):
            if start in seen or self.images[start] == start:
                continue
            cyc = [start]
            seen.add(start)
            j = self.images[start]
            while j != start:
                cyc.append(j)
                seen.add(j)
                j = self.images[j]
            out.append(tuple(cyc))
        return out

    def __repr__(self):
        return f"Perm({list(self.images)})"

    def __str__(self):
        return format_cycles(self)


def _check_degree(g: Perm, h: Perm):
    if len(g.images) != len(h.images):
        raise ValueError(f"degree mismatch: {len(g.images)} vs {len(h.images)}")


def compose(g: Perm, h: Perm) -> Perm:
    """The permutation i -> g(h(i))."""
    _check_degree(g, h)
    gi = g.images
    return Perm._trusted(tuple(gi[x] for x in h.images))


def inverse(g: Perm) -> Perm:
    out = [0] * len(g.images)
    for i, x in enumerate(g.images):
        out[x] = i
    return Perm._trusted(tuple(out))


def conj(g: Perm, h: Perm) -> Perm:
    """g h g^-1."""
    _check_degree(g, h)
    out = [0] * len(h.images)
    gi = g.images
    for i, x in enumerate(h.images):
        out[gi[i]] = gi[x]
    return Perm._trusted(tuple(out))


def canonical_bytes(p: Perm) -> bytes:
    n = len(p.images)
    return struct.pack(f">I{n}I", n, *p.images)


def read_canonical_bytes(data: bytes) -> tuple:
    if len(data) < 4:
        raise ValueError("truncated permutation encoding")
    (n,) = struct.unpack_from(">I", data)
    end = 4 + 4 * n
    if len(data) < end:
        raise ValueError("truncated permutation encoding")
    return Perm(struct.unpack_from(f">{n}I", data, 4)), data[end:]


def from_canonical_bytes(data: bytes) -> Perm:
    p, rest = read_canonical_bytes(data)
    if rest:
        raise ValueError(f"{len(rest)} trailing bytes after permutation encoding")
    return p


def closure(generators: Sequence[Perm], cap: int = DEFAULT_CAP) -> list:
    """All elements of the group generated by ``generators``, sorted.

    Breadth-first from the identity, right-multiplying by generators.
    Raises :class:`ClosureOverflow` rather than return a partial set.
    """
    generators = list(generators)
    if not generators:
        raise ValueError("closure needs at least one generator")
    n = generators[0].degree
    for g in generators:
        if g.degree != n:
            raise ValueError("generators have different degrees")
    ident = Perm.identity(n)
    seen = {ident}
    queue = deque([ident])
    while queue:
        g = queue.popleft()
        for s in generators:
            h = compose(g, s)
            if h not in seen:
                if len(seen) >= cap:
                    raise ClosureOverflow(f"group closure exceeds cap of {cap} elements")
                seen.add(h)
                queue.append(h)
    return sorted(seen)


def center(elements: Iterable[Perm]) -> list:
    elements = list(elements)
    return sorted(z for z in elements if all(compose(z, g) == compose(g, z) for g in elements))


def orbit(generators: Sequence[Perm], point: int) -> set:
    generators = list(generators)
    if generators and not 0 <= point < generators[0].degree:
        raise ValueError(f"point {point} out of range")
    seen = {point}
    stack = [point]
    while stack:
        p = stack.pop()
        for g in generators:
            q = g.images[p]
            if q not in seen:
                seen.add(q)
                stack.append(q)
    return seen


def orbits(generators: Sequence[Perm], degree: int) -> list:
    remaining = set(range(degree))
    out = []
    while remaining:
        p = min(remaining)
        orb = orbit(generators, p) if generators else {p}
        out.append(sorted(orb))
        remaining -= orb
    return out


class PermGroup:
    def __init__(self, generators: Sequence[Perm], degree: int | None = None, cap: int = DEFAULT_CAP):
        self.generators = list(generators)
        if degree is None:
            if not self.generators:
                raise ValueError("degree required for an empty generator list")
            degree = self.generators[0].degree
        self.degree = degree
        self.cap = cap
        self._elements = None

    @property
    def elements(self) -> list:
        if self._elements is None:
            gens = self.generators or [Perm.identity(self.degree)]
            self._elements = closure(gens, self.cap)
        return self._elements

    def order(self) -> int:
        return len(self.elements)

    def center(self) -> list:
        return center(self.elements)

    def is_abelian(self) -> bool:
        return len(self.center()) == self.order()

    def __contains__(self, g: Perm) -> bool:
        return g in set(self.elements)

    def __repr__(self):
        return f"PermGroup(degree={self.degree}, generators={[str(g) for g in self.generators]})"


def symmetric_group(n: int) -> PermGroup:
    if n < 2:
        return PermGroup([Perm.identity(n)], n)
    gens = [Perm.from_cycles(n, [(0, 1)])]
    if n > 2:
        gens.append(Perm.from_cycles(n, [tuple(range(n))]))
    return PermGroup(gens)


def alternating_group(n: int) -> PermGroup:
    gens = [Perm.from_cycles(n, [(0, 1, k)]) for k in range(2, n)]
    return PermGroup(gens or [Perm.identity(n)], n)


def cyclic_group(n: int) -> PermGroup:
    return PermGroup([Perm.from_cycles(n, [tuple(range(n))])] if n > 1 else [Perm.identity(n)], n)


def dihedral_group(n: int) -> PermGroup:
    """Symmetries of an n-gon acting on its vertices (order 2n)."""
    rot = Perm.from_cycles(n, [tuple(range(n))])
    ref = Perm(tuple((-i) % n for i in range(n)))
    return PermGroup([rot, ref])


def format_cycles(p: Perm) -> str:
    cyc = p.cycles()
    if not cyc:
        return "()"
    return "".join("(" + " ".join(str(x) for x in c) + ")" for c in cyc)


_CYCLE = re.compile(r"\(([^()]*)\)")


def parse_cycles(text: str, degree: int) -> Perm:
    text = text.strip()
    if _CYCLE.sub("", text).strip():
        raise ValueError(f"malformed cycle notation: {text!r}")
    cycles = []
    for m in _CYCLE.finditer(text):
        body = m.group(1).replace(",", " ").split()
        if body:
            cycles.append(tuple(int(x) for x in body))
    return Perm.from_cycles(degree, cycles)
