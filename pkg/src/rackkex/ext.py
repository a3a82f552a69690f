"""Rack extensions Y x_alpha F over finite base racks."""
from __future__ import annotations

import itertools
import random
import struct
from dataclasses import dataclass
from typing import Sequence

from .inn import is_connected
from .rackcore import (Rack, RackError, ShapeError, hom_check,
                       rack_from_descriptor)


class CocycleError(RackError):
    pass


class FiberError(RackError):
    pass


@dataclass(frozen=True)
class CocycleFamily:
    """alpha[y1][y2][i][j], indices into the base element list and the fiber {0..k-1}."""

    m: int
    k: int
    alpha: tuple

    @classmethod
    def from_lists(cls, alpha) -> "CocycleFamily":
        m = len(alpha)
        if m == 0:
            raise ShapeError("cocycle family over an empty base")
        k = len(alpha[0][0]) if alpha[0] else 0
        for y1 in range(m):
            if len(alpha[y1]) != m:
                raise ShapeError(f"alpha[{y1}] has {len(alpha[y1])} entries, expected {m}")
            for y2 in range(m):
                tab = alpha[y1][y2]
                if len(tab) != k or any(len(row) != k for row in tab):
                    raise ShapeError(f"alpha[{y1}][{y2}] is not {k}x{k}")
                for row in tab:
                    for v in row:
                        if not isinstance(v, int) or not 0 <= v < k:
                            raise ShapeError(f"alpha[{y1}][{y2}] entry {v!r} outside fiber")
        frozen = tuple(tuple(tuple(tuple(r) for r in alpha[y1][y2]) for y2 in range(m))
                       for y1 in range(m))
        return cls(m, k, frozen)

    @classmethod
    def constant(cls, m: int, fiber_table: Sequence[Sequence[int]]) -> "CocycleFamily":
        """alpha_{y1 y2} = fiber_table for every pair."""
        return cls.from_lists([[fiber_table] * m for _ in range(m)])

    def to_lists(self) -> list:
        return [[[list(r) for r in tab] for tab in row] for row in self.alpha]

    def __call__(self, y1: int, y2: int, i: int, j: int) -> int:
        return self.alpha[y1][y2][i][j]


@dataclass(frozen=True)
class CocycleReport:
    bijective: bool
    cocycle: bool
    quandle_valid: bool | None
    witness: tuple | None = None

    @property
    def rack_valid(self) -> bool:
        return self.bijective and self.cocycle

    def __str__(self):
        s = f"rack_valid={'yes' if self.rack_valid else 'no'}"
        if self.quandle_valid is not None:
            s += f" quandle_valid={'yes' if self.quandle_valid else 'no'}"
        if self.witness is not None:
            s += f" witness={self.witness}"
        return s


def validate_cocycle(Y: Rack, alpha: CocycleFamily) -> CocycleReport:
    """Check the bijection and cocycle conditions exhaustively.

    The diagonal condition alpha_{yy}(i, i) = i is reported only for quandle
    bases (``quandle_valid`` is None otherwise).  Witnesses: bijection
    (y1, y2, i); cocycle (y1, y2, y3, i, j, k); diagonal (y, i).
    """
    t = Y.table
    m = len(t)
    if alpha.m != m:
        raise ShapeError(f"cocycle family indexed by {alpha.m} points, base has {m}")
    k = alpha.k
    A = alpha.alpha
    F = range(k)

    witness = None
    bijective = True
    for y1, y2, i in itertools.product(range(m), range(m), F):
        if len(set(A[y1][y2][i])) != k:
            bijective = False
            witness = (y1, y2, i)
            break

    cocycle = True
    if bijective:
        for y1, y2, y3 in itertools.product(range(m), repeat=3):
            lhs_tab = A[y1][t[y2][y3]]
            a23 = A[y2][y3]
            rhs_tab = A[t[y1][y2]][t[y1][y3]]
            a12 = A[y1][y2]
            a13 = A[y1][y3]
            for i, j, kk in itertools.product(F, repeat=3):
                if lhs_tab[i][a23[j][kk]] != rhs_tab[a12[i][j]][a13[i][kk]]:
                    cocycle = False
                    witness = (y1, y2, y3, i, j, kk)
                    break
            if not cocycle:
                break
    else:
        cocycle = False

    quandle_valid = None
    if Y.is_quandle():
        quandle_valid = bijective and cocycle
        if quandle_valid:
            for y, i in itertools.product(range(m), F):
                if A[y][y][i][i] != i:
                    quandle_valid = False
                    witness = (y, i)
                    break
    return CocycleReport(bijective, cocycle, quandle_valid, witness)


class ExtensionRack(Rack):
    """Elements are pairs (y, i) with y a base element and i in range(k)."""

    kind = "extension"

    def __init__(self, base: Rack, alpha: CocycleFamily, check: bool = True):
        if check:
            report = validate_cocycle(base, alpha)
            if not report.rack_valid:
                raise CocycleError(f"invalid cocycle family: {report}")
        self.base = base
        self.alpha = alpha
        self.k = alpha.k
        self._base_els = base.elements()

    def elements(self) -> list:
        return [(y, i) for y in self._base_els for i in range(self.k)]

    def contains(self, x) -> bool:
        return (isinstance(x, tuple) and len(x) == 2 and self.base.contains(x[0])
                and isinstance(x[1], int) and 0 <= x[1] < self.k)

    def _op(self, a, b):
        (y1, i), (y2, j) = a, b
        B = self.base
        return (B._op(y1, y2), self.alpha(B.index(y1), B.index(y2), i, j))

    def _ldiv(self, a, c):
        (y1, i), (y3, kk) = a, c
        B = self.base
        y2 = B._ldiv(y1, y3)
        row = self.alpha.alpha[B.index(y1)][B.index(y2)][i]
        return (y2, row.index(kk))

    def encode(self, x) -> bytes:
        return self.base.encode(x[0]) + struct.pack(">I", x[1])

    def decode(self, data: bytes):
        if len(data) < 4:
            raise ValueError("truncated extension element encoding")
        return (self.base.decode(data[:-4]), struct.unpack(">I", data[-4:])[0])

    def format(self, x) -> str:
        return f"[{self.base.format(x[0])}, {x[1]}]"

    def parse(self, text: str):
        text = text.strip()
        if not (text.startswith("[") and text.endswith("]")) or "," not in text:
            raise ValueError(f"extension element must look like [base, i]: {text!r}")
        btext, itext = text[1:-1].rsplit(",", 1)
        return (self.base.parse(btext.strip()), int(itext))

    def descriptor(self) -> dict:
        return {"type": "extension", "base": self.base.descriptor(), "fiber": self.k,
                "alpha": self.alpha.to_lists()}

    def __repr__(self):
        return f"ExtensionRack(base={self.base!r}, fiber={self.k})"


def build_extension(Y: Rack, alpha: CocycleFamily) -> ExtensionRack:
    return ExtensionRack(Y, alpha)


def extension_from_descriptor(desc: dict) -> ExtensionRack:
    base = rack_from_descriptor(desc["base"])
    alpha = CocycleFamily.from_lists(desc["alpha"])
    if alpha.k != desc["fiber"]:
        raise ShapeError(f"descriptor fiber {desc['fiber']} does not match alpha tables ({alpha.k})")
    return ExtensionRack(base, alpha)


def projection(E: ExtensionRack):
    return lambda x: x[0]


@dataclass
class FiberReport:
    sizes: dict
    fibers_balanced: bool
    connected: bool
    equal_fibers: bool
    witness: tuple | None = None


def _fibers(fn, X: Rack, Y: Rack) -> dict:
    fibers = {y: [] for y in Y.elements()}
    for x in X.elements():
        fibers[fn(x)].append(x)
    return fibers


def _as_callable(f):
    return f.__getitem__ if hasattr(f, "__getitem__") and not callable(f) else f


def fiber_report(f, X: Rack, Y: Rack) -> FiberReport:
    """Fiber cardinalities of a surjective homomorphism f: X -> Y.

    Checks |f^-1(y2)| = |f^-1(y1 ▷ y2)| for all pairs, and equal fibers when Y is connected.
    """
    fn = _as_callable(f)
    if not hom_check(fn, X, Y):
        raise FiberError("map is not a rack homomorphism")
    fibers = _fibers(fn, X, Y)
    empty = [y for y, fib in fibers.items() if not fib]
    if empty:
        raise FiberError(f"map is not surjective; {Y.format(empty[0])} has no preimage")
    sizes = {y: len(fib) for y, fib in fibers.items()}
    witness = None
    balanced = True
    for y1 in Y.elements():
        for y2 in Y.elements():
            if sizes[y2] != sizes[Y._op(y1, y2)]:
                balanced = False
                witness = (y1, y2)
                break
        if not balanced:
            break
    connected = is_connected(Y)
    equal = len(set(sizes.values())) == 1
    if connected and not equal and witness is None:
        witness = (min(sizes, key=sizes.get), max(sizes, key=sizes.get))
    return FiberReport(sizes, balanced and (equal or not connected), connected, equal, witness)


@dataclass
class Reconstruction:
    alpha: CocycleFamily
    iso: dict
    extension: ExtensionRack


def reconstruct_extension(f, X: Rack, Y: Rack) -> Reconstruction:
    """Present X as Y x_alpha F along an equal-fiber surjective homomorphism f.

    Fiber y is identified with range(k) by canonical-byte order of its
    elements; alpha_{y1 y2}(i, j) = g_{y1▷y2}^-1(g_{y1}(i) ▷ g_{y2}(j)).  The
    returned ``iso`` maps (y, i) -> g_y(i) and is checked to be a bijective
    homomorphism from the rebuilt extension onto X.
    """
    fn = _as_callable(f)
    if not hom_check(fn, X, Y):
        raise FiberError("map is not a rack homomorphism")
    fibers = _fibers(fn, X, Y)
    sizes = {y: len(v) for y, v in fibers.items()}
    if min(sizes.values()) == 0:
        empty = min(sizes, key=sizes.get)
        raise FiberError(f"map is not surjective; {Y.format(empty)} has no preimage")
    if len(set(sizes.values())) != 1:
        y_small = min(sizes, key=sizes.get)
        y_big = max(sizes, key=sizes.get)
        raise FiberError(f"unequal fibers: |f^-1({Y.format(y_small)})| = {sizes[y_small]} but "
                         f"|f^-1({Y.format(y_big)})| = {sizes[y_big]}")
    k = next(iter(sizes.values()))
    g = {y: sorted(fib, key=X.encode) for y, fib in fibers.items()}
    pos = {x: i for y, fib in g.items() for i, x in enumerate(fib)}
    ys = Y.elements()
    alpha = []
    for y1 in ys:
        row = []
        for y2 in ys:
            row.append([[pos[X._op(g[y1][i], g[y2][j])] for j in range(k)] for i in range(k)])
        alpha.append(row)
    fam = CocycleFamily.from_lists(alpha)
    E = ExtensionRack(Y, fam)
    iso = {(y, i): g[y][i] for y in ys for i in range(k)}
    if len(set(iso.values())) != len(X.elements()) or not hom_check(iso, E, X):
        raise RackError("reconstructed map is not an isomorphism")
    return Reconstruction(fam, iso, E)


def is_isomorphism(f, X: Rack, Y: Rack) -> bool:
    fn = _as_callable(f)
    xs = X.elements()
    images = [fn(x) for x in xs]
    return len(set(images)) == len(xs) == len(Y.elements()) and hom_check(fn, X, Y)


def twist(Y: Rack, alpha: CocycleFamily, bijections: Sequence[Sequence[int]]) -> CocycleFamily:
    """Relabel each fiber y by the permutation h_y; yields an isomorphic extension."""
    t = Y.table
    m, k = alpha.m, alpha.k
    inv = []
    for h in bijections:
        hi = [0] * k
        for i, v in enumerate(h):
            hi[v] = i
        inv.append(hi)
    out = [[[[bijections[t[y1][y2]][alpha(y1, y2, inv[y1][i], inv[y2][j])] for j in range(k)]
              for i in range(k)] for y2 in range(m)] for y1 in range(m)]
    return CocycleFamily.from_lists(out)


def random_cocycle(Y: Rack, fiber: Rack, rng: random.Random) -> CocycleFamily:
    """A product cocycle alpha(i, j) = i ▷_F j, relabeled fiberwise at random."""
    m = len(Y.table)
    k = len(fiber.table)
    base = CocycleFamily.constant(m, fiber.table)
    hs = []
    for _ in range(m):
        h = list(range(k))
        rng.shuffle(h)
        hs.append(h)
    return twist(Y, base, hs)
