"""Inner automorphism groups of finite racks.

Permutations here act on element *indices* of the rack, in the rack's
canonical element order.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from . import permgroups
from .permgroups import DEFAULT_CAP, ClosureOverflow, Perm, PermGroup
from .rackcore import ConjRack, MembershipError, Rack
from .words import Word, inv, mul


@dataclass(frozen=True)
class PhiMap:
    source: object
    perm: Perm


def phi(X: Rack, a) -> PhiMap:
    """Left multiplication b -> a ▷ b as a permutation of X's indices."""
    i = X.index(a)
    return PhiMap(a, Perm(X.table[i]))


def phi_perms(X: Rack) -> list:
    return [Perm(row) for row in X.table]


def inn_group(X: Rack, cap: int = DEFAULT_CAP) -> PermGroup:
    n = len(X.table)
    G = PermGroup(phi_perms(X), n, cap)
    G.elements  # materialize; raises ClosureOverflow past the cap
    return G


def orbits(X: Rack) -> list:
    n = len(X.table)
    return permgroups.orbits(phi_perms(X), n)


def is_connected(X: Rack) -> bool:
    return len(orbits(X)) <= 1


def phi_is_rack_hom(X: Rack) -> bool:
    """Φ(a ▷ b) = Φ(a) Φ(b) Φ(a)^-1 for every pair."""
    t = X.table
    perms = phi_perms(X)
    n = len(t)
    for a in range(n):
        for b in range(n):
            if perms[t[a][b]] != permgroups.conj(perms[a], perms[b]):
                return False
    return True


def phi_word(X: Rack, w: Word) -> Perm:
    """φ_w: symbol k names the k-th element; w = a1 a2^-1 gives φ_{a1} φ_{a2}^-1."""
    perms = phi_perms(X)
    out = Perm.identity(len(perms))
    for c in w.codes:
        k = abs(c) - 1
        if k >= len(perms):
            raise MembershipError(f"symbol a{k} does not name an element of X")
        p = perms[k]
        out = permgroups.compose(out, p if c > 0 else permgroups.inverse(p))
    return out


@dataclass
class CenterKernelReport:
    group_order: int
    image_order: int
    inn_order: int
    center: list
    kernel: list
    image_is_inn: bool
    kernel_is_center: bool
    witness: object = None

    @property
    def ok(self) -> bool:
        return self.image_is_inn and self.kernel_is_center


def check_center_kernel(X: ConjRack, cap: int = DEFAULT_CAP) -> CenterKernelReport:
    """Extend Φ to G = <X> by g -> (x -> g x g^-1) and compare image/kernel with Inn(X)/Z(G)."""
    els = X.elements()
    idx = {x: i for i, x in enumerate(els)}
    G = permgroups.closure(els, cap)
    images = {}
    for g in G:
        images[g] = Perm(idx[permgroups.conj(g, x)] for x in els)
    ident = Perm.identity(len(els))
    kernel = sorted(g for g, p in images.items() if p == ident)
    center = permgroups.center(G)
    image_set = set(images.values())
    inn = set(inn_group(X, cap).elements)
    witness = None
    if image_set != inn:
        witness = next(iter(image_set ^ inn))
    elif kernel != center:
        witness = next(iter(set(kernel) ^ set(center)))
    return CenterKernelReport(
        group_order=len(G), image_order=len(image_set), inn_order=len(inn),
        center=center, kernel=kernel, image_is_inn=image_set == inn,
        kernel_is_center=kernel == center, witness=witness)


@dataclass
class Harvest:
    relators: list
    reached: int
    tree_words: dict


def harvest_relations(X: Rack, max_len: int | None = None, cap: int = DEFAULT_CAP) -> Harvest:
    """Relators w with φ_w = id from a breadth-first walk of the Cayley graph of Inn(X).

    Each spanning-tree vertex g carries its tree word w_g; every non-tree
    edge g --a--> h closes the cycle w_g a w_h^-1, which is emitted when it
    does not freely reduce to 1.  ``max_len`` bounds the tree-word length
    (``None`` walks the whole group).
    """
    perms = phi_perms(X)
    n = len(perms)
    ident = Perm.identity(n)
    tree = {ident: Word()}
    queue = deque([ident])
    relators = []
    seen_rel = set()
    while queue:
        g = queue.popleft()
        wg = tree[g]
        for k, p in enumerate(perms):
            h = permgroups.compose(g, p)
            step = mul(wg, Word.gen(k))
            if h not in tree:
                if max_len is not None and len(step) > max_len:
                    continue
                if len(tree) >= cap:
                    raise ClosureOverflow(f"relation harvest exceeds cap of {cap} elements")
                tree[h] = step
                queue.append(h)
                continue
            r = mul(step, inv(tree[h]))
            if r and r not in seen_rel:
                seen_rel.add(r)
                relators.append(r)
    return Harvest(relators, len(tree), tree)
