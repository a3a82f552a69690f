"""Independent oracles, sharing no code paths with the implementations they check."""
from fractions import Fraction as Fr


# -- Thompson's group F as piecewise-linear homeomorphisms of [0, 1] --------------
#
# A map is a sorted tuple of breakpoints (t, f(t)) including (0, 0) and (1, 1);
# the word a_{i1}^{e1} ... a_{ik}^{ek} acts as the composition with the
# rightmost factor applied first.

def _x0_points(sign):
    pts = ((Fr(0), Fr(0)), (Fr(1, 2), Fr(1, 4)), (Fr(3, 4), Fr(1, 2)), (Fr(1), Fr(1)))
    if sign < 0:
        pts = tuple((b, a) for a, b in pts)
    return pts


def generator_map(i, sign=1):
    lo = 1 - Fr(1, 2**i)
    w = Fr(1, 2**i)
    pts = [(Fr(0), Fr(0))] if i > 0 else []
    pts += [(lo + w * s, lo + w * v) for s, v in _x0_points(sign)]
    return tuple(pts)


def evaluate(f, t):
    for (x0, y0), (x1, y1) in zip(f, f[1:]):
        if x0 <= t <= x1:
            return y0 + (y1 - y0) * (t - x0) / (x1 - x0)
    raise ValueError(t)


def inverse_map(f):
    return tuple((y, x) for x, y in f)


def compose_maps(f, g):
    """f after g."""
    xs = {x for x, _ in g} | {evaluate(inverse_map(g), x) for x, _ in f}
    pts = tuple((x, evaluate(f, evaluate(g, x))) for x in sorted(xs))
    return _simplify(pts)


def _simplify(pts):
    out = [pts[0]]
    for k in range(1, len(pts) - 1):
        (x0, y0), (x1, y1), (x2, y2) = out[-1], pts[k], pts[k + 1]
        if (y1 - y0) * (x2 - x1) != (y2 - y1) * (x1 - x0):
            out.append(pts[k])
    out.append(pts[-1])
    return tuple(out)


IDENTITY_MAP = ((Fr(0), Fr(0)), (Fr(1), Fr(1)))


def word_map(codes):
    f = IDENTITY_MAP
    for c in codes:
        f = compose_maps(f, generator_map(abs(c) - 1, 1 if c > 0 else -1))
    return f


# -- Permutation relabeling ----------------------------------------------------------

def relabel_transposition(g_images, i, j):
    """g (i j) g^-1 = (g(i) g(j)) as a sorted pair."""
    return tuple(sorted((g_images[i], g_images[j])))
