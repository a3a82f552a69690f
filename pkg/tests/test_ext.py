import itertools
import json
import random

import pytest

from rackkex.ext import (CocycleError, CocycleFamily, FiberError, build_extension, extension_from_descriptor,
                         fiber_report, is_isomorphism, projection, random_cocycle, reconstruct_extension,
                         twist, validate_cocycle)
from rackkex.rackcore import (ShapeError, canonical_descriptor_bytes, check_rack_axioms, cyclic, dihedral,
                              hom_check, trivial)

import catalog


def extension_table(m_table, alpha):
    # independent construction of the product table, indexed y * k + i
    m, k = len(m_table), alpha.k
    t = [[0] * (m * k) for _ in range(m * k)]
    for y1, i, y2, j in itertools.product(range(m), range(k), range(m), range(k)):
        t[y1 * k + i][y2 * k + j] = m_table[y1][y2] * k + alpha(y1, y2, i, j)
    return t


class TestValidate:
    def test_constant_projection_family(self):
        for Y in (dihedral(3), cyclic(3), trivial(2)):
            m = len(Y.table)
            alpha = CocycleFamily.constant(m, [[0, 1], [0, 1]])
            r = validate_cocycle(Y, alpha)
            assert r.rack_valid
            assert r.quandle_valid is (True if Y.is_quandle() else None)

    def test_one_point_shift(self):
        r = validate_cocycle(trivial(1), CocycleFamily.constant(1, [[1, 0], [1, 0]]))
        assert r.rack_valid and r.quandle_valid is False
        assert r.witness == (0, 0)

    def test_non_bijective_row(self):
        r = validate_cocycle(trivial(1), CocycleFamily.constant(1, [[0, 0], [0, 1]]))
        assert not r.bijective and not r.rack_valid and r.witness == (0, 0, 0)

    def test_cocycle_failure_witness(self):
        # over R3 take alpha_{00} to be a swap and everything else the identity on j
        ident = [[0, 1], [0, 1]]
        swap = [[1, 0], [1, 0]]
        alpha = [[ident] * 3 for _ in range(3)]
        alpha[0][0] = swap
        r = validate_cocycle(dihedral(3), CocycleFamily.from_lists(alpha))
        assert r.bijective and not r.cocycle
        assert len(r.witness) == 6

    def test_shape_errors(self):
        with pytest.raises(ShapeError):
            CocycleFamily.from_lists([[[[0, 1]]]])
        with pytest.raises(ShapeError):
            CocycleFamily.from_lists([[[[0, 2], [0, 1]]]])
        with pytest.raises(ShapeError):
            validate_cocycle(dihedral(3), CocycleFamily.constant(2, [[0, 1], [0, 1]]))

    def test_exhaustive_one_point_fiber_two(self):
        # every 2x2 table over a one-point base, against brute-force axioms of the built structure
        Y = trivial(1)
        accepted = 0
        for cells in itertools.product(range(2), repeat=4):
            tab = [list(cells[:2]), list(cells[2:])]
            alpha = CocycleFamily.constant(1, tab)
            r = validate_cocycle(Y, alpha)
            brute = check_rack_axioms(extension_table(Y.table, alpha))
            assert r.rack_valid == brute.is_rack, tab
            assert r.quandle_valid == brute.is_quandle, tab
            accepted += r.rack_valid
        # only j -> j and j -> j+1 survive
        assert accepted == 2

    def test_exhaustive_two_point_trivial_base(self):
        # 2-point trivial base, only alpha_{00} varies; brute force as oracle
        Y = trivial(2)
        ident = [[0, 1], [0, 1]]
        for cells in itertools.product(range(2), repeat=4):
            tab = [list(cells[:2]), list(cells[2:])]
            alpha = CocycleFamily.from_lists([[tab, ident], [ident, ident]])
            r = validate_cocycle(Y, alpha)
            assert r.rack_valid == check_rack_axioms(extension_table(Y.table, alpha)).is_rack


class TestBuild:
    def test_refuses_invalid(self):
        with pytest.raises(CocycleError):
            build_extension(trivial(1), CocycleFamily.constant(1, [[0, 0], [0, 1]]))

    def test_matches_independent_table(self):
        for name, E in catalog.extension_racks().items():
            els = E.elements()
            t = extension_table(E.base.table, E.alpha)
            k = E.k
            for a, b in itertools.product(els, repeat=2):
                ia = E.base.index(a[0]) * k + a[1]
                ib = E.base.index(b[0]) * k + b[1]
                c = E.op(a, b)
                assert E.base.index(c[0]) * k + c[1] == t[ia][ib], name

    def test_ldiv(self):
        E = catalog.extension_racks()["R3-twisted"]
        for a, b in itertools.product(E.elements(), repeat=2):
            assert E.ldiv(a, E.op(a, b)) == b

    def test_projection_is_hom(self):
        for E in catalog.extension_racks().values():
            assert hom_check(projection(E), E, E.base)

    def test_encoding_and_text(self):
        E = catalog.extension_racks()["R3xT2"]
        x = (2, 1)
        assert E.encode(x) == bytes.fromhex("00000002" "00000001")
        assert E.decode(E.encode(x)) == x
        assert E.format(x) == "[2, 1]"
        assert E.parse(" [2, 1] ") == x
        with pytest.raises(ValueError):
            E.parse("2, 1")

    def test_descriptor_round_trip(self):
        E = catalog.extension_racks()["R3-twisted"]
        d = json.loads(canonical_descriptor_bytes(E.descriptor()))
        assert list(d) == ["type", "base", "fiber", "alpha"]
        F = extension_from_descriptor(d)
        assert F.table == E.table
        d["fiber"] = 3
        with pytest.raises(ShapeError):
            extension_from_descriptor(d)


class TestFibers:
    def test_examples(self):
        r = fiber_report(lambda j: j % 2, cyclic(4), cyclic(2))
        assert r.sizes == {0: 2, 1: 2} and r.fibers_balanced
        r = fiber_report(lambda j: 0, dihedral(3), trivial(1))
        assert r.sizes == {0: 3} and r.connected
        r = fiber_report(lambda j: j, dihedral(5), dihedral(5))
        assert set(r.sizes.values()) == {1}

    def test_unequal_fibers_over_disconnected_base(self):
        # T3 -> T2 collapsing two points: fibers 2 and 1, allowed since T2 is not connected
        r = fiber_report([0, 0, 1], trivial(3), trivial(2))
        assert r.fibers_balanced and not r.equal_fibers and not r.connected

    def test_rejects_non_hom_and_non_surjective(self):
        with pytest.raises(FiberError):
            fiber_report(lambda j: 0, dihedral(3), cyclic(2))
        with pytest.raises(FiberError):
            fiber_report(lambda j: 0, trivial(2), trivial(2))

    def test_fiber_balance_on_all_surjections_between_small_racks(self):
        racks = catalog.small_racks()
        found = 0
        for (nx, X), (ny, Y) in itertools.product(racks.items(), repeat=2):
            xs, ys = X.elements(), Y.elements()
            if len(ys) > len(xs):
                continue
            for images in itertools.product(ys, repeat=len(xs)):
                if len(set(images)) != len(ys):
                    continue
                f = dict(zip(xs, images))
                if not hom_check(f, X, Y):
                    continue
                found += 1
                r = fiber_report(f, X, Y)
                assert r.fibers_balanced, (nx, ny, images)
        assert found > 50


class TestReconstruct:
    def test_round_trip_catalog(self):
        for name, E in catalog.extension_racks().items():
            rec = reconstruct_extension(projection(E), E, E.base)
            assert validate_cocycle(E.base, rec.alpha).rack_valid
            assert is_isomorphism(rec.iso, rec.extension, E), name

    def test_r9_over_r3(self):
        rec = reconstruct_extension(lambda i: i % 3, dihedral(9), dihedral(3))
        assert rec.alpha.k == 3
        assert is_isomorphism(rec.iso, rec.extension, dihedral(9))
        # sorted fibers: g_y = [y, y+3, y+6]
        assert [rec.iso[(0, i)] for i in range(3)] == [0, 3, 6]

    def test_unequal_fibers_refused(self):
        with pytest.raises(FiberError, match="unequal fibers"):
            reconstruct_extension([0, 0, 1], trivial(3), trivial(2))

    def test_random_cocycles_over_r3(self):
        rng = random.Random(11)
        R3 = dihedral(3)
        fibers = [trivial(2), cyclic(2), dihedral(3), cyclic(3)]
        for n in range(10):
            alpha = random_cocycle(R3, fibers[n % 4], rng)
            assert validate_cocycle(R3, alpha).rack_valid
            E = build_extension(R3, alpha)
            assert check_rack_axioms(E.table).is_rack
            rec = reconstruct_extension(projection(E), E, R3)
            assert is_isomorphism(rec.iso, rec.extension, E)

    def test_twist_gives_isomorphic_extension(self):
        R3 = dihedral(3)
        alpha = CocycleFamily.constant(3, cyclic(3).table)
        hs = [[1, 2, 0], [0, 2, 1], [2, 1, 0]]
        E1, E2 = build_extension(R3, alpha), build_extension(R3, twist(R3, alpha, hs))
        iso = {(y, i): (y, hs[y][i]) for y, i in E1.elements()}
        assert is_isomorphism(iso, E1, E2)
