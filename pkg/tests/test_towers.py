import pytest

from towerlim.exactlat import (
    IntMatrix,
    cyclic_group,
    free_group,
    hom_make,
    identity_hom,
    present,
)
from towerlim.towers import (
    FiniteTower,
    NotExact,
    PeriodicTower,
    StreamedTower,
    TowerError,
    UnknownFamily,
    adic_quotient_tower,
    canonical_completion_ses,
    make_streamed,
    periodic_tower,
    pure_tower,
    reduce_to_images,
    shift,
    stable_kernel,
    tower_ses,
    truncate,
)

Z = free_group(1)


def mult(group, k):
    return hom_make(group, group, [[k]])


class TestConstruction:
    def test_pure_periodic(self):
        t = pure_tower(Z, [[5]])
        assert t.is_pure_periodic()
        assert t.group_at(3) is Z
        assert t.bond_at(7).matrix.data == ((5,),)

    def test_constant(self):
        t = pure_tower(Z, [[1]])
        assert t.tail_endo.equals(identity_hom(Z))

    def test_rank2(self):
        t = pure_tower(free_group(2), [[2, 1], [0, 1]])
        assert t.tail_group.rank == 2

    def test_prefix(self):
        Z2 = cyclic_group(2)
        spl = hom_make(Z, Z2, [[1]])
        t = periodic_tower([Z2], [], Z, mult(Z, 3), splice=spl)
        assert t.prefix_len == 1
        assert t.group_at(0) is Z2
        assert t.group_at(1) is Z
        assert t.bond_at(0) is spl
        assert t.bond_at(1).matrix.data == ((3,),)

    def test_prefix_needs_splice(self):
        with pytest.raises(TowerError):
            periodic_tower([cyclic_group(2)], [], Z, mult(Z, 3))


class TestShiftTruncate:
    def test_shift_pure_is_identity(self):
        t = pure_tower(Z, [[7]])
        assert shift(t, 3) == t

    def test_shift_peels_prefix(self):
        Z2 = cyclic_group(2)
        t = periodic_tower([Z2], [], Z, mult(Z, 5), splice=hom_make(Z, Z2, [[1]]))
        s = shift(t, 1)
        assert s.is_pure_periodic()
        assert s.tail_group is Z

    def test_shift_streamed_reindexes(self):
        t = make_streamed("hawaiian_h1")
        s = shift(t, 2)
        assert s.group_at(2).rank == 4

    def test_truncate_periodic(self):
        ft = truncate(pure_tower(Z, [[2]]), 2)
        assert ft.depth == 2
        assert [g.rank for g in ft.groups] == [1, 1, 1]
        assert ft.composite(2, 0).matrix.data == ((4,),)

    def test_truncate_hawaiian(self):
        ft = truncate(make_streamed("hawaiian_h1"), 3)
        assert [g.rank for g in ft.groups] == [0, 1, 2, 3]

    def test_truncate_constant_torsion(self):
        t = pure_tower(cyclic_group(2), [[1]])
        ft = truncate(t, 5)
        assert len(ft.groups) == 6
        assert all(g.smith_invariants == (0, [2]) for g in ft.groups)

    def test_truncate_shift_compatibility(self):
        Z2 = cyclic_group(2)
        t = periodic_tower([Z2], [], Z, mult(Z, 5), splice=hom_make(Z, Z2, [[1]]))
        n = 4
        left = truncate(shift(t, 1), n)
        right = truncate(t, n + 1)
        dropped = FiniteTower(right.groups[1:], right.bonds[1:])
        assert [g.smith_invariants for g in left.groups] == \
               [g.smith_invariants for g in dropped.groups]
        assert all(a.matrix == b.matrix for a, b in zip(left.bonds, dropped.bonds))


class TestStreamedFamilies:
    def test_hawaiian_levels(self):
        t = make_streamed("hawaiian_h1")
        assert t.group_at(4).rank == 4
        b = t.bond_at(3)  # Z^4 -> Z^3 dropping the last coordinate
        assert b.matrix == IntMatrix.from_rows([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 1, 0]])

    def test_cluster_bond(self):
        t = make_streamed("cluster_h1", (2,))
        b = t.bond_at(3)
        assert b.matrix == IntMatrix.from_rows(
            [[2, 0, 0, 0], [0, 2, 0, 0], [0, 0, 2, 0]])

    def test_finite_sets_level(self):
        t = make_streamed("finite_sets")
        assert t.group_at(2).rank == 3

    def test_unknown_family(self):
        with pytest.raises(UnknownFamily):
            make_streamed("does_not_exist")

    def test_adic_quotient_levels(self):
        t = adic_quotient_tower(Z, mult(Z, 2))
        assert t.group_at(0).is_trivial()
        assert t.group_at(3).smith_invariants == (0, [8])


class TestReduceToImages:
    def test_projection_kernel_quotient(self):
        t = pure_tower(free_group(2), [[0, 0], [0, 1]])
        r = reduce_to_images(t)
        assert r.tail_group.smith_invariants == (1, [])
        assert r.tail_endo.matrix.det() in (1, -1)

    def test_injective_unchanged(self):
        t = pure_tower(Z, [[5]])
        r = reduce_to_images(t)
        assert r.tail_group.smith_invariants == (1, [])
        assert abs(r.tail_endo.matrix.data[0][0]) == 5

    def test_torsion_nilpotent_to_zero(self):
        Z4 = cyclic_group(4)
        t = pure_tower(Z4, [[2]])
        r = reduce_to_images(t)
        assert r.tail_group.is_trivial()

    def test_deep_torsion_kernel_chain(self):
        Z16 = cyclic_group(16)
        t = pure_tower(Z16, [[2]])
        r = reduce_to_images(t)
        assert r.tail_group.is_trivial()

    def test_stable_kernel_of_unit(self):
        K = stable_kernel(Z, mult(Z, 1))
        assert K.cols == 0


class TestTowerSES:
    def test_trivial_ses(self):
        t = pure_tower(Z, [[3]])
        zero = pure_tower(free_group(0), IntMatrix.from_columns(0, []))
        inj = hom_make(Z, Z, [[1]])
        sur = hom_make(Z, zero.tail_group, IntMatrix.zero(0, 1))
        ses = tower_ses(t, t, zero, [], [], inj, sur)
        assert ses.verified_to >= 3

    def test_direct_sum_ses(self):
        ZxZ = free_group(2)
        sub = pure_tower(Z, [[2]])
        total = pure_tower(ZxZ, [[2, 0], [0, 3]])
        quot = pure_tower(Z, [[3]])
        inj = hom_make(Z, ZxZ, [[1], [0]])
        sur = hom_make(ZxZ, Z, [[0, 1]])
        ses = tower_ses(sub, total, quot, [], [], inj, sur)
        assert ses.inject_at(5).matrix.column(0)[0] == 1

    def test_not_exact_squares(self):
        a = pure_tower(Z, [[1]])
        b = pure_tower(Z, [[2]])
        zero = pure_tower(free_group(0), IntMatrix.from_columns(0, []))
        inj = hom_make(Z, Z, [[1]])
        sur = hom_make(Z, zero.tail_group, IntMatrix.zero(0, 1))
        with pytest.raises(NotExact):
            tower_ses(a, b, zero, [], [], inj, sur)

    def test_canonical_completion_ses(self):
        ses = canonical_completion_ses(Z, mult(Z, 2))
        assert ses.canonical_completion
        assert ses.quot.group_at(2).smith_invariants == (0, [4])
        # inclusion at level i is multiplication by 2^i
        assert ses.inject_at(3).matrix.data == ((8,),)

    def test_rank_additivity(self):
        ZxZ = free_group(2)
        sub = pure_tower(Z, [[2]])
        total = pure_tower(ZxZ, [[2, 5], [0, 3]])
        quot = pure_tower(Z, [[3]])
        inj = hom_make(Z, ZxZ, [[1], [0]])
        sur = hom_make(ZxZ, Z, [[0, 1]])
        ses = tower_ses(sub, total, quot, [], [], inj, sur)
        for i in range(4):
            assert (ses.total.group_at(i).rank
                    == ses.sub.group_at(i).rank + ses.quot.group_at(i).rank)
