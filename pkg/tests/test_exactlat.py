"""Tests for the exact lattice layer.

The SNF tests are checked against an independent minor-gcd oracle:
d_1 * ... * d_k equals the gcd of all k x k minors.
"""

import itertools
import random

import pytest

from towerlim.exactlat import (
    FgAbGroup,
    IllDefined,
    IndexUndefined,
    IntMatrix,
    cyclic_group,
    direct_sum,
    free_group,
    hnf,
    hom_make,
    hom_parts,
    identity_hom,
    kernel,
    lattice_canon,
    lattice_contains,
    lattice_index,
    lattice_intersect,
    lattice_saturate,
    lattice_sum,
    present,
    snf,
    solve_columns,
    unimodular_inverse,
)


def minor_gcd_invariants(mat):
    """Independent oracle: invariant factors from gcds of k x k minors."""
    m, n = mat.rows, mat.cols
    gcds = []
    prev = 1
    for k in range(1, min(m, n) + 1):
        g = 0
        for rows in itertools.combinations(range(m), k):
            for cols in itertools.combinations(range(n), k):
                sub = mat.submatrix(rows, cols)
                g = _gcd(g, sub.det())
                if g == 1:
                    break
            if g == 1:
                break
        gcds.append(g)
    out = []
    for k, g in enumerate(gcds):
        if g == 0:
            out.append(0)
        else:
            out.append(g // prev)
            prev = g
    # once a zero gcd appears all later invariants are zero
    seen_zero = False
    fixed = []
    for d in out:
        if d == 0:
            seen_zero = True
        fixed.append(0 if seen_zero else d)
    return fixed


def _gcd(a, b):
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def random_matrix(rng, rows, cols, bound):
    return IntMatrix.from_rows(
        [[rng.randint(-bound, bound) for _ in range(cols)] for _ in range(rows)])


class TestHnf:
    def test_identity(self):
        H, U = hnf(IntMatrix.identity(2))
        assert H == IntMatrix.identity(2)
        assert U == IntMatrix.identity(2)

    def test_det_preserved(self):
        M = IntMatrix.from_rows([[2, 4], [6, 8]])
        H, U = hnf(M)
        assert abs(H.det()) == 8
        assert H == M * U
        assert abs(U.det()) == 1

    def test_zero(self):
        Z = IntMatrix.zero(3, 2)
        H, U = hnf(Z)
        assert H == Z
        assert abs(U.det()) == 1

    def test_column_span_preserved(self):
        rng = random.Random(11)
        for _ in range(50):
            M = random_matrix(rng, 3, 3, 6)
            H, U = hnf(M)
            assert H == M * U
            assert abs(U.det()) == 1
            # mutual containment of column spans
            assert solve_columns(M, H) is not None
            assert solve_columns(H, M) is not None

    def test_canonical_for_equal_lattices(self):
        rng = random.Random(5)
        for _ in range(30):
            M = random_matrix(rng, 3, 4, 5)
            perm = list(range(4))
            rng.shuffle(perm)
            N = IntMatrix.from_columns(3, [M.column(j) for j in perm])
            assert lattice_canon(M) == lattice_canon(N)


class TestSnf:
    def test_already_diagonal(self):
        S, U, V = snf(IntMatrix.from_rows([[2, 0], [0, 4]]))
        assert S.diagonal() == [2, 4]

    def test_example(self):
        M = IntMatrix.from_rows([[2, 4], [6, 8]])
        S, U, V = snf(M)
        assert S.diagonal() == [2, 4]
        assert U * M * V == S
        assert abs(U.det()) == 1 and abs(V.det()) == 1

    def test_zero_1x1(self):
        S, _, _ = snf(IntMatrix.from_rows([[0]]))
        assert S.diagonal() == [0]

    def test_against_minor_gcd_oracle(self):
        rng = random.Random(42)
        for _ in range(500):
            rows = rng.randint(1, 4)
            cols = rng.randint(1, 4)
            M = random_matrix(rng, rows, cols, 9)
            S, U, V = snf(M)
            assert U * M * V == S
            assert abs(U.det()) == 1
            assert abs(V.det()) == 1
            diag = S.diagonal()
            for a, b in zip(diag, diag[1:]):
                if a != 0:
                    assert b % a == 0
                else:
                    assert b == 0
            assert diag == minor_gcd_invariants(M)


class TestPresent:
    def test_cyclic(self):
        G = present(1, IntMatrix.from_rows([[5]]))
        assert G.smith_invariants == (0, [5])

    def test_free(self):
        G = present(2, IntMatrix.from_columns(2, []))
        assert G.smith_invariants == (2, [])

    def test_crt_merge(self):
        G = present(2, IntMatrix.from_rows([[2, 0], [0, 3]]))
        assert G.smith_invariants == (0, [6])

    def test_reprsent_idempotent(self):
        rng = random.Random(3)
        for _ in range(40):
            M = random_matrix(rng, 3, rng.randint(0, 4), 7)
            G = present(3, M)
            r, t = G.smith_invariants
            rebuilt = direct_sum(
                free_group(r),
                present(len(t), IntMatrix.from_rows(
                    [[t[i] if i == j else 0 for j in range(len(t))] for i in range(len(t))]))
                if t else free_group(0))
            assert rebuilt.smith_invariants == (r, t)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            present(3, IntMatrix.from_rows([[1, 2]]))


class TestHomMake:
    def test_mult_p_on_Z(self):
        Z = free_group(1)
        h = hom_make(Z, Z, [[7]])
        assert h.matrix.data == ((7,),)

    def test_ill_defined(self):
        with pytest.raises(IllDefined):
            hom_make(cyclic_group(2), cyclic_group(4), [[1]])

    def test_doubling_into_Z4(self):
        h = hom_make(cyclic_group(2), cyclic_group(4), [[2]])
        assert h.matrix.data == ((2,),)

    def test_equality_mod_relations(self):
        Z4 = cyclic_group(4)
        a = hom_make(Z4, Z4, [[1]])
        b = hom_make(Z4, Z4, [[5]])
        assert a.equals(b)
        assert not a.equals(hom_make(Z4, Z4, [[2]]))


class TestHomParts:
    def test_mult_p(self):
        Z = free_group(1)
        k, im, ck = hom_parts(hom_make(Z, Z, [[5]]))
        assert k.group.is_trivial()
        assert im.group.smith_invariants == (1, [])
        assert ck.group.smith_invariants == (0, [5])

    def test_zero_map(self):
        Z = free_group(1)
        k, im, ck = hom_parts(hom_make(Z, Z, [[0]]))
        assert k.group.smith_invariants == (1, [])
        assert im.group.is_trivial()
        assert ck.group.smith_invariants == (1, [])

    def test_diag_2_3(self):
        Z2 = free_group(2)
        k, im, ck = hom_parts(hom_make(Z2, Z2, [[2, 0], [0, 3]]))
        assert k.group.is_trivial()
        assert ck.group.smith_invariants == (0, [6])
        assert lattice_index(im.witness, IntMatrix.identity(2)) == 6

    def test_coker_order_equals_det(self):
        rng = random.Random(9)
        Z = {n: free_group(n) for n in (1, 2, 3, 4)}
        done = 0
        while done < 60:
            n = rng.randint(1, 4)
            M = random_matrix(rng, n, n, 9)
            d = abs(M.det())
            if d == 0:
                continue
            _, _, ck = hom_parts(hom_make(Z[n], Z[n], M))
            assert ck.group.order() == d
            done += 1

    def test_torsion_source(self):
        # Z/4 -> Z/2 reduction: kernel Z/2, image Z/2, cokernel 0
        h = hom_make(cyclic_group(4), cyclic_group(2), [[1]])
        k, im, ck = hom_parts(h)
        assert k.group.smith_invariants == (0, [2])
        assert im.group.smith_invariants == (0, [2])
        assert ck.group.is_trivial()


class TestLatticeOps:
    def test_index(self):
        sup = IntMatrix.identity(2)
        sub = IntMatrix.from_rows([[2, 0], [0, 1]])
        assert lattice_index(sub, sup) == 2

    def test_index_undefined(self):
        a = IntMatrix.from_columns(1, [[2]])
        b = IntMatrix.from_columns(1, [[4]])
        with pytest.raises(IndexUndefined):
            lattice_index(a, b)

    def test_infinite_index(self):
        sub = IntMatrix.from_columns(2, [[2, 0]])
        assert lattice_index(sub, IntMatrix.identity(2)) is None

    def test_intersection_in_Z(self):
        a = IntMatrix.from_columns(1, [[2]])
        b = IntMatrix.from_columns(1, [[3]])
        assert lattice_intersect(a, b) == IntMatrix.from_columns(1, [[6]])

    def test_saturation(self):
        L = IntMatrix.from_columns(2, [[2, 0]])
        assert lattice_saturate(L) == IntMatrix.from_columns(2, [[1, 0]])

    def test_intersection_commutative_associative(self):
        rng = random.Random(17)
        for _ in range(25):
            a = random_matrix(rng, 3, 2, 4)
            b = random_matrix(rng, 3, 2, 4)
            c = random_matrix(rng, 3, 2, 4)
            ab = lattice_intersect(a, b)
            ba = lattice_intersect(b, a)
            assert ab == ba
            abc1 = lattice_intersect(ab, c)
            abc2 = lattice_intersect(a, lattice_intersect(b, c))
            assert abc1 == abc2

    def test_membership(self):
        L = IntMatrix.from_columns(2, [[2, 0], [0, 3]])
        assert lattice_contains(L, [4, 3])
        assert not lattice_contains(L, [1, 0])

    def test_kernel_saturated(self):
        M = IntMatrix.from_rows([[2, 4]])
        K = kernel(M)
        assert K.cols == 1
        assert lattice_saturate(K) == lattice_canon(K)

    def test_sum(self):
        a = IntMatrix.from_columns(1, [[4]])
        b = IntMatrix.from_columns(1, [[6]])
        assert lattice_sum(a, b) == IntMatrix.from_columns(1, [[2]])

    def test_unimodular_inverse(self):
        U = IntMatrix.from_rows([[1, 2], [0, 1]])
        assert U * unimodular_inverse(U) == IntMatrix.identity(2)


def test_identity_hom_roundtrip():
    G = present(2, IntMatrix.from_rows([[4, 0], [0, 0]]))
    h = identity_hom(G)
    k, im, ck = hom_parts(h)
    assert k.group.is_trivial()
    assert ck.group.is_trivial()
    assert im.group.is_isomorphic(G)
