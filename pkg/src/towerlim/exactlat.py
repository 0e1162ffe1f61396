"""Exact integer matrix algebra and finitely generated abelian groups.

Everything here runs on Python's arbitrary-precision integers; there are
no modular shortcuts and no floating point anywhere.  Lattices (subgroups
of Z^n) are represented by matrices of column generators and compared
through a canonical column-style Hermite normal form, so equality of
lattices is equality of canonical forms.

>>> M = IntMatrix.from_rows([[2, 4], [6, 8]])
>>> S, U, V = snf(M)
>>> S.diagonal()
[2, 4]
>>> (U * M * V) == S
True
"""

from __future__ import annotations

from dataclasses import dataclass


class ExactLatticeError(Exception):
    pass


class IllDefined(ExactLatticeError):
    """A homomorphism candidate does not respect the relations."""


class IndexUndefined(ExactLatticeError):
    """Lattice index requested for a pair that is not nested."""


class IntMatrix:
    """Immutable integer matrix, row-major tuple of tuples."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows, cols, data):
        if len(data) != rows:
            raise ValueError("row count mismatch")
        self.rows = rows
        self.cols = cols
        self.data = tuple(tuple(int(x) for x in r) for r in data)
        for r in self.data:
            if len(r) != cols:
                raise ValueError("column count mismatch")

    @classmethod
    def from_rows(cls, rows):
        rows = [list(r) for r in rows]
        if not rows:
            return cls(0, 0, [])
        return cls(len(rows), len(rows[0]), rows)

    @classmethod
    def identity(cls, n):
        return cls(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    @classmethod
    def zero(cls, rows, cols):
        return cls(rows, cols, [[0] * cols for _ in range(rows)])

    @classmethod
    def from_columns(cls, n, columns):
        """Matrix with the given n-vectors as columns."""
        cols = [list(c) for c in columns]
        for c in cols:
            if len(c) != n:
                raise ValueError("column length mismatch")
        return cls(n, len(cols), [[c[i] for c in cols] for i in range(n)])

    def column(self, j):
        return [self.data[i][j] for i in range(self.rows)]

    def columns(self):
        return [self.column(j) for j in range(self.cols)]

    def diagonal(self):
        return [self.data[i][i] for i in range(min(self.rows, self.cols))]

    def transpose(self):
        return IntMatrix(self.cols, self.rows,
                         [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def hstack(self, other):
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return IntMatrix(self.rows, self.cols + other.cols,
                         [self.data[i] + other.data[i] for i in range(self.rows)])

    def vstack(self, other):
        if self.cols != other.cols:
            raise ValueError("column mismatch in vstack")
        return IntMatrix(self.rows + other.rows, self.cols, self.data + other.data)

    def submatrix(self, row_range, col_range):
        rr = list(row_range)
        cc = list(col_range)
        return IntMatrix(len(rr), len(cc), [[self.data[i][j] for j in cc] for i in rr])

    def apply(self, vector):
        """Matrix times column vector, returned as a list."""
        if len(vector) != self.cols:
            raise ValueError("vector length mismatch")
        return [sum(self.data[i][j] * vector[j] for j in range(self.cols))
                for i in range(self.rows)]

    def is_zero(self):
        return all(x == 0 for row in self.data for x in row)

    def __mul__(self, other):
        if isinstance(other, int):
            return IntMatrix(self.rows, self.cols,
                             [[x * other for x in row] for row in self.data])
        if self.cols != other.rows:
            raise ValueError("dimension mismatch in product")
        od = other.data
        out = []
        for i in range(self.rows):
            srow = self.data[i]
            out.append([sum(srow[k] * od[k][j] for k in range(self.cols))
                        for j in range(other.cols)])
        return IntMatrix(self.rows, other.cols, out)

    __rmul__ = __mul__

    def __add__(self, other):
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch")
        return IntMatrix(self.rows, self.cols,
                         [[a + b for a, b in zip(r1, r2)]
                          for r1, r2 in zip(self.data, other.data)])

    def __sub__(self, other):
        return self + (other * -1)

    def __neg__(self):
        return self * -1

    def __pow__(self, k):
        if self.rows != self.cols:
            raise ValueError("power of non-square matrix")
        result = IntMatrix.identity(self.rows)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def __eq__(self, other):
        return (isinstance(other, IntMatrix)
                and self.rows == other.rows and self.cols == other.cols
                and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return "IntMatrix(%d, %d, %r)" % (self.rows, self.cols, [list(r) for r in self.data])

    def det(self):
        """Determinant by fraction-free (Bareiss) elimination."""
        if self.rows != self.cols:
            raise ValueError("determinant of non-square matrix")
        n = self.rows
        if n == 0:
            return 1
        a = [list(r) for r in self.data]
        sign = 1
        prev = 1
        for k in range(n - 1):
            if a[k][k] == 0:
                for i in range(k + 1, n):
                    if a[i][k] != 0:
                        a[k], a[i] = a[i], a[k]
                        sign = -sign
                        break
                else:
                    return 0
            for i in range(k + 1, n):
                for j in range(k + 1, n):
                    a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
                a[i][k] = 0
            prev = a[k][k]
        return sign * a[n - 1][n - 1]


def _row_hnf(mat):
    """Row Hermite form R = W*A with W unimodular; returns (R, W) as lists."""
    m = mat.rows
    n = mat.cols
    a = [list(r) for r in mat.data]
    w = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    pivot_row = 0
    for col in range(n):
        # find a nonzero entry at or below pivot_row
        nz = [i for i in range(pivot_row, m) if a[i][col] != 0]
        if not nz:
            continue
        # gcd the column entries into pivot_row by extended euclid on rows
        i0 = nz[0]
        if i0 != pivot_row:
            a[pivot_row], a[i0] = a[i0], a[pivot_row]
            w[pivot_row], w[i0] = w[i0], w[pivot_row]
        for i in range(pivot_row + 1, m):
            while a[i][col] != 0:
                q = a[pivot_row][col] // a[i][col]
                for j in range(n):
                    a[pivot_row][j] -= q * a[i][j]
                for j in range(m):
                    w[pivot_row][j] -= q * w[i][j]
                a[pivot_row], a[i] = a[i], a[pivot_row]
                w[pivot_row], w[i] = w[i], w[pivot_row]
        if a[pivot_row][col] < 0:
            a[pivot_row] = [-x for x in a[pivot_row]]
            w[pivot_row] = [-x for x in w[pivot_row]]
        p = a[pivot_row][col]
        # reduce the entries above the pivot into [0, p)
        for i in range(pivot_row):
            q = a[i][col] // p
            if q:
                for j in range(n):
                    a[i][j] -= q * a[pivot_row][j]
                for j in range(m):
                    w[i][j] -= q * w[pivot_row][j]
        pivot_row += 1
        if pivot_row == m:
            break
    return IntMatrix(m, n, a), IntMatrix(m, m, w)


def hnf(mat):
    """Column-style Hermite normal form.

    Returns (H, U) with U unimodular, H = mat * U, H lower-triangular in
    the column sense (pivot rows strictly increasing down the nonzero
    columns, pivots positive, entries left of a pivot reduced mod the
    pivot).  Column operations only, so the column span of H equals the
    column span of mat.

    >>> H, U = hnf(IntMatrix.identity(2))
    >>> H == IntMatrix.identity(2)
    True
    >>> H, U = hnf(IntMatrix.from_rows([[2, 4], [6, 8]]))
    >>> abs(H.det())
    8
    """
    R, W = _row_hnf(mat.transpose())
    return R.transpose(), W.transpose()


def _is_diagonal(mat):
    for i in range(mat.rows):
        for j in range(mat.cols):
            if i != j and mat.data[i][j] != 0:
                return False
    return True


def snf(mat):
    """Smith normal form (S, U, V) with S = U * mat * V.

    S is diagonal with nonnegative entries d1 | d2 | ...; U and V are
    unimodular.  Alternating row and column Hermite reductions converge
    to a diagonal form with polynomially bounded entries (the canonical
    reduction steps keep everything below the pivots); a final pass
    enforces the divisibility chain.

    >>> S, U, V = snf(IntMatrix.from_rows([[2, 0], [0, 3]]))
    >>> S.diagonal()
    [1, 6]
    """
    m, n = mat.rows, mat.cols
    S = mat
    U = IntMatrix.identity(m)
    V = IntMatrix.identity(n)
    while True:
        R, W = _row_hnf(S)
        S, U = R, W * U
        Ct, X = _row_hnf(S.transpose())
        S, V = Ct.transpose(), V * X.transpose()
        if _is_diagonal(S):
            a = [list(r) for r in S.data]
            u = [list(r) for r in U.data]
            v = [list(r) for r in V.data]
            k = min(m, n)
            # sort the nonzero diagonal entries to the front
            order = sorted(range(k), key=lambda i: (a[i][i] == 0, i))
            if order != list(range(k)):
                perm_rows = order + list(range(k, m))
                perm_cols = order + list(range(k, n))
                u = [u[i] for i in perm_rows]
                v = [[v[r][perm_cols[j]] for j in range(n)] for r in range(n)]
                diag = [a[i][i] for i in order]
                a = [[0] * n for _ in range(m)]
                for t, d in enumerate(diag):
                    a[t][t] = d
            # enforce the divisibility chain with a column fix and restart
            changed = False
            for i in range(k - 1):
                di, dj = a[i][i], a[i + 1][i + 1]
                if di != 0 and dj % di != 0:
                    for r in range(n):
                        v[r][i] += v[r][i + 1]
                    a[i + 1][i] = dj
                    changed = True
                    break
            S = IntMatrix(m, n, a)
            U = IntMatrix(m, m, u)
            V = IntMatrix(n, n, v)
            if not changed:
                break
    # normalize signs
    a = [list(r) for r in S.data]
    u = [list(r) for r in U.data]
    for i in range(min(m, n)):
        if a[i][i] < 0:
            a[i] = [-x for x in a[i]]
            u[i] = [-x for x in u[i]]
    return IntMatrix(m, n, a), IntMatrix(m, m, u), IntMatrix(n, n, v)


def unimodular_inverse(mat):
    """Inverse of a unimodular matrix, exact."""
    n = mat.rows
    H, U = hnf(mat)
    if H != IntMatrix.identity(n):
        raise ExactLatticeError("matrix is not unimodular")
    return U


# ---------------------------------------------------------------------------
# lattices: column spans of integer matrices inside a fixed Z^n


def lattice_canon(gens):
    """Canonical generator matrix: column HNF with zero columns dropped."""
    H, _ = hnf(gens)
    cols = [H.column(j) for j in range(H.cols) if any(H.column(j))]
    return IntMatrix.from_columns(gens.rows, cols)


def lattice_sum(a, b):
    return lattice_canon(a.hstack(b))


def lattice_rank(gens):
    return lattice_canon(gens).cols


def solve_columns(gens, target):
    """Solve gens * X = target over Z; None when some column has no solution."""
    H, U = hnf(gens)
    pivots = []
    for j in range(H.cols):
        col = H.column(j)
        nz = [i for i, x in enumerate(col) if x]
        if nz:
            pivots.append((nz[0], j))
    xcols = []
    for c in range(target.cols):
        b = target.column(c)
        y = [0] * H.cols
        residual = list(b)
        for prow, pcol in pivots:
            # rows above the pivot row must already be cleared
            if any(residual[i] for i in range(prow)):
                return None
            p = H.data[prow][pcol]
            if residual[prow] % p != 0:
                return None
            q = residual[prow] // p
            y[pcol] = q
            if q:
                hc = H.column(pcol)
                for i in range(len(residual)):
                    residual[i] -= q * hc[i]
        if any(residual):
            return None
        xcols.append(U.apply(y))
    return IntMatrix.from_columns(gens.cols, xcols)


def lattice_contains(gens, vector):
    """Is the vector in the column span of gens (over Z)?"""
    target = IntMatrix.from_columns(gens.rows, [vector])
    return solve_columns(gens, target) is not None


def lattice_subset(a, b):
    """Is span(a) contained in span(b)?"""
    return solve_columns(b, a) is not None


def kernel(mat):
    """Basis of the integer kernel of mat, as a matrix of columns.

    The basis spans a saturated sublattice (a direct summand of Z^cols).
    """
    H, U = hnf(mat)
    zero_cols = [j for j in range(H.cols) if not any(H.column(j))]
    return IntMatrix.from_columns(mat.cols, [U.column(j) for j in zero_cols])


def lattice_intersect(a, b):
    """Intersection of two column spans in the same ambient Z^n."""
    if a.rows != b.rows:
        raise ValueError("ambient rank mismatch")
    if a.cols == 0 or b.cols == 0:
        return IntMatrix.from_columns(a.rows, [])
    stacked = a.hstack(-b)
    K = kernel(stacked)
    gens = []
    for j in range(K.cols):
        coeffs = K.column(j)[: a.cols]
        gens.append(a.apply(coeffs))
    return lattice_canon(IntMatrix.from_columns(a.rows, gens))


def lattice_saturate(gens):
    """Saturation (Q*span) converted to Z^n, i.e. the smallest direct summand
    of the ambient Z^n containing the lattice."""
    n = gens.rows
    if gens.cols == 0:
        return IntMatrix.from_columns(n, [])
    S, U, V = snf(gens)
    Uinv = unimodular_inverse(U)
    cols = [Uinv.column(i) for i in range(min(gens.rows, gens.cols)) if S.data[i][i] != 0]
    return lattice_canon(IntMatrix.from_columns(n, cols))


def lattice_index(sub, sup):
    """Index of span(sub) inside span(sup); None stands for infinite index.

    Raises IndexUndefined when sub is not contained in sup.
    """
    X = solve_columns(sup, sub)
    if X is None:
        raise IndexUndefined("first lattice is not contained in the second")
    supc = lattice_canon(sup)
    if lattice_rank(sub) < supc.cols:
        return None
    Xc = solve_columns(supc, lattice_canon(sub))
    d = abs(IntMatrix(Xc.rows, Xc.cols, Xc.data).det()) if Xc.rows == Xc.cols else 0
    if d == 0:
        return None
    return d


# ---------------------------------------------------------------------------
# finitely generated abelian groups


def _smith_invariants(generators, relations):
    S, _, _ = snf(relations)
    diag = [S.data[i][i] for i in range(min(S.rows, S.cols))]
    nonzero = [d for d in diag if d != 0]
    rank = generators - len(nonzero)
    torsion = [d for d in nonzero if d >= 2]
    return rank, tuple(torsion)


@dataclass(frozen=True)
class FgAbGroup:
    """Finitely generated abelian group Z^generators / (column span of relations)."""

    generators: int
    relations: IntMatrix

    def __post_init__(self):
        if self.relations.rows != self.generators:
            raise ValueError("relations must have one row per generator")

    @property
    def smith_invariants(self):
        rank, torsion = _smith_invariants(self.generators, self.relations)
        return rank, list(torsion)

    @property
    def rank(self):
        return self.smith_invariants[0]

    @property
    def torsion(self):
        return self.smith_invariants[1]

    def is_trivial(self):
        r, t = self.smith_invariants
        return r == 0 and not t

    def is_finite(self):
        return self.rank == 0

    def order(self):
        """Group order; None when infinite."""
        r, t = self.smith_invariants
        if r > 0:
            return None
        out = 1
        for d in t:
            out *= d
        return out

    def is_isomorphic(self, other):
        return self.smith_invariants == other.smith_invariants

    def describe(self):
        r, t = self.smith_invariants
        parts = []
        if r == 1:
            parts.append("Z")
        elif r > 1:
            parts.append("Z^%d" % r)
        parts.extend("Z/%d" % d for d in t)
        return " (+) ".join(parts) if parts else "0"

    def __repr__(self):
        return "FgAbGroup(%s)" % self.describe()

    def relation_lattice(self):
        return self.relations

    def canonical_coordinates(self):
        """Unimodular P with P * (relation lattice) diagonal.

        Returns (P, diag) where diag lists the invariant factor of each new
        coordinate (0 for free coordinates).  In the new coordinates z = P x
        the group is  (+)_i Z/diag[i]  with Z/0 meaning Z.
        """
        S, U, V = snf(self.relations)
        diag = [0] * self.generators
        for i in range(min(S.rows, S.cols)):
            diag[i] = S.data[i][i]
        return U, diag


def present(generators, relations):
    """Build a group from a presentation; relations columns are relators.

    >>> present(2, IntMatrix.from_rows([[2, 0], [0, 3]])).smith_invariants
    (0, [6])
    >>> present(2, IntMatrix.from_columns(2, [])).smith_invariants
    (2, [])
    """
    if isinstance(relations, list):
        relations = IntMatrix.from_rows(relations)
    if relations.rows != generators:
        raise ValueError("relations must have %d rows" % generators)
    return FgAbGroup(generators, relations)


def free_group(rank):
    return FgAbGroup(rank, IntMatrix.from_columns(rank, []))


def cyclic_group(order):
    if order == 0:
        return free_group(1)
    return FgAbGroup(1, IntMatrix.from_rows([[order]]))


def direct_sum(a, b):
    top = a.relations.hstack(IntMatrix.zero(a.generators, b.relations.cols))
    bottom = IntMatrix.zero(b.generators, a.relations.cols).hstack(b.relations)
    return FgAbGroup(a.generators + b.generators, top.vstack(bottom))


@dataclass(frozen=True)
class Homomorphism:
    """Map of f.g. abelian groups given by a matrix on chosen generators."""

    source: FgAbGroup
    target: FgAbGroup
    matrix: IntMatrix

    def __call__(self, vector):
        return self.matrix.apply(vector)

    def compose(self, inner):
        """self o inner."""
        if inner.target.generators != self.source.generators:
            raise ValueError("composition mismatch")
        return Homomorphism(inner.source, self.target, self.matrix * inner.matrix)

    def equals(self, other):
        """Equality as maps of groups (matrices may differ by relations)."""
        if (self.source.generators != other.source.generators
                or self.target.generators != other.target.generators):
            return False
        diff = self.matrix - other.matrix
        rel = self.target.relations
        for j in range(diff.cols):
            col = diff.column(j)
            if any(col) and not lattice_contains(rel, col):
                return False
        return True

    def is_identity(self):
        return self.source is self.target and self.equals(identity_hom(self.source))

    def power(self, k):
        if self.source.generators != self.target.generators:
            raise ValueError("power of non-endomorphism")
        return Homomorphism(self.source, self.target, self.matrix ** k)

    def __repr__(self):
        return "Homomorphism(%s -> %s, %r)" % (
            self.source.describe(), self.target.describe(),
            [list(r) for r in self.matrix.data])


def identity_hom(group):
    return Homomorphism(group, group, IntMatrix.identity(group.generators))


def zero_hom(source, target):
    return Homomorphism(source, target, IntMatrix.zero(target.generators, source.generators))


def hom_make(source, target, matrix):
    """Validated homomorphism: every relator image must be a relation.

    >>> Z2 = cyclic_group(2); Z4 = cyclic_group(4)
    >>> hom_make(Z2, Z4, IntMatrix.from_rows([[2]])).matrix.data
    ((2,),)
    >>> hom_make(Z2, Z4, IntMatrix.from_rows([[1]]))
    Traceback (most recent call last):
        ...
    towerlim.exactlat.IllDefined: relator image lies outside the target relations
    """
    if isinstance(matrix, list):
        matrix = IntMatrix.from_rows(matrix)
    if matrix.cols != source.generators or matrix.rows != target.generators:
        raise ValueError("matrix shape does not match generator counts")
    rel = source.relations
    for j in range(rel.cols):
        image = matrix.apply(rel.column(j))
        if any(image) and not lattice_contains(target.relations, image):
            raise IllDefined("relator image lies outside the target relations")
    return Homomorphism(source, target, matrix)


@dataclass(frozen=True)
class Subquotient:
    """A subquotient of some Z^n with a witness matrix into/out of Z^n."""

    group: FgAbGroup
    witness: IntMatrix


def subquotient(ambient_rank, sub_gens, rel_gens):
    """Group (span sub_gens)/(span rel_gens) inside Z^ambient_rank.

    rel_gens must be contained in sub_gens.  Returns a Subquotient whose
    witness columns are the chosen generating vectors in Z^ambient_rank.
    """
    B = lattice_canon(sub_gens)
    if B.cols == 0:
        return Subquotient(free_group(0), IntMatrix.from_columns(ambient_rank, []))
    X = solve_columns(B, rel_gens)
    if X is None:
        raise ExactLatticeError("relations do not lie in the subgroup")
    return Subquotient(FgAbGroup(B.cols, X), B)


def hom_parts(h):
    """Kernel, image and cokernel of a homomorphism, with witnesses.

    >>> Z = free_group(1)
    >>> k, im, ck = hom_parts(hom_make(Z, Z, IntMatrix.from_rows([[5]])))
    >>> k.group.describe(), im.group.describe(), ck.group.describe()
    ('0', 'Z', 'Z/5')
    """
    src, tgt, M = h.source, h.target, h.matrix
    # cokernel: target modulo (image + target relations); witness projects
    coker = FgAbGroup(tgt.generators, M.hstack(tgt.relations))
    coker_part = Subquotient(coker, IntMatrix.identity(tgt.generators))
    # image: (im M + R_t)/R_t as a subquotient of the target ambient
    image_part = subquotient(tgt.generators, M.hstack(tgt.relations), tgt.relations)
    # kernel: preimage of R_t under M, modulo R_s
    K = kernel(M.hstack(tgt.relations))
    pre_cols = [K.column(j)[: src.generators] for j in range(K.cols)]
    pre = IntMatrix.from_columns(src.generators, pre_cols).hstack(src.relations)
    kernel_part = subquotient(src.generators, pre, src.relations)
    return kernel_part, image_part, coker_part
