"""Towers (inverse sequences) of finitely generated abelian groups.

A tower is a diagram  ... -> G_2 -> G_1 -> G_0  with bonding maps pointing
toward index 0.  Two representations are supported:

* EventuallyPeriodic: a finite explicit prefix followed by a constant tail
  (one group with one endomorphism).  Level prefix_len + j of the tower is
  the tail group with bonding tail_endo, for every j >= 0.  These towers
  admit exact answers everywhere.

* Streamed: one of a closed registry of families whose levels grow without
  bound (levels are produced on demand).  Streamed towers get registered
  closed-form answers where a family rule applies, and depth-limited
  certificates elsewhere.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlat import (
    FgAbGroup,
    Homomorphism,
    IntMatrix,
    free_group,
    hom_make,
    hom_parts,
    identity_hom,
    kernel as lattice_kernel,
    lattice_canon,
    present,
    solve_columns,
)


class TowerError(Exception):
    pass


class NotExact(TowerError):
    def __init__(self, level, reason):
        super().__init__("not exact at level %s: %s" % (level, reason))
        self.level = level
        self.reason = reason


class UnknownFamily(TowerError):
    pass


class EvaluatorFailure(TowerError):
    pass


@dataclass(frozen=True)
class PeriodicTower:
    """Eventually periodic tower.

    prefix_groups[i] is the level-i group; prefix_bonds[i] maps level i+1
    into level i; splice maps the tail group into the last prefix group.
    With an empty prefix the tower is the pure periodic pair
    (tail_group, tail_endo) and splice is None.
    """

    prefix_groups: tuple
    prefix_bonds: tuple
    tail_group: FgAbGroup
    tail_endo: Homomorphism
    splice: Homomorphism | None

    @property
    def prefix_len(self):
        return len(self.prefix_groups)

    def group_at(self, i):
        if i < self.prefix_len:
            return self.prefix_groups[i]
        return self.tail_group

    def bond_at(self, i):
        """Bonding map from level i+1 into level i."""
        if i + 1 < self.prefix_len:
            return self.prefix_bonds[i]
        if i + 1 == self.prefix_len:
            return self.splice
        return self.tail_endo

    def is_pure_periodic(self):
        return self.prefix_len == 0

    def describe(self):
        tail = "(%s, endo %r)" % (self.tail_group.describe(),
                                  [list(r) for r in self.tail_endo.matrix.data])
        if self.is_pure_periodic():
            return "periodic " + tail
        return "prefix[%s] + %s" % (
            ", ".join(g.describe() for g in self.prefix_groups), tail)


@dataclass(frozen=True)
class StreamedTower:
    """A member of the closed streamed-family registry, with a level offset
    so shifting stays representable."""

    family: str
    params: tuple
    offset: int = 0

    def group_at(self, i):
        return _FAMILY_REGISTRY[self.family].group(self.params, i + self.offset)

    def bond_at(self, i):
        return _FAMILY_REGISTRY[self.family].bond(self.params, i + self.offset)

    def describe(self):
        extra = "" if not self.params else "(%s)" % ",".join(map(repr, self.params))
        off = "" if not self.offset else " shifted by %d" % self.offset
        return "streamed %s%s%s" % (self.family, extra, off)

    @property
    def rule(self):
        return _FAMILY_REGISTRY[self.family].rule(self.params)


@dataclass(frozen=True)
class FiniteTower:
    """Materialized levels 0..depth of a tower."""

    groups: tuple
    bonds: tuple

    def __post_init__(self):
        if len(self.bonds) != max(len(self.groups) - 1, 0):
            raise ValueError("need exactly one bond between consecutive levels")

    @property
    def depth(self):
        return len(self.groups) - 1

    def composite(self, upper, lower):
        """Bond composite mapping level `upper` down into level `lower`."""
        if upper < lower:
            raise ValueError("upper must be at least lower")
        h = identity_hom(self.groups[upper])
        for i in range(upper - 1, lower - 1, -1):
            h = self.bonds[i].compose(h)
        return h


# ---------------------------------------------------------------------------
# streamed family registry (closed; no user scripting)


class _Family:
    def __init__(self, group, bond, rule):
        self.group = group
        self.bond = bond
        self.rule = rule


def _hawaiian_group(params, i):
    return free_group(i)


def _hawaiian_bond(params, i):
    # Z^(i+1) -> Z^i, drop the last coordinate
    src, tgt = free_group(i + 1), free_group(i)
    m = [[1 if r == c else 0 for c in range(i + 1)] for r in range(i)]
    return Homomorphism(src, tgt, IntMatrix(i, i + 1, m))


def _finite_sets_group(params, i):
    # free abelian on the points {1..i} plus the compactifying point
    return free_group(i + 1)


def _finite_sets_bond(params, i):
    # the new point of level i+1 is sent to the compactifying point (index 0)
    src, tgt = free_group(i + 2), free_group(i + 1)
    m = [[0] * (i + 2) for _ in range(i + 1)]
    for c in range(i + 2):
        m[c if c < i + 1 else 0][c] = 1
    return Homomorphism(src, tgt, IntMatrix(i + 1, i + 2, m))


def _cluster_group(params, i):
    return free_group(i)


def _cluster_bond(params, i):
    # Z^(i+1) -> Z^i: multiply the retained coordinates by p, kill the new one
    (p,) = params
    src, tgt = free_group(i + 1), free_group(i)
    m = [[p if r == c else 0 for c in range(i + 1)] for r in range(i)]
    return Homomorphism(src, tgt, IntMatrix(i, i + 1, m))


def _adic_group(params, i):
    """Level i of the completion quotient family: L / A^i L (level 0 is trivial)."""
    gens, arows = params
    A = IntMatrix.from_rows([list(r) for r in arows])
    return present(gens, A ** i)


def _adic_bond(params, i):
    src = _adic_group(params, i + 1)
    tgt = _adic_group(params, i)
    return hom_make(src, tgt, IntMatrix.identity(params[0]))


_FAMILY_REGISTRY = {
    "hawaiian_h1": _Family(_hawaiian_group, _hawaiian_bond,
                           lambda p: {"bonds_surjective": True}),
    "finite_sets": _Family(_finite_sets_group, _finite_sets_bond,
                           lambda p: {"bonds_surjective": True}),
    "cluster_h1": _Family(_cluster_group, _cluster_bond,
                          lambda p: {"bonds_surjective": False, "cluster_of": p[0]}),
    "adic_quotient": _Family(_adic_group, _adic_bond,
                             lambda p: {"bonds_surjective": True, "adic": True}),
}


def make_streamed(family, params=()):
    """Streamed tower from the closed family registry.

    Families: hawaiian_h1 (Z^i with coordinate projections), finite_sets
    (free abelian on i+1 points with basepoint collapse), cluster_h1(p)
    (Z^i with block map p*I extended by a zero column) and adic_quotient
    (levels L/A^i L for a fixed injective endomorphism A of a free L).
    """
    if family not in _FAMILY_REGISTRY:
        raise UnknownFamily(family)
    params = tuple(params)
    if family == "cluster_h1" and (len(params) != 1 or params[0] < 2):
        raise UnknownFamily("cluster_h1 needs one parameter p >= 2")
    if family == "adic_quotient" and len(params) != 2:
        raise UnknownFamily("adic_quotient needs (generators, endo rows)")
    t = StreamedTower(family, params)
    t.group_at(0)
    t.bond_at(0)
    return t


def adic_quotient_tower(group, endo):
    """Streamed tower with levels L/A^i L for an endomorphism A of L = Z^n."""
    if group.relations.cols != 0:
        raise TowerError("adic_quotient is defined over a free lattice")
    rows = tuple(tuple(r) for r in endo.matrix.data)
    return make_streamed("adic_quotient", (group.generators, rows))


# ---------------------------------------------------------------------------
# constructors and structural operations


def periodic_tower(prefix_groups, prefix_bonds, tail_group, tail_endo, splice=None):
    """Validated eventually periodic tower.

    prefix_bonds[i] maps prefix level i+1 into prefix level i (so there is
    one bond fewer than there are prefix groups); splice maps the tail
    group into the last prefix group.  Pass empty prefixes for the pure
    periodic tower  ... -> T -> T.
    """
    prefix_groups = tuple(prefix_groups)
    prefix_bonds = tuple(prefix_bonds)
    if tail_endo.matrix.rows != tail_group.generators \
            or tail_endo.matrix.cols != tail_group.generators:
        raise TowerError("tail endomorphism has the wrong shape")
    hom_make(tail_group, tail_group, tail_endo.matrix)
    if prefix_groups:
        if len(prefix_bonds) != len(prefix_groups) - 1:
            raise TowerError("need one bond between consecutive prefix levels")
        for i, b in enumerate(prefix_bonds):
            if (b.source.generators != prefix_groups[i + 1].generators
                    or b.target.generators != prefix_groups[i].generators):
                raise TowerError("prefix bond %d has the wrong shape" % i)
            hom_make(prefix_groups[i + 1], prefix_groups[i], b.matrix)
        if splice is None:
            raise TowerError("a splice map is required with a nonempty prefix")
        if (splice.source.generators != tail_group.generators
                or splice.target.generators != prefix_groups[-1].generators):
            raise TowerError("splice must map the tail group into the last prefix group")
        hom_make(tail_group, prefix_groups[-1], splice.matrix)
    else:
        if prefix_bonds:
            raise TowerError("prefix bonds without prefix groups")
        splice = None
    return PeriodicTower(prefix_groups, prefix_bonds, tail_group, tail_endo, splice)


def pure_tower(group, endo_matrix):
    """Convenience constructor for the pure periodic tower (G, A)."""
    if isinstance(endo_matrix, list):
        endo_matrix = IntMatrix.from_rows(endo_matrix)
    endo = hom_make(group, group, endo_matrix)
    return PeriodicTower((), (), group, endo, None)


def shift(t, k):
    """Drop the first k levels; pro-trivial, preserves lim and lim1.

    Pure periodic towers are shift-stable on the nose.
    """
    if k == 0:
        return t
    if isinstance(t, StreamedTower):
        return StreamedTower(t.family, t.params, t.offset + k)
    if isinstance(t, FiniteTower):
        if k > t.depth:
            raise TowerError("shift beyond the materialized depth")
        return FiniteTower(t.groups[k:], t.bonds[k:])
    if k >= t.prefix_len:
        return PeriodicTower((), (), t.tail_group, t.tail_endo, None)
    groups = t.prefix_groups[k:]
    bonds = t.prefix_bonds[k:]
    return PeriodicTower(groups, bonds, t.tail_group, t.tail_endo, t.splice)


def truncate(t, n):
    """Materialize levels 0..n as a FiniteTower."""
    if isinstance(t, FiniteTower):
        if n > t.depth:
            raise EvaluatorFailure("finite tower is shallower than requested")
        return FiniteTower(t.groups[: n + 1], t.bonds[:n])
    groups = [t.group_at(i) for i in range(n + 1)]
    bonds = [t.bond_at(i) for i in range(n)]
    return FiniteTower(tuple(groups), tuple(bonds))


def _preimage_lattice(matrix, rel, src_rank):
    """Generators of {x in Z^src_rank : matrix*x in span(rel)}."""
    stacked = matrix.hstack(rel) if rel.cols else matrix
    K = lattice_kernel(stacked)
    cols = [K.column(j)[:src_rank] for j in range(K.cols)]
    return IntMatrix.from_columns(src_rank, cols)


def _kernel_chain_bound(group):
    # the kernel chain adds rank or halves torsion each strict step
    bits = sum(d.bit_length() for d in group.torsion)
    return group.rank + bits + 2


def stable_kernel(group, endo):
    """Union of the kernels of the powers of an endomorphism.

    Returned as a generator matrix of a sublattice of the ambient Z^n that
    contains the relation lattice.  The chain is Noetherian so it
    stabilizes; the iteration cap is a proven bound, not a guess.
    """
    n = group.generators
    rel = group.relations
    current = lattice_canon(rel) if rel.cols else IntMatrix.from_columns(n, [])
    power = IntMatrix.identity(n)
    for _ in range(_kernel_chain_bound(group) + 1):
        power = power * endo.matrix
        nxt = lattice_canon(_preimage_lattice(power, rel, n))
        if nxt == current:
            return current
        current = nxt
    raise TowerError("kernel chain failed to stabilize within its proven bound")


def quotient_by(group, sub_gens):
    """Quotient of the group by a sublattice of the ambient Z^n that
    contains the relations."""
    rels = group.relations.hstack(sub_gens) if group.relations.cols else sub_gens
    return FgAbGroup(group.generators, lattice_canon(rels))


def minimize_presentation(group, endo):
    """Re-present (group, endo) on an invariant-factor generating set.

    Returns (group', endo') where group' has diagonal relations with the
    unit factors dropped, and endo' is the conjugated endomorphism.  The
    pair is isomorphic to the input as a group-with-endomorphism.
    """
    grp, h, _, _, _ = _minimize_with_transform(group, endo)
    return grp, h


def _minimize_with_transform(group, endo):
    """As minimize_presentation, also returning the coordinate transport.

    project maps old coordinates to new (m x n), section is a one-sided
    inverse (n x m) choosing representatives; diag lists the invariant
    factor of each kept coordinate (0 for free ones).
    """
    from .exactlat import snf as _snf, unimodular_inverse
    n = group.generators
    S, U, _ = _snf(group.relations)
    diag = [0] * n
    for i in range(min(S.rows, S.cols)):
        diag[i] = S.data[i][i]
    keep = [i for i in range(n) if diag[i] != 1]
    Uinv = unimodular_inverse(U)
    conj = U * endo.matrix * Uinv
    m = len(keep)
    reduced = IntMatrix(m, m, [[conj.data[r][c] for c in keep] for r in keep])
    kept_diag = tuple(diag[i] for i in keep)
    rel_cols = []
    for idx in range(m):
        if kept_diag[idx] != 0:
            rel_cols.append([kept_diag[idx] if j == idx else 0 for j in range(m)])
    grp = present(m, IntMatrix.from_columns(m, rel_cols))
    h = hom_make(grp, grp, reduced)
    project = IntMatrix(m, n, [[U.data[i][j] for j in range(n)] for i in keep])
    section = IntMatrix(n, m, [[Uinv.data[i][j] for j in keep] for i in range(n)])
    return grp, h, project, section, kept_diag


@dataclass(frozen=True)
class TailReduction:
    """Tail of a periodic tower after kernel-chain reduction, with the
    coordinate transport back to the original tail group."""

    original_group: FgAbGroup
    original_endo: Homomorphism
    group: FgAbGroup
    endo: Homomorphism
    project: IntMatrix
    section: IntMatrix
    diag: tuple

    @property
    def torsion_idx(self):
        return tuple(i for i, d in enumerate(self.diag) if d != 0)

    @property
    def free_idx(self):
        return tuple(i for i, d in enumerate(self.diag) if d == 0)


def tail_reduction(t):
    """Kernel-chain reduction of the tail with transport matrices."""
    if not isinstance(t, PeriodicTower):
        raise TowerError("tail_reduction needs an eventually periodic tower")
    T, A = t.tail_group, t.tail_endo
    K = stable_kernel(T, A)
    Q = quotient_by(T, K)
    A1 = hom_make(Q, Q, A.matrix)
    grp, h, project, section, diag = _minimize_with_transform(Q, A1)
    return TailReduction(T, A, grp, h, project, section, diag)


def reduce_to_images(t):
    """Pro-isomorphic replacement with an injective tail endomorphism.

    The stable kernel chain of the tail endomorphism is quotiented out.
    The result is a pure periodic tower with an injective tail map
    (torsion included) and equal lim and lim1.  A power of the tail
    endomorphism factors through the quotient, which provides the
    interleaving back into the original tower.
    """
    red = tail_reduction(t)
    return PeriodicTower((), (), red.group, red.endo, None)


# ---------------------------------------------------------------------------
# short exact sequences of towers


@dataclass(frozen=True)
class TowerSES:
    """A verified levelwise short exact sequence of towers.

    The tail maps are stored as chains starting at the first tail level;
    deeper levels repeat the commutation-square solving that produced the
    chains.  verified_to records the deepest level checked exhaustively.
    """

    sub: object
    total: object
    quot: object
    inject_prefix: tuple
    surject_prefix: tuple
    inject_chain: tuple
    surject_chain: tuple
    verified_to: int
    canonical_completion: bool = False

    def inject_at(self, i):
        plen = self.sub.prefix_len if isinstance(self.sub, PeriodicTower) else 0
        if i < plen:
            return self.inject_prefix[i]
        return self.inject_chain[min(i - plen, len(self.inject_chain) - 1)]

    def surject_at(self, i):
        plen = self.sub.prefix_len if isinstance(self.sub, PeriodicTower) else 0
        if i < plen:
            return self.surject_prefix[i]
        return self.surject_chain[min(i - plen, len(self.surject_chain) - 1)]


def _exact_at(inj, sur, level):
    """Injectivity, surjectivity and image=kernel at one level."""
    k_inj, im_inj, _ = hom_parts(inj)
    if not k_inj.group.is_trivial():
        raise NotExact(level, "inclusion is not injective")
    k_sur, _, ck_sur = hom_parts(sur)
    if not ck_sur.group.is_trivial():
        raise NotExact(level, "projection is not surjective")
    mid_rel = sur.source.relations
    im_l = lattice_canon(im_inj.witness.hstack(mid_rel) if mid_rel.cols else im_inj.witness)
    ker_l = lattice_canon(k_sur.witness.hstack(mid_rel) if mid_rel.cols else k_sur.witness)
    if im_l != ker_l:
        raise NotExact(level, "image of the inclusion differs from the kernel of the projection")


def _square_commutes(upper, lower, left_bond, right_bond, level, what):
    """Check  left_bond o upper == lower o right_bond  as maps."""
    a = left_bond.compose(upper)
    b = lower.compose(right_bond)
    if not a.equals(b):
        raise NotExact(level, "%s square does not commute" % what)


def _solve_next_map(bond_tgt, bond_src, current):
    """Solve bond_tgt o next = current o bond_src for `next`, over Z.

    Returns None when no integral solution exists.
    """
    rhs = current.matrix * bond_src.matrix
    B = bond_tgt.matrix
    rel = bond_tgt.target.relations
    stacked = B.hstack(rel) if rel.cols else B
    X = solve_columns(stacked, rhs)
    if X is None:
        return None
    N = X.submatrix(range(B.cols), range(X.cols))
    try:
        return hom_make(bond_src.source, bond_tgt.source, N)
    except Exception:
        return None


def tower_ses(sub, total, quot, inject_prefix, surject_prefix,
              inject_tail, surject_tail, window=None):
    """Validated short exact sequence of eventually periodic towers.

    Prefix maps are checked exhaustively.  On the tail, the supplied
    template maps (at the first tail level) are propagated upward by
    solving the commutation squares, and exactness is checked level by
    level through a stabilization window.  Raises NotExact on the first
    failure.
    """
    for t in (sub, total, quot):
        if not isinstance(t, PeriodicTower):
            raise TowerError("tower_ses needs eventually periodic towers")
    plens = {sub.prefix_len, total.prefix_len, quot.prefix_len}
    if len(plens) != 1:
        raise TowerError("towers must share one prefix length")
    plen = plens.pop()
    if len(inject_prefix) != plen or len(surject_prefix) != plen:
        raise TowerError("need one inject/surject per prefix level")

    for i in range(plen):
        _exact_at(inject_prefix[i], surject_prefix[i], i)
        upper_inj = inject_prefix[i + 1] if i + 1 < plen else inject_tail
        upper_sur = surject_prefix[i + 1] if i + 1 < plen else surject_tail
        _square_commutes(upper_inj, inject_prefix[i],
                         total.bond_at(i), sub.bond_at(i), i, "inclusion")
        _square_commutes(upper_sur, surject_prefix[i],
                         quot.bond_at(i), total.bond_at(i), i, "projection")

    if window is None:
        window = max(t.tail_group.rank + len(t.tail_group.torsion)
                     for t in (sub, total, quot)) + 2

    # a template commuting with constant maps gives identical levels
    const_inj = total.tail_endo.compose(inject_tail).equals(
        inject_tail.compose(sub.tail_endo))
    const_sur = quot.tail_endo.compose(surject_tail).equals(
        surject_tail.compose(total.tail_endo))
    if const_inj and const_sur:
        _exact_at(inject_tail, surject_tail, plen)
        chain = tuple([inject_tail] * (window + 2))
        surs = tuple([surject_tail] * (window + 2))
        return TowerSES(sub, total, quot, tuple(inject_prefix),
                        tuple(surject_prefix), chain, surs,
                        verified_to=plen + window)

    inj, sur = inject_tail, surject_tail
    inj_chain, sur_chain = [inj], [sur]
    for j in range(window + 1):
        level = plen + j
        _exact_at(inj, sur, level)
        nxt_inj = _solve_next_map(total.tail_endo, sub.tail_endo, inj)
        if nxt_inj is None:
            raise NotExact(level + 1, "no integral inclusion solves the commutation square")
        nxt_sur = _solve_next_map(quot.tail_endo, total.tail_endo, sur)
        if nxt_sur is None:
            raise NotExact(level + 1, "no integral projection solves the commutation square")
        _square_commutes(nxt_inj, inj, total.tail_endo, sub.tail_endo, level, "inclusion")
        _square_commutes(nxt_sur, sur, quot.tail_endo, total.tail_endo, level, "projection")
        inj, sur = nxt_inj, nxt_sur
        inj_chain.append(inj)
        sur_chain.append(sur)

    return TowerSES(sub, total, quot, tuple(inject_prefix), tuple(surject_prefix),
                    tuple(inj_chain), tuple(sur_chain), verified_to=plen + window)


def canonical_completion_ses(group, endo):
    """The standard sequence (L, A) >-> (L, id) ->> (L/A^i L).

    The inclusion at level i is A^i, so A must be injective.  Exactness
    holds by construction; the first levels are checked anyway.
    """
    if group.relations.cols != 0:
        raise TowerError("the canonical completion sequence needs a free lattice")
    if group.generators > 0 and endo.matrix.det() == 0:
        raise TowerError("the canonical completion sequence needs an injective endomorphism")
    sub = PeriodicTower((), (), group, endo, None)
    total = PeriodicTower((), (), group, identity_hom(group), None)
    quot = adic_quotient_tower(group, endo)
    inj_chain, sur_chain = [], []
    for i in range(4):
        inj = hom_make(group, group, endo.matrix ** i)
        sur = hom_make(group, quot.group_at(i), IntMatrix.identity(group.generators))
        _exact_at(inj, sur, i)
        inj_chain.append(inj)
        sur_chain.append(sur)
    return TowerSES(sub, total, quot, (), (),
                    tuple(inj_chain), tuple(sur_chain),
                    verified_to=3, canonical_completion=True)
