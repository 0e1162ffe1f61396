"""Pro-category machinery: level maps, interleavings, pro-isomorphism.

Two towers are pro-isomorphic when, after passing to subsequences, there
are maps in both directions whose composites equal the bonding maps.  For
towers of discrete groups "homotopic" degenerates to equal, so the
commutation and composite equations are exact integer-linear systems and
the bounded search below solves them by lattice kernels.

A verdict of Isomorphic always carries a certificate; matching limit
invariants without a connecting map are deliberately reported Undecided,
since the bijection criterion presupposes a morphism inducing them.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlat import (
    IntMatrix,
    hom_make,
    kernel as lattice_kernel,
)
from .limits import derived_limit, limit
from .structured import compare_structured
from .towers import PeriodicTower, TowerError, reduce_to_images, shift


class NotCommuting(TowerError):
    def __init__(self, level, reason=""):
        super().__init__("level map does not commute at level %s %s" % (level, reason))
        self.level = level


@dataclass(frozen=True)
class Interleaving:
    """Certificate of pro-isomorphism between two periodic tails.

    forward_maps[i] maps A at level (a*i + c1) into B at level i of its
    subsequence; backward_maps[j] maps B at level (b*j + c2) back.  The
    composites equal the corresponding bond powers at every checked
    level, re-verified after the search.
    """

    gap_forward: int
    gap_backward: int
    offset_forward: int
    offset_backward: int
    forward_maps: tuple
    backward_maps: tuple
    checked_levels: int

    def to_json(self):
        return {
            "gap_forward": self.gap_forward,
            "gap_backward": self.gap_backward,
            "offset_forward": self.offset_forward,
            "offset_backward": self.offset_backward,
            "forward": [[list(r) for r in f.matrix.data] for f in self.forward_maps],
            "backward": [[list(r) for r in g.matrix.data] for g in self.backward_maps],
            "checked_levels": self.checked_levels,
        }


@dataclass(frozen=True)
class ProIsoVerdict:
    kind: str            # isomorphic | not_isomorphic | undecided
    reason: str
    witness: Interleaving | None = None

    def to_json(self):
        out = {"kind": self.kind, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def check_level_map(a, b, tail_map, prefix_maps=()):
    """Verify that the given maps commute with the bonding maps.

    The tail template is checked symbolically: one commutation square
    determines all deeper ones for constant tails.  Raises NotCommuting.
    """
    if not isinstance(a, PeriodicTower) or not isinstance(b, PeriodicTower):
        raise TowerError("check_level_map needs eventually periodic towers")
    if a.prefix_len != b.prefix_len or len(prefix_maps) != a.prefix_len:
        raise TowerError("need one prefix map per shared prefix level")
    for i in range(a.prefix_len):
        upper = prefix_maps[i + 1] if i + 1 < a.prefix_len else tail_map
        left = b.bond_at(i).compose(upper)
        right = prefix_maps[i].compose(a.bond_at(i))
        if not left.equals(right):
            raise NotCommuting(i)
    left = b.tail_endo.compose(tail_map)
    right = tail_map.compose(a.tail_endo)
    if not left.equals(right):
        raise NotCommuting(a.prefix_len, "(tail template)")
    return True


# ---------------------------------------------------------------------------
# interleaving search


def _vec_index(i, r, c, n_rows, n_cols, offset=0):
    return offset + i * (n_rows * n_cols) + r * n_cols + c


def _chain_space(bond_tgt, bond_src_power, rel_src, rel_tgt, window):
    """Integer basis of commuting map chains f_0..f_window with
    bond_tgt * f_{i+1} = f_i * bond_src_power, modulo target relations,
    all f_i well defined on the source relations.

    Returns (basis chains, each a list of matrices).
    """
    n_t = bond_tgt.rows
    n_s = bond_src_power.cols
    per = n_t * n_s
    f_vars = per * (window + 1)
    lam_vars = rel_tgt.cols * n_s * window
    mu_vars = rel_tgt.cols * rel_src.cols * (window + 1)
    total = f_vars + lam_vars + mu_vars
    rows = []

    def frow():
        return [0] * total

    # chain squares: bond_tgt f_{i+1} - f_i P - R_t Lam_i = 0
    for i in range(window):
        for r in range(n_t):
            for c in range(n_s):
                row = frow()
                for k in range(n_t):
                    row[_vec_index(i + 1, k, c, n_t, n_s)] += bond_tgt.data[r][k]
                for k in range(n_s):
                    row[_vec_index(i, r, k, n_t, n_s)] -= bond_src_power.data[k][c]
                for k in range(rel_tgt.cols):
                    idx = f_vars + i * (rel_tgt.cols * n_s) + k * n_s + c
                    row[idx] -= rel_tgt.data[r][k]
                rows.append(row)
    # well-definedness: f_i R_s - R_t Mu_i = 0
    for i in range(window + 1):
        for r in range(n_t):
            for c in range(rel_src.cols):
                row = frow()
                for k in range(n_s):
                    row[_vec_index(i, r, k, n_t, n_s)] += rel_src.data[k][c]
                for k in range(rel_tgt.cols):
                    idx = (f_vars + lam_vars
                           + i * (rel_tgt.cols * rel_src.cols) + k * rel_src.cols + c)
                    row[idx] -= rel_tgt.data[r][k]
                rows.append(row)
    if not rows:
        sys = IntMatrix.zero(1, total)
    else:
        sys = IntMatrix.from_rows(rows)
    K = lattice_kernel(sys)
    chains = []
    for j in range(K.cols):
        v = K.column(j)
        mats = []
        for i in range(window + 1):
            m = [[v[_vec_index(i, r, c, n_t, n_s)] for c in range(n_s)]
                 for r in range(n_t)]
            mats.append(IntMatrix(n_t, n_s, m))
        chains.append(mats)
    return chains


def _enumerate_small(dim, bound):
    """Deterministic enumeration of small integer coefficient vectors,
    ordered by max-norm then lexicographically."""
    if dim == 0:
        yield ()
        return
    seen = set()
    for radius in range(bound + 1):
        ordered = sorted(range(-radius, radius + 1), key=lambda x: (abs(x), -x))
        def rec(prefix):
            if len(prefix) == dim:
                if max((abs(x) for x in prefix), default=0) == radius and prefix not in seen:
                    seen.add(prefix)
                    yield prefix
                return
            for x in ordered:
                yield from rec(prefix + (x,))
        yield from rec(())


_COEFF_BOUND = 2
_CANDIDATE_CAP = 20000


def find_interleaving(a, b, depth=4):
    """Bounded deterministic search for a pro-isomorphism certificate.

    Reindexing gaps and offsets run up to `depth`; map chains come from
    the integer solution lattice of the commutation squares; candidate
    coefficients are enumerated in a fixed order and the first pair of
    chains whose composites equal the bond powers exactly is returned.
    Returns None (Absent) when the bounded search is exhausted.
    """
    if not isinstance(a, PeriodicTower) or not isinstance(b, PeriodicTower):
        raise TowerError("find_interleaving needs eventually periodic towers")
    A = reduce_to_images(shift(a, a.prefix_len))
    B = reduce_to_images(shift(b, b.prefix_len))
    TA, MA = A.tail_group, A.tail_endo
    TB, MB = B.tail_group, B.tail_endo

    ident = _identity_certificate(A, B)
    if ident is not None:
        return ident

    TA, MA = A.tail_group, A.tail_endo
    TB, MB = B.tail_group, B.tail_endo
    for ga in range(1, depth + 1):
        for gb in range(1, depth + 1):
            window = 2 * max(ga, gb) + 2
            f_chains = _chain_space(MB.matrix, MA.matrix ** ga,
                                    TA.relations, TB.relations, window)
            if not f_chains:
                continue
            g_chains = _chain_space(MA.matrix, MB.matrix ** gb,
                                    TB.relations, TA.relations, window)
            if not g_chains:
                continue
            for c1 in range(depth + 1):
                for c2 in range(depth + 1):
                    cert = _search_cell(A, B, ga, gb, c1, c2,
                                        f_chains, g_chains, window)
                    if cert is not None:
                        return cert
    return None


def _identity_certificate(A, B):
    if A.tail_group.generators != B.tail_group.generators:
        return None
    n = A.tail_group.generators
    ident = IntMatrix.identity(n)
    try:
        f = hom_make(A.tail_group, B.tail_group, ident)
        g = hom_make(B.tail_group, A.tail_group, ident)
    except Exception:
        return None
    if not A.tail_endo.matrix == B.tail_endo.matrix:
        return None
    window = 3
    fs = tuple(f for _ in range(window + 1))
    gs = tuple(g for _ in range(window + 1))
    cert = Interleaving(1, 1, 0, 0, fs, gs, window)
    return cert if _verify_certificate(A, B, cert) else None


def _search_cell(A, B, ga, gb, c1, c2, f_chains, g_chains, window):
    tried = 0
    for coeffs in _enumerate_small(len(f_chains), _COEFF_BOUND):
        if all(x == 0 for x in coeffs):
            continue
        tried += 1
        if tried > _CANDIDATE_CAP:
            return None
        fs = _combine(f_chains, coeffs)
        cert = _solve_backward(A, B, ga, gb, c1, c2, fs, g_chains, window)
        if cert is not None:
            return cert
    return None


def _combine(chains, coeffs):
    out = []
    for i in range(len(chains[0])):
        acc = chains[0][i] * coeffs[0]
        for c, ch in zip(coeffs[1:], chains[1:]):
            acc = acc + ch[i] * c
        out.append(acc)
    return out


def _solve_backward(A, B, ga, gb, c1, c2, fs, g_chains, window):
    """Given an f-chain, composite conditions are linear in the g-chain."""
    TA, MA = A.tail_group, A.tail_endo
    TB, MB = B.tail_group, B.tail_endo
    from .exactlat import solve_columns

    # for a fixed f-chain the composite conditions are linear in the
    # g-chain coefficients (with relation-multiplier corrections)
    check = min(2, window)
    cond_rows = []
    rhs = []
    for j in range(check + 1):
        psi = gb * j + c2
        phi_psi = ga * psi + c1
        if psi > window or j > window:
            continue
        gap_a = phi_psi - j
        power_a = (MA.matrix ** gap_a)
        # g_j o f_psi = A^gap_a   (n_A x n_A entries)
        for r in range(TA.generators):
            for c in range(TA.generators):
                row = []
                for ch in g_chains:
                    prod = ch[j] * fs[psi]
                    row.append(prod.data[r][c])
                # allow correction by relations of TA
                cond_rows.append((row, ("A", r, c)))
                rhs.append(power_a.data[r][c])
        phi_j = ga * j + c1
        psi_phi = gb * phi_j + c2
        if phi_j > window or psi_phi > window:
            continue
        gap_b = psi_phi - j
        power_b = (MB.matrix ** gap_b)
        for r in range(TB.generators):
            for c in range(TB.generators):
                row = []
                for ch in g_chains:
                    prod = fs[j] * ch[phi_j]
                    row.append(prod.data[r][c])
                cond_rows.append((row, ("B", r, c)))
                rhs.append(power_b.data[r][c])
    if not cond_rows:
        return None
    # relation corrections: stack relation generators of the relevant group
    relA, relB = TA.relations, TB.relations
    extraA = relA.cols * TA.generators
    extraB = relB.cols * TB.generators
    width = len(g_chains) + extraA + extraB
    mat_rows = []
    for (row, tag) in cond_rows:
        full = list(row) + [0] * (extraA + extraB)
        side, r, c = tag
        if side == "A" and relA.cols:
            for k in range(relA.cols):
                full[len(g_chains) + k * TA.generators + c] = relA.data[r][k]
        if side == "B" and relB.cols:
            for k in range(relB.cols):
                full[len(g_chains) + extraA + k * TB.generators + c] = relB.data[r][k]
        mat_rows.append(full)
    sysm = IntMatrix.from_rows(mat_rows)
    target = IntMatrix.from_columns(len(mat_rows), [rhs])
    X = solve_columns(sysm, target)
    if X is None:
        return None
    ycoeffs = [X.data[i][0] for i in range(len(g_chains))]
    gs = _combine(g_chains, ycoeffs)
    try:
        f_homs = tuple(hom_make(TA, TB, m) for m in fs)
        g_homs = tuple(hom_make(TB, TA, m) for m in gs)
    except Exception:
        return None
    cert = Interleaving(ga, gb, c1, c2, f_homs, g_homs, min(2, window))
    return cert if _verify_certificate(A, B, cert) else None


def _verify_certificate(A, B, cert):
    """Exact post-search re-verification of all composite identities."""
    MA, MB = A.tail_endo, B.tail_endo
    TA, TB = A.tail_group, B.tail_group
    ga, gb = cert.gap_forward, cert.gap_backward
    c1, c2 = cert.offset_forward, cert.offset_backward
    window = len(cert.forward_maps) - 1
    for j in range(cert.checked_levels + 1):
        psi = gb * j + c2
        phi_psi = ga * psi + c1
        if psi > window:
            return False
        comp = cert.backward_maps[j].compose(cert.forward_maps[psi])
        want = hom_make(TA, TA, MA.matrix ** (phi_psi - j))
        if not comp.equals(want):
            return False
        phi_j = ga * j + c1
        psi_phi = gb * phi_j + c2
        if phi_j > window:
            return False
        comp = cert.forward_maps[j].compose(cert.backward_maps[phi_j])
        want = hom_make(TB, TB, MB.matrix ** (psi_phi - j))
        if not comp.equals(want):
            return False
    # the chains must also commute with the bonds
    for i in range(window):
        left = MB.compose(cert.forward_maps[i + 1])
        right = cert.forward_maps[i].compose(hom_make(TA, TA, MA.matrix ** ga))
        if not left.equals(right):
            return False
        left = MA.compose(cert.backward_maps[i + 1])
        right = cert.backward_maps[i].compose(hom_make(TB, TB, MB.matrix ** gb))
        if not left.equals(right):
            return False
    return True


# ---------------------------------------------------------------------------
# pro-isomorphism decision


def compare_invariants(a, b, level_map=None, depth=4):
    """Decide pro-isomorphism through lim/lim1 invariants and certificates.

    NotIsomorphic requires a genuinely separating invariant; Isomorphic
    requires an interleaving certificate (or a supplied commuting level
    map together with matching invariants); everything else is Undecided.
    """
    la, lb = limit(a), limit(b)
    da, db = derived_limit(a), derived_limit(b)
    lim_cmp = compare_structured(la, lb)
    lim1_cmp = compare_structured(da, db)
    if lim_cmp == "distinct":
        return ProIsoVerdict("not_isomorphic",
                             "lim invariants differ: %s vs %s"
                             % (la.render(), lb.render()))
    if lim1_cmp == "distinct":
        return ProIsoVerdict("not_isomorphic",
                             "lim1 invariants differ: %s vs %s"
                             % (da.render(), db.render()))
    cert = find_interleaving(a, b, depth)
    if cert is not None:
        return ProIsoVerdict("isomorphic", "interleaving certificate found", cert)
    if level_map is not None:
        check_level_map(a, b, level_map)
        if lim_cmp == "equal" and lim1_cmp == "equal":
            return ProIsoVerdict(
                "isomorphic",
                "level map with matching lim and lim1 descriptors")
    if lim_cmp == "equal" and lim1_cmp == "equal":
        return ProIsoVerdict(
            "undecided",
            "lim and lim1 descriptors match but no connecting map was found; "
            "the bijection criterion needs a morphism")
    return ProIsoVerdict("undecided", "invariants neither separate nor match")
