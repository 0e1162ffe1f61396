"""Towers of simplicial complexes and the homology of their limits.

The Steenrod homology of the inverse limit of a tower of complexes is
assembled from the exact sequence

    0 -> lim1 H_{n+1}(P_i) -> H_n(X) -> lim H_n(P_i) -> 0

so a SteenrodDescriptor carries the two computed parts plus a splitting
flag.  Pontryagin (Cech) cohomology is the colimit of the level
cohomologies.  The example builders produce the classical compacta:
solenoids, the Hawaiian earring, clusters of solenoids and the
one-point compactification of a discrete null-sequence.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlat import IntMatrix, free_group, hom_make, hom_parts, identity_hom
from .limits import derived_limit, limit
from .simplicial import (
    SimplicialComplex,
    SimplicialMap,
    barycentric_subdivision,
    identity_map,
    induced_cohom,
    induced_hom,
    mapping_cylinder,
    subdivide_map,
)
from .structured import StructuredGroup
from .towers import PeriodicTower, make_streamed


class ShapeError(Exception):
    pass


class UnknownExample(ShapeError):
    pass


class DegreeMismatch(ShapeError):
    pass


@dataclass(frozen=True)
class PeriodicSimplicialTower:
    """Constant-complex tail with a simplicial self-map (plus optional prefix)."""

    prefix: tuple                      # (complex, bond to previous level) pairs
    tail_complex: SimplicialComplex
    tail_map: SimplicialMap
    splice: SimplicialMap | None = None

    def complex_at(self, i):
        if i < len(self.prefix):
            return self.prefix[i][0]
        return self.tail_complex

    def bond_at(self, i):
        if i + 1 < len(self.prefix):
            return self.prefix[i + 1][1]
        if i + 1 == len(self.prefix):
            return self.splice
        return self.tail_map


@dataclass(frozen=True)
class StreamedSimplicialTower:
    family: str
    params: tuple = ()

    def complex_at(self, i):
        return _EXAMPLES[self.family].complex(self.params, i)

    def bond_at(self, i):
        return _EXAMPLES[self.family].bond(self.params, i)


def constant_tower(K):
    return PeriodicSimplicialTower((), K, identity_map(K))


# ---------------------------------------------------------------------------
# example builders


def circle_complex(n):
    edges = [(i, (i + 1) % n) for i in range(n)]
    return SimplicialComplex.from_maximal(n, edges)


def _solenoid_complex(params, i):
    (p,) = params
    return circle_complex(3 * p ** i)


def _solenoid_bond(params, i):
    (p,) = params
    big, small = 3 * p ** (i + 1), 3 * p ** i
    return SimplicialMap(circle_complex(big), circle_complex(small),
                         tuple(k % small for k in range(big)))


def _wedge_of_circles(sizes):
    """Wedge at a common basepoint 0; circle j has sizes[j] vertices."""
    vertices = 1 + sum(s - 1 for s in sizes)
    edges = []
    offset = 1
    for s in sizes:
        ring = [0] + list(range(offset, offset + s - 1))
        for k in range(s):
            edges.append((ring[k], ring[(k + 1) % s]))
        offset += s - 1
    return SimplicialComplex.from_maximal(max(vertices, 1), edges)


def _wedge_vertex(sizes, j, k):
    """Global vertex id of local vertex k on circle j (0 is the basepoint)."""
    if k == 0:
        return 0
    return 1 + sum(s - 1 for s in sizes[:j]) + (k - 1)


def _hawaiian_complex(params, i):
    if i == 0:
        return SimplicialComplex.from_maximal(1, [(0,)])
    return _wedge_of_circles([3] * i)


def _hawaiian_bond(params, i):
    src = _hawaiian_complex(params, i + 1)
    tgt = _hawaiian_complex(params, i)
    vm = [0] * src.vertex_count
    for j in range(i):
        for k in range(3):
            vm[_wedge_vertex([3] * (i + 1), j, k)] = _wedge_vertex([3] * i, j, k)
    # the newest circle collapses to the basepoint
    return SimplicialMap(src, tgt, tuple(vm))


def _null_complex(params, i):
    return SimplicialComplex.from_maximal(i + 1, [(v,) for v in range(i + 1)])


def _null_bond(params, i):
    src = _null_complex(params, i + 1)
    tgt = _null_complex(params, i)
    vm = list(range(i + 1)) + [0]
    return SimplicialMap(src, tgt, tuple(vm))


def _cluster_sizes(p, i):
    # circle j (0-based) at level i has been wound i-1-j times
    return [3 * p ** (i - 1 - j) for j in range(i)]


def _cluster_complex(params, i):
    (p,) = params
    if i == 0:
        return SimplicialComplex.from_maximal(1, [(0,)])
    return _wedge_of_circles(_cluster_sizes(p, i))


def _cluster_bond(params, i):
    (p,) = params
    src_sizes = _cluster_sizes(p, i + 1)
    tgt_sizes = _cluster_sizes(p, i)
    src = _cluster_complex(params, i + 1)
    tgt = _cluster_complex(params, i)
    vm = [0] * src.vertex_count
    for j in range(i):
        big, small = src_sizes[j], tgt_sizes[j]
        for k in range(big):
            vm[_wedge_vertex(src_sizes, j, k)] = _wedge_vertex(tgt_sizes, j, k % small)
    # circle i (the newest) collapses to the basepoint
    return SimplicialMap(src, tgt, tuple(vm))


class _Example:
    def __init__(self, complex_fn, bond_fn):
        self.complex = complex_fn
        self.bond = bond_fn


_EXAMPLES = {
    "solenoid": _Example(_solenoid_complex, _solenoid_bond),
    "hawaiian": _Example(_hawaiian_complex, _hawaiian_bond),
    "cluster_solenoids": _Example(_cluster_complex, _cluster_bond),
    "null_sequence": _Example(_null_complex, _null_bond),
}


def make_example(name, params=()):
    """Builders: solenoid(p), hawaiian, cluster_solenoids(p), null_sequence."""
    params = tuple(params)
    if name not in _EXAMPLES:
        raise UnknownExample(name)
    if name in ("solenoid", "cluster_solenoids"):
        if len(params) != 1 or params[0] < 2:
            raise UnknownExample("%s needs one parameter p >= 2" % name)
    elif params:
        raise UnknownExample("%s takes no parameters" % name)
    return StreamedSimplicialTower(name, params)


# ---------------------------------------------------------------------------
# homology towers


def homology_tower(st, n, reduced=False):
    """The tower of degree-n homology groups with induced bonds.

    Periodic simplicial towers give eventually periodic algebraic towers.
    The registered example families give their closed-form towers after a
    spot verification of the induced maps on the first levels.
    """
    if isinstance(st, PeriodicSimplicialTower):
        tail_e = induced_hom(st.tail_map, n, reduced)
        tail_g = tail_e.source
        if not st.prefix:
            return PeriodicTower((), (), tail_g, tail_e, None)
        from .simplicial import homology_data
        groups = tuple(homology_data(c, n, reduced).group for c, _ in st.prefix)
        bonds = tuple(induced_hom(b, n, reduced) for _, b in st.prefix[1:])
        splice = induced_hom(st.splice, n, reduced)
        return PeriodicTower(groups, bonds, tail_g, tail_e, splice)
    if isinstance(st, StreamedSimplicialTower):
        return _registered_homology_tower(st, n, reduced)
    raise ShapeError("homology_tower needs a simplicial tower")


def _zero_tower():
    return PeriodicTower((), (), free_group(0), identity_hom(free_group(0)), None)


def _constant_Z_tower():
    Z = free_group(1)
    return PeriodicTower((), (), Z, hom_make(Z, Z, [[1]]), None)


def _verify_levels(st, n, model, levels=2, reduced=False):
    """Spot check: induced maps must match the registered model levelwise
    (kernel and cokernel invariants agree)."""
    for i in range(levels):
        actual = induced_hom(st.bond_at(i), n, reduced)
        expected = model.bond_at(i)
        pairs = zip(hom_parts(actual), hom_parts(expected))
        for got, want in pairs:
            if got.group.smith_invariants != want.group.smith_invariants:
                raise ShapeError(
                    "level %d induced map disagrees with the registered %s tower"
                    % (i, st.family))


def _registered_homology_tower(st, n, reduced):
    fam, params = st.family, st.params
    if fam == "solenoid":
        (p,) = params
        if n == 0:
            return _zero_tower() if reduced else _constant_Z_tower()
        if n == 1:
            Z = free_group(1)
            model = PeriodicTower((), (), Z, hom_make(Z, Z, [[p]]), None)
            _verify_levels(st, 1, model)
            return model
        return _zero_tower()
    if fam == "hawaiian":
        if n == 0:
            return _zero_tower() if reduced else _constant_Z_tower()
        if n == 1:
            model = make_streamed("hawaiian_h1")
            _verify_levels(st, 1, model)
            return model
        return _zero_tower()
    if fam == "null_sequence":
        if n == 0:
            if reduced:
                return make_streamed("hawaiian_h1")
            model = make_streamed("finite_sets")
            _verify_levels(st, 0, model)
            return model
        return _zero_tower()
    if fam == "cluster_solenoids":
        (p,) = params
        if n == 0:
            return _zero_tower() if reduced else _constant_Z_tower()
        if n == 1:
            model = make_streamed("cluster_h1", (p,))
            _verify_levels(st, 1, model)
            return model
        return _zero_tower()
    raise UnknownExample(fam)


# ---------------------------------------------------------------------------
# Steenrod homology descriptors


@dataclass(frozen=True)
class SteenrodDescriptor:
    """The two computed parts of the homology of the limit in one degree.

    The group sits in an extension 0 -> lim1_part -> H -> lim_part -> 0;
    splits records when the extension is known to be trivial (a free or
    vanishing lim part, or a vanishing lim1 part).
    """

    degree: int
    lim1_part: StructuredGroup
    lim_part: StructuredGroup
    splits: str          # "yes" | "unknown"
    reduced: bool

    def middle(self):
        """The limit's homology group itself, when the extension splits."""
        if self.splits != "yes":
            return None
        return StructuredGroup.direct_sum([self.lim_part, self.lim1_part])

    def render(self):
        if self.splits == "yes":
            return self.middle().render()
        return "extension of %s by %s (splitting unknown)" % (
            self.lim_part.render(), self.lim1_part.render())

    def to_json(self):
        return {"degree": self.degree, "reduced": self.reduced,
                "lim1_part": self.lim1_part.to_json(),
                "lim_part": self.lim_part.to_json(),
                "splits": self.splits, "render": self.render()}


def _splits(lim_part, lim1_part):
    if lim1_part.is_trivial or lim_part.is_fg_free():
        return "yes"
    return "unknown"


def steenrod(st, n, reduced=False):
    """Steenrod homology descriptor of the limit of a simplicial tower."""
    lim1_part = derived_limit(homology_tower(st, n + 1))
    lim_part = limit(homology_tower(st, n, reduced))
    return SteenrodDescriptor(n, lim1_part, lim_part, _splits(lim_part, lim1_part),
                              reduced)


def cluster(parts, countable_repetition=False):
    """Steenrod descriptor of a one-point union, degreewise a product of
    the reduced parts."""
    if not parts:
        raise DegreeMismatch("cluster of nothing")
    deg = parts[0].degree
    for p in parts:
        if p.degree != deg:
            raise DegreeMismatch("cluster parts must share one degree")
        if not p.reduced:
            raise DegreeMismatch("cluster parts must be reduced descriptors")
    lim1_part = StructuredGroup.product_of(
        [p.lim1_part for p in parts], countable_repetition)
    lim_part = StructuredGroup.product_of(
        [p.lim_part for p in parts], countable_repetition)
    return SteenrodDescriptor(deg, lim1_part, lim_part,
                              _splits(lim_part, lim1_part), True)


# ---------------------------------------------------------------------------
# Pontryagin (Cech) cohomology


def cech_cohomology(st, n):
    """Colimit of the level cohomologies.

    Periodic towers give a finitely generated answer when the induced map
    is bijective and a localization otherwise; the solenoid family has
    its registered localization; other streamed families are reported
    depth-limited.
    """
    if isinstance(st, PeriodicSimplicialTower):
        from .simplicial import simplicial_cohomology
        H = simplicial_cohomology(st.tail_complex, n)
        B = induced_cohom(st.tail_map, n)
        B = hom_make(H, H, B.matrix)
        k, _, ck = hom_parts(B)
        if k.group.is_trivial() and ck.group.is_trivial():
            return StructuredGroup.fg(H)
        if k.group.is_trivial():
            return StructuredGroup.localization(H, B.matrix)
        # iterate to the eventual direct system; colim kills the kernels
        return StructuredGroup.depth_limited(
            "cohomology bond has a kernel; colimit not in closed form")
    if isinstance(st, StreamedSimplicialTower):
        if st.family == "solenoid":
            (p,) = st.params
            if n == 0:
                return StructuredGroup.fg(free_group(1))
            if n == 1:
                for i in range(2):
                    h = induced_cohom(st.bond_at(i), 1)
                    if abs(h.matrix.data[0][0]) != p:
                        raise ShapeError("solenoid cohomology bond is not degree p")
                return StructuredGroup.localization(free_group(1),
                                                    IntMatrix.from_rows([[p]]))
            return StructuredGroup.zero()
        if st.family == "null_sequence" and n >= 1:
            return StructuredGroup.zero()
        if st.family in ("hawaiian", "cluster_solenoids") and n >= 2:
            return StructuredGroup.zero()
        return StructuredGroup.depth_limited(
            "colimit of a growing-rank cohomology sequence (a countable direct sum)")
    raise ShapeError("cech_cohomology needs a simplicial tower")


# ---------------------------------------------------------------------------
# finite mapping telescopes


@dataclass(frozen=True)
class Telescope:
    complex: SimplicialComplex
    level_vertex_ids: tuple      # tuple of tuples: telescope ids per level copy
    level_complexes: tuple       # the (iterated subdivision) complex of each level
    base_vertex_map: tuple       # simplicial retraction onto the level-0 copy

    def level_inclusion(self, j):
        return SimplicialMap(self.level_complexes[j], self.complex,
                             self.level_vertex_ids[j])

    def retraction_to_base(self):
        return SimplicialMap(self.complex, self.level_complexes[0],
                             self.base_vertex_map)

    def level_to_base(self, j):
        """The composite level-j copy -> telescope -> level 0."""
        inc = self.level_vertex_ids[j]
        vm = tuple(self.base_vertex_map[v] for v in inc)
        return SimplicialMap(self.level_complexes[j], self.level_complexes[0], vm)


def telescope(st, m):
    """The finite mapping telescope of levels 0..m, as one complex.

    Built from simplicial mapping cylinders; the bonding map entering
    level i is subdivided i times so consecutive cylinders share a copy
    of the same complex.  The telescope deformation retracts onto level 0,
    which the homology tests witness.
    """
    if m < 0:
        raise ShapeError("telescope needs m >= 0")
    P0 = st.complex_at(0)
    simplices = set(P0.simplices)
    total_vertices = P0.vertex_count
    level_ids = [tuple(range(P0.vertex_count))]
    level_complexes = [P0]
    top_embed = list(range(P0.vertex_count))   # ids of the current top copy
    top_complex = P0
    to_base = list(range(P0.vertex_count))     # composite retraction, id-chased
    for i in range(m):
        bond = st.bond_at(i)
        for _ in range(i):
            src_labels = barycentric_subdivision(bond.source)[1]
            tgt_labels = barycentric_subdivision(bond.target)[1]
            bond = subdivide_map(bond, src_labels, tgt_labels)
        if bond.target.simplices != top_complex.simplices:
            raise ShapeError("telescope gluing mismatch at level %d" % i)
        cyl = mapping_cylinder(bond)
        nb = cyl.source_subdivision.vertex_count
        fresh = list(range(total_vertices, total_vertices + nb))
        total_vertices += nb
        relabel = fresh + top_embed
        for s in cyl.complex.simplices:
            simplices.add(tuple(sorted(relabel[v] for v in s)))
        for j in range(nb):
            # the cylinder retraction sends barycenter j into the target copy
            tgt_vertex = cyl.retraction.vertex_map[j]
            to_base.append(to_base[top_embed[tgt_vertex]])
        top_embed = fresh
        top_complex = cyl.source_subdivision
        level_ids.append(tuple(fresh))
        level_complexes.append(top_complex)
    T = SimplicialComplex(total_vertices, frozenset(simplices))
    return Telescope(T, tuple(level_ids), tuple(level_complexes), tuple(to_base))
