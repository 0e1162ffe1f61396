"""Structured descriptions of the groups produced by limit computations.

A tower of finitely generated abelian groups can have a limit that is far
from finitely generated (products, completions, quotients of completions).
A StructuredGroup is a tagged exact description of such a value, rich
enough to support a sound three-valued comparator: equality of canonical
keys is descriptor equality, distinctness is only claimed on genuine group
invariants, and everything else is Undecided.
"""

from __future__ import annotations

from dataclasses import dataclass

from .exactlat import FgAbGroup, IntMatrix, free_group


def prime_factors(n):
    n = abs(n)
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return out


def _valuation(n, p):
    v = 0
    n = abs(n)
    while n != 0 and n % p == 0:
        n //= p
        v += 1
    return v


def completion_corank_profile(rank, matrix, primes=None):
    """q-torsion coranks of the completion quotient, per prime q | det(A).

    The q-torsion of (lim L/A^k L)/L is (Z/q)^c where c is rank minus the
    number of elementary divisors of A^k whose q-valuation keeps growing.
    Returns (profile dict, stabilized flag); an unstable growth pattern is
    reported rather than guessed around.
    """
    from .exactlat import snf
    if primes is None:
        primes = prime_factors(matrix.det())
    if not primes:
        return {}, True
    K = rank + 2
    valuations = []
    for k in (K, K + 1, K + 2):
        S, _, _ = snf(matrix ** k)
        valuations.append([S.data[i][i] for i in range(rank)])
    profile = {}
    stable = True
    for q in primes:
        grow_a = sum(1 for i in range(rank)
                     if _valuation(valuations[1][i], q) > _valuation(valuations[0][i], q))
        grow_b = sum(1 for i in range(rank)
                     if _valuation(valuations[2][i], q) > _valuation(valuations[1][i], q))
        if grow_a != grow_b:
            stable = False
        profile[q] = rank - grow_b
    return profile, stable


@dataclass(frozen=True)
class StructuredGroup:
    """Tagged exact description of a possibly non-f.g. abelian group.

    tag is one of:
      zero                 the trivial group
      fg                   payload: FgAbGroup
      completion_quotient  payload: (rank, matrix); the quotient of the
                           completion lim L/A^k L by the image of L
      completion           payload: (rank, matrix); the completion itself
      localization         payload: (FgAbGroup, matrix); colim L -> L -> ...
      full_product         payload: level descriptor string
      product_of           payload: factor tuple plus a countable-repetition flag
      direct_sum           payload: part tuple
      depth_limited        payload: report string
    """

    tag: str
    group: FgAbGroup | None = None
    rank: int = 0
    matrix: IntMatrix | None = None
    factors: tuple = ()
    countable_repetition: bool = False
    descriptor: str = ""
    is_uncountable: bool = False
    missing_primes: tuple = ()
    corank_profile: tuple = ()
    profile_stable: bool = True

    # -- constructors (normalizing) ------------------------------------

    @staticmethod
    def zero():
        return StructuredGroup(tag="zero")

    @staticmethod
    def fg(group):
        if group.is_trivial():
            return StructuredGroup.zero()
        return StructuredGroup(tag="fg", group=group)

    @staticmethod
    def completion_quotient(rank, matrix):
        """Quotient of the completion along A; assumes the unit part of A
        was already split off, so |det| = 1 collapses to zero."""
        if rank == 0 or abs(matrix.det()) == 1:
            return StructuredGroup.zero()
        primes = tuple(prime_factors(matrix.det()))
        profile, stable = completion_corank_profile(rank, matrix, primes)
        return StructuredGroup(
            tag="completion_quotient", rank=rank, matrix=matrix,
            is_uncountable=True, missing_primes=primes,
            corank_profile=tuple(sorted(profile.items())),
            profile_stable=stable)

    @staticmethod
    def completion(rank, matrix):
        if rank == 0 or abs(matrix.det()) == 1:
            return StructuredGroup.fg(free_group(rank))
        primes = tuple(prime_factors(matrix.det()))
        profile, stable = completion_corank_profile(rank, matrix, primes)
        return StructuredGroup(
            tag="completion", rank=rank, matrix=matrix,
            is_uncountable=True, missing_primes=primes,
            corank_profile=tuple(sorted(profile.items())),
            profile_stable=stable)

    @staticmethod
    def localization(group, matrix):
        if group.is_trivial():
            return StructuredGroup.zero()
        if abs(matrix.det()) == 1:
            return StructuredGroup.fg(group)
        return StructuredGroup(tag="localization", group=group, matrix=matrix,
                               rank=group.rank)

    @staticmethod
    def full_product(descriptor="Z"):
        return StructuredGroup(tag="full_product", descriptor=descriptor,
                               is_uncountable=True)

    @staticmethod
    def product_of(factors, countable_repetition=False):
        factors = tuple(factors)
        if all(f.tag == "zero" for f in factors):
            return StructuredGroup.zero()
        unc = countable_repetition or any(f.is_uncountable for f in factors)
        return StructuredGroup(tag="product_of", factors=factors,
                               countable_repetition=countable_repetition,
                               is_uncountable=unc)

    @staticmethod
    def direct_sum(parts):
        parts = tuple(p for p in parts if p.tag != "zero")
        if not parts:
            return StructuredGroup.zero()
        if len(parts) == 1:
            return parts[0]
        return StructuredGroup(tag="direct_sum", factors=parts,
                               is_uncountable=any(p.is_uncountable for p in parts))

    @staticmethod
    def depth_limited(report):
        return StructuredGroup(tag="depth_limited", descriptor=report)

    # -- queries --------------------------------------------------------

    @property
    def is_trivial(self):
        return self.tag == "zero"

    def is_fg_free(self):
        if self.tag == "zero":
            return True
        return self.tag == "fg" and not self.group.torsion

    def canonical_key(self):
        if self.tag == "zero":
            return ("zero",)
        if self.tag == "fg":
            r, t = self.group.smith_invariants
            return ("fg", r, tuple(t))
        if self.tag in ("completion_quotient", "completion"):
            return (self.tag, self.rank, self.missing_primes, self.corank_profile)
        if self.tag == "localization":
            r, t = self.group.smith_invariants
            return ("localization", r, tuple(t),
                    tuple(prime_factors(self.matrix.det())))
        if self.tag == "full_product":
            return ("full_product", self.descriptor)
        if self.tag == "product_of":
            return ("product_of", self.countable_repetition,
                    tuple(f.canonical_key() for f in self.factors))
        if self.tag == "direct_sum":
            return ("direct_sum", tuple(f.canonical_key() for f in self.factors))
        return ("depth_limited", self.descriptor)

    def render(self):
        """Conventional notation: Z^r (+) Z/d, Z_p/Z, L[1/A], prod Z."""
        if self.tag == "zero":
            return "0"
        if self.tag == "fg":
            return self.group.describe()
        if self.tag == "completion_quotient":
            return "%s/%s" % (self._completion_name(), _free_name(self.rank))
        if self.tag == "completion":
            return self._completion_name()
        if self.tag == "localization":
            d = abs(self.matrix.det())
            if self.group.smith_invariants == (1, []):
                return "Z[1/%d]" % d
            return "%s[1/A]" % self.group.describe()
        if self.tag == "full_product":
            return "prod %s" % self.descriptor
        if self.tag == "product_of":
            inner = sorted({f.render() for f in self.factors})
            return "prod(%s)" % ", ".join(inner)
        if self.tag == "direct_sum":
            return " (+) ".join(f.render() for f in self.factors)
        return "depth-limited: %s" % self.descriptor

    def _completion_name(self):
        det = abs(self.matrix.det())
        if len(self.missing_primes) == 1:
            p = self.missing_primes[0]
            if self.rank == 1 and det == p ** _valuation(det, p):
                return "Z_%d" % p
        return "Lambda_A(%s)" % _free_name(self.rank)

    def to_json(self):
        out = {"tag": self.tag, "render": self.render(),
               "is_trivial": self.tag == "zero",
               "is_uncountable": self.is_uncountable}
        if self.tag in ("fg", "localization"):
            r, t = self.group.smith_invariants
            out["invariants"] = {"rank": r, "torsion": list(t)}
        if self.tag in ("completion_quotient", "completion"):
            out["lattice_rank"] = self.rank
            out["matrix"] = [list(r) for r in self.matrix.data]
            out["missing_primes"] = list(self.missing_primes)
            out["present_primes"] = "all primes outside missing_primes"
            out["corank_profile"] = [list(x) for x in self.corank_profile]
        if self.tag == "localization":
            out["matrix"] = [list(r) for r in self.matrix.data]
            out["inverted_primes"] = prime_factors(self.matrix.det())
        if self.tag == "product_of":
            out["factors"] = [f.to_json() for f in self.factors]
            out["countable_repetition"] = self.countable_repetition
        if self.tag == "direct_sum":
            out["parts"] = [f.to_json() for f in self.factors]
        if self.tag in ("full_product", "depth_limited"):
            out["descriptor"] = self.descriptor
        return out


def _free_name(rank):
    return "Z" if rank == 1 else "Z^%d" % rank


def compare_structured(a, b):
    """Three-valued comparator: 'equal', 'distinct' or 'undecided'.

    Equality of canonical keys is descriptor equality.  Distinctness is
    claimed only on sound invariants: f.g. invariants, triviality,
    countability, and the per-prime torsion coranks of completion
    quotients (the q-torsion of the quotient is (Z/q)^c, a group
    invariant; at primes away from det(A) the corank is the full rank).
    """
    if a.canonical_key() == b.canonical_key():
        return "equal"
    if "depth_limited" in (a.tag, b.tag):
        return "undecided"
    if (a.tag == "zero") != (b.tag == "zero"):
        return "distinct"
    if a.is_uncountable != b.is_uncountable:
        return "distinct"
    if a.tag == "fg" and b.tag == "fg":
        return "distinct"
    if "fg" in (a.tag, b.tag) and {a.tag, b.tag} <= {"fg", "localization"}:
        # a proper localization is never finitely generated
        return "distinct"
    if a.tag == "completion_quotient" and b.tag == "completion_quotient":
        if not (a.profile_stable and b.profile_stable):
            return "undecided"
        if a.rank != b.rank:
            return "distinct"
        pa, pb = dict(a.corank_profile), dict(b.corank_profile)
        for q in set(pa) | set(pb):
            if pa.get(q, a.rank) != pb.get(q, b.rank):
                return "distinct"
        return "undecided"
    return "undecided"
