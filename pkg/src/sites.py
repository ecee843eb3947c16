"""
Finite Grothendieck Sites
Sieves, topology saturation, closure and sheafification by the plus construction.

A sieve on c is a bitset over the category's morphism table. On a finite
category the covering sieves on c are closed under intersection, so they form
the up-set of a least covering sieve; GrothTopology stores that sieve per
object and lists the full covering family on demand.
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, Hashable, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

import numpy as np

from src.config import config_value
from src.errors import NotASieve, SizeExceeded, TargetMismatch, TheoremViolation, WrongCodomain
from src.fincat import FinCategory
from src.lattice import bits
from src.verdict import Verdict, failed, passed

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Sieve:
    """Set of morphisms into `target` closed under precomposition"""
    target: int
    members: int

    def __contains__(self, f: int) -> bool:
        return bool(self.members >> f & 1)

    def __len__(self) -> int:
        return bin(self.members).count('1')

    def morphisms(self) -> List[int]:
        return bits(self.members)

    def describe(self, C: FinCategory) -> str:
        if self.members == C.into_mask[self.target]:
            return "max"
        return "{" + ",".join(C.name(f) for f in bits(self.members)) + "}"


def is_sieve(C: FinCategory, c: int, mask: int) -> bool:
    if mask & ~C.into_mask[c]:
        return False
    principal = C.principal_masks
    return all(principal[f] & ~mask == 0 for f in bits(mask))


def generated_sieve(C: FinCategory, c: int, family: Iterable[int]) -> Sieve:
    """Smallest sieve on c containing the family"""
    mask = 0
    principal = C.principal_masks
    for f in family:
        if C.morphisms[f].cod != c:
            raise WrongCodomain(
                f"{C.name(f)} does not land in {C.objects[c]}",
                {'morphism': C.name(f), 'object': C.objects[c]},
            )
        mask |= principal[f]
    return Sieve(c, mask)


def pullback_mask(C: FinCategory, mask: int, f: int) -> int:
    """{g : f∘g ∈ mask} as a bitset on dom(f)"""
    row = C.table[f]
    result = 0
    for g in C.into[C.morphisms[f].dom]:
        if mask >> row[g] & 1:
            result |= 1 << g
    return result


def pullback_sieve(C: FinCategory, S: Sieve, f: int) -> Sieve:
    if C.morphisms[f].cod != S.target:
        raise TargetMismatch(
            f"{C.name(f)} does not land in the sieve's target {C.objects[S.target]}",
            {'morphism': C.name(f), 'target': C.objects[S.target]},
        )
    return Sieve(C.morphisms[f].dom, pullback_mask(C, S.members, f))


def _union_closure(C: FinCategory, c: int, start: int, label: str) -> List[int]:
    """All sieves on c containing `start`, as unions with principal sieves"""
    principal = [C.principal_masks[f] for f in C.into[c]]
    limit = config_value('max_sieves')
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principal:
                u = s | p
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        if len(seen) > limit:
            raise SizeExceeded(
                f"More than {limit} {label} on {C.objects[c]}; shrink the site or raise WORKBENCH_MAX_SIEVES",
                {'object': C.objects[c], 'limit': limit},
            )
        frontier = nxt
    return sorted(seen, key=lambda m: (bin(m).count('1'), m))


def all_sieves(C: FinCategory, c: int) -> List[int]:
    return _union_closure(C, c, 0, "sieves")


class GrothTopology:
    """
    Grothendieck topology on a finite category.

    minimal[c] is the least covering sieve on c; S covers c iff S ⊇ minimal[c].
    """

    def __init__(self, category: FinCategory, minimal: Sequence[int], kind: str = 'custom'):
        self.category = category
        self.minimal: Tuple[int, ...] = tuple(minimal)
        self.kind = kind
        self._covering: Dict[int, List[Sieve]] = {}

    def covers_mask(self, c: int, mask: int) -> bool:
        m = self.minimal[c]
        return mask & m == m

    def covers(self, S: Sieve) -> bool:
        return self.covers_mask(S.target, S.members)

    def covering(self, c: int) -> List[Sieve]:
        """Every covering sieve on c (enumerated once, then cached)"""
        if c not in self._covering:
            masks = _union_closure(self.category, c, self.minimal[c], "covering sieves")
            self._covering[c] = [Sieve(c, m) for m in masks]
        return self._covering[c]

    def empty_covers(self, c: int) -> bool:
        return self.minimal[c] == 0

    def closure_mask(self, c: int, mask: int) -> int:
        C = self.category
        result = 0
        for f in C.into[c]:
            if self.covers_mask(C.morphisms[f].dom, pullback_mask(C, mask, f)):
                result |= 1 << f
        return result

    def is_trivial(self) -> bool:
        return all(m == self.category.into_mask[c] for c, m in enumerate(self.minimal))

    def contains(self, other: 'GrothTopology') -> bool:
        """Every sieve covering for `other` also covers here"""
        return all(self.covers_mask(c, m) for c, m in enumerate(other.minimal))

    def __eq__(self, other) -> bool:
        if not isinstance(other, GrothTopology):
            return NotImplemented
        return self.category is other.category and self.minimal == other.minimal

    __hash__ = None

    def __repr__(self) -> str:
        return f"GrothTopology(kind={self.kind}, objects={len(self.minimal)})"


def trivial_topology(C: FinCategory) -> GrothTopology:
    return GrothTopology(C, list(C.into_mask), kind='trivial')


def saturate(
    C: FinCategory,
    coverage: Optional[Dict[int, Iterable[Union[Sieve, int]]]] = None,
    kind: str = 'custom',
) -> GrothTopology:
    """
    Least topology containing the given covering sieves.

    Shrinks the least covering sieve of each object until it is stable under
    pullback and under composition of covers.
    """
    minimal = list(C.into_mask)
    for c, family in (coverage or {}).items():
        for S in family:
            mask = S.members if isinstance(S, Sieve) else int(S)
            if not is_sieve(C, c, mask):
                raise NotASieve(
                    f"Basis family on {C.objects[c]} is not a sieve",
                    {'object': C.objects[c], 'members': [C.name(f) for f in bits(mask)]},
                )
            minimal[c] &= mask

    rounds = 0
    changed = True
    while changed:
        changed = False
        rounds += 1
        for m in C.morphisms:
            pulled = minimal[m.dom] & pullback_mask(C, minimal[m.cod], m.id)
            if pulled != minimal[m.dom]:
                minimal[m.dom] = pulled
                changed = True
        for c in range(C.n_objects):
            composite = 0
            for f in bits(minimal[c]):
                row = C.table[f]
                for h in bits(minimal[C.morphisms[f].dom]):
                    composite |= 1 << row[h]
            if composite != minimal[c]:
                minimal[c] &= composite
                changed = True
    logger.debug("saturated %s topology in %d rounds", kind, rounds)
    return GrothTopology(C, minimal, kind=kind)


def closure(J: GrothTopology, S: Sieve) -> Sieve:
    """Cl_J(S) = {f : f*S covers dom f}"""
    closed = J.closure_mask(S.target, S.members)
    if S.members & ~closed or J.closure_mask(S.target, closed) != closed:
        raise TheoremViolation(
            "Closure is not inflationary and idempotent",
            {'object': J.category.objects[S.target], 'sieve': S.describe(J.category)},
        )
    return Sieve(S.target, closed)


def closed_sieves(J: GrothTopology, c: int) -> List[int]:
    """J-closed sieves on c: joins of closures of principal sieves"""
    C = J.category
    limit = config_value('max_sieves')
    start = J.closure_mask(c, 0)
    seen = {start}
    frontier = [start]
    principal = [C.principal_masks[f] for f in C.into[c]]
    while frontier:
        nxt = []
        for s in frontier:
            for p in principal:
                u = J.closure_mask(c, s | p)
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
        if len(seen) > limit:
            raise SizeExceeded(
                f"More than {limit} closed sieves on {C.objects[c]}; shrink the site or raise WORKBENCH_MAX_SIEVES",
                {'object': C.objects[c], 'limit': limit},
            )
        frontier = nxt
    return sorted(seen, key=lambda m: (bin(m).count('1'), m))


def check_topology_axioms(J: GrothTopology) -> Verdict:
    """Maximality, stability and transitivity on the least covering sieves"""
    C = J.category
    for c, m in enumerate(J.minimal):
        if not is_sieve(C, c, m):
            return failed("least cover is not a sieve", object=C.objects[c])
    for f in C.morphisms:
        if not J.covers_mask(f.dom, pullback_mask(C, J.minimal[f.cod], f.id)):
            return failed("stability fails", morphism=f.name)
    for c, m in enumerate(J.minimal):
        composite = 0
        for f in bits(m):
            for h in bits(J.minimal[C.morphisms[f].dom]):
                composite |= 1 << C.table[f][h]
        if not J.covers_mask(c, composite):
            return failed("transitivity fails", object=C.objects[c])
    return passed("topology axioms hold")


def check_topology_exhaustively(J: GrothTopology) -> Verdict:
    """The three axioms checked literally over every sieve of every object"""
    C = J.category
    sieves = {c: all_sieves(C, c) for c in range(C.n_objects)}
    covering = {c: {s for s in sieves[c] if J.covers_mask(c, s)} for c in sieves}
    for c in range(C.n_objects):
        if C.into_mask[c] not in covering[c]:
            return failed("maximal sieve does not cover", object=C.objects[c])
        for S in covering[c]:
            for f in C.into[c]:
                if pullback_mask(C, S, f) not in covering[C.morphisms[f].dom]:
                    return failed("stability fails", object=C.objects[c], morphism=C.name(f))
            for R in sieves[c]:
                if R in covering[c]:
                    continue
                if all(pullback_mask(C, R, f) in covering[C.morphisms[f].dom] for f in bits(S)):
                    return failed(
                        "transitivity fails", object=C.objects[c],
                        sieve=Sieve(c, R).describe(C),
                    )
    return passed("topology axioms hold on every sieve")


# ---------------------------------------------------------------------------
# Presheaves and sheafification
# ---------------------------------------------------------------------------

@dataclass
class FinPresheaf:
    """
    Finite presheaf: sections per object, restriction per morphism.

    restriction[f] for f: d→c maps section indices of c to section indices of d.
    """
    category: FinCategory
    sections: List[List[Hashable]]
    restriction: List[np.ndarray]

    def size(self, c: int) -> int:
        return len(self.sections[c])

    def restrict(self, f: int, x: int) -> int:
        return int(self.restriction[f][x])

    def check_functorial(self) -> Verdict:
        C = self.category
        for c in range(C.n_objects):
            if not np.array_equal(self.restriction[int(C.identity[c])], np.arange(self.size(c))):
                return failed("identity does not restrict to the identity", object=C.objects[c])
        for g in range(C.n_morphisms):
            for f in C.into[C.morphisms[g].dom]:
                gf = C.table[g][f]
                if not np.array_equal(self.restriction[gf], self.restriction[f][self.restriction[g]]):
                    return failed("restriction is not functorial", g=C.name(g), f=C.name(f))
        return passed("functorial")


def constant_presheaf(C: FinCategory, values: Sequence[Hashable]) -> FinPresheaf:
    return FinPresheaf(
        C,
        [list(values) for _ in range(C.n_objects)],
        [np.arange(len(values), dtype=np.int64) for _ in range(C.n_morphisms)],
    )


def matching_families(P: FinPresheaf, c: int, mask: int) -> Iterator[Dict[int, int]]:
    """
    Every matching family over the sieve `mask` on c.

    A family picks x_f ∈ P(dom f) for each member with P(g)(x_f) = x_{f∘g}.
    """
    C = P.category
    members = bits(mask)

    def assign(family: Dict[int, int], f: int, x: int) -> Optional[Dict[int, int]]:
        family = dict(family)
        family[f] = x
        row = C.table[f]
        for g in C.into[C.morphisms[f].dom]:
            h = row[g]
            value = int(P.restriction[g][x])
            if family.get(h, value) != value:
                return None
            family[h] = value
        return family

    def extend(family: Dict[int, int], i: int) -> Iterator[Dict[int, int]]:
        while i < len(members) and members[i] in family:
            i += 1
        if i == len(members):
            yield family
            return
        f = members[i]
        for x in range(P.size(C.morphisms[f].dom)):
            grown = assign(family, f, x)
            if grown is not None:
                yield from extend(grown, i + 1)

    yield from extend({}, 0)


def amalgamations(P: FinPresheaf, c: int, family: Dict[int, int]) -> List[int]:
    candidates = np.ones(P.size(c), dtype=bool)
    for f, x in family.items():
        candidates &= P.restriction[f] == x
    return np.flatnonzero(candidates).tolist()


def is_sheaf(P: FinPresheaf, J: GrothTopology) -> Verdict:
    """Every matching family over every covering sieve has exactly one amalgamation"""
    C = P.category
    for c in range(C.n_objects):
        for S in J.covering(c):
            for family in matching_families(P, c, S.members):
                found = amalgamations(P, c, family)
                if len(found) != 1:
                    return failed(
                        f"{len(found)} amalgamations over a covering sieve",
                        object=C.objects[c],
                        sieve=S.describe(C),
                        family={C.name(f): str(P.sections[C.morphisms[f].dom][x]) for f, x in family.items()},
                        amalgamations=len(found),
                    )
    return passed("sheaf")


@dataclass
class PlusPresheaf(FinPresheaf):
    """
    Result of the plus construction.

    representatives[c][k] is a (covering sieve, matching family) pair for
    section k; unit[c] maps sections of `base` at c into this presheaf.
    """
    base: Optional[FinPresheaf] = None
    representatives: List[List[Tuple[int, Dict[int, int]]]] = field(default_factory=list)
    unit: List[np.ndarray] = field(default_factory=list)


def _family_key(mask: int, family: Dict[int, int]) -> Tuple[int, Tuple[Tuple[int, int], ...]]:
    return mask, tuple(sorted(family.items()))


def plus_construction(P: FinPresheaf, J: GrothTopology) -> PlusPresheaf:
    """
    P⁺(c): matching families over covering sieves of c, identified when they
    agree on a covering sieve.
    """
    C = P.category
    sections: List[List[Hashable]] = []
    representatives: List[List[Tuple[int, Dict[int, int]]]] = []
    lookup: List[Dict[Tuple, int]] = []
    for c in range(C.n_objects):
        pairs = [
            (S.members, family)
            for S in J.covering(c)
            for family in matching_families(P, c, S.members)
        ]
        parent = list(range(len(pairs)))

        def find(i: int) -> int:
            while parent[i] != i:
                parent[i] = parent[parent[i]]
                i = parent[i]
            return i

        for i in range(len(pairs)):
            for j in range(i + 1, len(pairs)):
                (s1, x1), (s2, x2) = pairs[i], pairs[j]
                agree = 0
                for f in bits(s1 & s2):
                    if x1[f] == x2[f]:
                        agree |= 1 << f
                if J.covers_mask(c, agree):
                    ri, rj = find(i), find(j)
                    if ri != rj:
                        parent[max(ri, rj)] = min(ri, rj)

        classes: Dict[int, int] = {}
        reps: List[Tuple[int, Dict[int, int]]] = []
        index: Dict[Tuple, int] = {}
        for i, (mask, family) in enumerate(pairs):
            root = find(i)
            if root not in classes:
                classes[root] = len(reps)
                reps.append((mask, family))
            index[_family_key(mask, family)] = classes[root]
        sections.append([('class', k) for k in range(len(reps))])
        representatives.append(reps)
        lookup.append(index)
        logger.debug("plus construction at %s: %d pairs, %d classes", C.objects[c], len(pairs), len(reps))

    restriction = []
    for h in range(C.n_morphisms):
        d, c = C.morphisms[h].dom, C.morphisms[h].cod
        row = C.table[h]
        image = []
        for mask, family in representatives[c]:
            pulled = pullback_mask(C, mask, h)
            restricted = {g: family[row[g]] for g in bits(pulled)}
            image.append(lookup[d][_family_key(pulled, restricted)])
        restriction.append(np.array(image, dtype=np.int64))

    unit = []
    for c in range(C.n_objects):
        full = C.into_mask[c]
        unit.append(np.array([
            lookup[c][_family_key(full, {f: P.restrict(f, x) for f in C.into[c]})]
            for x in range(P.size(c))
        ], dtype=np.int64))

    return PlusPresheaf(C, sections, restriction, base=P, representatives=representatives, unit=unit)


def sheafify(P: FinPresheaf, J: GrothTopology) -> PlusPresheaf:
    """Plus construction applied twice; `unit` is the composite P → P⁺⁺"""
    first = plus_construction(P, J)
    second = plus_construction(first, J)
    second.unit = [second.unit[c][first.unit[c]] for c in range(P.category.n_objects)]
    return second


def extend_to_plus(
    plus: PlusPresheaf,
    J: GrothTopology,
    target: FinPresheaf,
    phi: List[np.ndarray],
) -> List[np.ndarray]:
    """
    Extend a map phi: base → target into a sheaf along the plus construction.

    Each class (S, x) goes to the unique amalgamation of (phi(x_f))_{f∈S}.
    """
    C = plus.category
    result = []
    for c in range(C.n_objects):
        images = []
        for mask, family in plus.representatives[c]:
            mapped = {f: int(phi[C.morphisms[f].dom][x]) for f, x in family.items()}
            found = amalgamations(target, c, mapped)
            if len(found) != 1:
                raise TheoremViolation(
                    "Target is not a sheaf: amalgamation is not unique",
                    {'object': C.objects[c], 'amalgamations': len(found)},
                )
            images.append(found[0])
        result.append(np.array(images, dtype=np.int64))
    return result
