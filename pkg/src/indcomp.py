"""
Bounded Ind-Completion
Formal colimits of finite directed diagrams, their hom-sets
lim_i colim_j Hom(A_i, B_j), composition, and a bounded amalgamation search.

Searches are bounded by the index size of the diagrams they try and report
NONE_WITHIN_BOUND rather than a negative answer when the bound runs out.
"""

import itertools
import logging
from dataclasses import dataclass, field
from enum import Enum
from functools import lru_cache
from typing import Dict, FrozenSet, Iterator, List, Optional, Tuple

import numpy as np

from src.config import config_value
from src.enumeration import enumerate_posets, is_directed
from src.errors import DiagramError, TheoremViolation
from src.fincat import FinCategory, span_amalgamations
from src.lattice import FinPoset

logger = logging.getLogger(__name__)

Element = Tuple[int, int]  # (index j, morphism A_i → B_j)


@dataclass
class IndObject:
    """
    A diagram over a finite directed poset.

    connecting[(i, j)] for i ≤ j is the morphism objects[i] → objects[j].
    """
    category: FinCategory
    index: FinPoset
    objects: List[int]
    connecting: Dict[Tuple[int, int], int]

    @property
    def size(self) -> int:
        return len(self.objects)

    def le(self, i: int, j: int) -> bool:
        return bool(self.index.leq[i, j])

    def maximum(self) -> int:
        tops = np.flatnonzero(self.index.leq.all(axis=0))
        return int(tops[0])

    def validate(self) -> 'IndObject':
        C = self.category
        n = self.size
        if self.index.size != n or n == 0:
            raise DiagramError("Diagram must assign one object to each index element", {'size': n})
        self.index.validate()
        if not is_directed(self.index.leq):
            raise DiagramError("Index poset is not directed")
        for i in range(n):
            for j in range(n):
                if not self.le(i, j):
                    continue
                f = self.connecting.get((i, j))
                if f is None or C.morphisms[f].dom != self.objects[i] or C.morphisms[f].cod != self.objects[j]:
                    raise DiagramError("Missing or mistyped connecting morphism", {'from': i, 'to': j})
            if self.connecting[(i, i)] != int(C.identity[self.objects[i]]):
                raise DiagramError("Connecting morphism at an index element is not an identity", {'index': i})
        for (i, j), f in self.connecting.items():
            for k in range(n):
                if self.le(j, k) and C.table[self.connecting[(j, k)]][f] != self.connecting[(i, k)]:
                    raise DiagramError("Diagram is not functorial", {'i': i, 'j': j, 'k': k})
        return self

    def describe(self) -> Dict[str, object]:
        C = self.category
        return {
            'objects': [C.objects[c] for c in self.objects],
            'connecting': {f"{i}≤{j}": C.name(f) for (i, j), f in sorted(self.connecting.items()) if i != j},
        }


def embed(C: FinCategory, c: int) -> IndObject:
    return IndObject(C, FinPoset(['0'], np.ones((1, 1), dtype=bool)), [c], {(0, 0): int(C.identity[c])})


class IndMorphism:
    """
    One colimit class per source index: members[i] is the set of
    representatives (j, f: A_i → B_j) of that class.
    """

    def __init__(self, source: IndObject, target: IndObject, members: Tuple[FrozenSet[Element], ...]):
        self.source = source
        self.target = target
        self.members = tuple(members)

    @property
    def classes(self) -> Tuple[Element, ...]:
        return tuple(min(m) for m in self.members)

    def __eq__(self, other) -> bool:
        if not isinstance(other, IndMorphism):
            return NotImplemented
        return self.classes == other.classes

    def __hash__(self) -> int:
        return hash(self.classes)

    def describe(self) -> List[str]:
        C = self.source.category
        return [f"[{C.name(f)}@{j}]" for j, f in self.classes]

    def __repr__(self) -> str:
        return f"IndMorphism({', '.join(self.describe())})"


def colimit_classes(c: int, B: IndObject) -> Dict[Element, FrozenSet[Element]]:
    """
    colim_j Hom(c, B_j): (j, g) ~ (k, B(j≤k)∘g), closed under zig-zags.
    Maps each element to its class.
    """
    C = B.category
    elements = [(j, g) for j in range(B.size) for g in C.hom(c, B.objects[j])]
    position = {e: i for i, e in enumerate(elements)}
    parent = list(range(len(elements)))

    def find(i: int) -> int:
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for j, g in elements:
        for k in range(B.size):
            if k != j and B.le(j, k):
                a, b = find(position[(j, g)]), find(position[(k, C.table[B.connecting[(j, k)]][g])])
                if a != b:
                    parent[max(a, b)] = min(a, b)
    groups: Dict[int, List[Element]] = {}
    for e in elements:
        groups.setdefault(find(position[e]), []).append(e)
    result = {}
    for members in groups.values():
        frozen = frozenset(members)
        for e in members:
            result[e] = frozen
    return result


def ind_hom(A: IndObject, B: IndObject) -> List[IndMorphism]:
    """
    lim_i colim_j Hom(A_i, B_j): families of classes compatible with the
    connecting maps of A, in lexicographic order of class representatives.
    """
    C = A.category
    colimits = [colimit_classes(A.objects[i], B) for i in range(A.size)]
    options = [sorted(set(colim.values()), key=min) for colim in colimits]

    def restrict(i: int, i2: int, cls: FrozenSet[Element]) -> FrozenSet[Element]:
        """Precompose a class at i2 with A(i ≤ i2); checked independent of the representative"""
        conn = A.connecting[(i, i2)]
        images = {colimits[i][(j, C.table[g][conn])] for j, g in cls}
        if len(images) != 1:
            raise TheoremViolation("Restriction of a colimit class depends on the representative", {'from': i2, 'to': i})
        return next(iter(images))

    chosen: List[FrozenSet[Element]] = []
    result: List[IndMorphism] = []

    def extend(i: int) -> None:
        if i == A.size:
            result.append(IndMorphism(A, B, tuple(chosen)))
            return
        for cls in options[i]:
            ok = all(
                (not A.le(k, i) or restrict(k, i, cls) == chosen[k])
                and (not A.le(i, k) or restrict(i, k, chosen[k]) == cls)
                for k in range(i)
            )
            if ok:
                chosen.append(cls)
                extend(i + 1)
                chosen.pop()

    extend(0)
    return result


def identity_morphism(A: IndObject) -> IndMorphism:
    C = A.category
    members = []
    for i in range(A.size):
        colim = colimit_classes(A.objects[i], A)
        members.append(colim[(i, int(C.identity[A.objects[i]]))])
    return IndMorphism(A, A, tuple(members))


def embed_morphism(C: FinCategory, f: int) -> IndMorphism:
    m = C.morphisms[f]
    target = embed(C, m.cod)
    return IndMorphism(embed(C, m.dom), target, (colimit_classes(m.dom, target)[(0, f)],))


def ind_compose(g: IndMorphism, f: IndMorphism) -> IndMorphism:
    """
    g∘f computed from representatives; every choice of representatives is
    tried and must give the same class.
    """
    A, B, D = f.source, f.target, g.target
    if B.objects != g.source.objects or B.connecting != g.source.connecting:
        raise DiagramError("Ind-morphisms are not composable")
    C = A.category
    members = []
    for i in range(A.size):
        colim = colimit_classes(A.objects[i], D)
        images = {
            colim[(k, C.table[gj][fi])]
            for j, fi in f.members[i]
            for k, gj in g.members[j]
        }
        if len(images) != 1:
            raise TheoremViolation("Composite depends on the chosen representatives", {'index': i})
        members.append(next(iter(images)))
    return IndMorphism(A, D, tuple(members))


# ---------------------------------------------------------------------------
# Bounded searches
# ---------------------------------------------------------------------------

@lru_cache(maxsize=None)
def _directed_shapes(n: int) -> Tuple[FinPoset, ...]:
    return tuple(P for P in enumerate_posets(n, directed=True) if P.size == n)


def diagrams(C: FinCategory, n: int) -> Iterator[IndObject]:
    """All functorial diagrams of index size n, one per relabelling class"""
    for P in _directed_shapes(n):
        pairs = [(i, j) for i in range(n) for j in range(n) if i != j and P.leq[i, j]]
        automorphisms = [
            list(p) for p in itertools.permutations(range(n))
            if np.array_equal(P.leq[np.ix_(list(p), list(p))], P.leq)
        ]
        seen = set()
        for objects in itertools.product(range(C.n_objects), repeat=n):
            conn = {(i, i): int(C.identity[objects[i]]) for i in range(n)}
            for assignment in _connect(C, P, objects, pairs, conn, 0):
                key = min(
                    (
                        tuple(objects[p[k]] for k in range(n)),
                        tuple(assignment[(p[a], p[b])] for a, b in pairs),
                    )
                    for p in automorphisms
                )
                if key in seen:
                    continue
                seen.add(key)
                yield IndObject(C, P, list(objects), dict(assignment))


def _connect(C, P, objects, pairs, conn, k) -> Iterator[Dict[Tuple[int, int], int]]:
    if k == len(pairs):
        yield conn
        return
    i, j = pairs[k]
    for f in C.hom(objects[i], objects[j]):
        conn[(i, j)] = f
        ok = all(
            C.table[conn[(b, c)]][conn[(a, b)]] == conn[(a, c)]
            for a, b, c in itertools.permutations(range(len(objects)), 3)
            if P.leq[a, b] and P.leq[b, c]
            and (a, b) in conn and (b, c) in conn and (a, c) in conn
        )
        if ok:
            yield from _connect(C, P, objects, pairs, conn, k + 1)
        del conn[(i, j)]


class AmalgamationStatus(Enum):
    FOUND = 'found'
    NONE_WITHIN_BOUND = 'none_within_bound'


@dataclass
class AmalgamationResult:
    status: AmalgamationStatus
    bound: int
    target: Optional[IndObject] = None
    legs: Optional[Tuple[IndMorphism, IndMorphism]] = None
    searched: int = 0

    @property
    def found(self) -> bool:
        return self.status is AmalgamationStatus.FOUND

    def to_dict(self) -> Dict[str, object]:
        record: Dict[str, object] = {'status': self.status.value, 'bound': self.bound, 'searched': self.searched}
        if self.found:
            record['target'] = self.target.describe()
            record['legs'] = [leg.describe() for leg in self.legs]
        return record


def ind_amalgamate(f: IndMorphism, g: IndMorphism, bound: Optional[int] = None) -> AmalgamationResult:
    """
    Search diagrams D of index size ≤ bound with h: B → D, k: C → D and
    h∘f = k∘g; the first hit in (size, shape, objects, arrows) order wins.
    """
    bound = bound or config_value('max_diagram_size')
    if f.source.objects != g.source.objects or f.source.connecting != g.source.connecting:
        raise DiagramError("Span legs have different sources")
    C = f.source.category
    searched = 0
    for n in range(1, bound + 1):
        for D in diagrams(C, n):
            searched += 1
            left = [(h, ind_compose(h, f)) for h in ind_hom(f.target, D)]
            if not left:
                continue
            for k in ind_hom(g.target, D):
                kg = ind_compose(k, g)
                for h, hf in left:
                    if hf == kg:
                        logger.debug("amalgamated after %d diagrams", searched)
                        return AmalgamationResult(AmalgamationStatus.FOUND, bound, D, (h, k), searched)
    return AmalgamationResult(AmalgamationStatus.NONE_WITHIN_BOUND, bound, searched=searched)


@dataclass
class BaseFailure:
    """
    Amalgamations of a span in the base category; `absolute` means there are
    none, so no bounded ind-amalgamation of the embedded span exists either.
    """
    span: Tuple[str, str]
    amalgamations: List[Tuple[str, str]] = field(default_factory=list)

    @property
    def absolute(self) -> bool:
        return not self.amalgamations

    def to_dict(self) -> Dict[str, object]:
        return {'span': list(self.span), 'amalgamations': self.amalgamations, 'absolute': self.absolute}


def extract_base_failure(C: FinCategory, f: int, g: int) -> BaseFailure:
    pairs = span_amalgamations(C, f, g)
    return BaseFailure((C.name(f), C.name(g)), [(C.name(h), C.name(k)) for h, k in pairs])


def factor_through_base(f: int, g: int, result: AmalgamationResult) -> Tuple[int, int]:
    """
    Push the legs of an ind-amalgamation of an embedded span to the maximum
    of the target diagram; the result amalgamates the span in the base.
    """
    if not result.found:
        raise DiagramError("No amalgamation to factor")
    D = result.target
    C = D.category
    top = D.maximum()
    h_class, k_class = result.legs[0].members[0], result.legs[1].members[0]
    j, h = min(h_class)
    j2, k = min(k_class)
    h_top = C.table[D.connecting[(j, top)]][h]
    k_top = C.table[D.connecting[(j2, top)]][k]
    if C.table[h_top][f] != C.table[k_top][g]:
        raise TheoremViolation(
            "Ind-amalgamation does not factor through the base",
            {'span': (C.name(f), C.name(g)), 'legs': (C.name(h_top), C.name(k_top))},
        )
    return h_top, k_top


def ind_isomorphic(A: IndObject, B: IndObject) -> bool:
    id_a, id_b = identity_morphism(A), identity_morphism(B)
    backward = ind_hom(B, A)
    for u in ind_hom(A, B):
        for v in backward:
            if ind_compose(v, u) == id_a and ind_compose(u, v) == id_b:
                return True
    return False


def presentation_size(A: IndObject, bound: Optional[int] = None) -> Optional[int]:
    """Smallest index size of an isomorphic diagram within the bound, or None"""
    bound = bound or config_value('max_diagram_size')
    for n in range(1, bound + 1):
        for D in diagrams(A.category, n):
            if ind_isomorphic(A, D):
                return n
    return None
