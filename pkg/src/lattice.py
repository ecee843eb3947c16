"""
Finite Posets and Distributive Lattices
Heyting structure is derived from the meet/join tables on demand.

Design Principles:
- One source of truth: order, meet and join tables; implication and
  pseudo-complement are computed from them
- Counterexamples are the first in element id order
- Sizes are capped (WORKBENCH_MAX_LATTICE_SIZE) so downsets fit a machine word
"""

import itertools
import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Any, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from src.config import config_value
from src.errors import (
    CriteriaDisagree,
    InputError,
    NotALattice,
    NotDistributive,
    PosetError,
    SizeExceeded,
    TheoremViolation,
)
from src.verdict import Verdict, failed, passed

logger = logging.getLogger(__name__)


def format_label(label: Any) -> str:
    """Readable form of an element label (frozensets print as {a,b})"""
    if isinstance(label, frozenset):
        return "{" + ",".join(sorted(format_label(x) for x in label)) + "}"
    return str(label)


def bits(mask: int) -> List[int]:
    """Indices of the set bits of mask, ascending"""
    result = []
    i = 0
    while mask:
        if mask & 1:
            result.append(i)
        mask >>= 1
        i += 1
    return result


@dataclass
class FinPoset:
    """Finite partial order; leq[a, b] means a ≤ b"""
    labels: List[Hashable]
    leq: np.ndarray

    @property
    def size(self) -> int:
        return len(self.labels)

    def validate(self) -> 'FinPoset':
        leq = self.leq
        n = self.size
        if leq.shape != (n, n):
            raise PosetError("Order matrix does not match the element count", {'size': n})
        if not leq.diagonal().all():
            a = int(np.flatnonzero(~leq.diagonal())[0])
            raise PosetError("Order is not reflexive", {'element': format_label(self.labels[a])})
        sym = np.argwhere(leq & leq.T & ~np.eye(n, dtype=bool))
        if len(sym):
            a, b = (int(v) for v in sym[0])
            raise PosetError(
                "Order is not antisymmetric",
                {'a': format_label(self.labels[a]), 'b': format_label(self.labels[b])},
            )
        composed = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
        bad = np.argwhere(composed & ~leq)
        if len(bad):
            a, c = (int(v) for v in bad[0])
            raise PosetError(
                "Order is not transitive",
                {'a': format_label(self.labels[a]), 'c': format_label(self.labels[c])},
            )
        return self


def transitive_closure(leq: np.ndarray) -> np.ndarray:
    closed = leq.copy()
    np.fill_diagonal(closed, True)
    for k in range(closed.shape[0]):
        closed |= closed[:, k, None] & closed[None, k, :]
    return closed


def poset_from_pairs(labels: Sequence[Hashable], pairs: Iterable[Tuple[Hashable, Hashable]]) -> FinPoset:
    """Poset generated by the given (a, b) pairs meaning a ≤ b"""
    index = {label: i for i, label in enumerate(labels)}
    if len(index) != len(labels):
        raise PosetError("Duplicate element labels", {'labels': [format_label(x) for x in labels]})
    n = len(labels)
    leq = np.zeros((n, n), dtype=bool)
    for a, b in pairs:
        if a not in index or b not in index:
            raise PosetError("Order pair names an unknown element", {'a': str(a), 'b': str(b)})
        leq[index[a], index[b]] = True
    return FinPoset(list(labels), transitive_closure(leq)).validate()


class FinLattice:
    """
    Finite distributive lattice.

    Elements are the indices 0..size-1; `labels` carries their names.
    `origin` maps elements back into a parent lattice for derived lattices
    (down-algebras, regular elements, ideals).
    """

    def __init__(
        self,
        labels: Sequence[Hashable],
        leq: np.ndarray,
        meet_table: np.ndarray,
        join_table: np.ndarray,
        bottom: int,
        top: int,
        origin: Optional[np.ndarray] = None,
    ):
        self.labels = list(labels)
        self.leq = leq
        self.meet_table = meet_table
        self.join_table = join_table
        self.bottom = bottom
        self.top = top
        self.origin = origin
        self._index = {label: i for i, label in enumerate(self.labels)}

    @property
    def size(self) -> int:
        return len(self.labels)

    @property
    def poset(self) -> FinPoset:
        return FinPoset(self.labels, self.leq)

    def index(self, label: Hashable) -> int:
        if label not in self._index:
            raise InputError(f"Unknown lattice element {format_label(label)}", {'element': format_label(label)})
        return self._index[label]

    def describe(self, x: int) -> str:
        return format_label(self.labels[x])

    def le(self, a: int, b: int) -> bool:
        return bool(self.leq[a, b])

    def meet(self, a: int, b: int) -> int:
        return int(self.meet_table[a, b])

    def join(self, a: int, b: int) -> int:
        return int(self.join_table[a, b])

    def join_all(self, elements: Iterable[int]) -> int:
        result = self.bottom
        for x in elements:
            result = int(self.join_table[result, x])
        return result

    def meet_all(self, elements: Iterable[int]) -> int:
        result = self.top
        for x in elements:
            result = int(self.meet_table[result, x])
        return result

    def down_mask(self, x: int) -> int:
        return self.down_masks[x]

    @cached_property
    def down_masks(self) -> List[int]:
        masks = []
        for x in range(self.size):
            m = 0
            for z in np.flatnonzero(self.leq[:, x]).tolist():
                m |= 1 << z
            masks.append(m)
        return masks

    def greatest(self, mask: np.ndarray) -> Optional[int]:
        """The element of `mask` lying above every element of `mask`, if any"""
        above_all = ~(mask[:, None] & ~self.leq).any(axis=0)
        hits = np.flatnonzero(mask & above_all)
        return int(hits[0]) if len(hits) else None

    def least(self, mask: np.ndarray) -> Optional[int]:
        """The element of `mask` lying below every element of `mask`, if any"""
        below_all = ~(mask[None, :] & ~self.leq).any(axis=1)
        hits = np.flatnonzero(mask & below_all)
        return int(hits[0]) if len(hits) else None

    @cached_property
    def implication_table(self) -> np.ndarray:
        n = self.size
        table = np.empty((n, n), dtype=np.int64)
        for a in range(n):
            # cand[z, b]: z∧a ≤ b
            cand = self.leq[self.meet_table[:, a], :]
            for b in range(n):
                z = self.greatest(cand[:, b])
                if z is None:
                    raise TheoremViolation(
                        "Distributive lattice without a Heyting implication",
                        {'a': self.describe(a), 'b': self.describe(b)},
                    )
                table[a, b] = z
        return table

    def implies(self, a: int, b: int) -> int:
        return int(self.implication_table[a, b])

    @cached_property
    def negation(self) -> np.ndarray:
        return self.implication_table[:, self.bottom].copy()

    def neg(self, a: int) -> int:
        return int(self.negation[a])

    def atoms(self) -> List[int]:
        return [
            x for x in range(self.size)
            if x != self.bottom
            and all(z in (self.bottom, x) for z in np.flatnonzero(self.leq[:, x]).tolist())
        ]

    def __repr__(self) -> str:
        return f"FinLattice({self.size} elements)"


# ---------------------------------------------------------------------------
# Construction and validation
# ---------------------------------------------------------------------------

def validate_lattice(poset: FinPoset, limit: Optional[int] = None) -> FinLattice:
    """
    Compute meets and joins of a finite poset and check distributivity.

    Raises:
        SizeExceeded, NotALattice, NotDistributive
    """
    n = poset.size
    limit = limit or config_value('max_lattice_size')
    if n > limit:
        raise SizeExceeded(
            f"Lattice has {n} elements, limit is {limit} (raise WORKBENCH_MAX_LATTICE_SIZE)",
            {'size': n, 'limit': limit},
        )
    if n == 0:
        raise NotALattice("Empty poset has no top or bottom")
    poset.validate()
    leq = poset.leq
    meet = np.empty((n, n), dtype=np.int64)
    join = np.empty((n, n), dtype=np.int64)
    for a in range(n):
        for b in range(a, n):
            lower = leq[:, a] & leq[:, b]
            below_all = ~(lower[:, None] & ~leq).any(axis=0)
            glb = np.flatnonzero(lower & below_all)
            if not len(glb):
                raise NotALattice(
                    "Missing meet",
                    {'a': format_label(poset.labels[a]), 'b': format_label(poset.labels[b]), 'operation': 'meet'},
                )
            upper = leq[a, :] & leq[b, :]
            above_all = ~(upper[None, :] & ~leq).any(axis=1)
            lub = np.flatnonzero(upper & above_all)
            if not len(lub):
                raise NotALattice(
                    "Missing join",
                    {'a': format_label(poset.labels[a]), 'b': format_label(poset.labels[b]), 'operation': 'join'},
                )
            meet[a, b] = meet[b, a] = glb[0]
            join[a, b] = join[b, a] = lub[0]

    bottom = int(np.flatnonzero(leq.all(axis=1))[0])
    top = int(np.flatnonzero(leq.all(axis=0))[0])

    idx = np.arange(n)
    lhs = meet[idx[:, None, None], join[None, :, :]]     # a∧(b∨c)
    rhs = join[meet[:, :, None], meet[:, None, :]]        # (a∧b)∨(a∧c)
    bad = np.argwhere(lhs != rhs)
    if len(bad):
        a, b, c = (int(v) for v in bad[0])
        raise NotDistributive(
            "Distributive law fails",
            {
                'x': format_label(poset.labels[a]),
                'y': format_label(poset.labels[b]),
                'z': format_label(poset.labels[c]),
            },
        )
    return FinLattice(poset.labels, leq, meet, join, bottom, top)


def lattice_from_pairs(labels: Sequence[Hashable], pairs: Iterable[Tuple[Hashable, Hashable]]) -> FinLattice:
    return validate_lattice(poset_from_pairs(labels, pairs))


def lattice_from_order(labels: Sequence[Hashable], leq: np.ndarray, limit: Optional[int] = None) -> FinLattice:
    return validate_lattice(FinPoset(list(labels), np.asarray(leq, dtype=bool)), limit)


def chain_lattice(n: int, labels: Optional[Sequence[Hashable]] = None) -> FinLattice:
    """The n-element chain 0 < 1 < ... < n-1"""
    labels = list(labels) if labels is not None else [str(i) for i in range(n)]
    leq = np.tri(n, dtype=bool).T
    return lattice_from_order(labels, leq)


def downsets(poset: FinPoset) -> List[int]:
    """All downsets of a poset as bitmasks, in (size, mask) order"""
    n = poset.size
    principal = []
    for x in range(n):
        m = 0
        for z in np.flatnonzero(poset.leq[:, x]).tolist():
            m |= 1 << z
        principal.append(m)
    seen = {0}
    frontier = [0]
    limit = config_value('max_sieves')
    while frontier:
        nxt = []
        for d in frontier:
            for p in principal:
                u = d | p
                if u not in seen:
                    seen.add(u)
                    nxt.append(u)
                    if len(seen) > limit:
                        raise SizeExceeded(
                            f"More than {limit} downsets (raise WORKBENCH_MAX_SIEVES)",
                            {'limit': limit},
                        )
        frontier = nxt
    return sorted(seen, key=lambda m: (bin(m).count('1'), m))


def downset_lattice(poset: FinPoset) -> FinLattice:
    """Downsets of a poset ordered by inclusion; labels are frozensets of poset labels"""
    masks = downsets(poset)
    labels = [frozenset(poset.labels[i] for i in bits(m)) for m in masks]
    n = len(masks)
    leq = np.array([[masks[a] & ~masks[b] == 0 for b in range(n)] for a in range(n)], dtype=bool)
    return lattice_from_order(labels, leq)


def powerset_lattice(atoms: Sequence[Hashable]) -> FinLattice:
    """Boolean algebra of subsets of `atoms`"""
    discrete = FinPoset(list(atoms), np.eye(len(atoms), dtype=bool))
    return downset_lattice(discrete)


def lattices_isomorphic(L1: FinLattice, L2: FinLattice) -> Optional[List[int]]:
    """An order isomorphism L1 → L2 as an index list, or None"""
    if L1.size != L2.size:
        return None
    n = L1.size

    def signature(L: FinLattice, x: int) -> Tuple[int, int]:
        return int(L.leq[:, x].sum()), int(L.leq[x, :].sum())

    sig1 = [signature(L1, x) for x in range(n)]
    sig2 = [signature(L2, y) for y in range(n)]
    if sorted(sig1) != sorted(sig2):
        return None
    order = sorted(range(n), key=lambda x: sig1[x])
    mapping = [-1] * n
    used = [False] * n

    def extend(k: int) -> bool:
        if k == n:
            return True
        x = order[k]
        for y in range(n):
            if used[y] or sig2[y] != sig1[x]:
                continue
            if all(
                L1.leq[x, order[i]] == L2.leq[y, mapping[order[i]]]
                and L1.leq[order[i], x] == L2.leq[mapping[order[i]], y]
                for i in range(k)
            ):
                mapping[x] = y
                used[y] = True
                if extend(k + 1):
                    return True
                used[y] = False
        mapping[x] = -1
        return False

    return mapping if extend(0) else None


# ---------------------------------------------------------------------------
# Heyting operations and predicates
# ---------------------------------------------------------------------------

def heyting_implication(L: FinLattice, a: int, b: int) -> int:
    """max{z : z∧a ≤ b}, with the adjunction checked for every c"""
    r = L.implies(a, b)
    adjoint = L.leq[:, r] == L.leq[L.meet_table[:, a], b]
    if not adjoint.all():
        c = int(np.flatnonzero(~adjoint)[0])
        raise TheoremViolation(
            "Heyting adjunction fails",
            {'a': L.describe(a), 'b': L.describe(b), 'c': L.describe(c)},
        )
    return r


def pseudo_complement(L: FinLattice, a: int) -> int:
    return heyting_implication(L, a, L.bottom)


def check_heyting_identities(L: FinLattice) -> Verdict:
    """¬(x∨y) = ¬x∧¬y and ¬x∨¬y ≤ ¬(x∧y) for all x, y"""
    neg, meet, join = L.negation, L.meet_table, L.join_table
    de_morgan_join = neg[join] == meet[neg[:, None], neg[None, :]]
    bad = np.argwhere(~de_morgan_join)
    if len(bad):
        x, y = (int(v) for v in bad[0])
        return failed("¬(x∨y) != ¬x∧¬y", x=L.describe(x), y=L.describe(y))
    weak = L.leq[join[neg[:, None], neg[None, :]], neg[meet]]
    bad = np.argwhere(~weak)
    if len(bad):
        x, y = (int(v) for v in bad[0])
        return failed("¬x∨¬y is not below ¬(x∧y)", x=L.describe(x), y=L.describe(y))
    return passed("Heyting identities hold")


def is_stone(L: FinLattice) -> Verdict:
    """
    Evaluate both Stone criteria and return their shared verdict.

    Criterion 1: ¬(x∧y) = ¬x∨¬y for all x, y
    Criterion 2: ¬x∨¬¬x = 1 for all x

    Raises:
        CriteriaDisagree if the criteria give different answers
    """
    neg, meet, join = L.negation, L.meet_table, L.join_table
    first = neg[meet] == join[neg[:, None], neg[None, :]]
    second = join[neg, neg[neg]] == L.top
    holds_first, holds_second = bool(first.all()), bool(second.all())
    if holds_first != holds_second:
        raise CriteriaDisagree(
            "Stone criteria disagree",
            {'de_morgan_law': holds_first, 'weak_excluded_middle': holds_second},
        )
    if holds_second:
        return passed("Stone algebra")
    x = int(np.flatnonzero(~second)[0])
    return failed(
        f"¬x∨¬¬x != 1 at x = {L.describe(x)}",
        x=L.describe(x), y=L.describe(int(neg[x])),
    )


def is_boolean(L: FinLattice) -> bool:
    return bool((L.join_table[np.arange(L.size), L.negation] == L.top).all())


def lee_property(L: FinLattice, r: int) -> Verdict:
    """
    Lee property: for pairwise disjoint x_0..x_r the pseudo-complements join to 1.

    Tuples containing 0 or a repeated element are satisfied trivially, so only
    sets of r+1 distinct, pairwise disjoint nonzero elements are searched.
    """
    if r < 1:
        raise InputError("Lee property order must be a positive integer", {'r': r})
    nonzero = [x for x in range(L.size) if x != L.bottom]
    chosen: List[int] = []

    def search(start: int) -> Optional[List[int]]:
        if len(chosen) == r + 1:
            if L.join_all(L.neg(x) for x in chosen) != L.top:
                return list(chosen)
            return None
        for i in range(start, len(nonzero)):
            x = nonzero[i]
            if all(L.meet(x, y) == L.bottom for y in chosen):
                chosen.append(x)
                found = search(i + 1)
                chosen.pop()
                if found:
                    return found
        return None

    counterexample = search(0)
    if counterexample is None:
        return passed(f"Lee property of order {r} holds", r=r)
    return failed(
        f"pairwise disjoint elements whose pseudo-complements do not cover",
        r=r, elements=[L.describe(x) for x in counterexample],
    )


lie_property = lee_property


# ---------------------------------------------------------------------------
# Derived lattices
# ---------------------------------------------------------------------------

def induced_sublattice(L: FinLattice, elements: List[int]) -> FinLattice:
    sub = lattice_from_order([L.labels[e] for e in elements], L.leq[np.ix_(elements, elements)])
    sub.origin = np.array(elements, dtype=np.int64)
    return sub


def down_algebra(L: FinLattice, x: int) -> FinLattice:
    """
    The lattice {z : z ≤ x}.

    Its implication is (a→b)∧x and its double pseudo-complement ¬¬a∧x.
    """
    elements = np.flatnonzero(L.leq[:, x]).tolist()
    sub = induced_sublattice(L, elements)
    origin = sub.origin
    for i in range(sub.size):
        for j in range(sub.size):
            expected = L.meet(L.implies(int(origin[i]), int(origin[j])), x)
            if int(origin[sub.implies(i, j)]) != expected:
                raise TheoremViolation(
                    "Relative implication differs from (a→b)∧x",
                    {'a': sub.describe(i), 'b': sub.describe(j), 'x': L.describe(x)},
                )
        a = int(origin[i])
        if int(origin[sub.neg(sub.neg(i))]) != L.meet(L.neg(L.neg(a)), x):
            raise TheoremViolation(
                "Relative double negation differs from ¬¬a∧x",
                {'a': sub.describe(i), 'x': L.describe(x)},
            )
    return sub


def regular_elements(L: FinLattice) -> FinLattice:
    """Boolean algebra of ¬¬-fixed elements with join ¬¬(x∨y)"""
    neg = L.negation
    elements = [x for x in range(L.size) if int(neg[neg[x]]) == x]
    sub = induced_sublattice(L, elements)
    origin = sub.origin
    for i in range(sub.size):
        for j in range(sub.size):
            a, b = int(origin[i]), int(origin[j])
            if int(origin[sub.meet(i, j)]) != L.meet(a, b) \
                    or int(origin[sub.join(i, j)]) != int(neg[neg[L.join(a, b)]]):
                raise TheoremViolation(
                    "Regular elements are not a sublattice with join ¬¬(x∨y)",
                    {'a': sub.describe(i), 'b': sub.describe(j)},
                )
    if not is_boolean(sub):
        raise TheoremViolation("Regular elements are not Boolean", {'size': sub.size})
    return sub


def _ideal_closure(L: FinLattice, mask: int) -> int:
    """Smallest downset closed under binary joins containing mask (and 0)"""
    mask |= 1 << L.bottom
    while True:
        down = 0
        for x in bits(mask):
            down |= L.down_masks[x]
        members = bits(down)
        closed = down
        for a, b in itertools.combinations(members, 2):
            closed |= 1 << L.join(a, b)
        if closed == mask:
            return mask
        mask = closed


def ideal_masks(L: FinLattice) -> List[int]:
    """Every ideal of L as a bitmask, found by adding generators one at a time"""
    start = _ideal_closure(L, 0)
    seen = {start}
    frontier = [start]
    while frontier:
        nxt = []
        for ideal in frontier:
            for x in range(L.size):
                if ideal >> x & 1:
                    continue
                grown = _ideal_closure(L, ideal | 1 << x)
                if grown not in seen:
                    seen.add(grown)
                    nxt.append(grown)
        frontier = nxt
    return list(seen)


def ideals(L: FinLattice) -> FinLattice:
    """
    Lattice of ideals ordered by inclusion.

    Every ideal of a finite lattice is principal; elements are sorted by their
    generator so `origin` is the principal-ideal isomorphism.
    """
    masks = ideal_masks(L)
    generators = {}
    for m in masks:
        g = L.join_all(bits(m))
        if L.down_masks[g] != m:
            raise TheoremViolation("Non-principal ideal in a finite lattice", {'generator': L.describe(g)})
        generators[g] = m
    order = sorted(generators)
    masks = [generators[g] for g in order]
    labels = [frozenset(L.labels[i] for i in bits(m)) for m in masks]
    n = len(masks)
    leq = np.array([[masks[a] & ~masks[b] == 0 for b in range(n)] for a in range(n)], dtype=bool)
    result = lattice_from_order(labels, leq)
    result.origin = np.array(order, dtype=np.int64)
    if lattices_isomorphic(L, result) is None:
        raise TheoremViolation("Ideal lattice is not isomorphic to the lattice", {'size': L.size})
    return result


# ---------------------------------------------------------------------------
# Frame predicates
# ---------------------------------------------------------------------------

def is_regular_frame(L: FinLattice) -> Verdict:
    """
    Every l is the join of elements m admitting t with t∧m = 0 and t∨l = 1.

    On success the witness maps each element to its (m, t) decomposition.
    """
    decompositions: Dict[str, List[Tuple[str, str]]] = {}
    for l in range(L.size):
        pieces = []
        for m in np.flatnonzero(L.leq[:, l]).tolist():
            for t in range(L.size):
                if L.meet(t, m) == L.bottom and L.join(t, l) == L.top:
                    pieces.append((m, t))
                    break
        if L.join_all(m for m, _ in pieces) != l:
            return failed(
                f"{L.describe(l)} is not a join of well-inside elements",
                element=L.describe(l),
                pieces=[(L.describe(m), L.describe(t)) for m, t in pieces],
            )
        decompositions[L.describe(l)] = [(L.describe(m), L.describe(t)) for m, t in pieces]
    return passed("regular frame", decompositions=decompositions)


def complemented_elements(L: FinLattice) -> List[int]:
    return [
        x for x in range(L.size)
        if any(L.meet(x, y) == L.bottom and L.join(x, y) == L.top for y in range(L.size))
    ]


def compact_elements(L: FinLattice) -> List[int]:
    """
    x is compact when every ideal whose join lies above x contains x
    (the directed-join form of "every cover has a finite subcover").
    """
    masks = ideal_masks(L)
    compact = [
        x for x in range(L.size)
        if all(m >> x & 1 for m in masks if L.le(x, L.join_all(bits(m))))
    ]
    if len(compact) != L.size:
        raise TheoremViolation("Finite lattice with a non-compact element", {'size': L.size})
    return compact
