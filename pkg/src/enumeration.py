"""
Exhaustive Enumeration of Small Structures
Finite categories and finite posets up to isomorphism, in a fixed order.

Categories are grown from hom-count matrices: identities are fixed, the
remaining composites are chosen by backtracking with associativity checked
as soon as a triple is fully determined. Isomorphic results are dropped by an
explicit isomorphism test against earlier results with the same invariant.
"""

import itertools
import logging
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from src.fincat import UNDEFINED, FinCategory, from_tables
from src.lattice import FinPoset

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# Posets
# ---------------------------------------------------------------------------

def _poset_key(leq: np.ndarray, perm: Sequence[int]) -> Tuple[bool, ...]:
    p = list(perm)
    return tuple(leq[np.ix_(p, p)].ravel().tolist())


def canonical_poset_key(leq: np.ndarray) -> Tuple[bool, ...]:
    n = leq.shape[0]
    return min(_poset_key(leq, perm) for perm in itertools.permutations(range(n)))


def is_directed(leq: np.ndarray) -> bool:
    """Every pair has an upper bound"""
    n = leq.shape[0]
    return all((leq[a, :] & leq[b, :]).any() for a in range(n) for b in range(n))


def enumerate_posets(max_elements: int, directed: bool = False) -> Iterator[FinPoset]:
    """
    All posets with 1..max_elements elements up to isomorphism, by size and
    then by canonical key. Elements are labelled "0", "1", ... in the order
    of the canonical key.
    """
    for n in range(1, max_elements + 1):
        pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        found: Dict[Tuple[bool, ...], np.ndarray] = {}
        for choice in itertools.product((False, True), repeat=len(pairs)):
            leq = np.eye(n, dtype=bool)
            for (i, j), on in zip(pairs, choice):
                leq[i, j] = on
            closed = (leq.astype(np.int64) @ leq.astype(np.int64)) > 0
            if not np.array_equal(closed, leq):
                continue
            if directed and not is_directed(leq):
                continue
            key = canonical_poset_key(leq)
            if key not in found:
                found[key] = np.array(key, dtype=bool).reshape(n, n)
        for key in sorted(found):
            yield FinPoset([str(i) for i in range(n)], found[key])


# ---------------------------------------------------------------------------
# Categories
# ---------------------------------------------------------------------------

def _hom_matrices(n: int, max_morphisms: int) -> Iterator[np.ndarray]:
    """Hom-count matrices (identities included) minimal within their object-permutation orbit"""
    cells = [(a, b) for a in range(n) for b in range(n)]
    budget = max_morphisms - n
    if budget < 0:
        return

    def fill(k: int, remaining: int, counts: List[int]) -> Iterator[List[int]]:
        if k == len(cells):
            yield list(counts)
            return
        for extra in range(remaining + 1):
            counts.append(extra)
            yield from fill(k + 1, remaining - extra, counts)
            counts.pop()

    for extras in fill(0, budget, []):
        H = np.array(extras, dtype=np.int64).reshape(n, n) + np.eye(n, dtype=np.int64)
        key = tuple(H.ravel().tolist())
        if all(
            key <= tuple(H[np.ix_(p, p)].ravel().tolist())
            for p in map(list, itertools.permutations(range(n)))
        ):
            yield H


def _tables(H: np.ndarray) -> Iterator[Tuple[List[Tuple[int, int]], List[int], np.ndarray]]:
    """Every associative composition table on the morphisms counted by H"""
    n = H.shape[0]
    ends: List[Tuple[int, int]] = []
    identity = []
    for a in range(n):
        identity.append(len(ends))
        ends.append((a, a))
    for a in range(n):
        for b in range(n):
            ends.extend([(a, b)] * int(H[a, b] - (1 if a == b else 0)))
    m = len(ends)
    hom: Dict[Tuple[int, int], List[int]] = {}
    for f, (a, b) in enumerate(ends):
        hom.setdefault((a, b), []).append(f)

    table = np.full((m, m), UNDEFINED, dtype=np.int64)
    for f, (a, b) in enumerate(ends):
        table[identity[b], f] = f
        table[f, identity[a]] = f
    is_id = set(identity)
    slots = [
        (g, f) for g in range(m) for f in range(m)
        if g not in is_id and f not in is_id and ends[f][1] == ends[g][0]
    ]
    triples = [
        (h, g, f) for h in range(m) for g in range(m) for f in range(m)
        if ends[f][1] == ends[g][0] and ends[g][1] == ends[h][0]
        and not {h, g, f} & is_id
    ]
    rows = table.tolist()

    def consistent() -> bool:
        for h, g, f in triples:
            hg, gf = rows[h][g], rows[g][f]
            if hg == UNDEFINED or gf == UNDEFINED:
                continue
            left, right = rows[hg][f], rows[h][gf]
            if left != UNDEFINED and right != UNDEFINED and left != right:
                return False
        return True

    def assign(k: int) -> Iterator[np.ndarray]:
        if k == len(slots):
            yield np.array(rows, dtype=np.int64)
            return
        g, f = slots[k]
        for v in hom[(ends[f][0], ends[g][1])]:
            rows[g][f] = v
            if consistent():
                yield from assign(k + 1)
        rows[g][f] = UNDEFINED

    for composition in assign(0):
        yield ends, identity, composition


def _invariant(ends: List[Tuple[int, int]], identity: List[int], table: np.ndarray) -> Tuple:
    n = len(identity)
    idempotents = sorted(
        (ends[f][0], sum(1 for g in range(len(ends)) if table[f, g] == f))
        for f in range(len(ends)) if ends[f][0] == ends[f][1] and table[f, f] == f
    )
    degrees = sorted(
        (sum(1 for e in ends if e[1] == c), sum(1 for e in ends if e[0] == c))
        for c in range(n)
    )
    return len(ends), tuple(degrees), len(idempotents)


def _isomorphic(
    A: Tuple[List[Tuple[int, int]], List[int], np.ndarray],
    B: Tuple[List[Tuple[int, int]], List[int], np.ndarray],
) -> bool:
    ends_a, id_a, tab_a = A
    ends_b, id_b, tab_b = B
    n, m = len(id_a), len(ends_a)
    for sigma in itertools.permutations(range(n)):
        if sorted((sigma[a], sigma[b]) for a, b in ends_a) != sorted(ends_b):
            continue
        mapping: List[Optional[int]] = [None] * m
        for c in range(n):
            mapping[id_a[c]] = id_b[sigma[c]]
        order = [f for f in range(m) if mapping[f] is None]
        used = set(mapping[f] for f in range(m) if mapping[f] is not None)

        def extend(k: int) -> bool:
            if k == len(order):
                return all(
                    tab_b[mapping[g], mapping[f]] == mapping[tab_a[g, f]]
                    for g in range(m) for f in range(m) if tab_a[g, f] != UNDEFINED
                )
            f = order[k]
            a, b = ends_a[f]
            for cand in range(m):
                if cand in used or ends_b[cand] != (sigma[a], sigma[b]):
                    continue
                mapping[f] = cand
                used.add(cand)
                ok = all(
                    tab_b[mapping[x], mapping[y]] == mapping[tab_a[x, y]]
                    for x in order[:k + 1] for y in order[:k + 1]
                    if tab_a[x, y] != UNDEFINED and mapping[tab_a[x, y]] is not None
                )
                if ok and extend(k + 1):
                    return True
                used.discard(cand)
                mapping[f] = None
            return False

        if extend(0):
            return True
    return False


def enumerate_categories(max_objects: int, max_morphisms: int) -> Iterator[FinCategory]:
    """
    Every finite category with at most max_objects objects and at most
    max_morphisms morphisms (identities counted), up to isomorphism.

    Order: number of objects, then number of morphisms, then hom-count
    matrix, then composition table in backtracking order.
    """
    emitted = 0
    for n in range(1, max_objects + 1):
        for total in range(n, max_morphisms + 1):
            seen: Dict[Tuple, List[Tuple]] = {}
            for H in _hom_matrices(n, total):
                if int(H.sum()) != total:
                    continue
                for structure in _tables(H):
                    key = _invariant(*structure)
                    bucket = seen.setdefault(key, [])
                    if any(_isomorphic(structure, other) for other in bucket):
                        continue
                    bucket.append(structure)
                    emitted += 1
                    yield _build(*structure)
    logger.debug("enumerated %d categories (objects ≤ %d, morphisms ≤ %d)", emitted, max_objects, max_morphisms)


def _build(ends: List[Tuple[int, int]], identity: List[int], table: np.ndarray) -> FinCategory:
    objects = [f"o{c}" for c in range(len(identity))]
    names = []
    counter = 0
    for f, (a, b) in enumerate(ends):
        if f in identity:
            names.append(f"id_{objects[a]}")
        else:
            names.append(f"f{counter}")
            counter += 1
    records = [(names[f], a, b) for f, (a, b) in enumerate(ends)]
    return from_tables(objects, records, identity, table)
