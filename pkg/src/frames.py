"""
Finite Frames and Spaces
A finite frame as a site, its Booleanization, the direct Gleason locale
Idl⁺(L¬¬), and the comparison with the site-level Gleason cover.

On finite frames every ideal is principal and every element is compact; the
functions here compute the general definitions and check those collapses.
"""

import logging
from dataclasses import dataclass
from typing import Any, Dict, Hashable, List, Sequence

import numpy as np

from src.errors import SpaceError, TheoremViolation
from src.fincat import FinCategory, UNDEFINED, from_tables
from src.gleason import gleason_cover
from src.lattice import (
    FinLattice,
    bits,
    compact_elements,
    complemented_elements,
    ideal_masks,
    ideals,
    induced_sublattice,
    is_boolean,
    is_regular_frame,
    is_stone,
    lattice_from_order,
    lattices_isomorphic,
    regular_elements,
)
from src.sites import GrothTopology, saturate

logger = logging.getLogger(__name__)


@dataclass
class FrameSite:
    frame: FinLattice
    category: FinCategory
    topology: GrothTopology

    def arrow(self, a: int, b: int) -> int:
        return self.category.morphism_id(f"{self.frame.describe(a)}≤{self.frame.describe(b)}")


def _poset_category(L: FinLattice) -> FinCategory:
    names = [L.describe(x) for x in range(L.size)]
    pairs = [(a, b) for b in range(L.size) for a in range(L.size) if L.le(a, b)]
    index = {p: i for i, p in enumerate(pairs)}
    table = np.full((len(pairs), len(pairs)), UNDEFINED, dtype=np.int64)
    for g, (b, c) in enumerate(pairs):
        for f, (a, b2) in enumerate(pairs):
            if b2 == b:
                table[g, f] = index[(a, c)]
    records = [(f"{names[a]}≤{names[b]}", a, b) for a, b in pairs]
    identity = [index[(x, x)] for x in range(L.size)]
    return from_tables(names, records, identity, table)


def frame_to_site(L: FinLattice) -> FrameSite:
    """
    Poset category of L with the joins topology: a family covers x iff its
    join is x. Built from binary join covers and the empty cover of 0, then
    checked against the join-irreducible description of least covers.
    """
    C = _poset_category(L)
    index = {(m.dom, m.cod): m.id for m in C.morphisms}
    basis: Dict[int, List[int]] = {}
    for x in range(L.size):
        families = [0] if x == L.bottom else []
        below = np.flatnonzero(L.leq[:, x]).tolist()
        for i, a in enumerate(below):
            for b in below[i:]:
                if a != x and b != x and L.join(a, b) == x:
                    families.append(C.principal_masks[index[(a, x)]] | C.principal_masks[index[(b, x)]])
        basis[x] = families
    J = saturate(C, basis, kind='joins')

    irreducible = [
        j for j in range(L.size)
        if j != L.bottom and not any(
            L.join(a, b) == j for a in range(L.size) for b in range(L.size) if a != j and b != j
        )
    ]
    for x in range(L.size):
        expected = 0
        for y in range(L.size):
            if L.le(y, x) and any(L.le(y, j) and L.le(j, x) for j in irreducible):
                expected |= 1 << index[(y, x)]
        if J.minimal[x] != expected:
            raise TheoremViolation("Joins topology differs from its join-irreducible description", {'element': L.describe(x)})
    return FrameSite(L, C, J)


def booleanization_frame(L: FinLattice) -> FinLattice:
    return regular_elements(L)


def _closure_filter(L: FinLattice, elements: Sequence[int], masks: Sequence[int], reduce) -> List[bool]:
    """
    For each ideal (bitmask over L) the closure property: whenever the l with
    reduce(x∧l) in the ideal join to 1, x is in the ideal.
    """
    result = []
    for I in masks:
        ok = True
        for x in elements:
            good = [l for l in range(L.size) if I >> reduce(L.meet(x, l)) & 1]
            if L.join_all(good) == L.top and not I >> x & 1:
                ok = False
                break
        result.append(ok)
    return result


def gleason_locale_direct(L: FinLattice) -> FinLattice:
    """
    Idl⁺(L¬¬): ideals I of the regular elements such that x ∈ I whenever
    the l with ¬¬(x∧l) ∈ I join to 1. Every ideal passes on a finite frame
    and the result is isomorphic to L¬¬ (both checked).
    """
    B = regular_elements(L)
    I = ideals(B)
    neg = L.negation
    # ideals of B as masks over L
    masks = []
    for k in range(I.size):
        mask = 0
        for b in bits(B.down_masks[int(I.origin[k])]):
            mask |= 1 << int(B.origin[b])
        masks.append(mask)
    passing = _closure_filter(L, [int(o) for o in B.origin], masks, lambda z: int(neg[neg[z]]))
    if not all(passing):
        raise TheoremViolation("Ideal of a finite Boolean algebra fails the closure property", {'size': L.size})
    result = induced_sublattice(I, [k for k, ok in enumerate(passing) if ok])
    if lattices_isomorphic(result, B) is None:
        raise TheoremViolation("Idl⁺(L¬¬) is not isomorphic to L¬¬", {'size': L.size})
    return result


def idl_plus_plus(L: FinLattice) -> FinLattice:
    """Ideals I of L with x ∈ I whenever the l with x∧l ∈ I join to 1"""
    I = ideals(L)
    masks = [L.down_masks[int(g)] for g in I.origin]
    passing = _closure_filter(L, range(L.size), masks, lambda z: z)
    result = induced_sublattice(I, [k for k, ok in enumerate(passing) if ok])
    if lattices_isomorphic(result, L) is None:
        raise TheoremViolation("Idl⁺⁺(L) is not isomorphic to L", {'size': L.size})
    return result


def cross_check_gleason(L: FinLattice) -> bool:
    """Site-level Gleason cover at the top object against Idl⁺(L¬¬)"""
    site = frame_to_site(L)
    G = gleason_cover(site.category, site.topology)
    direct = gleason_locale_direct(L)
    agree = lattices_isomorphic(G.cover_locale.fibres[L.top], direct) is not None
    logger.debug("cross-check on %d-element frame: %s", L.size, agree)
    return agree


def space_predicates(L: FinLattice) -> Dict[str, Any]:
    """
    Extremally disconnected (Stone), almost discrete (Boolean), regular, and
    whether Idl(L) = L. On a finite regular frame the last two agree and
    every element is complemented (checked).
    """
    record = {
        'extremally_disconnected': is_stone(L).holds,
        'almost_discrete': is_boolean(L),
        'regular': is_regular_frame(L).holds,
        'idl_omega_fixed': len(ideal_masks(L)) == L.size,
    }
    if len(compact_elements(L)) != L.size:
        raise TheoremViolation("Finite frame with a non-compact element", {'size': L.size})
    if record['regular']:
        if len(complemented_elements(L)) != L.size:
            raise TheoremViolation("Finite regular frame with an uncomplemented element", {'size': L.size})
        if record['idl_omega_fixed'] != record['almost_discrete']:
            raise TheoremViolation("Idl(L) = L and Booleanness disagree on a regular frame", record)
    return record


def space_to_frame(space: Dict[str, Any]) -> FinLattice:
    """
    Frame of opens of a finite space {"points": [...], "opens": [[...], ...]}.

    Raises:
        SpaceError unless the opens contain ∅ and the whole space and are closed
        under union and intersection
    """
    points: List[Hashable] = list(space.get('points') or [])
    if len(set(points)) != len(points):
        raise SpaceError("Duplicate points", {'points': points})
    universe = frozenset(points)
    opens = []
    for raw in space.get('opens') or []:
        U = frozenset(raw)
        if not U <= universe:
            raise SpaceError("Open set contains unknown points", {'open': sorted(map(str, U - universe))})
        if U not in opens:
            opens.append(U)
    if frozenset() not in opens or universe not in opens:
        raise SpaceError("Opens must contain the empty set and the whole space")
    known = set(opens)
    for U in opens:
        for V in opens:
            if U | V not in known or U & V not in known:
                raise SpaceError(
                    "Opens are not closed under union and intersection",
                    {'u': sorted(map(str, U)), 'v': sorted(map(str, V))},
                )
    n = len(opens)
    leq = np.array([[opens[a] <= opens[b] for b in range(n)] for a in range(n)], dtype=bool)
    return lattice_from_order(opens, leq)
