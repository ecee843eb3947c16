"""
Internal Lattices and Locales over a Finite Site
Grothendieck construction, the Giraud / coherent / existential topologies on
it, and the fibred and pointwise ideal completions.

Design Principles:
- Transitions are index arrays: transitions[f] for f: d→c maps fibre(c) into fibre(d)
- Left adjoints are computed as least elements of preimage up-sets and
  rejected when the least element is missing
- Constructors whose output is always a valid locale raise on any failed
  certificate instead of returning a flag
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.config import config_value
from src.errors import (
    BeckChevalleyFails,
    CertificateFailure,
    FrobeniusFails,
    InternalLatticeError,
    NoLeftAdjoint,
    NotALocale,
    NotASheaf,
    NotCartesianBase,
    NotFinitary,
    TheoremViolation,
)
from src.fincat import FinCategory, find_pullback, from_tables, is_cartesian, pullback_squares
from src.lattice import FinLattice, bits, ideals, is_stone, lattice_from_order
from src.sites import (
    FinPresheaf,
    GrothTopology,
    PlusPresheaf,
    Sieve,
    all_sieves,
    check_topology_axioms,
    closed_sieves,
    extend_to_plus,
    generated_sieve,
    is_sheaf,
    plus_construction,
    pullback_mask,
    saturate,
)
from src.verdict import Verdict, failed, passed

logger = logging.getLogger(__name__)


class InternalLattice:
    """A presheaf of finite distributive lattices on a site"""

    def __init__(
        self,
        category: FinCategory,
        topology: GrothTopology,
        fibres: Sequence[FinLattice],
        transitions: Sequence[np.ndarray],
        name: str = '',
    ):
        self.category = category
        self.topology = topology
        self.fibres: List[FinLattice] = list(fibres)
        self.transitions: List[np.ndarray] = [np.asarray(t, dtype=np.int64) for t in transitions]
        self.name = name

    def fibre(self, c: int) -> FinLattice:
        return self.fibres[c]

    def transition(self, f: int, x: int) -> int:
        return int(self.transitions[f][x])

    def top(self, c: int) -> int:
        return self.fibres[c].top

    def bottom(self, c: int) -> int:
        return self.fibres[c].bottom

    def fibre_sizes(self) -> Dict[str, int]:
        return {self.category.objects[c]: L.size for c, L in enumerate(self.fibres)}

    def as_presheaf(self) -> FinPresheaf:
        return FinPresheaf(
            self.category,
            [list(L.labels) for L in self.fibres],
            list(self.transitions),
        )

    def check(self) -> 'InternalLattice':
        """
        Functoriality and preservation of finite meets and joins.

        Raises:
            InternalLatticeError naming the morphism
        """
        C = self.category
        for m in C.morphisms:
            t = self.transitions[m.id]
            src, dst = self.fibres[m.cod], self.fibres[m.dom]
            if t.shape != (src.size,) or (t.size and (t.min() < 0 or t.max() >= dst.size)):
                raise InternalLatticeError(
                    f"Transition of {m.name} does not map fibre({C.objects[m.cod]}) into fibre({C.objects[m.dom]})",
                    {'morphism': m.name},
                )
            if t[src.top] != dst.top or t[src.bottom] != dst.bottom:
                raise InternalLatticeError(f"Transition of {m.name} does not preserve top and bottom", {'morphism': m.name})
            if not np.array_equal(t[src.meet_table], dst.meet_table[t[:, None], t[None, :]]):
                raise InternalLatticeError(f"Transition of {m.name} does not preserve meets", {'morphism': m.name})
            if not np.array_equal(t[src.join_table], dst.join_table[t[:, None], t[None, :]]):
                raise InternalLatticeError(f"Transition of {m.name} does not preserve joins", {'morphism': m.name})
        for c in range(C.n_objects):
            if not np.array_equal(self.transitions[int(C.identity[c])], np.arange(self.fibres[c].size)):
                raise InternalLatticeError(
                    f"Identity of {C.objects[c]} acts non-trivially",
                    {'object': C.objects[c]},
                )
        for g in range(C.n_morphisms):
            for f in C.into[C.morphisms[g].dom]:
                gf = C.table[g][f]
                if not np.array_equal(self.transitions[gf], self.transitions[f][self.transitions[g]]):
                    raise InternalLatticeError(
                        f"Transitions are not functorial at {C.name(g)}∘{C.name(f)}",
                        {'g': C.name(g), 'f': C.name(f)},
                    )
        return self

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.name or 'unnamed'}, fibres={self.fibre_sizes()})"


class InternalLocale(InternalLattice):
    """
    Internal lattice with left adjoints ∃_f and verified certificates.

    exists[f] for f: d→c maps fibre(d) into fibre(c).
    """

    def __init__(
        self,
        lattice: InternalLattice,
        exists: Sequence[np.ndarray],
        certificates: Dict[str, bool],
        relative: Optional['RelativeSite'] = None,
    ):
        super().__init__(lattice.category, lattice.topology, lattice.fibres, lattice.transitions, lattice.name)
        self.exists: List[np.ndarray] = [np.asarray(e, dtype=np.int64) for e in exists]
        self.certificates = dict(certificates)
        self.relative = relative

    def exist(self, f: int, x: int) -> int:
        return int(self.exists[f][x])


def constant_lattice(C: FinCategory, J: GrothTopology, L: FinLattice, name: str = 'constant') -> InternalLattice:
    return InternalLattice(
        C, J, [L] * C.n_objects,
        [np.arange(L.size, dtype=np.int64) for _ in range(C.n_morphisms)],
        name=name,
    ).check()


# ---------------------------------------------------------------------------
# Locale certificates
# ---------------------------------------------------------------------------

def left_adjoints(L: InternalLattice) -> List[np.ndarray]:
    """∃_f(x) = min{y : x ≤ L(f)(y)}"""
    C = L.category
    result = []
    for m in C.morphisms:
        src, dst = L.fibres[m.dom], L.fibres[m.cod]
        t = L.transitions[m.id]
        table = np.empty(src.size, dtype=np.int64)
        for x in range(src.size):
            up = src.leq[x, t]
            y = dst.least(up)
            if y is None:
                raise NoLeftAdjoint(
                    f"Transition of {m.name} has no left adjoint at {src.describe(x)}",
                    {'morphism': m.name, 'element': src.describe(x)},
                )
            table[x] = y
        result.append(table)
    return result


def check_beck_chevalley(
    L: InternalLattice,
    exists: List[np.ndarray],
    squares,
) -> None:
    """L(f)∘∃_g = ∃_{p_f}∘L(p_g) for every pullback square over (f, g)"""
    C = L.category
    for square in squares:
        f, g = square.cospan
        p1, p2 = square.proj_f, square.proj_g
        lhs = L.transitions[f][exists[g]]
        rhs = exists[p1][L.transitions[p2]]
        bad = np.flatnonzero(lhs != rhs)
        if len(bad):
            x = int(bad[0])
            raise BeckChevalleyFails(
                f"Beck-Chevalley fails on the square over ({C.name(f)}, {C.name(g)})",
                {
                    'cospan': (C.name(f), C.name(g)),
                    'projections': (C.name(p1), C.name(p2)),
                    'element': L.fibres[C.morphisms[g].dom].describe(x),
                },
            )


def check_frobenius(L: InternalLattice, exists: List[np.ndarray]) -> None:
    """∃_f(L(f)(l')∧l) = ∃_f(l)∧l'"""
    C = L.category
    for m in C.morphisms:
        src, dst = L.fibres[m.dom], L.fibres[m.cod]
        t, e = L.transitions[m.id], exists[m.id]
        lhs = e[src.meet_table[t[None, :], np.arange(src.size)[:, None]]]  # [l, l']
        rhs = dst.meet_table[e[:, None], np.arange(dst.size)[None, :]]
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            l, lp = (int(v) for v in bad[0])
            raise FrobeniusFails(
                f"Frobenius reciprocity fails along {m.name}",
                {'morphism': m.name, 'l': src.describe(l), "l'": dst.describe(lp)},
            )


def check_pseudo_complements(L: InternalLattice) -> None:
    C = L.category
    for m in C.morphisms:
        src, dst = L.fibres[m.cod], L.fibres[m.dom]
        t = L.transitions[m.id]
        bad = np.flatnonzero(t[src.negation] != dst.negation[t])
        if len(bad):
            x = int(bad[0])
            raise CertificateFailure(
                f"Transition of {m.name} does not preserve pseudo-complements",
                {'morphism': m.name, 'element': src.describe(x)},
            )


def validate_internal_locale(
    L: InternalLattice,
    expected_exists: Optional[Sequence[np.ndarray]] = None,
    relative: Optional['RelativeSite'] = None,
    require_cartesian: bool = True,
) -> InternalLocale:
    """
    Certify L as an internal locale.

    Checks adjointness, Beck-Chevalley on the chosen pullback table (on a
    non-cartesian base with require_cartesian=False, on the pullbacks that exist),
    Frobenius reciprocity, the sheaf condition and preservation of
    pseudo-complements. When `expected_exists` is given it must agree with
    the computed adjoints.

    Raises:
        NotCartesianBase, NoLeftAdjoint, BeckChevalleyFails, FrobeniusFails,
        NotASheaf, CertificateFailure
    """
    L.check()
    C = L.category
    structure = is_cartesian(C)
    if not structure and require_cartesian:
        raise NotCartesianBase(
            "Internal locales need a cartesian base",
            {'failing_cospan': [C.name(f) for f in structure.failing_cospan] if structure.failing_cospan else None},
        )
    exists = left_adjoints(L)
    for m in C.morphisms:
        src, dst = L.fibres[m.dom], L.fibres[m.cod]
        t, e = L.transitions[m.id], exists[m.id]
        # ∃x ≤ y ⟺ x ≤ L(f)(y)
        if not np.array_equal(dst.leq[e, :], src.leq[:, t]):
            raise NoLeftAdjoint(f"Adjunction fails along {m.name}", {'morphism': m.name})
        if expected_exists is not None and not np.array_equal(e, expected_exists[m.id]):
            x = int(np.flatnonzero(e != expected_exists[m.id])[0])
            raise CertificateFailure(
                f"Stated left adjoint of {m.name} differs from the computed one",
                {'morphism': m.name, 'element': src.describe(x)},
            )
    if structure:
        squares = list(structure.pullbacks.values())
    else:
        squares = [s for s in (find_pullback(C, f, g) for f, g in C.cospans()) if s is not None]
    check_beck_chevalley(L, exists, squares)
    check_frobenius(L, exists)
    sheaf = is_sheaf(L.as_presheaf(), L.topology)
    if not sheaf:
        raise NotASheaf("Underlying presheaf is not a sheaf", sheaf.witness)
    check_pseudo_complements(L)
    certificates = {
        'adjointness': True,
        'beck_chevalley': True,
        'frobenius': True,
        'sheaf': True,
        'pseudo_complements': True,
        'cartesian_base': bool(structure),
    }
    logger.debug("certified internal locale %s", L.name)
    return InternalLocale(L, exists, certificates, relative)


def check_pullback_independence(L: InternalLocale) -> Verdict:
    """Beck-Chevalley over every pullback square, not only the chosen ones"""
    C = L.category
    try:
        for f, g in C.cospans():
            check_beck_chevalley(L, L.exists, pullback_squares(C, f, g))
    except BeckChevalleyFails as exc:
        return failed(str(exc), **exc.witness)
    return passed("Beck-Chevalley holds for every pullback square")


def joins_of_existentials_cover(L: InternalLocale) -> Verdict:
    """⋁_{f∈S} ∃_f(1) = 1 for every covering sieve S"""
    C = L.category
    for c in range(C.n_objects):
        fibre = L.fibres[c]
        value = fibre.join_all(L.exist(f, L.top(C.morphisms[f].dom)) for f in bits(L.topology.minimal[c]))
        if value != fibre.top:
            return failed("existential images of a cover do not join to 1", object=C.objects[c])
    return passed("existential images of covers join to 1")


def is_finitary(J: GrothTopology) -> bool:
    """Each least cover is generated by a finite family of its members"""
    C = J.category
    return all(
        generated_sieve(C, c, bits(m)).members == m
        for c, m in enumerate(J.minimal)
    )


# ---------------------------------------------------------------------------
# Grothendieck construction
# ---------------------------------------------------------------------------

@dataclass
class RelativeSite:
    """
    The total category G(L) of pairs (c, x) with its projection to the base.

    arrows[u] = (f, y, x) is the arrow (dom f, y) → (cod f, x) over f.
    """
    lattice: InternalLattice
    total: FinCategory
    objects: List[Tuple[int, int]]
    object_index: Dict[Tuple[int, int], int]
    arrows: List[Tuple[int, int, int]]
    arrow_index: Dict[Tuple[int, int, int], int]
    topology: Optional[GrothTopology] = None
    kind: str = 'none'
    basis: Dict[int, List[int]] = field(default_factory=dict)
    certificates: Dict[str, bool] = field(default_factory=dict)

    def arrow(self, f: int, y: int, x: int) -> int:
        return self.arrow_index[(f, y, x)]

    def top_object(self, c: int) -> int:
        return self.object_index[(c, self.lattice.top(c))]

    def project_object(self, o: int) -> int:
        return self.objects[o][0]

    def project_arrow(self, u: int) -> int:
        return self.arrows[u][0]

    def source(self, u: int) -> Tuple[int, int]:
        f, y, _ = self.arrows[u]
        return self.lattice.category.morphisms[f].dom, y

    def describe_object(self, o: int) -> str:
        c, x = self.objects[o]
        return f"({self.lattice.category.objects[c]},{self.lattice.fibre(c).describe(x)})"

    def factor(self, u: int) -> Tuple[int, int]:
        """u = (f, id) ∘ (id, α): a vertical arrow followed by a cartesian one"""
        f, y, x = self.arrows[u]
        C = self.lattice.category
        d = C.morphisms[f].dom
        pulled = self.lattice.transition(f, x)
        vertical = self.arrow(int(C.identity[d]), y, pulled)
        cartesian = self.arrow(f, pulled, x)
        return vertical, cartesian

    def with_topology(self, topology: GrothTopology, kind: str, basis: Dict[int, List[int]]) -> 'RelativeSite':
        return RelativeSite(
            self.lattice, self.total, self.objects, self.object_index,
            self.arrows, self.arrow_index, topology, kind, basis, {},
        )


def grothendieck_construction(L: InternalLattice) -> RelativeSite:
    """Objects (c, x); an arrow (d, y) → (c, x) over f: d→c whenever y ≤ L(f)(x)"""
    C = L.category
    objects = [(c, x) for c in range(C.n_objects) for x in range(L.fibres[c].size)]
    object_index = {o: i for i, o in enumerate(objects)}
    object_names = [f"({C.objects[c]},{L.fibres[c].describe(x)})" for c, x in objects]

    arrows: List[Tuple[int, int, int]] = []
    for m in C.morphisms:
        src, dst = L.fibres[m.dom], L.fibres[m.cod]
        for x in range(dst.size):
            bound = L.transition(m.id, x)
            for y in np.flatnonzero(src.leq[:, bound]).tolist():
                arrows.append((m.id, y, x))
    arrow_index = {a: i for i, a in enumerate(arrows)}

    records = []
    into: Dict[int, List[int]] = {i: [] for i in range(len(objects))}
    out: Dict[int, List[int]] = {i: [] for i in range(len(objects))}
    for u, (f, y, x) in enumerate(arrows):
        m = C.morphisms[f]
        s, t = object_index[(m.dom, y)], object_index[(m.cod, x)]
        records.append((f"({m.name},{L.fibres[m.dom].describe(y)},{L.fibres[m.cod].describe(x)})", s, t))
        into[t].append(u)
        out[s].append(u)

    n = len(arrows)
    table = np.full((n, n), -1, dtype=np.int64)
    for o in range(len(objects)):
        for u in out[o]:
            f, _, x = arrows[u]
            for v in into[o]:
                g, z, _ = arrows[v]
                table[u, v] = arrow_index[(C.table[f][g], z, x)]
    identity = [arrow_index[(int(C.identity[c]), x, x)] for c, x in objects]
    total = from_tables(object_names, records, identity, table)
    logger.debug("Grothendieck construction: %d objects, %d arrows", len(objects), n)
    return RelativeSite(L, total, objects, object_index, arrows, arrow_index)


def is_cartesian_arrow(rel: RelativeSite, u: int) -> bool:
    """
    Every arrow into the target over f∘h factors uniquely through u over h.

    For u = (f, y, x) that means w ≤ L(h)(y) whenever w ≤ L(f∘h)(x).
    """
    L = rel.lattice
    C = L.category
    f, y, x = rel.arrows[u]
    d = C.morphisms[f].dom
    for h in C.into[d]:
        e = C.morphisms[h].dom
        fh = C.table[f][h]
        reach = L.fibres[e].leq[:, L.transition(fh, x)]
        lift = L.fibres[e].leq[:, L.transition(h, y)]
        if (reach & ~lift).any():
            return False
    return True


def cartesian_arrows(rel: RelativeSite) -> List[int]:
    return [u for u in range(len(rel.arrows)) if is_cartesian_arrow(rel, u)]


def _giraud_basis(rel: RelativeSite, J: GrothTopology) -> Dict[int, List[int]]:
    L = rel.lattice
    principal = rel.total.principal_masks
    basis: Dict[int, List[int]] = {}
    for o, (c, x) in enumerate(rel.objects):
        mask = 0
        for f in bits(J.minimal[c]):
            mask |= principal[rel.arrow(f, L.transition(f, x), x)]
        basis[o] = [mask]
    return basis


def _join_basis(rel: RelativeSite) -> Dict[int, List[int]]:
    """Binary join covers (c,a),(c,b) → (c,a∨b) and the empty cover of (c,0)"""
    L = rel.lattice
    C = L.category
    principal = rel.total.principal_masks
    basis: Dict[int, List[int]] = {}
    for o, (c, x) in enumerate(rel.objects):
        fibre = L.fibres[c]
        ident = int(C.identity[c])
        families = []
        if x == fibre.bottom:
            families.append(0)
        below = np.flatnonzero(fibre.leq[:, x]).tolist()
        for i, a in enumerate(below):
            for b in below[i:]:
                if a != x and b != x and fibre.join(a, b) == x:
                    families.append(principal[rel.arrow(ident, a, x)] | principal[rel.arrow(ident, b, x)])
        basis[o] = families
    return basis


def _merge(*bases: Dict[int, List[int]]) -> Dict[int, List[int]]:
    merged: Dict[int, List[int]] = {}
    for basis in bases:
        for o, families in basis.items():
            merged.setdefault(o, []).extend(families)
    return merged


def check_cover_lifting(rel: RelativeSite) -> Verdict:
    """The lift of each least base cover is covering in the total site"""
    L = rel.lattice
    J, K = L.topology, rel.topology
    for o, (c, x) in enumerate(rel.objects):
        lift = 0
        for u in rel.total.into[o]:
            if J.minimal[c] >> rel.project_arrow(u) & 1:
                lift |= 1 << u
        if not K.covers_mask(o, lift):
            return failed("cover lifting fails", object=rel.describe_object(o))
    return passed("projection lifts covers")


def _certify(rel: RelativeSite) -> RelativeSite:
    lifting = check_cover_lifting(rel)
    if not lifting:
        raise TheoremViolation("Projection is not a comorphism of sites", lifting.witness)
    rel.certificates['cover_lifting'] = True
    return rel


def giraud_topology(L: InternalLattice, J: Optional[GrothTopology] = None, rel: Optional[RelativeSite] = None) -> RelativeSite:
    """Topology generated by the cartesian lifts of base covers"""
    J = J or L.topology
    rel = rel or grothendieck_construction(L)
    basis = _giraud_basis(rel, J)
    return _certify(rel.with_topology(saturate(rel.total, basis, kind='giraud'), 'giraud', basis))


def coherent_coverage(A: InternalLattice, J: Optional[GrothTopology] = None, rel: Optional[RelativeSite] = None) -> RelativeSite:
    """
    Finite-join covers within fibres together with the Giraud covers.

    On a trivial base topology the join covers alone generate it (checked).
    """
    J = J or A.topology
    rel = rel or grothendieck_construction(A)
    joins = _join_basis(rel)
    basis = _merge(joins, _giraud_basis(rel, J))
    K = saturate(rel.total, basis, kind='coherent')
    if J.is_trivial() and saturate(rel.total, joins).minimal != K.minimal:
        raise TheoremViolation("Join covers alone do not generate the coherent topology on a presheaf base")
    return _certify(rel.with_topology(K, 'coherent', basis))


def _require_locale(L: InternalLattice) -> InternalLocale:
    if not isinstance(L, InternalLocale):
        raise NotALocale("Expected a certified internal locale (run validate_internal_locale)")
    return L


def _existential_values(rel: RelativeSite, L: InternalLocale) -> List[int]:
    """∃_f(y) in fibre(c) for each arrow (f, y, x)"""
    return [L.exist(f, y) for f, y, _ in rel.arrows]


def existential_topology(L: InternalLattice, rel: Optional[RelativeSite] = None) -> RelativeSite:
    """
    S covers (c, x) iff the ∃-images of its members join to x.

    The least covering sieve is read off directly: u belongs to it iff the
    largest sieve avoiding u does not cover.
    """
    L = _require_locale(L)
    rel = rel or grothendieck_construction(L)
    total = rel.total
    values = _existential_values(rel, L)

    def covers(o: int, mask: int) -> bool:
        c, x = rel.objects[o]
        return L.fibres[c].join_all(values[u] for u in bits(mask)) == x

    minimal = []
    for o in range(len(rel.objects)):
        m = 0
        for u in total.into[o]:
            avoiding = total.into_mask[o] & ~total.factor_masks[u]
            if not covers(o, avoiding):
                m |= 1 << u
        if not covers(o, m):
            raise TheoremViolation(
                "Existential covers are not closed under intersection",
                {'object': rel.describe_object(o)},
            )
        minimal.append(m)
    topology = GrothTopology(total, minimal, kind='existential')
    axioms = check_topology_axioms(topology)
    if not axioms:
        raise TheoremViolation("Existential covers do not form a topology", axioms.witness)
    giraud = giraud_topology(L, rel=rel)
    if not topology.contains(giraud.topology):
        raise TheoremViolation("Existential topology does not contain the Giraud topology")
    return _certify(rel.with_topology(topology, 'existential', {o: [m] for o, m in enumerate(minimal)}))


def finitary_existential_topology(L: InternalLattice, rel: Optional[RelativeSite] = None) -> RelativeSite:
    """
    Generated by single arrows (d, y) → (c, ∃_f y) and finite join covers;
    checked equal to the existential topology.
    """
    L = _require_locale(L)
    if not is_finitary(L.topology):
        raise NotFinitary("Base topology is not finitary")
    rel = rel or grothendieck_construction(L)
    principal = rel.total.principal_masks
    single: Dict[int, List[int]] = {}
    for m in L.category.morphisms:
        for y in range(L.fibres[m.dom].size):
            x = L.exist(m.id, y)
            single.setdefault(rel.object_index[(m.cod, x)], []).append(principal[rel.arrow(m.id, y, x)])
    basis = _merge(single, _join_basis(rel))
    topology = saturate(rel.total, basis, kind='finitary_existential')
    existential = existential_topology(L, rel=rel)
    if topology.minimal != existential.topology.minimal:
        raise TheoremViolation("Finitary existential topology differs from the existential topology")
    return _certify(rel.with_topology(topology, 'finitary_existential', basis))


# ---------------------------------------------------------------------------
# Ideal completions
# ---------------------------------------------------------------------------

def fibred_ideal_completion(A: InternalLattice, T: RelativeSite, require_cartesian: bool = True) -> InternalLocale:
    """
    Fibre at c: the T-closed sieves on (c, 1), with transitions by pullback
    along (f, 1) and ∃_f(R) the closure of {(f, 1)∘h : h ∈ R}.

    Raises:
        CertificateFailure when T misses a Giraud cover or any locale
        certificate fails
    """
    K = T.topology
    if K is None:
        raise CertificateFailure("Relative site carries no topology")
    giraud = giraud_topology(A, rel=T)
    if not K.contains(giraud.topology):
        raise CertificateFailure("Topology does not contain the Giraud topology", {'kind': T.kind})
    C = A.category
    total = T.total
    fibres: List[FinLattice] = []
    masks: List[List[int]] = []
    positions: List[Dict[int, int]] = []
    for c in range(C.n_objects):
        o = T.top_object(c)
        closed = closed_sieves(K, o)
        n = len(closed)
        leq = np.array([[closed[a] & ~closed[b] == 0 for b in range(n)] for a in range(n)], dtype=bool)
        fibre = lattice_from_order([Sieve(o, m) for m in closed], leq, limit=config_value('max_sieves'))
        position = {m: i for i, m in enumerate(closed)}
        for i in range(n):
            for j in range(n):
                if closed[fibre.meet(i, j)] != closed[i] & closed[j] \
                        or closed[fibre.join(i, j)] != K.closure_mask(o, closed[i] | closed[j]):
                    raise CertificateFailure(
                        "Closed sieves: meet is not intersection or join is not closure of union",
                        {'object': C.objects[c]},
                    )
        fibres.append(fibre)
        masks.append(closed)
        positions.append(position)
        logger.debug("fibred ideal completion at %s: %d closed sieves", C.objects[c], n)

    transitions: List[np.ndarray] = []
    exists: List[np.ndarray] = []
    for m in C.morphisms:
        u = T.arrow(m.id, A.top(m.dom), A.top(m.cod))
        pulled = []
        for R in masks[m.cod]:
            P = pullback_mask(total, R, u)
            if P not in positions[m.dom]:
                raise CertificateFailure(
                    f"Pullback along ({m.name},1) of a closed sieve is not closed",
                    {'morphism': m.name},
                )
            pulled.append(positions[m.dom][P])
        transitions.append(np.array(pulled, dtype=np.int64))
        pushed = []
        row = total.table[u]
        for R in masks[m.dom]:
            gen = 0
            for h in bits(R):
                gen |= total.principal_masks[row[h]]
            closed = K.closure_mask(T.top_object(m.cod), gen)
            pushed.append(positions[m.cod][closed])
        exists.append(np.array(pushed, dtype=np.int64))

    lattice = InternalLattice(C, A.topology, fibres, transitions, name=f"Idl({A.name})")
    return validate_internal_locale(lattice, expected_exists=exists, relative=T, require_cartesian=require_cartesian)


def pointwise_ideal_completion(L: InternalLattice) -> InternalLocale:
    """
    Fibre at c: ideals of L(c); transitions u ↦ ↓L(f)[u], adjoints u ↦ ↓∃_f[u].
    The principal-ideal map L → I_L is checked to be a natural isomorphism.
    """
    L = _require_locale(L)
    if not is_finitary(L.topology):
        raise NotFinitary("Base topology is not finitary")
    if not L.certificates.get('sheaf'):
        raise NotALocale("Pointwise ideal completion needs a sheaf of frames")
    C = L.category
    fibres = [ideals(F) for F in L.fibres]
    # ideal k of fibre c is the downset of fibres[c].origin[k]
    lookup = [
        {L.fibres[c].down_masks[int(g)]: k for k, g in enumerate(fibres[c].origin)}
        for c in range(C.n_objects)
    ]

    def image(c_from: int, c_to: int, table: np.ndarray, k: int) -> int:
        down = 0
        for a in bits(L.fibres[c_from].down_masks[int(fibres[c_from].origin[k])]):
            down |= L.fibres[c_to].down_masks[int(table[a])]
        if down not in lookup[c_to]:
            raise CertificateFailure("Image of an ideal is not an ideal", {'object': C.objects[c_to]})
        return lookup[c_to][down]

    transitions, exists = [], []
    for m in C.morphisms:
        transitions.append(np.array(
            [image(m.cod, m.dom, L.transitions[m.id], k) for k in range(fibres[m.cod].size)], dtype=np.int64))
        exists.append(np.array(
            [image(m.dom, m.cod, L.exists[m.id], k) for k in range(fibres[m.dom].size)], dtype=np.int64))

    lattice = InternalLattice(C, L.topology, fibres, transitions, name=f"I({L.name})")
    result = validate_internal_locale(lattice, expected_exists=exists)

    principal = [np.argsort(fibres[c].origin) for c in range(C.n_objects)]
    for m in C.morphisms:
        lhs = result.transitions[m.id][principal[m.cod]]
        rhs = principal[m.dom][L.transitions[m.id]]
        if not np.array_equal(lhs, rhs):
            raise TheoremViolation("Principal ideals are not natural", {'morphism': m.name})
    return result


@dataclass
class LocIdealReport:
    """Comparison of the fibred and pointwise ideal completions"""
    holds: bool
    isomorphisms: Dict[str, List[int]]
    detail: str = ''

    def __bool__(self) -> bool:
        return self.holds


def check_loc_ideal_equivalence(L: InternalLattice) -> LocIdealReport:
    """
    Compare Idl over the finitary existential topology with I_L through
    u ↦ Cl(sieve generated by (id, y): (c, y) → (c, 1), y ∈ u).
    """
    L = _require_locale(L)
    C = L.category
    T = finitary_existential_topology(L)
    fibred = fibred_ideal_completion(L, T)
    pointwise = pointwise_ideal_completion(L)
    K = T.topology
    maps: List[np.ndarray] = []
    report: Dict[str, List[int]] = {}
    for c in range(C.n_objects):
        o = T.top_object(c)
        ident = int(C.identity[c])
        top = L.top(c)
        index = {S.members: i for i, S in enumerate(fibred.fibres[c].labels)}
        images = []
        for k in range(pointwise.fibres[c].size):
            generator = int(pointwise.fibres[c].origin[k])
            gen = 0
            for y in bits(L.fibres[c].down_masks[generator]):
                gen |= T.total.principal_masks[T.arrow(ident, y, top)]
            images.append(index[K.closure_mask(o, gen)])
        phi = np.array(images, dtype=np.int64)
        maps.append(phi)
        report[C.objects[c]] = phi.tolist()
        if len(set(images)) != fibred.fibres[c].size or pointwise.fibres[c].size != fibred.fibres[c].size:
            return LocIdealReport(False, report, f"not a bijection at {C.objects[c]}")
        if not np.array_equal(pointwise.fibres[c].leq, fibred.fibres[c].leq[np.ix_(phi, phi)]):
            return LocIdealReport(False, report, f"not an order isomorphism at {C.objects[c]}")
    for m in C.morphisms:
        lhs = maps[m.dom][pointwise.transitions[m.id]]
        rhs = fibred.transitions[m.id][maps[m.cod]]
        if not np.array_equal(lhs, rhs):
            return LocIdealReport(False, report, f"not natural along {m.name}")
    return LocIdealReport(True, report, "natural isomorphism of internal frames")


# ---------------------------------------------------------------------------
# Nontriviality and De Morgan
# ---------------------------------------------------------------------------

def is_nontrivial(A: InternalLattice) -> bool:
    """0 != 1 in A(c) for every c not covered by the empty sieve"""
    return all(
        A.fibres[c].size > 1
        for c in range(A.category.n_objects)
        if not A.topology.empty_covers(c)
    )


@dataclass
class SurjectivityReport:
    verdict: bool
    nontrivial: bool
    covers_project: bool

    def __bool__(self) -> bool:
        return self.verdict


def surjectivity_verdict(A: InternalLattice, T: RelativeSite) -> SurjectivityReport:
    """
    Surjectivity of the relative topos over the base, decided twice: by
    nontriviality of A, and by checking that the least K-covering sieve on
    each (c, 1) projects to a J-covering sieve on c.

    Raises:
        TheoremViolation if the two decisions disagree
    """
    C = A.category
    J = A.topology
    K = T.topology
    if K is None:
        raise TheoremViolation("Relative site carries no topology")
    project = True
    for c in range(C.n_objects):
        least = K.minimal[T.top_object(c)]
        image = generated_sieve(C, c, {T.project_arrow(u) for u in bits(least)})
        if not J.covers(image):
            logger.debug("least cover of (%s,1) projects to a non-covering sieve", C.objects[c])
            project = False
    nontrivial = is_nontrivial(A)
    if project != nontrivial:
        raise TheoremViolation(
            "Nontriviality and cover projection disagree on surjectivity",
            {'nontrivial': nontrivial, 'covers_project': project, 'topology': T.kind},
        )
    return SurjectivityReport(project, nontrivial, project)


def relative_de_morgan(L: InternalLattice) -> bool:
    """
    Every fibre is Stone. The mechanism is checked too: each existentially
    closed sieve on (c, 1) is the principal sieve of (c, t) with t the join
    of the ∃-images of its members.
    """
    L = _require_locale(L)
    C = L.category
    rel = existential_topology(L)
    K = rel.topology
    values = _existential_values(rel, L)
    for c in range(C.n_objects):
        o = rel.top_object(c)
        closed = closed_sieves(K, o)
        fibre = L.fibres[c]
        if len(closed) != fibre.size:
            raise TheoremViolation(
                "Closed sieves on (c,1) are not in bijection with the fibre",
                {'object': C.objects[c], 'closed': len(closed), 'fibre': fibre.size},
            )
        ident = int(C.identity[c])
        for S in closed:
            t = fibre.join_all(values[u] for u in bits(S))
            principal = rel.total.principal_masks[rel.arrow(ident, t, fibre.top)]
            if principal != S:
                raise TheoremViolation(
                    "Closed sieve is not principal",
                    {'object': C.objects[c], 'generator': fibre.describe(t)},
                )
    return all(is_stone(F).holds for F in L.fibres)


def irreducible_objects(rel: RelativeSite) -> List[int]:
    """Objects of the total site whose only covering sieve is the maximal one"""
    K = rel.topology
    return [o for o in range(len(rel.objects)) if K.minimal[o] == rel.total.into_mask[o]]


def representable(C: FinCategory, o: int) -> Tuple[FinPresheaf, List[Dict[int, int]]]:
    """
    y(o): the arrows e → o at each e, restricted by precomposition.

    Also returns, per object, the section index of each arrow.
    """
    sections = [[a for a in C.into[o] if C.morphisms[a].dom == e] for e in range(C.n_objects)]
    position = [{a: i for i, a in enumerate(row)} for row in sections]
    restriction = []
    for h in range(C.n_morphisms):
        d, e = C.morphisms[h].dom, C.morphisms[h].cod
        restriction.append(np.array([position[d][C.table[a][h]] for a in sections[e]], dtype=np.int64))
    return FinPresheaf(C, sections, restriction), position


@dataclass
class _Sheafified:
    first: PlusPresheaf
    second: PlusPresheaf
    position: List[Dict[int, int]]

    def unit(self, e: int) -> np.ndarray:
        return self.second.unit[e][self.first.unit[e]]


def split_epi_irreducibles(rel: RelativeSite) -> List[int]:
    """
    Objects o of the total site such that every covering family of arrows
    into o has a member u with ℓ(u): ℓ(dom u) → ℓ(o) a split epimorphism.

    Every sieve on o is enumerated; ℓ(u) splits when some section of
    ℓ(dom u) at o is sent to the class of id_o.
    """
    K = rel.topology
    G = rel.total
    sheaves = []
    for o in range(G.n_objects):
        P, position = representable(G, o)
        first = plus_construction(P, K)
        sheaves.append(_Sheafified(first, plus_construction(first, K), position))

    split: Dict[int, bool] = {}

    def splits(u: int) -> bool:
        if u not in split:
            d, o = G.morphisms[u].dom, G.morphisms[u].cod
            source, target = sheaves[d], sheaves[o]
            # y(u) composed with the unit of the target
            base = [
                target.unit(e)[[target.position[e][G.table[u][a]] for a in source.first.base.sections[e]]]
                for e in range(G.n_objects)
            ]
            onto_first = extend_to_plus(source.first, K, target.second, base)
            onto_second = extend_to_plus(source.second, K, target.second, onto_first)
            identity = int(target.unit(o)[target.position[o][int(G.identity[o])]])
            split[u] = identity in onto_second[o].tolist()
        return split[u]

    irreducible = []
    for o in range(G.n_objects):
        covering = [S for S in all_sieves(G, o) if K.covers_mask(o, S)]
        if all(any(splits(u) for u in bits(S)) for S in covering):
            irreducible.append(o)
    logger.debug("split-epi irreducibles: %s", [rel.describe_object(o) for o in irreducible])
    return irreducible
