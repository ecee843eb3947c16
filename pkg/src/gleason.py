"""
Gleason Cover of a Finite Site
The fibred ideal completion of Ω¬¬ under the coherent coverage, its
comparison maps with Ω, and the checks of its defining properties.

Checks take `strict`: with strict=True a failed theorem raises
TheoremViolation, otherwise the failing Verdict is returned.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from src.classifier import (
    InternalFrame,
    coproduct_of_terminals,
    is_boolean_topos,
    is_de_morgan_topos,
    omega,
    omega_notnot,
)
from src.errors import InputError, NotPresheafBase, TheoremViolation
from src.fincat import FinCategory, full_subcategory, has_right_ore
from src.indlat import (
    InternalLattice,
    InternalLocale,
    RelativeSite,
    coherent_coverage,
    fibred_ideal_completion,
    grothendieck_construction,
    irreducible_objects,
    relative_de_morgan,
    split_epi_irreducibles,
    surjectivity_verdict,
    validate_internal_locale,
)
from src.lattice import bits, complemented_elements, induced_sublattice, is_boolean, is_stone
from src.sites import GrothTopology, pullback_mask
from src.verdict import Verdict, failed, passed

logger = logging.getLogger(__name__)

SPLIT_EPI_OBJECT_LIMIT = 6


@dataclass
class GleasonCover:
    """
    rho[c] maps cover fibre elements to Ω(c) elements;
    lam[c] maps Ω(c) elements to cover fibre elements.
    """
    category: FinCategory
    topology: GrothTopology
    omega: InternalFrame
    omega_nn: InternalLocale
    relative: RelativeSite
    cover_locale: InternalLocale
    rho: List[np.ndarray] = field(default_factory=list)
    lam: List[np.ndarray] = field(default_factory=list)

    def fibre_sizes(self) -> Dict[str, Dict[str, int]]:
        C = self.category
        return {
            C.objects[c]: {
                'omega': self.omega.fibres[c].size,
                'omega_nn': self.omega_nn.fibres[c].size,
                'cover': self.cover_locale.fibres[c].size,
            }
            for c in range(C.n_objects)
        }


def _outcome(verdict: Verdict, strict: bool) -> Verdict:
    if not verdict and strict:
        raise TheoremViolation(verdict.detail, verdict.witness)
    return verdict


def _rho_tables(
    C: FinCategory,
    rel: RelativeSite,
    cover: InternalLocale,
    frame: InternalFrame,
    base: InternalLattice,
) -> List[np.ndarray]:
    """ρ_c(R) = {f : (f, 1, 1) ∈ R}"""
    tables = []
    for c in range(C.n_objects):
        top = base.top(c)
        image = []
        for R in cover.fibres[c].labels:
            mask = 0
            for f in C.into[c]:
                u = rel.arrow(f, base.top(C.morphisms[f].dom), top)
                if R.members >> u & 1:
                    mask |= 1 << f
            try:
                image.append(frame.element(c, mask))
            except InputError:
                raise TheoremViolation(
                    "ρ does not land in closed sieves",
                    {'object': C.objects[c], 'sieve': cover.fibres[c].describe(len(image))},
                )
        tables.append(np.array(image, dtype=np.int64))
    return tables


def rho(G: GleasonCover) -> List[np.ndarray]:
    """
    ρ as per-object tables, checked natural and meet-preserving; on a minimal
    cover it also preserves pseudo-complements.
    """
    C = G.category
    tables = G.rho
    for m in C.morphisms:
        lhs = tables[m.dom][G.cover_locale.transitions[m.id]]
        rhs = G.omega.transitions[m.id][tables[m.cod]]
        if not np.array_equal(lhs, rhs):
            raise TheoremViolation("ρ is not natural", {'morphism': m.name})
    minimal = is_minimal(G.cover_locale).holds
    for c in range(C.n_objects):
        F, W, r = G.cover_locale.fibres[c], G.omega.fibres[c], tables[c]
        if not np.array_equal(r[F.meet_table], W.meet_table[r[:, None], r[None, :]]):
            raise TheoremViolation("ρ does not preserve meets", {'object': C.objects[c]})
        if minimal and not np.array_equal(r[F.negation], W.negation[r]):
            raise TheoremViolation("ρ does not preserve pseudo-complements", {'object': C.objects[c]})
    return tables


def lambda_map(G: GleasonCover) -> List[np.ndarray]:
    """
    λ_c(S) = ⋁_{f∈S} ∃_f(1), checked with S ⊆ ρλ(S) and λ(¬S) ≤ ¬λ(S);
    naturality is checked on cartesian bases.
    """
    C = G.category
    cover, frame = G.cover_locale, G.omega
    tables = G.lam
    if cover.certificates.get('cartesian_base'):
        for m in C.morphisms:
            lhs = tables[m.dom][frame.transitions[m.id]]
            rhs = cover.transitions[m.id][tables[m.cod]]
            if not np.array_equal(lhs, rhs):
                raise TheoremViolation("λ is not natural", {'morphism': m.name})
    for c in range(C.n_objects):
        F, W = cover.fibres[c], frame.fibres[c]
        lam, r = tables[c], G.rho[c]
        for s in range(W.size):
            if frame.mask(c, s) & ~frame.mask(c, int(r[lam[s]])):
                raise TheoremViolation("S is not contained in ρλ(S)", {'object': C.objects[c], 'sieve': W.describe(s)})
            if not F.le(int(lam[W.neg(s)]), F.neg(int(lam[s]))):
                raise TheoremViolation("λ(¬S) is not below ¬λ(S)", {'object': C.objects[c], 'sieve': W.describe(s)})
    return tables


def gleason_cover(C: FinCategory, J: GrothTopology) -> GleasonCover:
    """
    Assemble the cover: Ω, the locale Ω¬¬, its coherent relative site and
    the fibred ideal completion, with ρ and λ tabulated and checked.
    """
    frame = omega(C, J)
    nn = validate_internal_locale(omega_notnot(C, J, frame), require_cartesian=False)
    rel = coherent_coverage(nn)
    cover = fibred_ideal_completion(nn, rel, require_cartesian=False)
    logger.debug("Gleason cover fibres: %s", cover.fibre_sizes())

    lam = []
    for c in range(C.n_objects):
        fibre = cover.fibres[c]
        lam.append(np.array([
            fibre.join_all(cover.exist(f, cover.top(C.morphisms[f].dom)) for f in bits(frame.mask(c, s)))
            for s in range(frame.fibres[c].size)
        ], dtype=np.int64))
    G = GleasonCover(C, J, frame, nn, rel, cover, [], lam)
    G.rho = _rho_tables(C, rel, cover, frame, nn)
    rho(G)
    lambda_map(G)
    if not surjectivity_verdict(nn, rel):
        raise TheoremViolation("Gleason cover is not surjective", {'site': repr(C)})
    return G


def gleason_is_de_morgan(G: GleasonCover, strict: bool = True) -> Verdict:
    """
    Every cover fibre is Stone, and ¬R equals the sieve of arrows
    (f, x): (d, x) → (c, 1) with ∃_f(x) ∧ ∃_g(x') = 0 for every (g, x') ∈ R.
    """
    C = G.category
    cover, nn, rel = G.cover_locale, G.omega_nn, G.relative
    for c in range(C.n_objects):
        F = cover.fibres[c]
        stone = is_stone(F)
        if not stone:
            return _outcome(failed("cover fibre is not Stone", object=C.objects[c], **stone.witness), strict)
        o = rel.top_object(c)
        W = nn.fibres[c]
        for R in range(F.size):
            members = [rel.arrows[u] for u in bits(F.labels[R].members)]
            formula = 0
            for u in rel.total.into[o]:
                f, x, _ = rel.arrows[u]
                ex = nn.exist(f, x)
                if all(W.meet(ex, nn.exist(g, y)) == W.bottom for g, y, _ in members):
                    formula |= 1 << u
            if formula != F.labels[F.neg(R)].members:
                return _outcome(
                    failed("pseudo-complement formula disagrees", object=C.objects[c], element=F.describe(R)),
                    strict,
                )
    if not relative_de_morgan(cover):
        return _outcome(failed("relative De Morgan law fails on the cover"), strict)
    return passed("Gleason cover is De Morgan")


def is_minimal(L: InternalLattice) -> Verdict:
    """
    Every nonzero R reaches 1 along some arrow f: d → c with d not covered by
    the empty sieve.
    """
    C, J = L.category, L.topology
    for c in range(C.n_objects):
        F = L.fibres[c]
        arrows = [f for f in C.into[c] if not J.empty_covers(C.morphisms[f].dom)]
        for R in range(F.size):
            if R == F.bottom:
                continue
            if not any(L.transition(f, R) == L.top(C.morphisms[f].dom) for f in arrows):
                return failed("nonzero element never restricts to 1", object=C.objects[c], element=F.describe(R))
    return passed("minimal")


def check_minimality(G: GleasonCover, strict: bool = True) -> Verdict:
    return _outcome(is_minimal(G.cover_locale), strict)


def check_rho_regular_iso(G: GleasonCover, strict: bool = True) -> Verdict:
    """ρ maps the ¬¬-fixed cover elements bijectively and naturally onto Ω¬¬"""
    C = G.category
    cover, nn, frame = G.cover_locale, G.omega_nn, G.omega
    regular_images: List[Dict[int, int]] = []
    for c in range(C.n_objects):
        F = cover.fibres[c]
        regular = [R for R in range(F.size) if F.neg(F.neg(R)) == R]
        targets = {frame.mask(c, int(G.rho[c][R])) for R in regular}
        expected = {S.members for S in nn.fibres[c].labels}
        if len(regular) != nn.fibres[c].size or targets != expected:
            return _outcome(
                failed(
                    "ρ on regular elements is not a bijection onto Ω¬¬",
                    object=C.objects[c], regular=len(regular), omega_nn=nn.fibres[c].size,
                ),
                strict,
            )
        regular_images.append({R: int(G.rho[c][R]) for R in regular})
    for m in C.morphisms:
        for R, image in regular_images[m.cod].items():
            pulled = cover.transition(m.id, R)
            if pulled not in regular_images[m.dom] or regular_images[m.dom][pulled] != frame.transition(m.id, image):
                return _outcome(failed("regular restriction of ρ is not natural", morphism=m.name), strict)
    return passed("ρ restricts to an isomorphism onto Ω¬¬")


def complemented_part(frame: InternalFrame) -> InternalFrame:
    """
    The internal Boolean algebra 1⊔1: complemented closed sieves, closed under
    the joins and meets of Ω (checked).
    """
    C = frame.category
    fibres = []
    lookup = []
    for c, W in enumerate(frame.fibres):
        sub = induced_sublattice(W, complemented_elements(W))
        origin = sub.origin
        for i in range(sub.size):
            for j in range(sub.size):
                if int(origin[sub.join(i, j)]) != W.join(int(origin[i]), int(origin[j])) \
                        or int(origin[sub.meet(i, j)]) != W.meet(int(origin[i]), int(origin[j])):
                    raise TheoremViolation(
                        "Complemented sieves are not a sublattice",
                        {'object': C.objects[c], 'a': sub.describe(i), 'b': sub.describe(j)},
                    )
        fibres.append(sub)
        lookup.append({int(o): i for i, o in enumerate(origin)})
    transitions = []
    for m in C.morphisms:
        image = [lookup[m.dom][frame.transition(m.id, int(x))] for x in fibres[m.cod].origin]
        transitions.append(np.array(image, dtype=np.int64))
    return InternalFrame(C, frame.topology, fibres, transitions, name='1⊔1').check()


def check_idl_coproduct_is_omega(C: FinCategory, J: GrothTopology, strict: bool = True) -> Verdict:
    """
    Idl(1⊔1) under the coherent coverage maps onto Ω by ρ, with
    (f, x) ∈ R ⟺ x ⊆ f*(ρ(R)).
    """
    frame = omega(C, J)
    B = complemented_part(frame)
    two = coproduct_of_terminals(C, J)
    for c in range(C.n_objects):
        if B.fibres[c].size != two.size(c):
            return _outcome(
                failed("complemented sieves and 1⊔1 differ in size",
                       object=C.objects[c], complemented=B.fibres[c].size, coproduct=two.size(c)),
                strict,
            )
    rel = coherent_coverage(B)
    completion = fibred_ideal_completion(B, rel, require_cartesian=False)
    tables = _rho_tables(C, rel, completion, frame, B)
    for c in range(C.n_objects):
        F = completion.fibres[c]
        if len(set(tables[c].tolist())) != frame.fibres[c].size or F.size != frame.fibres[c].size:
            return _outcome(
                failed("Idl(1⊔1) is not Ω", object=C.objects[c], ideals=F.size, omega=frame.fibres[c].size),
                strict,
            )
        o = rel.top_object(c)
        for R in range(F.size):
            S = frame.mask(c, int(tables[c][R]))
            members = F.labels[R].members
            for u in rel.total.into[o]:
                f, x, _ = rel.arrows[u]
                x_mask = B.mask(C.morphisms[f].dom, x)
                inside = x_mask & ~pullback_mask(C, S, f) == 0
                if bool(members >> u & 1) != inside:
                    return _outcome(
                        failed("membership criterion fails", object=C.objects[c], arrow=rel.total.name(u)),
                        strict,
                    )
    return passed("Idl(1⊔1) = Ω")


def is_equivalence(G: GleasonCover, strict: bool = True) -> bool:
    """ρ is a pointwise bijection; checked against the De Morgan verdict of the base"""
    C = G.category
    bijective = all(
        len(set(G.rho[c].tolist())) == G.cover_locale.fibres[c].size == G.omega.fibres[c].size
        for c in range(C.n_objects)
    )
    de_morgan = is_de_morgan_topos(C, G.topology, G.omega).holds
    if bijective != de_morgan and strict:
        raise TheoremViolation(
            "Equivalence verdict differs from the De Morgan verdict",
            {'equivalence': bijective, 'de_morgan': de_morgan},
        )
    return bijective


def check_boolean_transfer(G: GleasonCover, strict: bool = True) -> Verdict:
    """The base is Boolean iff every cover fibre is Boolean iff ρ is onto and Ω¬¬ = Ω"""
    C = G.category
    base = is_boolean_topos(C, G.topology, G.omega).holds
    fibres = all(is_boolean(F) for F in G.cover_locale.fibres)
    equivalence = is_equivalence(G, strict=False) and all(
        G.omega_nn.fibres[c].size == G.omega.fibres[c].size for c in range(C.n_objects)
    )
    if base == fibres == equivalence:
        return passed("Boolean transfer holds", boolean=base)
    return _outcome(
        failed("Boolean transfer fails", base=base, cover_fibres=fibres, equivalence=equivalence),
        strict,
    )


@dataclass
class AtomsCategory:
    """Full subcategory of G(Ω¬¬) on the atom objects"""
    category: FinCategory
    objects: List[str]
    right_ore: Verdict
    irreducible: bool
    atom_counts: Dict[str, int]
    split_epi: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            'objects': self.objects,
            'morphisms': [m.name for m in self.category.morphisms],
            'right_ore': self.right_ore.to_dict(),
            'irreducible': self.irreducible,
            'split_epi': self.split_epi,
            'atom_counts': self.atom_counts,
        }


def atoms_category(C: FinCategory, J: GrothTopology, strict: bool = True) -> AtomsCategory:
    """
    Objects (c, x) with x an atom of Ω¬¬(c); these are also the irreducible
    objects of the coherent site over Ω¬¬ (checked). On total sites with at
    most SPLIT_EPI_OBJECT_LIMIT objects each atom is also checked irreducible
    by the split-epi criterion; `split_epi` is None above the limit.

    Raises:
        NotPresheafBase unless J is the trivial topology
    """
    if not J.is_trivial():
        raise NotPresheafBase("Atoms category is defined for presheaf bases only", {'topology': J.kind})
    nn = omega_notnot(C, J)
    rel = grothendieck_construction(nn)
    atoms = [rel.object_index[(c, x)] for c in range(C.n_objects) for x in nn.fibres[c].atoms()]
    sub, _ = full_subcategory(rel.total, atoms)
    coherent = coherent_coverage(nn, rel=rel)
    irreducible = sorted(irreducible_objects(coherent)) == sorted(atoms)
    split_epi = None
    if len(rel.objects) <= SPLIT_EPI_OBJECT_LIMIT:
        split_epi = set(atoms) <= set(split_epi_irreducibles(coherent))
    ore = has_right_ore(sub)
    if strict and not (ore and irreducible and split_epi is not False):
        raise TheoremViolation(
            "Atoms category fails the right Ore condition or misses irreducibles",
            {'right_ore': ore.holds, 'irreducible': irreducible, 'split_epi': split_epi},
        )
    counts = {C.objects[c]: len(nn.fibres[c].atoms()) for c in range(C.n_objects)}
    return AtomsCategory(sub, list(sub.objects), ore, irreducible, counts, split_epi)
