"""
Finite Categories
Explicit composition tables with limit search, duality and the
amalgamation / right Ore decision procedures.

Design Principles:
- Dense integer ids in input order; every "first" choice is by id
- Strict composition tables, validated exhaustively
- Pullbacks are chosen from a fixed table, not just shown to exist
"""

import logging
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.errors import (
    BadComposite,
    BadIdentity,
    CategoryFormatError,
    EmptyCategory,
    MissingComposite,
    NonAssociative,
    NotCospan,
)
from src.verdict import Verdict, failed, passed

logger = logging.getLogger(__name__)

UNDEFINED = -1  # composition table entry for non-composable pairs


@dataclass(frozen=True)
class Morphism:
    """Single morphism record"""
    id: int
    name: str
    dom: int
    cod: int


class FinCategory:
    """
    A finite category given by its composition table.

    composition[g, f] holds the id of g∘f, or UNDEFINED when cod(f) != dom(g).
    Instances are treated as immutable once validated.
    """

    def __init__(
        self,
        objects: Sequence[str],
        morphisms: Sequence[Morphism],
        identity: Sequence[int],
        composition: np.ndarray,
    ):
        self.objects: Tuple[str, ...] = tuple(objects)
        self.morphisms: Tuple[Morphism, ...] = tuple(morphisms)
        self.identity = np.asarray(identity, dtype=np.int64)
        self.composition = np.asarray(composition, dtype=np.int64)
        self.dom = np.array([m.dom for m in self.morphisms], dtype=np.int64)
        self.cod = np.array([m.cod for m in self.morphisms], dtype=np.int64)
        self.table: List[List[int]] = self.composition.tolist()
        self.into: List[List[int]] = [[] for _ in self.objects]
        self.out: List[List[int]] = [[] for _ in self.objects]
        for m in self.morphisms:
            self.into[m.cod].append(m.id)
            self.out[m.dom].append(m.id)
        self.into_mask: List[int] = [_mask(ids) for ids in self.into]

    # Basic accessors
    @property
    def n_objects(self) -> int:
        return len(self.objects)

    @property
    def n_morphisms(self) -> int:
        return len(self.morphisms)

    def object_id(self, name: str) -> int:
        try:
            return self.objects.index(name)
        except ValueError:
            raise CategoryFormatError(f"Unknown object '{name}'", {'object': name})

    def morphism_id(self, name: str) -> int:
        ids = self._morphism_index
        if name not in ids:
            raise CategoryFormatError(f"Unknown morphism '{name}'", {'morphism': name})
        return ids[name]

    @cached_property
    def _morphism_index(self) -> Dict[str, int]:
        return {m.name: m.id for m in self.morphisms}

    def name(self, f: int) -> str:
        return self.morphisms[f].name

    def is_identity(self, f: int) -> bool:
        return int(self.identity[self.morphisms[f].dom]) == f

    def compose(self, g: int, f: int) -> int:
        """g∘f; raises BadComposite when cod(f) != dom(g)"""
        r = self.table[g][f]
        if r == UNDEFINED:
            raise BadComposite(
                f"{self.name(g)}∘{self.name(f)} is not composable",
                {'g': self.name(g), 'f': self.name(f)},
            )
        return r

    def hom(self, a: int, b: int) -> List[int]:
        return self.hom_table[a][b]

    @cached_property
    def hom_table(self) -> List[List[List[int]]]:
        table = [[[] for _ in self.objects] for _ in self.objects]
        for m in self.morphisms:
            table[m.dom][m.cod].append(m.id)
        return table

    @cached_property
    def principal_masks(self) -> List[int]:
        """principal_masks[f] is the bitset of all composites f∘h"""
        masks = []
        for m in self.morphisms:
            bits = 0
            for h in self.into[m.dom]:
                bits |= 1 << self.table[m.id][h]
            masks.append(bits)
        return masks

    @cached_property
    def factor_masks(self) -> List[int]:
        """factor_masks[u] is the bitset of all v such that u = v∘w for some w"""
        masks = [0] * self.n_morphisms
        for v in range(self.n_morphisms):
            for w in self.into[self.morphisms[v].dom]:
                masks[self.table[v][w]] |= 1 << v
        return masks

    def cospans(self) -> List[Tuple[int, int]]:
        """All pairs (f, g) with a common codomain, in id order"""
        return [
            (f, g)
            for f in range(self.n_morphisms)
            for g in range(self.n_morphisms)
            if self.morphisms[f].cod == self.morphisms[g].cod
        ]

    def to_dict(self) -> Dict[str, Any]:
        composition = []
        for g in range(self.n_morphisms):
            for f in range(self.n_morphisms):
                r = self.table[g][f]
                if r != UNDEFINED:
                    composition.append([self.name(g), self.name(f), self.name(r)])
        return {
            'objects': list(self.objects),
            'morphisms': [
                {'id': m.name, 'dom': self.objects[m.dom], 'cod': self.objects[m.cod]}
                for m in self.morphisms
            ],
            'identities': {
                self.objects[c]: self.name(int(i)) for c, i in enumerate(self.identity)
            },
            'composition': composition,
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, FinCategory):
            return NotImplemented
        return (
            self.objects == other.objects
            and self.morphisms == other.morphisms
            and np.array_equal(self.identity, other.identity)
            and np.array_equal(self.composition, other.composition)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"FinCategory({self.n_objects} objects, {self.n_morphisms} morphisms)"


def _mask(ids) -> int:
    bits = 0
    for i in ids:
        bits |= 1 << i
    return bits


# ---------------------------------------------------------------------------
# Validation
# ---------------------------------------------------------------------------

def check_category_axioms(C: FinCategory) -> FinCategory:
    """
    Exhaustive check of the category axioms.

    Raises:
        BadIdentity, MissingComposite, BadComposite, NonAssociative
    """
    if C.n_objects == 0:
        raise EmptyCategory("A category needs at least one object")
    n = C.n_morphisms
    for c, i in enumerate(C.identity.tolist()):
        m = C.morphisms[i]
        if m.dom != c or m.cod != c:
            raise BadIdentity(
                f"Identity {m.name} of {C.objects[c]} is not an endomorphism of it",
                {'object': C.objects[c], 'morphism': m.name},
            )

    composable = C.dom[:, None] == C.cod[None, :]  # [g, f]: dom g = cod f
    defined = C.composition != UNDEFINED
    missing = np.argwhere(composable & ~defined)
    if len(missing):
        g, f = (int(v) for v in missing[0])
        raise MissingComposite(
            f"Composite {C.name(g)}∘{C.name(f)} is missing",
            {'g': C.name(g), 'f': C.name(f)},
        )
    extra = np.argwhere(~composable & defined)
    if len(extra):
        g, f = (int(v) for v in extra[0])
        raise BadComposite(
            f"Composite {C.name(g)}∘{C.name(f)} given for a non-composable pair",
            {'g': C.name(g), 'f': C.name(f)},
        )
    for g, f in np.argwhere(defined).tolist():
        r = C.table[g][f]
        if not 0 <= r < n or C.morphisms[r].dom != C.morphisms[f].dom \
                or C.morphisms[r].cod != C.morphisms[g].cod:
            raise BadComposite(
                f"Composite {C.name(g)}∘{C.name(f)} has the wrong domain or codomain",
                {'g': C.name(g), 'f': C.name(f)},
            )

    for m in C.morphisms:
        left = C.table[int(C.identity[m.cod])][m.id]
        right = C.table[m.id][int(C.identity[m.dom])]
        if left != m.id or right != m.id:
            raise BadIdentity(
                f"Identity law fails for {m.name}",
                {'morphism': m.name},
            )

    comp = C.composition
    for f in range(n):
        after = np.array(C.out[C.morphisms[f].cod], dtype=np.int64)
        before = np.array(C.into[C.morphisms[f].dom], dtype=np.int64)
        gf = comp[after, f]
        fh = comp[f, before]
        lhs = comp[gf[:, None], before[None, :]]  # (g∘f)∘h
        rhs = comp[after[:, None], fh[None, :]]   # g∘(f∘h)
        bad = np.argwhere(lhs != rhs)
        if len(bad):
            i, j = (int(v) for v in bad[0])
            g, h = int(after[i]), int(before[j])
            raise NonAssociative(
                f"({C.name(g)}∘{C.name(f)})∘{C.name(h)} != {C.name(g)}∘({C.name(f)}∘{C.name(h)})",
                {'g': C.name(g), 'f': C.name(f), 'h': C.name(h)},
            )
    return C


def from_tables(
    objects: Sequence[str],
    morphisms: Sequence[Tuple[str, int, int]],
    identity: Sequence[int],
    composition: np.ndarray,
    check: bool = True,
) -> FinCategory:
    """Build a category from (name, dom, cod) records and a dense table"""
    records = [Morphism(i, name, dom, cod) for i, (name, dom, cod) in enumerate(morphisms)]
    C = FinCategory(objects, records, identity, composition)
    if check:
        check_category_axioms(C)
    return C


def validate_category(raw: Dict[str, Any]) -> FinCategory:
    """
    Build and validate a category from its JSON document.

    Identities may be omitted from "morphisms" (they are appended in object
    order) and composites with an identity may be omitted from "composition".
    """
    objects = list(raw.get('objects') or [])
    if not objects:
        raise EmptyCategory("A category needs at least one object")
    if len(set(objects)) != len(objects):
        raise CategoryFormatError("Duplicate object names", {'objects': objects})
    obj_index = {name: i for i, name in enumerate(objects)}

    names: List[str] = []
    doms: List[int] = []
    cods: List[int] = []
    for entry in raw.get('morphisms') or []:
        try:
            name, dom, cod = str(entry['id']), entry['dom'], entry['cod']
        except (KeyError, TypeError):
            raise CategoryFormatError(f"Malformed morphism entry {entry!r}", {'entry': str(entry)})
        if dom not in obj_index or cod not in obj_index:
            raise CategoryFormatError(
                f"Morphism {name} refers to an unknown object",
                {'morphism': name, 'dom': dom, 'cod': cod},
            )
        if name in names:
            raise CategoryFormatError(f"Duplicate morphism id {name}", {'morphism': name})
        names.append(name)
        doms.append(obj_index[dom])
        cods.append(obj_index[cod])

    declared = raw.get('identities') or {}
    identity: List[int] = []
    for c, obj in enumerate(objects):
        name = str(declared.get(obj, f"id_{obj}"))
        if name in names:
            identity.append(names.index(name))
        else:
            names.append(name)
            doms.append(c)
            cods.append(c)
            identity.append(len(names) - 1)

    n = len(names)
    index = {name: i for i, name in enumerate(names)}
    table = np.full((n, n), UNDEFINED, dtype=np.int64)
    for entry in raw.get('composition') or []:
        try:
            g, f, r = (index[str(x)] for x in entry)
        except (KeyError, ValueError, TypeError):
            raise CategoryFormatError(
                f"Composition entry {entry!r} names an unknown morphism",
                {'entry': [str(x) for x in entry] if isinstance(entry, list) else str(entry)},
            )
        if table[g, f] != UNDEFINED and table[g, f] != r:
            raise CategoryFormatError(
                f"Conflicting composites for {names[g]}∘{names[f]}",
                {'g': names[g], 'f': names[f]},
            )
        table[g, f] = r

    for m in range(n):
        left, right = identity[cods[m]], identity[doms[m]]
        if table[left, m] == UNDEFINED:
            table[left, m] = m
        if table[m, right] == UNDEFINED:
            table[m, right] = m

    C = from_tables(objects, list(zip(names, doms, cods)), identity, table)
    logger.debug("validated %r", C)
    return C


def opposite(C: FinCategory) -> FinCategory:
    """Swap dom/cod and transpose the composition table"""
    records = [Morphism(m.id, m.name, m.cod, m.dom) for m in C.morphisms]
    return FinCategory(C.objects, records, C.identity.copy(), C.composition.T.copy())


# ---------------------------------------------------------------------------
# Pullbacks
# ---------------------------------------------------------------------------

@dataclass
class PullbackSquare:
    """A chosen pullback of the cospan (f, g), certified against every cone"""
    apex: int
    proj_f: int  # apex → dom f
    proj_g: int  # apex → dom g
    cospan: Tuple[int, int]
    mediators: Dict[Tuple[int, int, int], int] = field(default_factory=dict)

    @property
    def projections(self) -> Tuple[int, int]:
        return self.proj_f, self.proj_g


def cones(C: FinCategory, f: int, g: int) -> List[Tuple[int, int, int]]:
    """All commuting cones (q, a, b) over the cospan, ordered by (q, a, b)"""
    a_dom, b_dom = C.morphisms[f].dom, C.morphisms[g].dom
    result = []
    for q in range(C.n_objects):
        for a in C.hom(q, a_dom):
            fa = C.table[f][a]
            for b in C.hom(q, b_dom):
                if C.table[g][b] == fa:
                    result.append((q, a, b))
    return result


def pullback_squares(C: FinCategory, f: int, g: int, first_only: bool = False) -> List[PullbackSquare]:
    """
    Every pullback square of the cospan (f, g), ordered by (apex, proj_f, proj_g).

    Every cone is checked for a unique mediating morphism.
    """
    if C.morphisms[f].cod != C.morphisms[g].cod:
        raise NotCospan(
            f"{C.name(f)} and {C.name(g)} have different codomains",
            {'f': C.name(f), 'g': C.name(g)},
        )
    all_cones = cones(C, f, g)
    squares = []
    for apex, p1, p2 in all_cones:
        mediators = {}
        for q, a, b in all_cones:
            found = [
                m for m in C.hom(q, apex)
                if C.table[p1][m] == a and C.table[p2][m] == b
            ]
            if len(found) != 1:
                break
            mediators[(q, a, b)] = found[0]
        else:
            squares.append(PullbackSquare(apex, p1, p2, (f, g), mediators))
            if first_only:
                break
    return squares


def find_pullback(C: FinCategory, f: int, g: int) -> Optional[PullbackSquare]:
    """Smallest pullback square of the cospan (f, g), or None"""
    squares = pullback_squares(C, f, g, first_only=True)
    return squares[0] if squares else None


def terminal_object(C: FinCategory) -> Optional[int]:
    for t in range(C.n_objects):
        if all(len(C.hom(c, t)) == 1 for c in range(C.n_objects)):
            return t
    return None


@dataclass
class CartesianStructure:
    """Terminal object and pullback table, or the first obstruction"""
    holds: bool
    terminal: Optional[int]
    pullbacks: Dict[Tuple[int, int], PullbackSquare] = field(default_factory=dict)
    failing_cospan: Optional[Tuple[int, int]] = None

    def __bool__(self) -> bool:
        return self.holds


def is_cartesian(C: FinCategory) -> CartesianStructure:
    terminal = terminal_object(C)
    if terminal is None:
        return CartesianStructure(False, None)
    table = {}
    for f, g in C.cospans():
        square = find_pullback(C, f, g)
        if square is None:
            return CartesianStructure(False, terminal, table, (f, g))
        table[(f, g)] = square
    return CartesianStructure(True, terminal, table)


# ---------------------------------------------------------------------------
# Right Ore / amalgamation
# ---------------------------------------------------------------------------

def has_right_ore(C: FinCategory) -> Verdict:
    """
    Every cospan f, g completes to a square f∘h = g∘k.

    Equivalently the principal sieves generated by f and g meet.
    """
    principal = C.principal_masks
    for f, g in C.cospans():
        if g < f:
            continue
        if not principal[f] & principal[g]:
            return failed(
                f"cospan ({C.name(f)}, {C.name(g)}) has no completion",
                cospan=(C.name(f), C.name(g)), f=f, g=g,
            )
    return passed("every cospan completes")


def has_amalgamation(C: FinCategory) -> Verdict:
    dual = has_right_ore(opposite(C))
    if dual:
        return passed("every span amalgamates")
    f, g = dual.witness['f'], dual.witness['g']
    return failed(
        f"span ({C.name(f)}, {C.name(g)}) has no cocone",
        span=(C.name(f), C.name(g)), f=f, g=g,
    )


def span_amalgamations(C: FinCategory, f: int, g: int) -> List[Tuple[int, int]]:
    """All pairs (h, k) with h∘f = k∘g for a span f: a→b, g: a→c"""
    b, c = C.morphisms[f].cod, C.morphisms[g].cod
    pairs = []
    for h in C.out[b]:
        for k in C.out[c]:
            if C.morphisms[h].cod == C.morphisms[k].cod and C.table[h][f] == C.table[k][g]:
                pairs.append((h, k))
    return pairs


def full_subcategory(C: FinCategory, objects: Sequence[int]) -> Tuple[FinCategory, List[int]]:
    """Full subcategory on `objects`; also returns the kept morphism ids"""
    keep_obj = {c: i for i, c in enumerate(objects)}
    kept = [m.id for m in C.morphisms if m.dom in keep_obj and m.cod in keep_obj]
    position = {f: i for i, f in enumerate(kept)}
    table = np.full((len(kept), len(kept)), UNDEFINED, dtype=np.int64)
    for i, g in enumerate(kept):
        for j, f in enumerate(kept):
            gf = C.table[g][f]
            if gf != UNDEFINED:
                table[i, j] = position[gf]
    records = [(C.name(f), keep_obj[C.morphisms[f].dom], keep_obj[C.morphisms[f].cod]) for f in kept]
    identity = [position[int(C.identity[c])] for c in objects]
    sub = from_tables([C.objects[c] for c in objects], records, identity, table)
    return sub, kept
