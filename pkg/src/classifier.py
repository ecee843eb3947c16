"""
Subobject Classifier of a Finite Site
Ω as the frame of closed sieves per object, its ¬¬-fixed part, the sheaf 1⊔1,
and the De Morgan / Boolean decisions obtained by comparing them.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Union

import numpy as np
import pandas as pd

from src.config import config_value
from src.errors import TheoremViolation, TransitionEscapesFibre
from src.fincat import FinCategory
from src.indlat import InternalLattice, check_pseudo_complements
from src.lattice import (
    FinLattice,
    bits,
    is_boolean,
    is_stone,
    lattice_from_order,
    lee_property,
    regular_elements,
)
from src.sites import (
    FinPresheaf,
    GrothTopology,
    PlusPresheaf,
    Sieve,
    closed_sieves,
    constant_presheaf,
    extend_to_plus,
    is_sheaf,
    pullback_mask,
    sheafify,
)

logger = logging.getLogger(__name__)


class InternalFrame(InternalLattice):
    """Internal lattice whose fibre elements are labelled by closed sieves"""

    def mask(self, c: int, x: int) -> int:
        return self.fibres[c].labels[x].members

    def element(self, c: int, S: Union[Sieve, int]) -> int:
        members = S.members if isinstance(S, Sieve) else int(S)
        return self.fibres[c].index(Sieve(c, members))


def _sieve_order(masks: Sequence[int]) -> np.ndarray:
    n = len(masks)
    return np.array([[masks[a] & ~masks[b] == 0 for b in range(n)] for a in range(n)], dtype=bool)


def omega(C: FinCategory, J: GrothTopology, verify: bool = True) -> InternalFrame:
    """
    Ω(c) = J-closed sieves on c under inclusion, Ω(f) = pullback along f.

    Meets are intersections and joins are closures of unions (both checked);
    with `verify` the result is also checked to be a J-sheaf.

    Raises:
        SizeExceeded when a fibre has more than WORKBENCH_MAX_SIEVES sieves
    """
    limit = config_value('max_sieves')
    fibres: List[FinLattice] = []
    positions: List[Dict[int, int]] = []
    for c in range(C.n_objects):
        masks = closed_sieves(J, c)
        fibre = lattice_from_order([Sieve(c, m) for m in masks], _sieve_order(masks), limit=limit)
        for i in range(fibre.size):
            for j in range(fibre.size):
                if masks[fibre.meet(i, j)] != masks[i] & masks[j] \
                        or masks[fibre.join(i, j)] != J.closure_mask(c, masks[i] | masks[j]):
                    raise TheoremViolation(
                        "Closed-sieve lattice operations are not intersection and closed union",
                        {'object': C.objects[c]},
                    )
        fibres.append(fibre)
        positions.append({m: i for i, m in enumerate(masks)})
        logger.debug("Ω(%s): %d closed sieves", C.objects[c], fibre.size)

    transitions = []
    for m in C.morphisms:
        image = []
        for S in fibres[m.cod].labels:
            pulled = pullback_mask(C, S.members, m.id)
            if pulled not in positions[m.dom]:
                raise TheoremViolation(
                    f"Pullback along {m.name} of a closed sieve is not closed",
                    {'morphism': m.name, 'sieve': S.describe(C)},
                )
            image.append(positions[m.dom][pulled])
        transitions.append(np.array(image, dtype=np.int64))

    result = InternalFrame(C, J, fibres, transitions, name='Ω')
    result.check()
    if verify:
        sheaf = is_sheaf(result.as_presheaf(), J)
        if not sheaf:
            raise TheoremViolation("Ω is not a sheaf", sheaf.witness)
    return result


def heyting_in_omega(
    C: FinCategory,
    J: GrothTopology,
    c: int,
    S: Union[Sieve, int],
    T: Union[Sieve, int],
    frame: Optional[InternalFrame] = None,
) -> Sieve:
    """S ⇒ T = {f : f*S ⊆ f*T}, checked against the implication of Ω(c)"""
    s = S.members if isinstance(S, Sieve) else int(S)
    t = T.members if isinstance(T, Sieve) else int(T)
    result = 0
    for f in C.into[c]:
        if pullback_mask(C, s, f) & ~pullback_mask(C, t, f) == 0:
            result |= 1 << f
    frame = frame or omega(C, J, verify=False)
    expected = frame.mask(c, frame.fibres[c].implies(frame.element(c, s), frame.element(c, t)))
    if expected != result:
        raise TheoremViolation(
            "Sieve implication differs from the lattice implication",
            {'object': C.objects[c], 'S': Sieve(c, s).describe(C), 'T': Sieve(c, t).describe(C)},
        )
    return Sieve(c, result)


def omega_notnot(C: FinCategory, J: GrothTopology, frame: Optional[InternalFrame] = None) -> InternalFrame:
    """
    Ω¬¬(c) = ¬¬-fixed closed sieves, a Boolean algebra with join ¬¬(S∨T).

    Raises:
        TransitionEscapesFibre if a transition of Ω leaves the regular part
    """
    frame = frame or omega(C, J)
    check_pseudo_complements(frame)
    fibres = [regular_elements(F) for F in frame.fibres]
    lookup = [{int(o): i for i, o in enumerate(F.origin)} for F in fibres]
    transitions = []
    for m in C.morphisms:
        image = []
        for x in fibres[m.cod].origin:
            y = frame.transition(m.id, int(x))
            if y not in lookup[m.dom]:
                raise TransitionEscapesFibre(
                    f"Restriction along {m.name} leaves the regular elements",
                    {'morphism': m.name, 'sieve': frame.fibres[m.cod].describe(int(x))},
                )
            image.append(lookup[m.dom][y])
        transitions.append(np.array(image, dtype=np.int64))
    result = InternalFrame(C, J, fibres, transitions, name='Ω¬¬')
    result.check()
    for c, F in enumerate(fibres):
        if not is_boolean(F):
            raise TheoremViolation("Ω¬¬ fibre is not Boolean", {'object': C.objects[c]})
    return result


@dataclass
class TwoPointSheaf:
    """
    The sheaf 1⊔1 with its generators.

    top[c] and bottom[c] are the section indices of ⊤ and ⊥ at c;
    equalizers[c] is the sieve of arrows on which they agree.
    """
    sheaf: PlusPresheaf
    top: List[int]
    bottom: List[int]
    equalizers: List[int] = field(default_factory=list)

    def size(self, c: int) -> int:
        return self.sheaf.size(c)


def coproduct_of_terminals(C: FinCategory, J: GrothTopology) -> TwoPointSheaf:
    """Sheafification of the constant presheaf {⊤, ⊥}"""
    constant = constant_presheaf(C, ['⊤', '⊥'])
    sheaf = sheafify(constant, J)
    verdict = is_sheaf(sheaf, J)
    if not verdict:
        raise TheoremViolation("Sheafified 1⊔1 is not a sheaf", verdict.witness)
    top = [int(sheaf.unit[c][0]) for c in range(C.n_objects)]
    bottom = [int(sheaf.unit[c][1]) for c in range(C.n_objects)]
    equalizers = []
    for c in range(C.n_objects):
        agree = 0
        for f in C.into[c]:
            if sheaf.restrict(f, top[c]) == sheaf.restrict(f, bottom[c]):
                agree |= 1 << f
        for f in bits(agree):
            if not J.empty_covers(C.morphisms[f].dom):
                raise TheoremViolation(
                    "⊤ and ⊥ are not disjoint",
                    {'object': C.objects[c], 'morphism': C.name(f)},
                )
        equalizers.append(agree)
    return TwoPointSheaf(sheaf, top, bottom, equalizers)


@dataclass
class ClassifierReport:
    """Per-object comparison of 1⊔1 with a part of Ω"""
    holds: bool
    rows: List[Dict[str, Any]]
    witness: Dict[str, Any] = field(default_factory=dict)

    def __bool__(self) -> bool:
        return self.holds

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {'holds': self.holds, 'rows': self.rows, 'witness': self.witness}


def _two_points_into(C: FinCategory, J: GrothTopology, target: InternalFrame, label: str) -> ClassifierReport:
    """Extend (⊤, ⊥) ↦ (max, Cl(∅)) along sheafification and test bijectivity"""
    two = coproduct_of_terminals(C, J)
    stage2 = two.sheaf
    stage1 = stage2.base
    presheaf = FinPresheaf(C, [list(F.labels) for F in target.fibres], target.transitions)
    phi = [np.array([target.top(c), target.bottom(c)], dtype=np.int64) for c in range(C.n_objects)]
    phi1 = extend_to_plus(stage1, J, presheaf, phi)
    phi2 = extend_to_plus(stage2, J, presheaf, phi1)

    rows = []
    witness: Dict[str, Any] = {}
    for c in range(C.n_objects):
        image = phi2[c]
        size = target.fibres[c].size
        bijective = len(image) == size and len(set(image.tolist())) == size
        rows.append({
            'object': C.objects[c],
            'coproduct_size': two.size(c),
            f'{label}_size': size,
            'bijective': bijective,
        })
        if not bijective and not witness:
            witness = {'object': C.objects[c], 'coproduct_size': two.size(c), f'{label}_size': size}
    holds = all(row['bijective'] for row in rows)
    return ClassifierReport(holds, rows, witness)


def is_de_morgan_topos(C: FinCategory, J: GrothTopology, frame: Optional[InternalFrame] = None) -> ClassifierReport:
    """1⊔1 → Ω¬¬ is an isomorphism"""
    regular = omega_notnot(C, J, frame)
    report = _two_points_into(C, J, regular, 'regular')
    logger.debug("De Morgan check: %s", report.holds)
    return report


def is_boolean_topos(C: FinCategory, J: GrothTopology, frame: Optional[InternalFrame] = None) -> ClassifierReport:
    """1⊔1 → Ω is an isomorphism"""
    frame = frame or omega(C, J)
    return _two_points_into(C, J, frame, 'omega')


@dataclass
class StoneReport:
    rows: List[Dict[str, Any]]
    de_morgan: bool
    all_stone: bool

    @property
    def divergent(self) -> bool:
        return self.de_morgan != self.all_stone

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def to_dict(self) -> Dict[str, Any]:
        return {
            'objects': self.rows,
            'de_morgan': self.de_morgan,
            'all_stone': self.all_stone,
            'divergent': self.divergent,
        }


def stone_report(C: FinCategory, J: GrothTopology, orders: Sequence[int] = (1, 2)) -> StoneReport:
    """
    Stone, Boolean and Lee checks on every Ω(c), next to the topos-level
    De Morgan verdict. A disagreement between the two is recorded, not raised.
    """
    frame = omega(C, J)
    regular = omega_notnot(C, J, frame)
    rows = []
    for c, F in enumerate(frame.fibres):
        rows.append({
            'object': C.objects[c],
            'omega_size': F.size,
            'regular_size': regular.fibres[c].size,
            'stone': is_stone(F).holds,
            'boolean': is_boolean(F),
            'lee': {r: lee_property(F, r).holds for r in orders},
        })
    de_morgan = is_de_morgan_topos(C, J, frame).holds
    report = StoneReport(rows, de_morgan, all(row['stone'] for row in rows))
    if report.divergent:
        logger.info("Stone fibres and De Morgan verdict diverge on %s", C)
    return report
