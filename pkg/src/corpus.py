"""
Corpus Runner
Fans property checks out over the enumerated categories and posets with a
worker pool. Each task is a (check, kind, document) triple so that workers
rebuild their inputs from plain JSON; rows come back in submission order and
are keyed by the digest of the input document.
"""

import logging
import time
from dataclasses import dataclass, field
from multiprocessing import Pool
from typing import Any, Callable, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import pandas as pd

from src.classifier import is_de_morgan_topos, omega, omega_notnot
from src.config import config_value
from src.documents import document_digest
from src.enumeration import enumerate_categories, enumerate_posets
from src.errors import CheckFailure, InputError
from src.fincat import FinCategory, has_amalgamation, has_right_ore, is_cartesian, validate_category
from src.frames import FrameSite, cross_check_gleason, frame_to_site, space_predicates
from src.gleason import (
    atoms_category,
    check_idl_coproduct_is_omega,
    check_minimality,
    check_rho_regular_iso,
    gleason_cover,
    gleason_is_de_morgan,
    is_equivalence,
)
from src.indcomp import embed_morphism, extract_base_failure, ind_amalgamate
from src.indlat import (
    check_loc_ideal_equivalence,
    check_pullback_independence,
    coherent_coverage,
    fibred_ideal_completion,
    pointwise_ideal_completion,
    relative_de_morgan,
    surjectivity_verdict,
    validate_internal_locale,
)
from src.lattice import (
    FinPoset,
    check_heyting_identities,
    down_algebra,
    downset_lattice,
    is_boolean,
    is_regular_frame,
    is_stone,
    poset_from_pairs,
)
from src.sites import GrothTopology, trivial_topology

logger = logging.getLogger(__name__)

CATEGORY_CHECKS = (
    'ore-vs-demorgan', 'gleason', 'equivalence', 'idl-coproduct',
    'loc-ideal', 'relative-dml', 'certificates', 'ind-amalg', 'atoms',
)
POSET_CHECKS = ('stone', 'down-stone', 'frames', 'regular')
FRAME_SITE_CHECKS = ('gleason', 'equivalence', 'idl-coproduct')
ALL_CHECKS = CATEGORY_CHECKS + POSET_CHECKS

FRAME_CROSS_CHECK_LIMIT = 16
FRAME_SITE_LIMIT = 8

Task = Tuple[str, str, Dict[str, Any]]


# ---------------------------------------------------------------------------
# Category checks
# ---------------------------------------------------------------------------

def _ore_vs_demorgan(C: FinCategory) -> Dict[str, Any]:
    J = trivial_topology(C)
    de_morgan = is_de_morgan_topos(C, J).holds
    ore = has_right_ore(C).holds
    return {'holds': de_morgan == ore, 'de_morgan': de_morgan, 'right_ore': ore}


def _require_cartesian(C: FinCategory) -> Optional[Dict[str, Any]]:
    if not is_cartesian(C):
        return {'holds': None, 'skipped': 'not cartesian'}
    return None


def _site(subject: Union[FinCategory, FrameSite]) -> Tuple[FinCategory, GrothTopology]:
    if isinstance(subject, FrameSite):
        return subject.category, subject.topology
    return subject, trivial_topology(subject)


def _gleason(subject: Union[FinCategory, FrameSite]) -> Dict[str, Any]:
    C, J = _site(subject)
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    G = gleason_cover(C, J)
    verdicts = {
        'de_morgan': gleason_is_de_morgan(G, strict=False).holds,
        'minimal': check_minimality(G, strict=False).holds,
        'rho_regular_iso': check_rho_regular_iso(G, strict=False).holds,
        'surjective': surjectivity_verdict(G.omega_nn, G.relative).verdict,
    }
    return {'holds': all(verdicts.values()), **verdicts}


def _equivalence(subject: Union[FinCategory, FrameSite]) -> Dict[str, Any]:
    C, J = _site(subject)
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    G = gleason_cover(C, J)
    equivalence = is_equivalence(G, strict=False)
    de_morgan = is_de_morgan_topos(C, J, G.omega).holds
    return {'holds': equivalence == de_morgan, 'equivalence': equivalence, 'de_morgan': de_morgan}


def _idl_coproduct(subject: Union[FinCategory, FrameSite]) -> Dict[str, Any]:
    C, J = _site(subject)
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    return {'holds': check_idl_coproduct_is_omega(C, J, strict=False).holds}


def _locales(C: FinCategory):
    J = trivial_topology(C)
    frame = omega(C, J)
    return {
        'omega': validate_internal_locale(frame),
        'omega_nn': validate_internal_locale(omega_notnot(C, J, frame)),
    }


def _loc_ideal(C: FinCategory) -> Dict[str, Any]:
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    row = {name: bool(check_loc_ideal_equivalence(L)) for name, L in _locales(C).items()}
    return {'holds': all(row.values()), **row}


def _relative_dml(C: FinCategory) -> Dict[str, Any]:
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    row: Dict[str, Any] = {'holds': True}
    for name, L in _locales(C).items():
        law = relative_de_morgan(L)
        stone = all(is_stone(F).holds for F in L.fibres)
        row[name] = law
        row['holds'] = row['holds'] and law == stone
    return row


def _certificates(C: FinCategory) -> Dict[str, Any]:
    skipped = _require_cartesian(C)
    if skipped:
        return skipped
    row: Dict[str, Any] = {}
    for name, L in _locales(C).items():
        row[name] = check_pullback_independence(L).holds
        pointwise = pointwise_ideal_completion(L)
        row[f'{name}_ideals'] = all(pointwise.certificates.values())
        fibred = fibred_ideal_completion(L, coherent_coverage(L))
        row[f'{name}_fibred'] = all(fibred.certificates.values())
    return {'holds': all(row.values()), **row}


def _ind_amalg(C: FinCategory) -> Dict[str, Any]:
    amalg = has_amalgamation(C)
    bound = config_value('max_diagram_size')
    if amalg:
        spans = [(f, g) for f, g in _spans(C)]
        found = all(ind_amalgamate(embed_morphism(C, f), embed_morphism(C, g), bound=1).found for f, g in spans)
        return {'holds': found, 'amalgamation': True, 'spans': len(spans)}
    f, g = amalg.witness['f'], amalg.witness['g']
    failure = extract_base_failure(C, f, g)
    result = ind_amalgamate(embed_morphism(C, f), embed_morphism(C, g), bound=bound)
    return {
        'holds': failure.absolute and not result.found,
        'amalgamation': False,
        'span': list(failure.span),
        'searched': result.searched,
    }


def _spans(C: FinCategory) -> Iterator[Tuple[int, int]]:
    for f in range(C.n_morphisms):
        for g in range(f, C.n_morphisms):
            if C.morphisms[f].dom == C.morphisms[g].dom:
                yield f, g


def _atoms(C: FinCategory) -> Dict[str, Any]:
    atoms = atoms_category(C, trivial_topology(C), strict=False)
    return {
        'holds': atoms.right_ore.holds and atoms.irreducible and atoms.split_epi is not False,
        'right_ore': atoms.right_ore.holds,
        'irreducible': atoms.irreducible,
        'split_epi': atoms.split_epi,
        'atoms': len(atoms.objects),
    }


# ---------------------------------------------------------------------------
# Poset checks (downset frames)
# ---------------------------------------------------------------------------

def _stone(P: FinPoset) -> Dict[str, Any]:
    H = downset_lattice(P)
    identities = check_heyting_identities(H).holds
    # is_stone raises CriteriaDisagree if its two criteria differ
    stone = is_stone(H).holds
    return {'holds': identities, 'stone': stone, 'size': H.size}


def _down_stone(P: FinPoset) -> Dict[str, Any]:
    H = downset_lattice(P)
    stone = is_stone(H).holds
    local = all(is_stone(down_algebra(H, x)).holds for x in range(H.size))
    return {'holds': stone == local, 'stone': stone, 'size': H.size}


def _frames(P: FinPoset) -> Dict[str, Any]:
    H = downset_lattice(P)
    if H.size > FRAME_CROSS_CHECK_LIMIT:
        return {'holds': None, 'skipped': f'{H.size} elements'}
    return {'holds': cross_check_gleason(H), 'size': H.size}


def _regular(P: FinPoset) -> Dict[str, Any]:
    H = downset_lattice(P)
    predicates = space_predicates(H)
    regular = is_regular_frame(H).holds
    holds = (not regular or is_boolean(H)) and predicates['idl_omega_fixed'] == predicates['almost_discrete']
    return {'holds': holds, **predicates}


CHECKS: Dict[str, Callable[[Any], Dict[str, Any]]] = {
    'ore-vs-demorgan': _ore_vs_demorgan,
    'gleason': _gleason,
    'equivalence': _equivalence,
    'idl-coproduct': _idl_coproduct,
    'loc-ideal': _loc_ideal,
    'relative-dml': _relative_dml,
    'certificates': _certificates,
    'ind-amalg': _ind_amalg,
    'atoms': _atoms,
    'stone': _stone,
    'down-stone': _down_stone,
    'frames': _frames,
    'regular': _regular,
}


def poset_document(P: FinPoset) -> Dict[str, Any]:
    pairs = [[P.labels[a], P.labels[b]] for a in range(P.size) for b in range(P.size) if a != b and P.leq[a, b]]
    return {'elements': list(P.labels), 'leq': pairs}


def _frame_site_task(check: str, doc: Dict[str, Any]) -> Dict[str, Any]:
    """Site check on the downset frame of a poset under the joins topology"""
    H = downset_lattice(poset_from_pairs(doc['elements'], [tuple(p) for p in doc['leq']]))
    if H.size > FRAME_SITE_LIMIT:
        return {'holds': None, 'skipped': f'{H.size} elements'}
    return {**CHECKS[check](frame_to_site(H)), 'frame_size': H.size}


def run_task(task: Task) -> Dict[str, Any]:
    """Worker entry point; never raises"""
    check, kind, doc = task
    key = document_digest(doc)[:16]
    started = time.perf_counter()
    try:
        if kind == 'category':
            result = CHECKS[check](validate_category(doc))
        elif kind == 'frame':
            result = _frame_site_task(check, doc)
        else:
            result = CHECKS[check](poset_from_pairs(doc['elements'], [tuple(p) for p in doc['leq']]))
    except CheckFailure as exc:
        result = {'holds': False, 'error': type(exc).__name__, 'message': str(exc)}
    except InputError as exc:
        result = {'holds': None, 'skipped': f"{type(exc).__name__}: {exc}"}
    return {
        'check': check,
        'kind': kind,
        'input': key,
        'size': _size(kind, doc),
        **result,
        'seconds': round(time.perf_counter() - started, 4),
    }


def _size(kind: str, doc: Dict[str, Any]) -> str:
    if kind == 'category':
        return f"{len(doc['objects'])}/{len(doc['morphisms'])}"
    return str(len(doc['elements']))


def build_tasks(checks: Iterable[str], max_objects: int, max_morphisms: int, max_elements: int) -> List[Task]:
    checks = list(checks)
    tasks: List[Task] = []
    if any(c in CATEGORY_CHECKS for c in checks):
        categories = [C.to_dict() for C in enumerate_categories(max_objects, max_morphisms)]
        logger.info("corpus: %d categories", len(categories))
        tasks.extend((c, 'category', doc) for c in checks if c in CATEGORY_CHECKS for doc in categories)
    if any(c in POSET_CHECKS for c in checks):
        posets = [poset_document(P) for P in enumerate_posets(max_elements)]
        logger.info("corpus: %d posets", len(posets))
        tasks.extend((c, 'poset', doc) for c in checks if c in POSET_CHECKS for doc in posets)
    frame_checks = [c for c in checks if c in FRAME_SITE_CHECKS]
    if frame_checks:
        frames = [poset_document(P) for P in enumerate_posets(max_elements)]
        logger.info("corpus: %d frame sites", len(frames))
        tasks.extend((c, 'frame', doc) for c in frame_checks for doc in frames)
    return tasks


@dataclass
class CorpusResult:
    rows: List[Dict[str, Any]] = field(default_factory=list)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def summary(self) -> pd.DataFrame:
        frame = self.to_frame()
        if frame.empty:
            return pd.DataFrame(columns=['check', 'checked', 'passed', 'failed', 'skipped'])
        holds = frame['holds']
        frame = frame.assign(
            checked=holds.notna(),
            passed=holds.eq(True),
            failed=holds.eq(False),
            skipped=holds.isna(),
        )
        return (
            frame.groupby('check', sort=False)[['checked', 'passed', 'failed', 'skipped']]
            .sum()
            .astype(int)
            .reset_index()
        )

    @property
    def failures(self) -> List[Dict[str, Any]]:
        return [row for row in self.rows if row.get('holds') is False]

    def verdicts(self) -> Dict[str, Dict[str, Any]]:
        """Rows without timings, keyed by check and input digest"""
        table: Dict[str, Dict[str, Any]] = {}
        for row in self.rows:
            body = {k: v for k, v in row.items() if k not in ('check', 'input', 'seconds')}
            table.setdefault(row['check'], {})[row['input']] = body
        return table


def run_corpus(tasks: List[Task], workers: Optional[int] = None) -> CorpusResult:
    workers = workers or config_value('workers')
    result = CorpusResult()
    if workers <= 1 or len(tasks) < 2:
        result.rows = [run_task(task) for task in tasks]
        return result
    with Pool(workers) as pool:
        for done, row in enumerate(pool.imap(run_task, tasks, chunksize=4), start=1):
            result.rows.append(row)
            if done % 100 == 0:
                logger.info("corpus: %d/%d tasks", done, len(tasks))
    return result
