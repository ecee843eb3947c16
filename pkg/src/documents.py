"""
JSON Input Documents
Loaders for categories, lattices, topologies, sites, internal lattices and
finite spaces. Every loader validates and raises an InputError subclass with
an actionable message.
"""

import hashlib
import json
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from src.errors import CategoryFormatError, InputError, InternalLatticeError
from src.fincat import FinCategory, validate_category
from src.frames import frame_to_site, space_to_frame
from src.indlat import InternalLattice
from src.lattice import FinLattice, downset_lattice, lattice_from_pairs, poset_from_pairs
from src.sites import GrothTopology, generated_sieve, saturate, trivial_topology

logger = logging.getLogger(__name__)


def _mapping(value: Any, what: str) -> Dict[str, Any]:
    if not isinstance(value, dict):
        raise InputError(f"{what} must be a JSON object", {'found': type(value).__name__})
    return value


def _listing(value: Any, what: str) -> list:
    if not isinstance(value, list):
        raise InputError(f"{what} must be a JSON array", {'found': type(value).__name__})
    return value


def _labels(value: Any, what: str) -> list:
    labels = _listing(value, what)
    for x in labels:
        if isinstance(x, bool) or not isinstance(x, (str, int)):
            raise InputError(f"{what} must be strings or integers", {'entry': str(x)})
    return labels


def _pairs(value: Any, what: str) -> list:
    pairs = []
    for p in _listing(value, what):
        if not isinstance(p, list) or len(p) != 2 or not all(isinstance(x, (str, int)) for x in p):
            raise InputError(f"{what} entries must be [a, b] pairs", {'entry': str(p)})
        pairs.append((p[0], p[1]))
    return pairs


def read_document(path: Union[str, Path]) -> Dict[str, Any]:
    path = Path(path)
    if not path.exists():
        raise InputError(f"Input file not found: {path}", {'path': str(path)})
    try:
        doc = json.loads(path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc.msg} (line {exc.lineno})", {'path': str(path)})
    return _mapping(doc, f"Top level of {path}")


def document_digest(doc: Any) -> str:
    """sha256 of the canonical JSON form"""
    canonical = json.dumps(doc, sort_keys=True, separators=(',', ':'), ensure_ascii=False)
    return hashlib.sha256(canonical.encode('utf-8')).hexdigest()


def load_category(doc: Dict[str, Any]) -> FinCategory:
    doc = _mapping(doc, "Category document")
    if 'category' in doc:
        doc = _mapping(doc['category'], "\"category\"")
    _labels(doc.get('objects', []), "\"objects\"")
    for key in ('morphisms', 'composition'):
        _listing(doc.get(key, []), f"\"{key}\"")
    if 'identities' in doc:
        _mapping(doc['identities'], "\"identities\"")
    return validate_category(doc)


def load_lattice(doc: Dict[str, Any]) -> FinLattice:
    """
    Either {"elements": [...], "leq": [[a, b], ...]} (cover or order pairs) or
    {"downsets_of_poset": {"elements": [...], "leq": [...]}}, or a space document.
    """
    doc = _mapping(doc, "Lattice document")
    if 'lattice' in doc:
        doc = _mapping(doc['lattice'], "\"lattice\"")
    if 'points' in doc:
        _labels(doc['points'], "\"points\"")
        for U in _listing(doc.get('opens', []), "\"opens\""):
            _labels(U, "Each open")
        return space_to_frame(doc)
    if 'downsets_of_poset' in doc:
        inner = _mapping(doc['downsets_of_poset'], "\"downsets_of_poset\"")
        if 'elements' not in inner:
            raise InputError("\"downsets_of_poset\" needs \"elements\"")
        return downset_lattice(poset_from_pairs(
            _labels(inner['elements'], "\"elements\""), _pairs(inner.get('leq', []), "\"leq\"")))
    if 'elements' not in doc:
        raise InputError("Lattice document needs \"elements\" or \"downsets_of_poset\"")
    return lattice_from_pairs(_labels(doc['elements'], "\"elements\""), _pairs(doc.get('leq', []), "\"leq\""))


def load_topology(C: FinCategory, raw: Union[str, Dict[str, Any], None]) -> GrothTopology:
    """
    "trivial" (or absent), or {"basis": {object: [[morphism, ...], ...]}}:
    each family generates a sieve and the topology is the least one making
    them cover.
    """
    if raw in (None, 'trivial'):
        return trivial_topology(C)
    if not isinstance(raw, dict) or 'basis' not in raw:
        raise CategoryFormatError(
            "Topology must be \"trivial\" or {\"basis\": {object: [[morphism, ...]]}}",
            {'topology': str(raw)},
        )
    coverage: Dict[int, list] = {}
    for obj, families in _mapping(raw['basis'], "\"basis\"").items():
        c = C.object_id(obj)
        coverage[c] = [
            generated_sieve(C, c, [C.morphism_id(name) for name in _labels(family, "A covering family")])
            for family in _listing(families, f"Covering families of {obj}")
        ]
    return saturate(C, coverage, kind='basis')


@dataclass
class Site:
    category: FinCategory
    topology: GrothTopology
    frame: Optional[FinLattice] = None


def load_site(doc: Dict[str, Any]) -> Site:
    """
    {"category": ..., "topology": ...} or {"frame": <lattice>, "topology": "joins"};
    a bare category document is read with the trivial topology.
    """
    doc = _mapping(doc, "Site document")
    if 'frame' in doc:
        if doc.get('topology', 'joins') != 'joins':
            raise InputError("Frame sites carry the joins topology", {'topology': str(doc.get('topology'))})
        L = load_lattice(doc['frame'])
        site = frame_to_site(L)
        return Site(site.category, site.topology, L)
    C = load_category(doc)
    return Site(C, load_topology(C, doc.get('topology')))


def load_internal_lattice(doc: Dict[str, Any]) -> InternalLattice:
    """
    {"base": <category>, "topology": <topology>, "fibres": {object: <lattice>},
     "transitions": {morphism: {element of fibre(cod): element of fibre(dom)}}}

    "site": <site> is accepted in place of "base" and "topology".
    Identity transitions may be omitted.
    """
    doc = _mapping(doc, "Internal lattice document")
    if 'base' in doc:
        base = _mapping(doc['base'], "\"base\"")
        site = load_site({**base, 'topology': doc.get('topology', base.get('topology'))})
    elif 'site' in doc:
        site = load_site(doc['site'])
    else:
        raise InternalLatticeError("Internal lattice document needs \"base\"")
    C = site.category
    given_fibres = _mapping(doc.get('fibres', {}), "\"fibres\"")
    fibres = []
    for obj in C.objects:
        if obj not in given_fibres:
            raise InternalLatticeError(f"No fibre given for object {obj}", {'object': obj})
        fibres.append(load_lattice(given_fibres[obj]))
    given = _mapping(doc.get('transitions', {}), "\"transitions\"")
    transitions = []
    for m in C.morphisms:
        src, dst = fibres[m.cod], fibres[m.dom]
        if m.name not in given:
            if C.is_identity(m.id):
                transitions.append(np.arange(src.size, dtype=np.int64))
                continue
            raise InternalLatticeError(f"No transition given for {m.name}", {'morphism': m.name})
        table = _mapping(given[m.name], f"Transition of {m.name}")
        _labels(list(table.values()), f"Values of the transition of {m.name}")
        try:
            transitions.append(np.array(
                [dst.index(table[str(label)]) for label in src.labels], dtype=np.int64))
        except KeyError as exc:
            raise InternalLatticeError(
                f"Transition of {m.name} misses element {exc.args[0]}",
                {'morphism': m.name},
            )
    return InternalLattice(C, site.topology, fibres, transitions, name=doc.get('name', '')).check()
