"""
Named Small Categories and Lattices
The fixed structures used by fixtures, the corpus runner and the tests.
"""

from typing import Any, Dict, List

import numpy as np

from src.fincat import FinCategory, validate_category
from src.lattice import (
    FinLattice,
    FinPoset,
    chain_lattice,
    downset_lattice,
    lattice_from_pairs,
    poset_from_pairs,
    powerset_lattice,
)

CATEGORY_DOCUMENTS: Dict[str, Dict[str, Any]] = {
    't1': {'objects': ['*']},
    'cospan': {
        'objects': ['x', 'y', 'z'],
        'morphisms': [
            {'id': 'f', 'dom': 'x', 'cod': 'z'},
            {'id': 'g', 'dom': 'y', 'cod': 'z'},
        ],
    },
    'span': {
        'objects': ['z', 'x', 'y'],
        'morphisms': [
            {'id': 'f', 'dom': 'z', 'cod': 'x'},
            {'id': 'g', 'dom': 'z', 'cod': 'y'},
        ],
    },
    'discrete2': {'objects': ['a', 'b']},
    'chain2': {
        'objects': ['0', '1'],
        'morphisms': [{'id': 'u', 'dom': '0', 'cod': '1'}],
    },
    # two parallel arrows merged by a terminal map
    'square': {
        'objects': ['a', 'b', 'c', 't'],
        'morphisms': [
            {'id': 'p', 'dom': 'a', 'cod': 'b'},
            {'id': 'q', 'dom': 'a', 'cod': 'c'},
            {'id': 'r', 'dom': 'b', 'cod': 't'},
            {'id': 's', 'dom': 'c', 'cod': 't'},
            {'id': 'd', 'dom': 'a', 'cod': 't'},
        ],
        'composition': [['r', 'p', 'd'], ['s', 'q', 'd']],
    },
}


def named_category(name: str) -> FinCategory:
    return validate_category(CATEGORY_DOCUMENTS[name])


def t1() -> FinCategory:
    return named_category('t1')


def cospan() -> FinCategory:
    return named_category('cospan')


def span() -> FinCategory:
    return named_category('span')


def discrete(n: int) -> FinCategory:
    return validate_category({'objects': [f"o{i}" for i in range(n)]})


def chain_category(n: int) -> FinCategory:
    """Objects 0 < 1 < ... < n-1 with one arrow i → j for i < j"""
    objects = [str(i) for i in range(n)]
    morphisms = [
        {'id': f"{i}<{j}", 'dom': str(i), 'cod': str(j)}
        for i in range(n) for j in range(i + 1, n)
    ]
    composition = [
        [f"{j}<{k}", f"{i}<{j}", f"{i}<{k}"]
        for i in range(n) for j in range(i + 1, n) for k in range(j + 1, n)
    ]
    return validate_category({'objects': objects, 'morphisms': morphisms, 'composition': composition})


def poset_category(P: FinPoset) -> FinCategory:
    """One arrow a → b whenever a ≤ b"""
    n = P.size
    names = [str(label) for label in P.labels]
    morphisms = [
        {'id': f"{names[a]}≤{names[b]}", 'dom': names[a], 'cod': names[b]}
        for a in range(n) for b in range(n) if a != b and P.leq[a, b]
    ]
    composition = [
        [f"{names[b]}≤{names[c]}", f"{names[a]}≤{names[b]}", f"{names[a]}≤{names[c]}"]
        for a in range(n) for b in range(n) for c in range(n)
        if len({a, b, c}) == 3 and P.leq[a, b] and P.leq[b, c]
    ]
    return validate_category({'objects': names, 'morphisms': morphisms, 'composition': composition})


def fork() -> FinLattice:
    """∅ < {f}, {g} < {f,g} < max"""
    return lattice_from_pairs(
        ['0', 'f', 'g', 'fg', '1'],
        [('0', 'f'), ('0', 'g'), ('f', 'fg'), ('g', 'fg'), ('fg', '1')],
    )


def square_lattice() -> FinLattice:
    return powerset_lattice(['a', 'b'])


def three_chain() -> FinLattice:
    return chain_lattice(3)


def pentagon_poset() -> FinPoset:
    """N5: not distributive"""
    return poset_from_pairs(['0', 'a', 'b', 'c', '1'], [('0', 'a'), ('a', 'b'), ('b', '1'), ('0', 'c'), ('c', '1')])


def diamond_poset() -> FinPoset:
    """M3: not distributive"""
    return poset_from_pairs(['0', 'a', 'b', 'c', '1'], [('0', x) for x in 'abc'] + [(x, '1') for x in 'abc'])


def vee_downsets() -> FinLattice:
    """Downsets of the poset with two minimal elements below a common top"""
    return downset_lattice(poset_from_pairs(['a', 'b', 't'], [('a', 't'), ('b', 't')]))


def frames() -> Dict[str, FinLattice]:
    return {
        'two_chain': chain_lattice(2),
        'three_chain': three_chain(),
        'square': square_lattice(),
        'fork': fork(),
        'cube': powerset_lattice(['a', 'b', 'c']),
    }


def corpus_categories() -> List[str]:
    return sorted(CATEGORY_DOCUMENTS)
