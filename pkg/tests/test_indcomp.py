"""
Test Suite for the Bounded Ind-Completion
Validates directed diagrams, ind-hom sets, composition and the bounded
amalgamation search.
"""

import unittest

import numpy as np

from src.catalog import chain_category, cospan, span, t1
from src.errors import DiagramError
from src.indcomp import (
    AmalgamationStatus,
    IndObject,
    diagrams,
    embed,
    embed_morphism,
    extract_base_failure,
    factor_through_base,
    identity_morphism,
    ind_amalgamate,
    ind_compose,
    ind_hom,
    ind_isomorphic,
    presentation_size,
)
from src.lattice import FinPoset


def two_chain_diagram(C, objects, arrow):
    index = FinPoset(['0', '1'], np.array([[True, True], [False, True]]))
    connecting = {
        (0, 0): int(C.identity[objects[0]]),
        (1, 1): int(C.identity[objects[1]]),
        (0, 1): arrow,
    }
    return IndObject(C, index, list(objects), connecting)


class TestIndObjects(unittest.TestCase):
    """Test diagram validation and enumeration"""

    def test_embedded_object(self):
        C = cospan()
        A = embed(C, C.object_id('z')).validate()
        self.assertEqual(A.size, 1)
        self.assertEqual(A.describe(), {'objects': ['z'], 'connecting': {}})

    def test_chain_diagram(self):
        C = chain_category(2)
        A = two_chain_diagram(C, [0, 1], C.morphism_id('0<1')).validate()
        self.assertEqual(A.maximum(), 1)
        self.assertEqual(A.describe()['connecting'], {'0≤1': '0<1'})

    def test_index_must_be_directed(self):
        C = t1()
        index = FinPoset(['0', '1'], np.eye(2, dtype=bool))
        A = IndObject(C, index, [0, 0], {(0, 0): 0, (1, 1): 0})
        with self.assertRaises(DiagramError):
            A.validate()

    def test_mistyped_connecting_morphism(self):
        C = cospan()
        A = two_chain_diagram(C, [C.object_id('x'), C.object_id('z')], C.morphism_id('g'))
        with self.assertRaises(DiagramError):
            A.validate()

    def test_diagrams_over_point(self):
        self.assertEqual(len(list(diagrams(t1(), 1))), 1)
        self.assertEqual(len(list(diagrams(t1(), 2))), 1)

    def test_enumerated_diagrams_are_valid(self):
        C = cospan()
        for D in diagrams(C, 2):
            D.validate()


class TestIndMorphisms(unittest.TestCase):
    """Test ind-hom sets and composition"""

    def test_hom_between_embedded_objects(self):
        C = cospan()
        homs = ind_hom(embed(C, C.object_id('x')), embed(C, C.object_id('z')))
        self.assertEqual(len(homs), 1)
        self.assertEqual(homs[0], embed_morphism(C, C.morphism_id('f')))

    def test_no_hom_backwards(self):
        C = cospan()
        self.assertEqual(ind_hom(embed(C, C.object_id('z')), embed(C, C.object_id('x'))), [])

    def test_identity_is_neutral(self):
        C = cospan()
        f = embed_morphism(C, C.morphism_id('f'))
        self.assertEqual(ind_compose(identity_morphism(f.target), f), f)
        self.assertEqual(ind_compose(f, identity_morphism(f.source)), f)

    def test_composition_needs_matching_diagrams(self):
        C = cospan()
        f = embed_morphism(C, C.morphism_id('f'))
        with self.assertRaises(DiagramError):
            ind_compose(f, f)

    def test_chain_diagram_is_its_colimit(self):
        C = chain_category(2)
        A = two_chain_diagram(C, [0, 1], C.morphism_id('0<1'))
        self.assertTrue(ind_isomorphic(A, embed(C, 1)))
        self.assertFalse(ind_isomorphic(A, embed(C, 0)))
        self.assertEqual(presentation_size(A), 1)


class TestAmalgamation(unittest.TestCase):
    """Test the bounded amalgamation search and base factorisation"""

    def test_span_has_no_amalgamation(self):
        C = span()
        f, g = C.morphism_id('f'), C.morphism_id('g')
        result = ind_amalgamate(embed_morphism(C, f), embed_morphism(C, g), bound=2)
        self.assertIs(result.status, AmalgamationStatus.NONE_WITHIN_BOUND)
        self.assertGreater(result.searched, 0)
        self.assertNotIn('target', result.to_dict())
        failure = extract_base_failure(C, f, g)
        self.assertTrue(failure.absolute)
        self.assertEqual(failure.to_dict()['span'], ['f', 'g'])

    def test_cospan_leg_and_identity(self):
        C = cospan()
        f, idx = C.morphism_id('f'), C.morphism_id('id_x')
        result = ind_amalgamate(embed_morphism(C, f), embed_morphism(C, idx), bound=2)
        self.assertTrue(result.found)
        self.assertEqual(result.target.describe()['objects'], ['z'])
        h, k = factor_through_base(f, idx, result)
        self.assertEqual(C.compose(h, f), C.compose(k, idx))
        self.assertEqual((C.name(h), C.name(k)), ('id_z', 'f'))

    def test_factor_needs_a_result(self):
        C = span()
        f, g = C.morphism_id('f'), C.morphism_id('g')
        result = ind_amalgamate(embed_morphism(C, f), embed_morphism(C, g), bound=1)
        with self.assertRaises(DiagramError):
            factor_through_base(f, g, result)

    def test_legs_need_a_common_source(self):
        C = cospan()
        with self.assertRaises(DiagramError):
            ind_amalgamate(embed_morphism(C, C.morphism_id('f')), embed_morphism(C, C.morphism_id('g')), bound=1)


def run_tests():
    """Run all tests and print results"""
    loader = unittest.TestLoader()
    suite = loader.loadTestsFromModule(__import__(__name__))
    runner = unittest.TextTestRunner(verbosity=2)
    result = runner.run(suite)

    print("\n" + "="*70)
    print("TEST SUMMARY")
    print("="*70)
    print(f"Tests run: {result.testsRun}")
    print(f"Successes: {result.testsRun - len(result.failures) - len(result.errors)}")
    print(f"Failures: {len(result.failures)}")
    print(f"Errors: {len(result.errors)}")

    if result.wasSuccessful():
        print("\n✅ ALL TESTS PASSED - Ind-completion is working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
