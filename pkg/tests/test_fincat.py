"""
Test Suite for Finite Categories
Validates category documents, pullbacks, the right Ore condition and amalgamation.
"""

import unittest

from src.catalog import chain_category, cospan, named_category, span, t1
from src.errors import (
    BadComposite,
    CategoryFormatError,
    EmptyCategory,
    MissingComposite,
    NonAssociative,
    NotCospan,
)
from src.fincat import (
    find_pullback,
    full_subcategory,
    has_amalgamation,
    has_right_ore,
    is_cartesian,
    opposite,
    pullback_squares,
    span_amalgamations,
    validate_category,
)


class TestValidateCategory(unittest.TestCase):
    """Test category documents and the axiom checks"""

    def test_identities_are_appended(self):
        C = cospan()
        self.assertEqual(C.n_morphisms, 5)
        self.assertEqual([m.name for m in C.morphisms], ['f', 'g', 'id_x', 'id_y', 'id_z'])
        self.assertEqual(C.name(int(C.identity[C.object_id('z')])), 'id_z')

    def test_composition_with_identities_is_filled_in(self):
        C = cospan()
        f = C.morphism_id('f')
        self.assertEqual(C.compose(C.morphism_id('id_z'), f), f)
        self.assertEqual(C.compose(f, C.morphism_id('id_x')), f)

    def test_empty_category_rejected(self):
        with self.assertRaises(EmptyCategory):
            validate_category({'objects': []})

    def test_unknown_object_rejected(self):
        with self.assertRaises(CategoryFormatError):
            validate_category({'objects': ['a'], 'morphisms': [{'id': 'f', 'dom': 'a', 'cod': 'b'}]})

    def test_missing_composite(self):
        doc = {
            'objects': ['0', '1', '2'],
            'morphisms': [{'id': 'u', 'dom': '0', 'cod': '1'}, {'id': 'v', 'dom': '1', 'cod': '2'}],
        }
        with self.assertRaises(MissingComposite) as ctx:
            validate_category(doc)
        self.assertEqual(ctx.exception.witness, {'g': 'v', 'f': 'u'})

    def test_composite_of_non_composable_pair(self):
        doc = dict(named_category('cospan').to_dict())
        doc['composition'] = doc['composition'] + [['f', 'g', 'f']]
        with self.assertRaises(BadComposite):
            validate_category(doc)

    def test_non_associative_table(self):
        doc = {
            'objects': ['*'],
            'morphisms': [{'id': 'a', 'dom': '*', 'cod': '*'}, {'id': 'b', 'dom': '*', 'cod': '*'}],
            'composition': [['a', 'a', 'a'], ['a', 'b', 'a'], ['b', 'a', 'b'], ['b', 'b', 'a']],
        }
        with self.assertRaises(NonAssociative):
            validate_category(doc)

    def test_round_trip_through_document(self):
        C = named_category('square')
        self.assertEqual(validate_category(C.to_dict()), C)

    def test_opposite_swaps_direction(self):
        C = cospan()
        op = opposite(C)
        f = op.morphism_id('f')
        self.assertEqual(op.objects[op.morphisms[f].dom], 'z')
        self.assertEqual(op.objects[op.morphisms[f].cod], 'x')


class TestPullbacks(unittest.TestCase):
    """Test pullback squares and cartesian structure"""

    def test_terminal_category_is_cartesian(self):
        self.assertTrue(is_cartesian(t1()).holds)

    def test_cospan_has_no_pullback_of_its_legs(self):
        C = cospan()
        f, g = C.morphism_id('f'), C.morphism_id('g')
        self.assertIsNone(find_pullback(C, f, g))
        structure = is_cartesian(C)
        self.assertFalse(structure.holds)
        self.assertEqual(structure.failing_cospan, (f, g))

    def test_span_has_no_terminal_object(self):
        structure = is_cartesian(span())
        self.assertFalse(structure)
        self.assertIsNone(structure.terminal)

    def test_chain_is_cartesian(self):
        self.assertTrue(is_cartesian(chain_category(3)).holds)

    def test_square_pullback(self):
        C = named_category('square')
        square = find_pullback(C, C.morphism_id('r'), C.morphism_id('s'))
        self.assertIsNotNone(square)
        self.assertEqual(C.objects[square.apex], 'a')
        self.assertEqual((C.name(square.proj_f), C.name(square.proj_g)), ('p', 'q'))

    def test_pullback_needs_a_cospan(self):
        C = span()
        with self.assertRaises(NotCospan):
            pullback_squares(C, C.morphism_id('f'), C.morphism_id('g'))


class TestOreAndAmalgamation(unittest.TestCase):
    """Test the right Ore condition and its dual"""

    def test_cospan_fails_right_ore(self):
        verdict = has_right_ore(cospan())
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness['cospan'], ('f', 'g'))

    def test_span_satisfies_right_ore(self):
        self.assertTrue(has_right_ore(span()).holds)

    def test_span_fails_amalgamation(self):
        verdict = has_amalgamation(span())
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness['span'], ('f', 'g'))

    def test_amalgamation_is_dual_right_ore(self):
        for C in (t1(), cospan(), span(), chain_category(3), named_category('square')):
            self.assertEqual(has_amalgamation(C).holds, has_right_ore(opposite(C)).holds)

    def test_span_amalgamations_in_cospan(self):
        C = cospan()
        f, idx = C.morphism_id('f'), C.morphism_id('id_x')
        pairs = span_amalgamations(C, f, idx)
        self.assertIn((C.morphism_id('id_z'), f), pairs)

    def test_full_subcategory(self):
        C = cospan()
        sub, kept = full_subcategory(C, [C.object_id('x'), C.object_id('z')])
        self.assertEqual(sub.objects, ('x', 'z'))
        self.assertEqual(sorted(m.name for m in sub.morphisms), ['f', 'id_x', 'id_z'])
        self.assertEqual(len(kept), 3)


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
        print("\n✅ ALL TESTS PASSED - Finite categories are working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
