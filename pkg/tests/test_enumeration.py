"""
Test Suite for Structure Enumeration
Validates the counts of small posets and categories up to isomorphism.
"""

import unittest

import numpy as np

from src.enumeration import canonical_poset_key, enumerate_categories, enumerate_posets, is_directed
from src.fincat import check_category_axioms


class TestPosets(unittest.TestCase):
    """Test poset enumeration"""

    def test_counts(self):
        # 1, 2, 5, 16 posets on 1..4 elements
        self.assertEqual(len(list(enumerate_posets(1))), 1)
        self.assertEqual(len(list(enumerate_posets(3))), 8)
        self.assertEqual(len(list(enumerate_posets(4))), 24)

    def test_directed_posets(self):
        # chains and the upward vee
        self.assertEqual(len(list(enumerate_posets(3, directed=True))), 4)

    def test_results_are_posets(self):
        for P in enumerate_posets(4):
            P.validate()
            self.assertEqual(P.labels, [str(i) for i in range(P.size)])

    def test_canonical_key_ignores_relabelling(self):
        chain = np.array([[True, True], [False, True]])
        flipped = np.array([[True, False], [True, True]])
        self.assertEqual(canonical_poset_key(chain), canonical_poset_key(flipped))

    def test_directedness(self):
        self.assertTrue(is_directed(np.array([[True, True], [False, True]])))
        self.assertFalse(is_directed(np.eye(2, dtype=bool)))


class TestCategories(unittest.TestCase):
    """Test category enumeration (identities counted in the morphism bound)"""

    def test_counts(self):
        self.assertEqual(len(list(enumerate_categories(1, 1))), 1)
        # trivial monoid, the group of order 2, the idempotent monoid
        self.assertEqual(len(list(enumerate_categories(1, 2))), 3)
        self.assertEqual(len(list(enumerate_categories(2, 2))), 4)
        self.assertEqual(len(list(enumerate_categories(2, 3))), 14)

    def test_results_satisfy_axioms(self):
        for C in enumerate_categories(2, 4):
            check_category_axioms(C)

    def test_order_is_deterministic(self):
        first = [C.to_dict() for C in enumerate_categories(2, 3)]
        second = [C.to_dict() for C in enumerate_categories(2, 3)]
        self.assertEqual(first, second)

    def test_objects_grow_first(self):
        sizes = [C.n_objects for C in enumerate_categories(2, 3)]
        self.assertEqual(sizes, sorted(sizes))


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
        print("\n✅ ALL TESTS PASSED - Enumeration is working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
