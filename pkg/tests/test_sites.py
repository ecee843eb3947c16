"""
Test Suite for Finite Sites
Validates sieves, topology saturation, closure, the sheaf condition and the
plus construction.
"""

import unittest

import numpy as np

from src.catalog import chain_category, cospan, span, t1
from src.config import WORKBENCH_CONFIG
from src.errors import NotASieve, SizeExceeded, TargetMismatch, WrongCodomain
from src.sites import (
    Sieve,
    all_sieves,
    check_topology_axioms,
    check_topology_exhaustively,
    closed_sieves,
    closure,
    constant_presheaf,
    generated_sieve,
    is_sheaf,
    is_sieve,
    matching_families,
    plus_construction,
    pullback_sieve,
    saturate,
    sheafify,
    trivial_topology,
)


def dense_cospan():
    """Cospan with {f, g} covering z"""
    C = cospan()
    z = C.object_id('z')
    J = saturate(C, {z: [generated_sieve(C, z, [C.morphism_id('f'), C.morphism_id('g')])]}, kind='basis')
    return C, J


class TestSieves(unittest.TestCase):
    """Test sieve generation and pullback"""

    def test_generated_sieve(self):
        C = cospan()
        z = C.object_id('z')
        S = generated_sieve(C, z, [C.morphism_id('f')])
        self.assertEqual(S.morphisms(), [C.morphism_id('f')])
        self.assertEqual(S.describe(C), '{f}')
        self.assertTrue(is_sieve(C, z, S.members))

    def test_maximal_sieve_description(self):
        C = cospan()
        z = C.object_id('z')
        self.assertEqual(Sieve(z, C.into_mask[z]).describe(C), 'max')

    def test_wrong_codomain(self):
        C = cospan()
        with self.assertRaises(WrongCodomain):
            generated_sieve(C, C.object_id('z'), [C.morphism_id('id_x')])

    def test_pullback_of_sieve(self):
        C = cospan()
        z = C.object_id('z')
        S = generated_sieve(C, z, [C.morphism_id('f')])
        pulled = pullback_sieve(C, S, C.morphism_id('f'))
        self.assertEqual(pulled.members, C.into_mask[C.object_id('x')])
        self.assertEqual(pullback_sieve(C, S, C.morphism_id('g')).members, 0)

    def test_pullback_target_mismatch(self):
        C = cospan()
        S = Sieve(C.object_id('x'), C.into_mask[C.object_id('x')])
        with self.assertRaises(TargetMismatch):
            pullback_sieve(C, S, C.morphism_id('g'))

    def test_all_sieves_on_cospan_apex(self):
        C = cospan()
        self.assertEqual(len(all_sieves(C, C.object_id('z'))), 5)

    def test_sieve_count_limit(self):
        C = cospan()
        saved = WORKBENCH_CONFIG['max_sieves']
        WORKBENCH_CONFIG['max_sieves'] = 2
        try:
            with self.assertRaises(SizeExceeded):
                all_sieves(C, C.object_id('z'))
        finally:
            WORKBENCH_CONFIG['max_sieves'] = saved


class TestTopologies(unittest.TestCase):
    """Test saturation and the topology axioms"""

    def test_trivial_topology(self):
        C = span()
        J = trivial_topology(C)
        self.assertTrue(J.is_trivial())
        for c in range(C.n_objects):
            self.assertEqual([S.members for S in J.covering(c)], [C.into_mask[c]])

    def test_saturated_dense_topology(self):
        C, J = dense_cospan()
        z = C.object_id('z')
        self.assertEqual(J.minimal[z], (1 << C.morphism_id('f')) | (1 << C.morphism_id('g')))
        self.assertEqual(len(J.covering(z)), 2)
        self.assertFalse(J.is_trivial())
        self.assertTrue(J.contains(trivial_topology(C)))
        self.assertFalse(trivial_topology(C).contains(J))

    def test_axioms_hold(self):
        for C, J in [dense_cospan(), (chain_category(3), trivial_topology(chain_category(3)))]:
            self.assertTrue(check_topology_axioms(J).holds)
            self.assertTrue(check_topology_exhaustively(J).holds)

    def test_empty_cover_saturates_down(self):
        C = chain_category(2)
        top = C.object_id('1')
        J = saturate(C, {top: [0]})
        self.assertTrue(J.empty_covers(top))
        self.assertTrue(J.empty_covers(C.object_id('0')))

    def test_non_sieve_basis_rejected(self):
        C = chain_category(3)
        with self.assertRaises(NotASieve):
            saturate(C, {C.object_id('2'): [1 << C.morphism_id('1<2')]})


class TestClosure(unittest.TestCase):
    """Test closure and closed sieves"""

    def test_closure_under_dense_topology(self):
        C, J = dense_cospan()
        z = C.object_id('z')
        f, g = C.morphism_id('f'), C.morphism_id('g')
        self.assertEqual(closure(J, Sieve(z, 1 << f)).members, 1 << f)
        self.assertEqual(closure(J, Sieve(z, (1 << f) | (1 << g))).members, C.into_mask[z])

    def test_closed_sieves_counts(self):
        C, J = dense_cospan()
        self.assertEqual(len(closed_sieves(J, C.object_id('z'))), 4)
        self.assertEqual(len(closed_sieves(trivial_topology(C), C.object_id('z'))), 5)


class TestSheaves(unittest.TestCase):
    """Test the sheaf condition and sheafification"""

    def test_constant_presheaf_is_sheaf_for_trivial_topology(self):
        C = cospan()
        P = constant_presheaf(C, ['⊤', '⊥'])
        self.assertTrue(P.check_functorial().holds)
        self.assertTrue(is_sheaf(P, trivial_topology(C)).holds)

    def test_constant_presheaf_is_not_dense_sheaf(self):
        C, J = dense_cospan()
        verdict = is_sheaf(constant_presheaf(C, ['⊤', '⊥']), J)
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness['object'], 'z')

    def test_matching_families_over_dense_cover(self):
        C, J = dense_cospan()
        P = constant_presheaf(C, ['⊤', '⊥'])
        families = list(matching_families(P, C.object_id('z'), J.minimal[C.object_id('z')]))
        self.assertEqual(len(families), 4)

    def test_sheafification_of_two_points(self):
        C, J = dense_cospan()
        P = constant_presheaf(C, ['⊤', '⊥'])
        S = sheafify(P, J)
        self.assertEqual([S.size(c) for c in range(C.n_objects)], [2, 2, 4])
        self.assertTrue(is_sheaf(S, J).holds)
        z = C.object_id('z')
        self.assertEqual(len(set(S.unit[z].tolist())), 2)

    def test_plus_of_sheaf_is_isomorphic(self):
        C = t1()
        J = trivial_topology(C)
        P = constant_presheaf(C, ['a', 'b', 'c'])
        plus = plus_construction(P, J)
        self.assertEqual(plus.size(0), 3)
        self.assertTrue(np.array_equal(np.sort(plus.unit[0]), np.arange(3)))


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
        print("\n✅ ALL TESTS PASSED - Sites and sheaves are working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
