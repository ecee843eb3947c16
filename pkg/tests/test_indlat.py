"""
Test Suite for Internal Lattices and Locales
Validates the locale certificates, the Grothendieck construction, the relative
topologies and the two ideal completions.
"""

import unittest

import numpy as np

from src.catalog import chain_category, cospan, fork, square_lattice, t1, three_chain
from src.classifier import omega, omega_notnot
from src.errors import InternalLatticeError, NotALocale, NotCartesianBase, TheoremViolation
from src.indlat import (
    InternalLattice,
    cartesian_arrows,
    check_loc_ideal_equivalence,
    check_pullback_independence,
    coherent_coverage,
    constant_lattice,
    existential_topology,
    fibred_ideal_completion,
    finitary_existential_topology,
    giraud_topology,
    grothendieck_construction,
    irreducible_objects,
    is_finitary,
    is_nontrivial,
    joins_of_existentials_cover,
    pointwise_ideal_completion,
    relative_de_morgan,
    surjectivity_verdict,
    validate_internal_locale,
)
from src.lattice import chain_lattice
from src.sites import GrothTopology, trivial_topology


def constant_over_point(L):
    C = t1()
    return constant_lattice(C, trivial_topology(C), L)


def omega_locale(C):
    return validate_internal_locale(omega(C, trivial_topology(C)))


class TestInternalLattice(unittest.TestCase):
    """Test internal lattice construction and the transition checks"""

    def test_constant_lattice(self):
        A = constant_over_point(three_chain())
        self.assertEqual(list(A.fibre_sizes().values()), [3])
        self.assertEqual(A.transition(0, 2), 2)

    def test_transition_must_preserve_top(self):
        C = chain_category(2)
        L = three_chain()
        transitions = [
            np.arange(L.size) if C.is_identity(m.id) else np.zeros(L.size, dtype=np.int64)
            for m in C.morphisms
        ]
        with self.assertRaises(InternalLatticeError) as ctx:
            InternalLattice(C, trivial_topology(C), [L, L], transitions).check()
        self.assertEqual(ctx.exception.witness, {'morphism': '0<1'})

    def test_transition_shape_is_checked(self):
        C = t1()
        with self.assertRaises(InternalLatticeError):
            InternalLattice(C, trivial_topology(C), [three_chain()], [np.arange(2)]).check()


class TestLocaleCertificates(unittest.TestCase):
    """Test validate_internal_locale and the derived checks"""

    def test_constant_frame_over_point(self):
        L = validate_internal_locale(constant_over_point(square_lattice()))
        self.assertTrue(all(L.certificates.values()))
        self.assertTrue(L.certificates['cartesian_base'])
        self.assertTrue(np.array_equal(L.exists[0], np.arange(4)))

    def test_omega_of_chain_is_a_locale(self):
        C = chain_category(2)
        L = omega_locale(C)
        self.assertEqual(L.fibre_sizes(), {'0': 2, '1': 3})
        self.assertTrue(check_pullback_independence(L).holds)
        self.assertTrue(joins_of_existentials_cover(L).holds)

    def test_omega_nn_of_chain_is_a_locale(self):
        C = chain_category(3)
        J = trivial_topology(C)
        L = validate_internal_locale(omega_notnot(C, J))
        self.assertEqual(list(L.fibre_sizes().values()), [2, 2, 2])

    def test_non_cartesian_base_rejected(self):
        C = cospan()
        with self.assertRaises(NotCartesianBase) as ctx:
            validate_internal_locale(omega(C, trivial_topology(C)))
        self.assertEqual(ctx.exception.witness['failing_cospan'], ['f', 'g'])

    def test_non_cartesian_base_with_existing_pullbacks(self):
        C = cospan()
        L = validate_internal_locale(omega(C, trivial_topology(C)), require_cartesian=False)
        self.assertFalse(L.certificates['cartesian_base'])
        self.assertTrue(L.certificates['beck_chevalley'])

    def test_finitary(self):
        self.assertTrue(is_finitary(trivial_topology(cospan())))


class TestRelativeSite(unittest.TestCase):
    """Test the Grothendieck construction and its topologies"""

    def test_total_category_of_chain_fibre(self):
        rel = grothendieck_construction(constant_over_point(three_chain()))
        self.assertEqual(len(rel.objects), 3)
        # one arrow (y, x) per y ≤ x
        self.assertEqual(len(rel.arrows), 6)
        self.assertEqual(len(cartesian_arrows(rel)), 3)

    def test_factorisation(self):
        rel = grothendieck_construction(constant_over_point(three_chain()))
        u = rel.arrow(0, 0, 2)
        vertical, cartesian = rel.factor(u)
        self.assertEqual(rel.total.compose(cartesian, vertical), u)
        self.assertEqual(rel.arrows[cartesian], (0, 2, 2))

    def test_giraud_over_trivial_base_is_trivial(self):
        rel = giraud_topology(constant_over_point(three_chain()))
        self.assertTrue(rel.topology.is_trivial())
        self.assertEqual(rel.certificates, {'cover_lifting': True})

    def test_coherent_irreducibles_are_atoms(self):
        rel = coherent_coverage(constant_over_point(square_lattice()))
        self.assertEqual(rel.kind, 'coherent')
        L = square_lattice()
        atoms = [x for x in range(L.size) if bin(L.down_masks[x]).count('1') == 2]
        irreducible = irreducible_objects(rel)
        self.assertEqual(sorted(rel.objects[o][1] for o in irreducible), sorted(atoms))

    def test_existential_matches_coherent_on_point(self):
        A = constant_over_point(fork())
        L = validate_internal_locale(A)
        existential = existential_topology(L)
        coherent = coherent_coverage(A)
        self.assertEqual(existential.topology.minimal, coherent.topology.minimal)
        self.assertEqual(finitary_existential_topology(L).topology.minimal, existential.topology.minimal)

    def test_existential_needs_a_locale(self):
        with self.assertRaises(NotALocale):
            existential_topology(constant_over_point(fork()))

    def test_surjectivity(self):
        A = constant_over_point(square_lattice())
        report = surjectivity_verdict(A, coherent_coverage(A))
        self.assertTrue(report.verdict)
        self.assertTrue(report.nontrivial)
        self.assertTrue(report.covers_project)
        self.assertTrue(is_nontrivial(A))

    def test_trivial_fibre_is_not_surjective(self):
        A = constant_over_point(chain_lattice(1))
        report = surjectivity_verdict(A, coherent_coverage(A))
        self.assertFalse(report.verdict)
        self.assertFalse(report.nontrivial)
        self.assertFalse(report.covers_project)

    def test_trivial_fibre_over_chain(self):
        C = chain_category(2)
        fibres = [chain_lattice(1), chain_lattice(2)]
        transitions = [
            np.arange(fibres[m.dom].size, dtype=np.int64) if C.is_identity(m.id)
            else np.zeros(fibres[m.cod].size, dtype=np.int64)
            for m in C.morphisms
        ]
        A = InternalLattice(C, trivial_topology(C), fibres, transitions).check()
        self.assertFalse(surjectivity_verdict(A, coherent_coverage(A)).verdict)

    def test_disagreement_is_reported(self):
        A = constant_over_point(square_lattice())
        T = coherent_coverage(A)
        everything = GrothTopology(T.total, [0] * len(T.objects), kind='degenerate')
        with self.assertRaises(TheoremViolation):
            surjectivity_verdict(A, T.with_topology(everything, 'degenerate', {}))


class TestIdealCompletions(unittest.TestCase):
    """Test the fibred and pointwise ideal completions"""

    def test_fibred_completion_over_coherent_topology(self):
        A = constant_over_point(square_lattice())
        Idl = fibred_ideal_completion(A, coherent_coverage(A))
        self.assertEqual(list(Idl.fibre_sizes().values()), [4])
        self.assertTrue(Idl.certificates['frobenius'])

    def test_pointwise_completion_of_omega(self):
        L = omega_locale(chain_category(2))
        I = pointwise_ideal_completion(L)
        self.assertEqual(I.fibre_sizes(), L.fibre_sizes())

    def test_loc_ideal_equivalence(self):
        for C in (t1(), chain_category(2)):
            report = check_loc_ideal_equivalence(omega_locale(C))
            self.assertTrue(report.holds, report.detail)
            self.assertEqual(set(report.isomorphisms), set(C.objects))

    def test_loc_ideal_equivalence_on_constant_fork(self):
        L = validate_internal_locale(constant_over_point(fork()))
        self.assertTrue(check_loc_ideal_equivalence(L).holds)


class TestRelativeDeMorgan(unittest.TestCase):
    """Test the relative De Morgan decision"""

    def test_stone_fibres(self):
        self.assertTrue(relative_de_morgan(validate_internal_locale(constant_over_point(three_chain()))))
        self.assertTrue(relative_de_morgan(omega_locale(chain_category(2))))

    def test_fork_fibre_is_not_de_morgan(self):
        self.assertFalse(relative_de_morgan(validate_internal_locale(constant_over_point(fork()))))


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
        print("\n✅ ALL TESTS PASSED - Internal locales are working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
