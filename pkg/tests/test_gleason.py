"""
Test Suite for the Gleason Cover
Validates the cover of the named presheaf sites, the comparison maps ρ and λ,
minimality, Idl(1⊔1) = Ω and the atoms category.
"""

import unittest

from src.catalog import chain_category, cospan, discrete, span, t1, three_chain
from src.classifier import coproduct_of_terminals, omega, omega_notnot
from src.errors import NotPresheafBase, TheoremViolation
from src.gleason import (
    atoms_category,
    check_boolean_transfer,
    check_idl_coproduct_is_omega,
    check_minimality,
    check_rho_regular_iso,
    complemented_part,
    gleason_cover,
    gleason_is_de_morgan,
    is_equivalence,
    is_minimal,
    lambda_map,
    rho,
)
from src.indlat import coherent_coverage, constant_lattice, split_epi_irreducibles
from src.sites import generated_sieve, saturate, trivial_topology


def presheaf_cover(C):
    return gleason_cover(C, trivial_topology(C))


class TestGleasonCover(unittest.TestCase):
    """Test construction of the cover on presheaf sites"""

    def test_point(self):
        G = presheaf_cover(t1())
        self.assertEqual(G.fibre_sizes(), {'*': {'omega': 2, 'omega_nn': 2, 'cover': 2}})
        self.assertTrue(is_equivalence(G))

    def test_cospan_fibres(self):
        G = presheaf_cover(cospan())
        sizes = G.fibre_sizes()
        self.assertEqual(sizes['z']['omega'], 5)
        self.assertEqual(sizes['z']['omega_nn'], 4)
        # downsets of two 2-chains (x,1) < (z,f) and (y,1) < (z,g), (z,1) forced by the join cover
        self.assertEqual(sizes['z']['cover'], 9)
        self.assertEqual(sizes['x']['cover'], 2)

    def test_rho_and_lambda_tables(self):
        G = presheaf_cover(cospan())
        tables = rho(G)
        self.assertEqual(len(tables), 3)
        lam = lambda_map(G)
        z = G.category.object_id('z')
        self.assertEqual(len(lam[z]), G.omega.fibres[z].size)

    def test_rho_top_is_maximal_sieve(self):
        G = presheaf_cover(cospan())
        z = G.category.object_id('z')
        top = G.cover_locale.top(z)
        self.assertEqual(G.omega.mask(z, int(G.rho[z][top])), G.category.into_mask[z])

    def test_rho_of_principal_sieve(self):
        G = presheaf_cover(cospan())
        C = G.category
        z, f = C.object_id('z'), C.morphism_id('f')
        nn = G.omega_nn
        a_f = next(a for a in range(nn.fibres[z].size) if nn.mask(z, a) == 1 << f)
        u = G.relative.arrow(int(C.identity[z]), a_f, nn.top(z))
        F = G.cover_locale.fibres[z]
        R = F.meet_all(r for r in range(F.size) if F.labels[r].members >> u & 1)
        self.assertEqual(G.omega.mask(z, int(G.rho[z][R])), 1 << f)

    def test_cover_locale_certificates(self):
        G = presheaf_cover(span())
        self.assertFalse(G.cover_locale.certificates['cartesian_base'])
        self.assertTrue(G.cover_locale.certificates['frobenius'])


class TestCoverProperties(unittest.TestCase):
    """Test De Morgan, minimality and the regular isomorphism"""

    def test_cospan_cover_is_de_morgan(self):
        G = presheaf_cover(cospan())
        self.assertTrue(gleason_is_de_morgan(G).holds)
        self.assertTrue(check_minimality(G).holds)
        self.assertTrue(check_rho_regular_iso(G).holds)

    def test_cospan_is_not_an_equivalence(self):
        G = presheaf_cover(cospan())
        self.assertFalse(is_equivalence(G))

    def test_span_is_an_equivalence(self):
        self.assertTrue(is_equivalence(presheaf_cover(span())))

    def test_boolean_transfer(self):
        for C in (t1(), cospan(), span(), discrete(2), chain_category(2)):
            verdict = check_boolean_transfer(presheaf_cover(C))
            self.assertTrue(verdict.holds, C.objects)

    def test_padded_constant_chain_is_not_minimal(self):
        C = t1()
        L = constant_lattice(C, trivial_topology(C), three_chain())
        verdict = is_minimal(L)
        self.assertFalse(verdict)
        self.assertEqual(verdict.witness['element'], three_chain().describe(1))

    def test_idl_coproduct_is_omega(self):
        for C in (cospan(), span(), chain_category(2)):
            self.assertTrue(check_idl_coproduct_is_omega(C, trivial_topology(C)).holds)

    def test_complemented_sieves_match_coproduct(self):
        C = cospan()
        z = C.object_id('z')
        dense = saturate(C, {z: [generated_sieve(C, z, [C.morphism_id('f'), C.morphism_id('g')])]})
        for J, expected in ((trivial_topology(C), 2), (dense, 4)):
            B = complemented_part(omega(C, J))
            two = coproduct_of_terminals(C, J)
            self.assertEqual(B.fibres[z].size, expected)
            self.assertEqual(two.size(z), expected)


class TestAtomsCategory(unittest.TestCase):
    """Test the full subcategory on atom objects"""

    def test_cospan_atoms(self):
        C = cospan()
        atoms = atoms_category(C, trivial_topology(C))
        self.assertEqual(len(atoms.objects), 4)
        self.assertEqual(atoms.atom_counts, {'x': 1, 'y': 1, 'z': 2})
        self.assertTrue(atoms.right_ore.holds)
        self.assertTrue(atoms.irreducible)
        self.assertEqual(atoms.category.n_morphisms, 6)

    def test_atoms_document(self):
        C = span()
        record = atoms_category(C, trivial_topology(C)).to_dict()
        self.assertEqual(set(record), {'objects', 'morphisms', 'right_ore', 'irreducible', 'split_epi', 'atom_counts'})
        self.assertTrue(record['right_ore']['holds'])

    def test_split_epi_agrees_with_atoms(self):
        for C in (t1(), chain_category(2), span()):
            self.assertIs(atoms_category(C, trivial_topology(C)).split_epi, True, C.objects)
        C = cospan()
        self.assertIsNone(atoms_category(C, trivial_topology(C)).split_epi)

    def test_split_epi_irreducibles_of_point(self):
        C = t1()
        nn = omega_notnot(C, trivial_topology(C))
        rel = coherent_coverage(nn)
        found = split_epi_irreducibles(rel)
        self.assertIn(rel.object_index[(0, nn.top(0))], found)
        self.assertNotIn(rel.object_index[(0, nn.fibres[0].bottom)], found)

    def test_dense_topology_rejected(self):
        C = cospan()
        z = C.object_id('z')
        J = saturate(C, {z: [generated_sieve(C, z, [C.morphism_id('f'), C.morphism_id('g')])]})
        with self.assertRaises(NotPresheafBase):
            atoms_category(C, J)


class TestStrictMode(unittest.TestCase):
    """Test strict and lenient reporting of failed checks"""

    def test_lenient_failure_is_returned(self):
        C = t1()
        L = constant_lattice(C, trivial_topology(C), three_chain())
        self.assertFalse(is_minimal(L).holds)

    def test_strict_failure_raises(self):
        G = presheaf_cover(t1())
        G.cover_locale = constant_lattice(t1(), trivial_topology(t1()), three_chain())
        with self.assertRaises(TheoremViolation):
            check_minimality(G)
        self.assertFalse(check_minimality(G, strict=False).holds)


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
        print("\n✅ ALL TESTS PASSED - Gleason cover is working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
