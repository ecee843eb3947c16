"""
Test Suite for the Corpus Runner
Validates task building, per-task rows and the summary table.
"""

import unittest

from src.catalog import chain_category, cospan, span
from src.corpus import CorpusResult, build_tasks, poset_document, run_corpus, run_task
from src.enumeration import enumerate_posets


class TestTasks(unittest.TestCase):
    """Test task building and single-task rows"""

    def test_build_tasks(self):
        tasks = build_tasks(['ore-vs-demorgan', 'stone'], 2, 2, 2)
        kinds = [kind for _, kind, _ in tasks]
        self.assertEqual(kinds.count('category'), 4)
        self.assertEqual(kinds.count('poset'), 3)

    def test_frame_site_tasks(self):
        tasks = build_tasks(['gleason', 'stone'], 2, 2, 2)
        kinds = [kind for _, kind, _ in tasks]
        self.assertEqual(kinds.count('category'), 4)
        self.assertEqual(kinds.count('poset'), 3)
        self.assertEqual(kinds.count('frame'), 3)
        self.assertTrue(all(check == 'gleason' for check, kind, _ in tasks if kind == 'frame'))

    def test_frame_site_rows(self):
        antichain = {'elements': ['a', 'b'], 'leq': []}
        row = run_task(('equivalence', 'frame', antichain))
        self.assertTrue(row['holds'])
        self.assertTrue(row['equivalence'])
        self.assertEqual(row['frame_size'], 4)
        self.assertEqual(row['size'], '2')
        for check in ('gleason', 'idl-coproduct'):
            self.assertTrue(run_task((check, 'frame', antichain))['holds'], check)

    def test_certificates_row(self):
        row = run_task(('certificates', 'category', chain_category(2).to_dict()))
        self.assertTrue(row['holds'])
        self.assertTrue(row['omega_fibred'])
        self.assertTrue(row['omega_nn_fibred'])

    def test_category_row(self):
        row = run_task(('ore-vs-demorgan', 'category', cospan().to_dict()))
        self.assertTrue(row['holds'])
        self.assertFalse(row['de_morgan'])
        self.assertFalse(row['right_ore'])
        self.assertEqual(row['size'], '3/5')
        self.assertEqual(len(row['input']), 16)

    def test_non_cartesian_rows_are_skipped(self):
        row = run_task(('gleason', 'category', span().to_dict()))
        self.assertIsNone(row['holds'])
        self.assertEqual(row['skipped'], 'not cartesian')

    def test_poset_row(self):
        P = list(enumerate_posets(2))[-1]
        row = run_task(('down-stone', 'poset', poset_document(P)))
        self.assertTrue(row['holds'])


class TestCorpusResult(unittest.TestCase):
    """Test the serial runner and the summary table"""

    def test_summary(self):
        tasks = build_tasks(['ore-vs-demorgan', 'gleason'], 2, 2, 1)
        result = run_corpus(tasks, workers=1)
        summary = result.summary().set_index('check')
        self.assertEqual(int(summary.loc['ore-vs-demorgan', 'passed']), 4)
        self.assertEqual(result.failures, [])
        self.assertEqual(set(result.verdicts()), {'ore-vs-demorgan', 'gleason'})

    def test_empty_summary(self):
        self.assertTrue(CorpusResult().summary().empty)

    def test_rows_keep_submission_order(self):
        tasks = build_tasks(['stone'], 1, 1, 3)
        rows = run_corpus(tasks, workers=1).rows
        self.assertEqual([row['size'] for row in rows], [str(len(doc['elements'])) for _, _, doc in tasks])


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
        print("\n✅ ALL TESTS PASSED - Corpus runner is working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
