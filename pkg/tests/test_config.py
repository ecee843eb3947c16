"""
Test Suite for Workbench Configuration
Validates dotenv loading and command line overrides.
"""

import argparse
import os
import tempfile
import unittest
from pathlib import Path

from src.config import WORKBENCH_CONFIG, _int_env, apply_cli_overrides, config_value, load_environment
from src.errors import InputError


class TestEnvironment(unittest.TestCase):
    """Test loading of dotenv files"""

    def setUp(self):
        self.saved_env = dict(os.environ)

    def tearDown(self):
        os.environ.clear()
        os.environ.update(self.saved_env)

    def test_env_file_is_loaded(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'workbench.env'
            path.write_text("WORKBENCH_TEST_MARKER=loaded\n", encoding='utf-8')
            os.environ['ENV_FILE'] = str(path)
            load_environment()
            self.assertEqual(os.environ.get('WORKBENCH_TEST_MARKER'), 'loaded')

    def test_missing_env_file_is_ignored(self):
        os.environ['ENV_FILE'] = '/nonexistent/workbench.env'
        load_environment()
        self.assertNotIn('WORKBENCH_TEST_MARKER', os.environ)


class TestIntegerVariables(unittest.TestCase):
    """Test parsing of integer environment variables"""

    def setUp(self):
        self.saved_env = dict(os.environ)

    def tearDown(self):
        os.environ.clear()
        os.environ.update(self.saved_env)

    def test_value_and_default(self):
        os.environ['WORKBENCH_MAX_SIEVES'] = '128'
        self.assertEqual(_int_env('WORKBENCH_MAX_SIEVES', 4096), 128)
        os.environ['WORKBENCH_MAX_SIEVES'] = ''
        self.assertEqual(_int_env('WORKBENCH_MAX_SIEVES', 4096), 4096)

    def test_non_integer_names_the_variable(self):
        os.environ['WORKBENCH_WORKERS'] = 'many'
        with self.assertRaises(InputError) as ctx:
            _int_env('WORKBENCH_WORKERS', 1)
        self.assertIn('WORKBENCH_WORKERS', str(ctx.exception))
        self.assertEqual(ctx.exception.witness, {'variable': 'WORKBENCH_WORKERS', 'value': 'many'})
        self.assertEqual(ctx.exception.exit_code, 2)

    def test_zero_is_rejected(self):
        os.environ['WORKBENCH_MAX_LATTICE_SIZE'] = '0'
        with self.assertRaises(InputError):
            _int_env('WORKBENCH_MAX_LATTICE_SIZE', 64)


class TestOverrides(unittest.TestCase):
    """Test command line overrides of the configuration"""

    def setUp(self):
        self.saved = dict(WORKBENCH_CONFIG)

    def tearDown(self):
        WORKBENCH_CONFIG.clear()
        WORKBENCH_CONFIG.update(self.saved)

    def test_defaults_present(self):
        for key in ('max_lattice_size', 'max_sieves', 'max_diagram_size', 'workers', 'log_level'):
            self.assertIn(key, WORKBENCH_CONFIG)
        self.assertGreaterEqual(config_value('workers'), 1)

    def test_overrides(self):
        args = argparse.Namespace(max_lattice_size=10, max_sieves=20, workers=2, verbose=True)
        apply_cli_overrides(args)
        self.assertEqual(config_value('max_lattice_size'), 10)
        self.assertEqual(config_value('max_sieves'), 20)
        self.assertEqual(config_value('workers'), 2)
        self.assertEqual(config_value('log_level'), 'DEBUG')

    def test_absent_overrides_keep_values(self):
        before = dict(WORKBENCH_CONFIG)
        apply_cli_overrides(argparse.Namespace(max_lattice_size=None, max_sieves=None, workers=None, verbose=False))
        self.assertEqual(dict(WORKBENCH_CONFIG), before)


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
        print("\n✅ ALL TESTS PASSED - Configuration is working correctly!")
    else:
        print("\n❌ SOME TESTS FAILED - Review failures above")

    return result.wasSuccessful()


if __name__ == '__main__':
    success = run_tests()
    exit(0 if success else 1)
