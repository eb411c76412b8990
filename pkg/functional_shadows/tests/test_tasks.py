import os
import tempfile

import numpy as np
from django.test import SimpleTestCase

from functional_shadows.tables import write_count_csv
from functional_shadows.tasks import fit_count_table, run_verification_suite

from .helpers import DOMAIN, affine_truth, exact_table


class VerificationTaskTests(SimpleTestCase):
    def test_variance_suite(self):
        result = run_verification_suite.apply(kwargs={'suite': 'variance', 'seed': 4}).get()
        self.assertEqual(result['status'], 'success')
        self.assertEqual(len(result['reports']), 5)

    def test_unknown_test_name(self):
        result = run_verification_suite.apply(kwargs={'suite': 'bias'}).get()
        self.assertEqual(result['status'], 'error')
        self.assertEqual(result['returncode'], 1)
        self.assertIn('unknown test', result['message'])


class FitTaskTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)
        self.table_path = os.path.join(self.tmp.name, 'counts.csv')
        write_count_csv(exact_table(affine_truth(), np.linspace(*DOMAIN, 5)), self.table_path)

    def test_fit_writes_outputs(self):
        out_dir = os.path.join(self.tmp.name, 'fit')
        result = fit_count_table.apply(
            args=(self.table_path,), kwargs={'method': 'cs', 'out_dir': out_dir}).get()
        self.assertEqual(result['status'], 'success')
        self.assertTrue(os.path.exists(os.path.join(out_dir, 'fit_report.json')))

    def test_missing_table(self):
        result = fit_count_table.apply(
            args=(os.path.join(self.tmp.name, 'absent.csv'),),
            kwargs={'out_dir': os.path.join(self.tmp.name, 'fit')}).get()
        self.assertEqual(result['status'], 'error')
        self.assertEqual(result['returncode'], 2)
