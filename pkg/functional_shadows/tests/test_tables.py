import os
import tempfile

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from functional_shadows.exceptions import TableParseError, UndefinedPointError
from functional_shadows.tables import (
    CountTable,
    ingest_experiment_csv,
    read_count_csv,
    write_count_csv,
)


class CountTableTests(SimpleTestCase):
    def test_duplicate_records_are_summed(self):
        table = CountTable.from_records([
            (810.0, 'H', 3), (800.0, 'V', 1), (810.0, 'h', 4), (810.0, 'D', 2),
        ])
        assert_array_equal(table.xs, [800.0, 810.0])
        assert_array_equal(table.counts, [[0, 1, 0, 0, 0, 0], [7, 0, 2, 0, 0, 0]])

    def test_from_counts_sums_shared_x(self):
        table = CountTable.from_counts([1.0, 0.0, 1.0], [[1] * 6, [2] * 6, [3] * 6])
        assert_array_equal(table.counts, [[2] * 6, [4] * 6])

    def test_zero_count_rows_are_not_occupied(self):
        table = CountTable([1.0, 2.0, 3.0], [[1, 0, 0, 0, 0, 0], [0] * 6, [0, 2, 0, 0, 0, 1]])
        assert_array_equal(table.occupied_xs, [1.0, 3.0])
        assert_array_equal(table.empty_xs, [2.0])
        self.assertEqual(table.fractions().shape, (2, 6))
        with self.assertRaises(UndefinedPointError):
            table.fractions_at(2.0)
        with self.assertRaises(UndefinedPointError):
            table.fractions_at(2.5)

    def test_restrict(self):
        table = CountTable([1.0, 2.0], [[1] * 6, [2] * 6])
        single = table.restrict(2.0)
        self.assertEqual(len(single), 1)
        assert_array_equal(single.counts, [[2] * 6])


class CsvTests(SimpleTestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def write(self, name, text):
        with open(self.path(name), 'w', encoding='utf-8') as handle:
            handle.write(text)
        return self.path(name)

    def test_written_table_reads_back(self):
        table = CountTable([800.25, 801.5], [[5, 1, 3, 3, 0, 6], [0] * 6])
        write_count_csv(table, self.path('counts.csv'))
        with open(self.path('counts.csv'), encoding='utf-8') as handle:
            lines = handle.read().splitlines()
        self.assertEqual(lines[0], 'x,projector,count')
        self.assertEqual(len(lines), 1 + 2 * 6)
        self.assertEqual(lines[1], '800.25,H,5')
        restored = read_count_csv(self.path('counts.csv'))
        assert_array_equal(restored.xs, table.xs)
        assert_array_equal(restored.counts, table.counts)

    def test_labels_are_case_insensitive_and_duplicates_summed(self):
        path = self.write('long.csv', 'x,projector,count\n800,h,2\n800,H,3\n800,v,1\n')
        table = ingest_experiment_csv(path)
        assert_array_equal(table.counts, [[5, 1, 0, 0, 0, 0]])

    def test_unknown_projector_reports_row(self):
        path = self.write('bad.csv', 'x,projector,count\n800,H,2\n800,Q,3\n')
        with self.assertRaisesMessage(TableParseError, 'row 2'):
            ingest_experiment_csv(path)

    def test_negative_count_is_rejected(self):
        path = self.write('neg.csv', 'x,projector,count\n800,H,-2\n')
        with self.assertRaisesMessage(TableParseError, 'row 1: negative count'):
            ingest_experiment_csv(path)

    def test_non_numeric_x_is_rejected(self):
        path = self.write('x.csv', 'x,projector,count\n800,H,2\n80O,V,1\n')
        with self.assertRaisesMessage(TableParseError, 'row 2'):
            ingest_experiment_csv(path)

    def test_wide_format_is_melted(self):
        path = self.write('wide.csv', 'x,H,V,D,A,R,L\n800,1,2,3,4,5,6\n801,0,0,1,1,0,0\n800,1,0,0,0,0,0\n')
        table = ingest_experiment_csv(path)
        assert_array_equal(table.xs, [800.0, 801.0])
        assert_array_equal(table.counts, [[2, 2, 3, 4, 5, 6], [0, 0, 1, 1, 0, 0]])

    def test_wide_format_reports_row_of_bad_cell(self):
        path = self.write('wide.csv', 'x,H,V,D,A,R,L\n800,1,2,3,4,5,6\n801,0,0,-1,1,0,0\n')
        with self.assertRaisesMessage(TableParseError, 'row 2'):
            ingest_experiment_csv(path)

    def test_column_map(self):
        path = self.write('instrument.csv', 'wavelength_nm,setting,photons\n805.5,R,7\n805.5,l,1\n')
        table = ingest_experiment_csv(
            path, {'x': 'wavelength_nm', 'projector': 'setting', 'count': 'photons'})
        assert_array_equal(table.counts, [[0, 0, 0, 0, 7, 1]])

    def test_wide_column_map(self):
        path = self.write('pixels.csv', 'lambda,h_pol,v_pol,d_pol,a_pol,r_pol,l_pol\n800,1,1,1,1,1,1\n')
        column_map = {'x': 'lambda'}
        column_map.update({label: f'{label.lower()}_pol' for label in 'HVDARL'})
        table = ingest_experiment_csv(path, column_map)
        self.assertEqual(table.total_events, 6)

    def test_unmappable_columns(self):
        path = self.write('odd.csv', 'x,foo\n1,2\n')
        with self.assertRaises(TableParseError):
            ingest_experiment_csv(path)

    def test_missing_file(self):
        with self.assertRaises(TableParseError):
            ingest_experiment_csv(self.path('absent.csv'))

    def test_adding_zero_rows_keeps_occupied_points(self):
        path = self.write('zeros.csv', 'x,projector,count\n800,H,2\n801,H,0\n')
        table = ingest_experiment_csv(path)
        assert_array_equal(table.occupied_xs, [800.0])
        self.assertEqual(len(table), 2)
        self.assertTrue(np.all(table.counts[1] == 0))
