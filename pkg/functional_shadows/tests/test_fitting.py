import math
import os
import tempfile

import numpy as np
from django.test import SimpleTestCase, override_settings, tag
from numpy.testing import assert_allclose, assert_array_equal

from functional_shadows.fitting import (
    OptimizerConfig,
    cs_pointwise_fit,
    fit_cs,
    fit_fcs,
    reconstruction_rows,
    seed_model,
    write_reconstruction_csv,
)
from functional_shadows.losses import fcs_loss
from functional_shadows.profiles import FamilySpec, evaluate, pack, state_distance
from functional_shadows.qubit import pure_fidelity
from functional_shadows.shadows import snapshot_bloch_vectors
from functional_shadows.simulator import SimConfig, simulate
from functional_shadows.tables import CountTable

from .helpers import DOMAIN, affine_truth, exact_table, table_at, wrapped_difference

AFFINE = FamilySpec.parse('affine')
CONSTANT = FamilySpec.parse('constant')


class PointwiseFitTests(SimpleTestCase):
    def test_all_horizontal_counts(self):
        h = cs_pointwise_fit(table_at(800.0, [10, 0, 0, 0, 0, 0]), 800.0)
        self.assertAlmostEqual(h.theta, 0.0, places=14)

    def test_antidiagonal_proportions(self):
        h = cs_pointwise_fit(table_at(800.0, [1, 1, 0, 2, 1, 1]), 800.0)
        self.assertAlmostEqual(h.theta, math.pi / 2, places=14)
        self.assertAlmostEqual(h.phi, math.pi, places=14)

    def test_uniform_counts_are_degenerate(self):
        table = table_at(800.0, [4] * 6)
        with self.assertLogs('functional_shadows.fitting', level='WARNING') as logs:
            h = cs_pointwise_fit(table, 800.0)
        self.assertEqual((h.theta, h.phi), (0.0, 0.0))
        self.assertIn('Degenerate counts', logs.output[0])

    def test_closed_form_beats_every_grid_point(self):
        rng = np.random.default_rng(23)
        thetas = np.linspace(0.0, math.pi, 2000)
        phis = np.linspace(0.0, 2 * math.pi, 4000, endpoint=False)
        diagonal = math.hypot(thetas[1] - thetas[0], phis[1] - phis[0])
        for _ in range(200):
            counts = rng.integers(0, 50, size=6)
            counts[0] += 1
            table = table_at(800.0, counts)
            s = snapshot_bloch_vectors(table.fractions_at(800.0))
            if np.linalg.norm(s) < 1e-6:
                continue
            # sin(theta) >= 0, so the best phi does not depend on theta
            transverse = np.cos(phis) * s[0] + np.sin(phis) * s[1]
            best_phi = int(np.argmax(transverse))
            grid_losses = (1.0 - np.sin(thetas) * transverse[best_phi] - np.cos(thetas) * s[2]) / 2.0
            best_theta = int(np.argmin(grid_losses))

            h = cs_pointwise_fit(table, 800.0)
            closed = (1.0 - float(np.dot(h.bloch_vector(), s))) / 2.0
            self.assertLessEqual(closed, grid_losses[best_theta] + 1e-12)
            grid_direction = evaluate_direction(thetas[best_theta], phis[best_phi])
            angle = math.acos(min(1.0, float(np.dot(grid_direction, h.bloch_vector()))))
            self.assertLessEqual(angle, 2 * diagonal)


def evaluate_direction(theta, phi):
    return np.array([math.sin(theta) * math.cos(phi), math.sin(theta) * math.sin(phi), math.cos(theta)])


class FitCsTests(SimpleTestCase):
    def test_phase_is_unwrapped_across_x(self):
        truth = affine_truth(phi=(math.pi, 6.0))
        report = fit_cs(exact_table(truth, np.linspace(*DOMAIN, 41)))
        wrapped = np.array([point.phi for point in report.points])
        unwrapped = np.array([point.phi_unwrapped for point in report.points])
        self.assertTrue(np.all((wrapped >= 0) & (wrapped < 2 * math.pi)))
        assert_allclose(np.diff(unwrapped), 0.3, atol=1e-9)
        self.assertAlmostEqual(report.global_loss, 0.0, delta=1e-9)

    def test_empty_rows_are_excluded(self):
        table = CountTable([800.0, 810.0, 820.0], [[3, 1, 2, 2, 1, 3], [0] * 6, [1, 3, 2, 2, 2, 2]])
        report = fit_cs(table)
        assert_array_equal(report.xs, [800.0, 820.0])
        self.assertEqual(report.excluded_xs, [810.0])

    def test_pole_points_are_flagged(self):
        report = fit_cs(table_at(800.0, [6, 0, 3, 3, 3, 3]))
        self.assertEqual(report.near_pole_xs, [800.0])


class SeedModelTests(SimpleTestCase):
    def test_exact_affine_data(self):
        truth = affine_truth()
        seed = seed_model(exact_table(truth, np.linspace(*DOMAIN, 9)), AFFINE)
        assert_allclose(seed.theta_params, truth.theta_params, atol=1e-6)
        assert_allclose(seed.phi_params, truth.phi_params, atol=1e-6)

    def test_theta_crossing_zero_stays_on_one_branch(self):
        truth = affine_truth(theta=(0.1, 0.5), phi=(1.0, 2.0))
        xs = np.linspace(*DOMAIN, 16)
        seed = seed_model(exact_table(truth, xs), AFFINE)
        self.assertLessEqual(state_distance(seed, truth, xs), 1e-6)

    def test_theta_crossing_pi_stays_on_one_branch(self):
        truth = affine_truth(theta=(3.0, 0.4), phi=(0.5, -1.0))
        xs = np.linspace(*DOMAIN, 21)
        seed = seed_model(exact_table(truth, xs), AFFINE)
        self.assertLessEqual(state_distance(seed, truth, xs), 1e-6)


class FitFcsTests(SimpleTestCase):
    def setUp(self):
        self.truth = affine_truth()
        self.xs = np.linspace(*DOMAIN, 16)

    def test_exact_affine_recovery(self):
        report = fit_fcs(exact_table(self.truth, self.xs), AFFINE)
        self.assertLessEqual(state_distance(report.model, self.truth, np.linspace(*DOMAIN, 201)), 1e-6)
        self.assertAlmostEqual(report.global_loss, 0.0, delta=1e-9)

    def test_exact_recovery_through_a_pole(self):
        truth = affine_truth(theta=(0.1, 0.5), phi=(1.0, 2.0))
        report = fit_fcs(exact_table(truth, self.xs), AFFINE)
        self.assertLessEqual(state_distance(report.model, truth, np.linspace(*DOMAIN, 201)), 1e-6)
        self.assertAlmostEqual(report.global_loss, 0.0, delta=1e-9)

    def test_report_loss_matches_recomputed_loss(self):
        table = simulate(SimConfig(self.truth, self.xs, shots=20, seed=4))
        report = fit_fcs(table, AFFINE, config=OptimizerConfig(restarts=3, seed=4))
        self.assertAlmostEqual(report.global_loss, fcs_loss(table, report.model), delta=1e-10)
        self.assertLessEqual(report.global_loss, report.seed_loss + 1e-12)
        self.assertEqual(report.restarts, 3)
        self.assertEqual(len(report.start_losses), 3)

    def test_constant_family_at_single_x_matches_cs(self):
        table = table_at(810.0, [5, 2, 4, 1, 3, 3])
        report = fit_fcs(table, CONSTANT)
        fitted = evaluate(report.model, 810.0)
        self.assertAlmostEqual(pure_fidelity(fitted, cs_pointwise_fit(table, 810.0)), 1.0, delta=1e-9)

    def test_independent_phi_family(self):
        truth = affine_truth(theta=(1.1, 0.0))
        report = fit_fcs(exact_table(truth, self.xs), CONSTANT, AFFINE)
        self.assertEqual(report.model.parameter_count, 3)
        self.assertLessEqual(state_distance(report.model, truth, self.xs), 1e-6)

    def test_result_does_not_depend_on_thread_count(self):
        table = simulate(SimConfig(self.truth, self.xs, shots=15, seed=9))
        config = OptimizerConfig(restarts=4, seed=9)
        with override_settings(SHADOWFIT_THREADS=1):
            serial = fit_fcs(table, AFFINE, config=config)
        with override_settings(SHADOWFIT_THREADS=4):
            threaded = fit_fcs(table, AFFINE, config=config)
        assert_array_equal(pack(serial.model), pack(threaded.model))
        self.assertEqual(serial.start_losses, threaded.start_losses)

    @tag('slow')
    def test_functional_fit_beats_pointwise_fit(self):
        xs = np.linspace(*DOMAIN, 64)
        _theta, true_phi = self.truth.angles(xs)
        config = OptimizerConfig(restarts=4, xatol=1e-8, fatol=1e-12, seed=1)
        wins = 0
        for replicate in range(200):
            table = simulate(SimConfig(self.truth, xs, shots=10, seed=31), replicate)
            fcs = fit_fcs(table, AFFINE, config=config)
            cs = fit_cs(table)
            _theta, fcs_phi = fcs.model.angles(xs)
            cs_phi = [point.phi for point in cs.points]
            fcs_error = rms(wrapped_difference(fcs_phi, true_phi))
            cs_error = rms(wrapped_difference(cs_phi, true_phi[np.isin(xs, cs.xs)]))
            wins += fcs_error < cs_error
        self.assertGreaterEqual(wins, 180)


def rms(values):
    return float(np.sqrt(np.mean(np.square(values))))


class ReconstructionTests(SimpleTestCase):
    def setUp(self):
        self.table = exact_table(affine_truth(), np.linspace(*DOMAIN, 6))
        self.tmp = tempfile.TemporaryDirectory()
        self.addCleanup(self.tmp.cleanup)

    def test_cs_rows_follow_points(self):
        rows = reconstruction_rows(fit_cs(self.table))
        self.assertEqual(len(rows), 6)
        self.assertEqual({row[4] for row in rows}, {'cs'})

    def test_fcs_rows_follow_grid(self):
        report = fit_fcs(self.table, AFFINE, config=OptimizerConfig(restarts=2))
        rows = reconstruction_rows(report, grid_size=33)
        self.assertEqual(len(rows), 33)
        self.assertEqual((rows[0][0], rows[-1][0]), DOMAIN)
        path = os.path.join(self.tmp.name, 'reconstruction.csv')
        write_reconstruction_csv(rows, path)
        with open(path, encoding='utf-8') as handle:
            lines = handle.read().splitlines()
        self.assertEqual(lines[0], 'x,theta,phi,phi_unwrapped,method,loss')
        self.assertEqual(len(lines), 34)
