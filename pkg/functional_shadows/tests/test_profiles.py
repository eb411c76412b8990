import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from functional_shadows.exceptions import DomainError
from functional_shadows.profiles import (
    Family,
    FamilySpec,
    ProfileModel,
    TrueProfile,
    evaluate,
    pack,
    parameter_count,
    random_profile,
    state_distance,
    unpack,
)
from functional_shadows.qubit import (
    DensityOperator,
    Projector,
    bloch_vectors,
    canonicalize_angles,
    density_from_hypothesis,
)

from .helpers import DOMAIN, affine_truth, constant_model

AFFINE = FamilySpec.parse('affine')
CONSTANT = FamilySpec.parse('constant')


class FamilySpecTests(SimpleTestCase):
    def test_parse(self):
        self.assertEqual(FamilySpec.parse('constant'), FamilySpec(Family.CONSTANT, 0))
        self.assertEqual(FamilySpec.parse('Affine'), FamilySpec(Family.AFFINE, 1))
        self.assertEqual(FamilySpec.parse('poly:3'), FamilySpec(Family.POLYNOMIAL, 3))
        self.assertEqual(str(FamilySpec.parse('poly:3')), 'poly:3')

    def test_unknown_family(self):
        for text in ('linear', 'poly', 'poly:x', ''):
            with self.subTest(text=text), self.assertRaises(DomainError):
                FamilySpec.parse(text)

    def test_affine_degree_is_fixed(self):
        with self.assertRaises(DomainError):
            FamilySpec(Family.AFFINE, 2)


class PackingTests(SimpleTestCase):
    def test_parameter_counts(self):
        self.assertEqual(parameter_count(affine_truth()), 4)
        self.assertEqual(parameter_count(constant_model(1.0, 2.0)), 2)
        cubic = FamilySpec.parse('poly:3')
        model = ProfileModel((0.1, 0.2, 0.3, 0.4), (1.0, 0.0, 0.0, 0.5), DOMAIN, cubic)
        self.assertEqual(parameter_count(model), 8)

    def test_mixed_families(self):
        model = ProfileModel((1.0,), (0.5, 1.0, -0.2), DOMAIN, CONSTANT, FamilySpec.parse('poly:2'))
        self.assertEqual(parameter_count(model), 4)

    def test_pack_unpack_round_trip(self):
        model = ProfileModel((1.0, 0.2, -0.1), (3.0, 0.5), DOMAIN, FamilySpec.parse('poly:2'), AFFINE)
        restored = unpack(model, pack(model))
        self.assertEqual(restored, model)

    def test_unpack_rejects_wrong_length(self):
        with self.assertRaises(DomainError):
            unpack(affine_truth(), [1.0, 2.0, 3.0])

    def test_coefficient_count_must_match_family(self):
        with self.assertRaises(DomainError):
            ProfileModel((1.0,), (0.0, 1.0), DOMAIN, AFFINE)

    def test_unpack_keeps_true_profile_type(self):
        truth = affine_truth()
        self.assertIsInstance(unpack(truth, pack(truth)), TrueProfile)


class EvaluateTests(SimpleTestCase):
    def test_constant_antidiagonal_model(self):
        model = constant_model(math.pi / 2, math.pi)
        antidiagonal = DensityOperator.from_ket(Projector.A.ket)
        for x in np.linspace(*DOMAIN, 5):
            self.assertTrue(density_from_hypothesis(evaluate(model, x)).allclose(antidiagonal))

    def test_zero_slope_matches_constant(self):
        affine = ProfileModel.from_affine(1.2, 0.0, 0.7, 0.0, DOMAIN)
        constant = constant_model(1.2, 0.7)
        for x in np.linspace(*DOMAIN, 7):
            self.assertEqual(evaluate(affine, x), evaluate(constant, x))

    def test_from_affine_uses_physical_units(self):
        model = ProfileModel.from_affine(0.5, 0.01, 2.0, -0.05, DOMAIN)
        for x in (800.0, 807.5, 820.0):
            theta, phi = model.raw_angles(x)
            self.assertAlmostEqual(float(theta), 0.5 + 0.01 * x, places=9)
            self.assertAlmostEqual(float(phi), 2.0 - 0.05 * x, places=9)

    def test_negative_theta_is_reflected(self):
        model = ProfileModel((-0.1, 0.0), (0.4, 0.0), DOMAIN)
        h = evaluate(model, 810.0)
        self.assertAlmostEqual(h.theta, 0.1, places=14)
        self.assertAlmostEqual(h.phi, 0.4 + math.pi, places=14)
        raw = DensityOperator.from_bloch(bloch_vectors(-0.1, 0.4))
        self.assertTrue(density_from_hypothesis(h).allclose(raw))

    def test_outside_domain_is_rejected(self):
        with self.assertRaises(DomainError):
            evaluate(affine_truth(), 799.0)

    def test_full_turn_in_phi_intercept(self):
        model = affine_truth()
        shifted = ProfileModel(model.theta_params, (model.phi_params[0] + 2 * math.pi, model.phi_params[1]), DOMAIN)
        for x in np.linspace(*DOMAIN, 11):
            self.assertTrue(density_from_hypothesis(evaluate(model, x)).allclose(
                density_from_hypothesis(evaluate(shifted, x))))
        self.assertLessEqual(state_distance(model, shifted, np.linspace(*DOMAIN, 101)), 1e-7)

    def test_reflection_never_changes_the_state(self):
        rng = np.random.default_rng(17)
        theta = rng.uniform(-4 * math.pi, 4 * math.pi, 10000)
        phi = rng.uniform(-4 * math.pi, 4 * math.pi, 10000)
        canonical_theta, canonical_phi = canonicalize_angles(theta, phi)
        self.assertTrue(np.all((canonical_theta >= 0) & (canonical_theta <= math.pi)))
        assert_allclose(bloch_vectors(canonical_theta, canonical_phi), bloch_vectors(theta, phi), atol=1e-12)

    def test_random_models_evaluate_canonically(self):
        rng = np.random.default_rng(19)
        for _ in range(200):
            model = random_profile(rng, FamilySpec.parse('poly:2'), x_domain=DOMAIN)
            x = rng.uniform(*DOMAIN)
            h = evaluate(model, x)
            self.assertTrue(0.0 <= h.theta <= math.pi)
            raw = DensityOperator.from_bloch(bloch_vectors(*model.raw_angles(x)))
            self.assertTrue(density_from_hypothesis(h).allclose(raw))

    def test_state_distance_is_zero_for_the_same_model(self):
        model = affine_truth()
        self.assertLess(state_distance(model, model, np.linspace(*DOMAIN, 50)), 1e-7)
