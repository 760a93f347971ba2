from functools import lru_cache

import numpy as np
from django.test import SimpleTestCase

from nodal.energy import energy_value
from nodal.exceptions import CutoffExceedsInjectivityRadius, SubcriticalityViolated
from nodal.field import EpsParams
from nodal.groundstate import (
    critical_exponent,
    nehari_scaling_level,
    radial_integral,
    radial_ode_residual,
    sample_bubble,
    shoot,
    smooth_cutoff,
)
from nodal.manifold import TorusManifold


@lru_cache(maxsize=None)
def cached_profile(n, q):
    return shoot(n, q)


class LineProfileTest(SimpleTestCase):
    """On the line the ground state is sqrt(2) sech(r) with m(E) = 4/3."""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.profile = cached_profile(1, 4.0)

    def test_amplitude(self):
        self.assertAlmostEqual(self.profile.u0, np.sqrt(2.0), delta=1e-6)

    def test_level(self):
        self.assertAlmostEqual(self.profile.mE, 4.0 / 3.0, delta=1e-4)

    def test_matches_the_closed_form(self):
        r = np.linspace(0.0, 10.0, 101)
        np.testing.assert_allclose(self.profile(r), np.sqrt(2.0) / np.cosh(r), atol=1e-5)

    def test_decay(self):
        self.assertAlmostEqual(self.profile.decay_rate, 1.0, delta=0.02)
        self.assertLessEqual(self.profile.samples[-1], 1e-8 * self.profile.u0)
        self.assertTrue(np.all(self.profile.samples > 0.0))

    def test_decay_bound_beyond_two(self):
        far = self.profile.radii >= 2.0
        bound = self.profile.decay_constant * np.exp(-self.profile.decay_rate * self.profile.radii[far])
        self.assertTrue(np.all(self.profile.samples[far] <= bound * (1.0 + 1e-12)))
        self.assertLess(self.profile.decay_constant, 10.0)

    def test_ode_residual(self):
        radii, residual = radial_ode_residual(self.profile)
        interior = radii < 10.0
        self.assertLessEqual(np.abs(residual[interior]).max(), 1e-4 * self.profile.u0)

    def test_level_is_stable_under_a_longer_grid(self):
        longer = shoot(1, 4.0, r_max=2.0 * self.profile.r_max, samples=2 * self.profile.samples.size - 1)
        np.testing.assert_allclose(longer.radii[:self.profile.samples.size], self.profile.radii)
        self.assertLessEqual(abs(longer.mE - self.profile.mE), 1e-8 * self.profile.mE)

    def test_bubble_energy_is_the_limit_energy(self):
        manifold = TorusManifold((2.0 * np.pi,), (4096,))
        params = EpsParams.for_manifold(manifold, 0.05, 3)
        bubble = sample_bubble(self.profile, 0.05, manifold, manifold.node(0), manifold.injectivity_radius)
        gradient = radial_integral(self.profile, np.gradient(self.profile.samples, self.profile.radii) ** 2)
        mass = radial_integral(self.profile, self.profile.samples ** 2)
        power = radial_integral(self.profile, self.profile.samples ** 4)
        limit = 0.5 * (gradient + mass) - power / 4.0
        self.assertAlmostEqual(limit, self.profile.mE, delta=1e-4)
        self.assertAlmostEqual(energy_value(bubble, params), limit, delta=1e-3 * limit)

    def test_metadata(self):
        metadata = self.profile.metadata()
        self.assertEqual(metadata["n"], 1)
        self.assertEqual(metadata["sample_count"], 8192)
        self.assertEqual(metadata["mE"], self.profile.mE)


class HigherDimensionalProfileTest(SimpleTestCase):
    def test_three_dimensional_profile_decreases(self):
        profile = cached_profile(3, 4.0)
        self.assertTrue(np.all(np.diff(profile.samples) < 0.0))
        self.assertLessEqual(profile(8.0), 2e-3 * profile.u0)

    def test_levels_agree_with_the_scaling_oracle(self):
        for n in (2, 3):
            profile = cached_profile(n, 4.0)
            self.assertAlmostEqual(profile.mE, nehari_scaling_level(profile), delta=1e-2 * profile.mE)

    def test_line_scaling_oracle(self):
        profile = cached_profile(1, 4.0)
        self.assertAlmostEqual(nehari_scaling_level(profile), 4.0 / 3.0, delta=1e-3)


class SubcriticalityTest(SimpleTestCase):
    def test_critical_exponent(self):
        self.assertEqual(critical_exponent(1), float("inf"))
        self.assertEqual(critical_exponent(3), 6.0)

    def test_rejects_critical_and_trivial_exponents(self):
        with self.assertRaises(SubcriticalityViolated):
            shoot(3, 6.0)
        with self.assertRaises(SubcriticalityViolated):
            shoot(1, 2.0)


class BubbleSamplingTest(SimpleTestCase):
    def setUp(self):
        self.profile = cached_profile(1, 4.0)
        self.manifold = TorusManifold((2.0 * np.pi,), (512,))

    def test_cutoff(self):
        distance = np.array([0.0, 0.25, 0.5, 0.75, 1.0, 2.0])
        values = smooth_cutoff(distance, 1.0)
        np.testing.assert_allclose(values[[0, 1, 2]], 1.0)
        np.testing.assert_allclose(values[[4, 5]], 0.0)
        self.assertTrue(0.0 < values[3] < 1.0)

    def test_peak_sits_at_the_center(self):
        center = self.manifold.node(100)
        bubble = sample_bubble(self.profile, 0.1, self.manifold, center, 1.0)
        self.assertEqual(int(np.argmax(bubble.values)), 100)
        self.assertAlmostEqual(bubble.values.max(), self.profile.u0, places=12)

    def test_support_is_inside_the_cutoff(self):
        center = self.manifold.node(0)
        bubble = sample_bubble(self.profile, 0.5, self.manifold, center, 1.0)
        distance = self.manifold.distance_field(center)
        self.assertTrue(np.all(bubble.values[distance >= 1.0] == 0.0))

    def test_cutoff_beyond_the_injectivity_radius(self):
        with self.assertRaises(CutoffExceedsInjectivityRadius):
            sample_bubble(self.profile, 0.1, self.manifold, [0.0], 4.0)

    def test_eps_must_be_positive(self):
        with self.assertRaises(ValueError):
            sample_bubble(self.profile, 0.0, self.manifold, [0.0], 1.0)
