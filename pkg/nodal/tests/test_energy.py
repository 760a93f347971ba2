import numpy as np
from django.test import SimpleTestCase

from nodal.energy import (
    constants,
    directional_derivative,
    energy_value,
    grad_residual,
    in_nodal_set,
    j_eps,
    nehari,
    pde_residual,
    project_sign_parts,
    relative_nehari_residual,
    tube_image_bound,
)
from nodal.exceptions import ZeroField
from nodal.field import EpsParams, Field, bilinear, lp_norm
from nodal.manifold import TorusManifold

from .test_field import smooth_random

TWO_PI = 2.0 * np.pi


def bump(manifold, center, width):
    distance = manifold.distance_field([center])
    return Field(manifold, np.exp(-(distance / width) ** 2))


class EnergyTest(SimpleTestCase):
    def setUp(self):
        self.manifold = TorusManifold((TWO_PI,), (128,))
        self.params = EpsParams(eps=0.5, n=1, m=3)

    def test_total_is_quadratic_minus_potential(self):
        u = smooth_random(self.manifold, 0)
        energy = j_eps(u, self.params)
        self.assertEqual(energy.total, energy.quadratic - energy.potential)
        self.assertAlmostEqual(energy.total, energy_value(u, self.params), places=12)

    def test_constant_solution(self):
        params = EpsParams(eps=1.0, n=1, m=3)
        one = Field.constant(self.manifold, 1.0)
        energy = j_eps(one, params)
        self.assertAlmostEqual(energy.total, np.pi / 2.0, places=10)
        self.assertLess(energy.grad_norm, 1e-8)
        self.assertLess(pde_residual(one, params), 1e-10)

    def test_gradient_matches_difference_quotients(self):
        step = 1e-5
        for seed in range(20):
            u = smooth_random(self.manifold, seed)
            v = smooth_random(self.manifold, seed + 1000)
            quotient = (energy_value(u + step * v, self.params) - energy_value(u - step * v, self.params)) / (2 * step)
            derivative = directional_derivative(u, v, self.params)
            self.assertAlmostEqual(derivative, quotient, delta=1e-6 * max(abs(derivative), 1.0))

    def test_gradient_representative(self):
        u = smooth_random(self.manifold, 3)
        v = smooth_random(self.manifold, 4)
        grad = grad_residual(u, self.params, tol=1e-12)
        derivative = directional_derivative(u, v, self.params)
        self.assertAlmostEqual(bilinear(grad, v, self.params), derivative, delta=1e-8 * max(abs(derivative), 1.0))


class NehariTest(SimpleTestCase):
    def setUp(self):
        self.manifold = TorusManifold((TWO_PI,), (128,))
        self.params = EpsParams(eps=0.5, n=1, m=3)

    def test_projection_lands_on_the_nehari_set(self):
        u = bump(self.manifold, 1.0, 0.5)
        projection = nehari(u, self.params)
        self.assertGreater(projection.t, 0.0)
        self.assertLess(relative_nehari_residual(projection.projected, self.params), 1e-12)

    def test_projection_maximizes_along_the_ray(self):
        u = bump(self.manifold, 2.0, 0.7)
        t = nehari(u, self.params).t
        step = 1e-4 * t
        slope = (energy_value((t + step) * u, self.params) - energy_value((t - step) * u, self.params)) / (2 * step)
        self.assertAlmostEqual(slope, 0.0, delta=1e-6)
        self.assertGreater(energy_value(t * u, self.params), energy_value(1.1 * t * u, self.params))

    def test_zero_field(self):
        with self.assertRaises(ZeroField):
            nehari(Field.zeros(self.manifold), self.params)
        self.assertEqual(relative_nehari_residual(Field.zeros(self.manifold), self.params), float("inf"))

    def test_sign_parts_are_projected_separately(self):
        u = 3.0 * bump(self.manifold, 1.0, 0.3) - 0.2 * bump(self.manifold, 1.0 + np.pi, 0.3)
        self.assertFalse(in_nodal_set(u, self.params))
        projected = project_sign_parts(u, self.params)
        self.assertTrue(in_nodal_set(projected, self.params))

    def test_tiny_part_falls_back_to_the_whole_field(self):
        u = bump(self.manifold, 1.0, 0.3) - 1e-9 * bump(self.manifold, 1.0 + np.pi, 0.3)
        projected = project_sign_parts(u, self.params)
        np.testing.assert_allclose(projected.values, nehari(u, self.params).projected.values)

    def test_project_zero_field(self):
        with self.assertRaises(ZeroField):
            project_sign_parts(Field.zeros(self.manifold), self.params)


class ConstantsTest(SimpleTestCase):
    def setUp(self):
        self.manifold = TorusManifold((TWO_PI,), (256,))
        self.params = EpsParams(eps=0.3, n=1, m=3)

    def test_level_of_a_nehari_field(self):
        u = nehari(bump(self.manifold, 2.0, 0.4), self.params).projected
        ground = constants(u, self.params)
        self.assertAlmostEqual(ground.m_eps, energy_value(u, self.params), delta=1e-10 * ground.m_eps)
        self.assertAlmostEqual(ground.alpha, 0.5 * ground.S_eps, places=12)

    def test_constants_are_scale_invariant(self):
        u = bump(self.manifold, 2.0, 0.4)
        self.assertAlmostEqual(constants(u, self.params).S_eps, constants(5.0 * u, self.params).S_eps, places=10)

    def test_sobolev_quotient(self):
        u = bump(self.manifold, 2.0, 0.4)
        expected = bilinear(u, u, self.params) / lp_norm(u, 4, self.params) ** 2
        self.assertAlmostEqual(constants(u, self.params).S_eps, expected, places=12)

    def test_zero_field(self):
        with self.assertRaises(ZeroField):
            constants(Field.zeros(self.manifold), self.params)

    def test_tube_image_bound(self):
        self.assertAlmostEqual(tube_image_bound(2.0, 4.0, 4.0), 0.5)

    def test_pde_residual_of_a_non_solution(self):
        self.assertGreater(pde_residual(bump(self.manifold, 1.0, 0.5), self.params), 1e-3)
