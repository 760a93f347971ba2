import numpy as np
from django.test import SimpleTestCase

from nodal.exceptions import DimensionMismatch, InverseOutsideInjectivityRadius
from nodal.manifold import TorusManifold

TWO_PI = 2.0 * np.pi


class TorusGeometryTest(SimpleTestCase):
    def setUp(self):
        self.circle = TorusManifold((TWO_PI,), (64,))
        self.torus = TorusManifold((TWO_PI, TWO_PI), (32, 32))

    def test_circle_distance_wraps(self):
        self.assertAlmostEqual(float(self.circle.dist([0.0], [1.5 * np.pi])), 0.5 * np.pi, places=12)

    def test_torus_distance_to_the_far_corner(self):
        self.assertAlmostEqual(float(self.torus.dist([0.0, 0.0], [np.pi, np.pi])), np.pi * np.sqrt(2.0), places=12)

    def test_distance_to_itself_is_zero(self):
        self.assertEqual(float(self.torus.dist([1.0, 2.0], [1.0, 2.0])), 0.0)

    def test_triangle_inequality_on_random_triples(self):
        manifold = TorusManifold((1.0, 2.0, 3.0), (8, 8, 8))
        rng = np.random.default_rng(0)
        x, y, z = (rng.uniform(0.0, 1.0, size=(10000, 3)) * np.array(manifold.lengths) for _ in range(3))
        self.assertTrue(np.all(manifold.dist(x, z) <= manifold.dist(x, y) + manifold.dist(y, z) + 1e-12))

    def test_node_distances_never_exceed_the_diameter(self):
        nodes = self.torus.nodes
        for point in nodes[::37]:
            self.assertLessEqual(self.torus.dist(point, nodes).max(), self.torus.diameter + 1e-12)

    def test_quadrature_weights_sum_to_the_volume(self):
        self.assertAlmostEqual(self.torus.quad_weight * self.torus.node_count, self.torus.volume, places=10)
        self.assertAlmostEqual(self.torus.volume, TWO_PI ** 2)

    def test_radii(self):
        self.assertAlmostEqual(self.circle.injectivity_radius, np.pi)
        self.assertAlmostEqual(self.torus.diameter, np.pi * np.sqrt(2.0))

    def test_exp_wraps_forward(self):
        result = self.circle.exp([0.0], [np.pi + 0.1])
        self.assertAlmostEqual(float(result[0]), np.pi + 0.1, places=12)
        wrapped = self.circle.exp([6.0], [1.0])
        self.assertAlmostEqual(float(wrapped[0]), 7.0 - TWO_PI, places=12)

    def test_log_of_itself_is_zero(self):
        np.testing.assert_array_equal(self.torus.log([1.0, 1.0], [1.0, 1.0]), np.zeros(2))

    def test_exp_inverts_log(self):
        x = np.array([6.2])
        y = np.array([0.1])
        v = self.circle.exp_log(x, y, mode="inverse")
        self.assertAlmostEqual(float(v[0]), 0.1 - 6.2 + TWO_PI, places=12)
        self.assertAlmostEqual(float(self.circle.exp_log(x, v)[0]), 0.1, places=12)

    def test_log_refuses_points_at_the_injectivity_radius(self):
        with self.assertRaises(InverseOutsideInjectivityRadius):
            self.circle.log([0.0], [np.pi])

    def test_unknown_exp_log_mode(self):
        with self.assertRaises(ValueError):
            self.circle.exp_log([0.0], [0.1], mode="sideways")

    def test_point_dimension_is_checked(self):
        with self.assertRaises(DimensionMismatch):
            self.torus.dist([0.0], [1.0])

    def test_construction_rejects_bad_grids(self):
        with self.assertRaises(DimensionMismatch):
            TorusManifold((1.0, 1.0, 1.0, 1.0), (8, 8, 8, 8))
        with self.assertRaises(DimensionMismatch):
            TorusManifold((1.0, 1.0), (8,))
        with self.assertRaises(ValueError):
            TorusManifold((1.0,), (4,))
        with self.assertRaises(ValueError):
            TorusManifold((-1.0,), (8,))

    def test_translate_and_lattice_shift(self):
        values = np.arange(64.0)
        shift = self.circle.lattice_shift([-np.pi / 2])
        self.assertEqual(shift, (48,))
        np.testing.assert_array_equal(self.circle.translate(values, shift), np.roll(values, 48))


class SeparatedNetTest(SimpleTestCase):
    def test_circle_net_at_a_quarter_period(self):
        manifold = TorusManifold((TWO_PI,), (64,))
        net = manifold.separated_net(0.25 * np.pi)
        self.assertEqual(len(net), 4)
        self.assertGreaterEqual(net.min_separation, 0.5 * np.pi - 1e-9)

    def test_half_period_gives_an_antipodal_pair(self):
        manifold = TorusManifold((TWO_PI,), (64,))
        net = manifold.separated_net(0.5 * np.pi)
        self.assertEqual(len(net), 2)
        self.assertAlmostEqual(float(manifold.dist(net.points[0], net.points[1])), np.pi, places=9)

    def test_large_radius_gives_a_single_point(self):
        manifold = TorusManifold((TWO_PI,), (64,))
        net = manifold.separated_net(np.pi)
        self.assertEqual(len(net), 1)
        self.assertEqual(net.min_separation, float("inf"))

    def test_torus_net_covers_and_separates(self):
        manifold = TorusManifold((TWO_PI, TWO_PI), (64, 64))
        eps = 0.3
        net = manifold.separated_net(eps)
        self.assertGreaterEqual(net.min_separation, 2.0 * eps - 1e-8)
        nearest = np.min([manifold.dist(point, manifold.nodes) for point in net.points], axis=0)
        self.assertTrue(np.all(nearest < 2.0 * eps))
        self.assertLessEqual(net.overlap_constant, 36)
        self.assertGreater(net.overlap_constant, 0)
