import tempfile
from pathlib import Path

import numpy as np
from django.conf import settings
from django.test import SimpleTestCase, override_settings

from nodal.config import ExperimentConfig, load_config
from nodal.exceptions import ConfigInvalid
from nodal.flow import PLAIN
from nodal.serializers import LengthField

CONFIG_DIR = Path(settings.BASE_DIR) / 'configs'


def minimal_config(**sections):
    data = {
        'schema_version': 1,
        'name': 'unit',
        'manifold': {'lengths': ['2pi'], 'grid_sizes': [256]},
        'params': {'m': 3, 'eps': [0.2, 0.1]},
    }
    data.update(sections)
    return data


class LengthFieldTest(SimpleTestCase):
    def test_multiples_of_pi(self):
        field = LengthField()
        self.assertAlmostEqual(field.to_internal_value("2pi"), 2.0 * np.pi)
        self.assertAlmostEqual(field.to_internal_value("pi/2"), 0.5 * np.pi)
        self.assertAlmostEqual(field.to_internal_value("1.5*pi"), 1.5 * np.pi)
        self.assertAlmostEqual(field.to_internal_value("-pi"), -np.pi)
        self.assertAlmostEqual(field.to_internal_value(3), 3.0)
        self.assertAlmostEqual(field.to_internal_value("0.25"), 0.25)


class ExperimentConfigTest(SimpleTestCase):
    def test_defaults_are_filled(self):
        config = ExperimentConfig.from_dict(minimal_config())
        self.assertEqual(config.name, 'unit')
        self.assertEqual(config.eps_list, (0.2, 0.1))
        self.assertAlmostEqual(config.manifold.lengths[0], 2.0 * np.pi)
        self.assertEqual(config.seeds['strategy'], 'net')
        self.assertEqual(config.concentration, {'radius': 10.0, 'eta': 0.9})
        self.assertEqual(config.polish_steps, 200)
        self.assertEqual(config.checks['pde_factor'], 10.0)
        self.assertTrue(config.data['output']['snapshots'])

    def test_flow_config(self):
        config = ExperimentConfig.from_dict(minimal_config(flow={'step': 0.25}))
        flow = config.flow_config(alpha=2.0)
        self.assertEqual(flow.step, 0.25)
        self.assertEqual(flow.alpha, 2.0)
        self.assertEqual(flow.mode, PLAIN)
        self.assertEqual(flow.solver_tol, settings.NODAL_LAB['SOLVER_TOL'])
        self.assertEqual(flow.collapse_floor, 1e-3)

    def test_params(self):
        params = ExperimentConfig.from_dict(minimal_config()).params(0.1)
        self.assertEqual(params.n, 1)
        self.assertAlmostEqual(params.p, 4.0)

    @override_settings(NODAL_LAB={**settings.NODAL_LAB, 'OUTPUT_DIR': Path('/tmp/nodal-runs')})
    def test_default_output_dir(self):
        config = ExperimentConfig.from_dict(minimal_config())
        self.assertEqual(config.output_dir, Path('/tmp/nodal-runs') / 'unit')

    def test_overrides(self):
        config = ExperimentConfig.from_dict(minimal_config())
        changed = config.with_overrides(eps=[0.05], seeds=3, out='/tmp/elsewhere')
        self.assertEqual(changed.eps_list, (0.05,))
        self.assertEqual(changed.seeds['count'], 3)
        self.assertEqual(changed.output_dir, Path('/tmp/elsewhere'))
        self.assertEqual(config.eps_list, (0.2, 0.1))

    def test_override_is_revalidated(self):
        config = ExperimentConfig.from_dict(minimal_config())
        with self.assertRaises(ConfigInvalid):
            config.with_overrides(eps=[0.001])


class ConfigValidationTest(SimpleTestCase):
    def assertInvalid(self, data, section):
        with self.assertRaises(ConfigInvalid) as caught:
            ExperimentConfig.from_dict(data)
        self.assertIn(section, caught.exception.detail)

    def test_schema_version(self):
        self.assertInvalid(minimal_config(schema_version=2), 'schema_version')

    def test_grid_too_coarse_for_eps(self):
        self.assertInvalid(minimal_config(params={'m': 3, 'eps': [0.05]}), 'params')

    def test_resolution_can_be_relaxed(self):
        config = ExperimentConfig.from_dict(minimal_config(params={'m': 3, 'eps': [0.05], 'resolution': 2}))
        self.assertEqual(config.eps_list, (0.05,))

    def test_exponent_needs_n_plus_m_above_two(self):
        self.assertInvalid(minimal_config(params={'m': 1, 'eps': [0.1]}), 'params')

    def test_axes_must_match(self):
        self.assertInvalid(minimal_config(manifold={'lengths': ['2pi', '2pi'], 'grid_sizes': [64]}), 'manifold')

    def test_negative_eps(self):
        self.assertInvalid(minimal_config(params={'m': 3, 'eps': [-0.1]}), 'params')

    def test_explicit_seeds_need_pairs(self):
        self.assertInvalid(minimal_config(seeds={'strategy': 'explicit'}), 'seeds')

    def test_random_seeds_need_a_count(self):
        self.assertInvalid(minimal_config(seeds={'strategy': 'random'}), 'seeds')

    def test_cutoff_within_the_injectivity_radius(self):
        self.assertInvalid(minimal_config(seeds={'r_cut': 4.0}), 'seeds')

    def test_pair_dimension(self):
        self.assertInvalid(
            minimal_config(seeds={'strategy': 'explicit', 'pairs': [[[0.0, 1.0], [3.0, 1.0]]]}), 'seeds'
        )

    def test_collapse_floor_must_be_positive(self):
        self.assertInvalid(minimal_config(flow={'collapse_floor': 0.0}), 'flow')

    def test_eta_range(self):
        self.assertInvalid(minimal_config(concentration={'eta': 0.4}), 'concentration')


class LoadConfigTest(SimpleTestCase):
    def test_shipped_configs_validate(self):
        for name in ('ground.yaml', 'circle_sweep.yaml', 'torus_multiplicity.yaml'):
            config = load_config(CONFIG_DIR / name)
            self.assertEqual(config.schema_version, 1)
            self.assertTrue(config.eps_list)

    def test_torus_config(self):
        config = load_config(CONFIG_DIR / 'torus_multiplicity.yaml')
        self.assertEqual(config.manifold.n, 2)
        self.assertEqual(config.seeds['count'], 200)
        self.assertEqual(config.seeds['strategy'], 'random')

    def test_missing_file(self):
        with self.assertRaises(ConfigInvalid):
            load_config('/nonexistent/experiment.yaml')

    def test_broken_yaml(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'broken.yaml'
            path.write_text("manifold: [unclosed\n")
            with self.assertRaises(ConfigInvalid):
                load_config(path)

    def test_top_level_must_be_a_mapping(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'list.yaml'
            path.write_text("- 1\n- 2\n")
            with self.assertRaises(ConfigInvalid):
                load_config(path)

    def test_name_defaults_to_the_file_stem(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'nameless.yaml'
            path.write_text(
                "schema_version: 1\n"
                "manifold: {lengths: [2pi], grid_sizes: [128]}\n"
                "params: {m: 3, eps: [0.2]}\n"
            )
            self.assertEqual(load_config(path).name, 'nameless')
