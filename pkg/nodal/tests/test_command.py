import tempfile
from io import StringIO
from pathlib import Path
from unittest.mock import patch

from django.conf import settings
from django.core.management import call_command
from django.core.management.base import CommandError
from django.test import TestCase

from nodal.archive import SolutionArchive, archive_io
from nodal.models import Experiment

from .factories import make_archive

GROUND_CONFIG = """\
schema_version: 1
name: ground-unit
manifold:
  lengths: [2pi]
  grid_sizes: [256]
params:
  m: 3
  eps: [0.1]
"""


class LabCommandTest(TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.root = Path(self.tmp.name)

    def tearDown(self):
        self.tmp.cleanup()

    def call(self, *args):
        out = StringIO()
        call_command('lab', *args, stdout=out)
        return out.getvalue()

    def test_ground_with_publish(self):
        config = self.root / 'ground.yaml'
        config.write_text(GROUND_CONFIG)
        output = self.call('ground', '--config', str(config), '--out', str(self.root / 'ground'), '--publish')
        self.assertIn('m(E) = 1.3333', output)
        self.assertIn('Published as experiment', output)
        self.assertTrue((self.root / 'ground' / 'profile.f64').exists())
        experiment = Experiment.objects.get()
        self.assertEqual(experiment.kind, 'ground')
        self.assertAlmostEqual(experiment.ground_energy, 4.0 / 3.0, delta=1e-4)
        self.assertEqual(experiment.records.count(), 0)

    @patch('nodal.management.commands.lab.run_experiment')
    def test_overrides_reach_the_experiment(self, mock_run):
        mock_run.return_value = make_archive()
        output = self.call(
            'sweep-d', '--config', str(Path(settings.BASE_DIR) / 'configs' / 'circle_sweep.yaml'),
            '--out', str(self.root / 'sweep'), '--eps', '0.1', '--seeds', '2', '--jobs', '3',
        )
        config, kind = mock_run.call_args.args
        self.assertEqual(kind, 'sweep_d')
        self.assertEqual(config.eps_list, (0.1,))
        self.assertEqual(config.seeds['count'], 2)
        self.assertEqual(config.output_dir, self.root / 'sweep')
        self.assertEqual(mock_run.call_args.kwargs['jobs'], 3)
        self.assertIn('m_hat', output)
        self.assertIn('sweep_d: 12 records', output)
        self.assertIn("|m_hat/m(E) - 1| decreases as eps decreases: no", output)

    def test_diagnose_an_empty_archive(self):
        empty = SolutionArchive(kind='sweep_m', name='empty', config={}, lengths=(1.0,), grid_sizes=(8,), m=3)
        archive_io(empty, 'save', self.root / 'empty')
        output = self.call('diagnose', '--out', str(self.root / 'empty'))
        self.assertIn('sweep_m: 0 records', output)

    def test_diagnose_needs_a_location(self):
        with self.assertRaises(CommandError):
            self.call('diagnose')

    def test_experiments_need_a_config(self):
        with self.assertRaises(CommandError):
            self.call('sweep-m')

    def test_invalid_config(self):
        config = self.root / 'bad.yaml'
        config.write_text(GROUND_CONFIG.replace('[256]', '[16]'))
        with self.assertRaises(CommandError):
            self.call('sweep-m', '--config', str(config))

    def test_corrupt_archive(self):
        with self.assertRaises(CommandError):
            self.call('diagnose', '--out', str(self.root / 'missing'))

    def test_unknown_subcommand(self):
        with self.assertRaises(CommandError):
            self.call('sweep-x')
