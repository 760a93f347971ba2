"""
Desk-scale experiments; minutes each. Enable with NODAL_LAB_SLOW=1, for example

    NODAL_LAB_SLOW=1 NODAL_LAB_JOBS=8 pytest -m slow
"""
import os
import shutil
import tempfile
import unittest
from pathlib import Path

import numpy as np
import pytest
from django.conf import settings
from django.test import SimpleTestCase

from nodal.archive import m_error_trend, summary_rows
from nodal.config import load_config
from nodal.lab import MULTIPLICITY, SWEEP_D, expected_nodal_pairs, run_experiment

CONFIG_DIR = Path(settings.BASE_DIR) / 'configs'
SLOW = os.environ.get('NODAL_LAB_SLOW') == '1'


@pytest.mark.slow
@unittest.skipUnless(SLOW, "set NODAL_LAB_SLOW=1 to run desk-scale experiments")
class CircleSweepAcceptanceTest(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = Path(tempfile.mkdtemp())
        config = load_config(CONFIG_DIR / 'circle_sweep.yaml').with_overrides(out=cls.tmp)
        cls.archive = run_experiment(config, SWEEP_D, jobs=settings.NODAL_LAB['JOBS'])
        cls.rows = {row['eps']: row for row in summary_rows(cls.archive)}

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)
        super().tearDownClass()

    def test_positive_level(self):
        self.assertAlmostEqual(self.rows[0.05]['m_ratio'], 1.0, delta=0.01)

    def test_nodal_level(self):
        self.assertAlmostEqual(self.rows[0.05]['d_ratio'], 1.0, delta=0.01)

    def test_m_error_trend_is_reported(self):
        rows = summary_rows(self.archive)
        self.assertIsNone(rows[0]['m_error_decreasing'])
        self.assertTrue(all(isinstance(row['m_error_decreasing'], bool) for row in rows[1:]))
        self.assertIsNotNone(m_error_trend(rows))
        self.assertLessEqual(self.rows[0.05]['m_error'], 0.01)

    def test_inequality_at_every_eps(self):
        self.assertTrue(all(row['inequality_holds'] for row in self.rows.values()))

    def test_nodal_centers_separate(self):
        for record in self.archive.records_for(0.05, 'nodal'):
            if record.converged:
                self.assertTrue(record.concentration['passed'])
                self.assertAlmostEqual(record.separation, np.pi, delta=0.1)
                self.assertEqual(record.nodal_set_violations, 0)


@pytest.mark.slow
@unittest.skipUnless(SLOW, "set NODAL_LAB_SLOW=1 to run desk-scale experiments")
class TorusMultiplicityTest(SimpleTestCase):
    def test_at_least_four_clusters(self):
        with tempfile.TemporaryDirectory() as tmp:
            config = load_config(CONFIG_DIR / 'torus_multiplicity.yaml').with_overrides(out=tmp)
            archive = run_experiment(config, MULTIPLICITY, jobs=settings.NODAL_LAB['JOBS'])
        row = summary_rows(archive)[0]
        self.assertGreaterEqual(row['cluster_count'], expected_nodal_pairs(2))
