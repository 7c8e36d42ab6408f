#!/usr/bin/env python3
"""
Unit tests for the seeded instance generators.

Usage: pytest scripts/test_generators.py
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from errors import ConfigError
from generators import (budget_uncertainty_set, budget_weights,
                        generate_ar_instance, generate_pdb_instance,
                        generate_small_ar_instance)
from polytope import coordinate_maxima
from seeding import check_seed, substream


class GeneratorTestSuite(unittest.TestCase):
    """Instance families and their reproducibility."""

    def test_budget_weights_unit_norm(self):
        """Every weight row is nonnegative with unit Euclidean norm."""
        weights = budget_weights(np.random.default_rng(0), 7, 5)
        self.assertEqual(weights.shape, (7, 5))
        self.assertTrue(np.all(weights >= 0))
        np.testing.assert_allclose(np.linalg.norm(weights, axis=1), 1.0, rtol=1e-12)

    def test_budget_set_layout(self):
        """Box rows come first; gamma stays within [0, 1]."""
        uncertainty = budget_uncertainty_set(budget_weights(np.random.default_rng(1), 3, 4))
        self.assertEqual(uncertainty.rows, 7)
        np.testing.assert_array_equal(uncertainty.matrix[:4], np.eye(4))
        gamma = coordinate_maxima(uncertainty).values
        self.assertTrue(np.all(gamma <= 1.0 + 1e-9))
        self.assertTrue(np.all(gamma > 0))

    def test_ar_family_shape(self):
        """A = B = I + G, unit costs, m = n and L_rows = m + L."""
        inst = generate_ar_instance(8, 5, seed=2)
        self.assertEqual((inst.m, inst.n, inst.L_rows), (8, 8, 13))
        np.testing.assert_array_equal(inst.A, inst.B)
        np.testing.assert_array_equal(inst.c, np.ones(8))
        np.testing.assert_array_equal(inst.r, np.ones(13))
        self.assertTrue(np.all(np.isfinite(inst.bounds.theta)))
        self.assertAlmostEqual(inst.metadata["g_scale"], 1 / math.sqrt(8))

    def test_ar_family_determinism(self):
        """Same arguments and seed produce identical data; another seed differs."""
        first = generate_ar_instance(6, 4, seed=11)
        second = generate_ar_instance(6, 4, seed=11)
        self.assertEqual(first.B.tobytes(), second.B.tobytes())
        self.assertEqual(first.R.tobytes(), second.R.tobytes())
        self.assertNotEqual(first.B.tobytes(), generate_ar_instance(6, 4, seed=12).B.tobytes())

    def test_zero_perturbation(self):
        """g_scale = 0 gives the identity."""
        inst = generate_ar_instance(4, 2, seed=0, g_scale=0.0)
        np.testing.assert_array_equal(inst.B, np.eye(4))
        with self.assertRaises(ConfigError):
            generate_ar_instance(4, 2, seed=0, g_scale=-1.0)

    def test_pdb_family(self):
        """Uniform packing data with finite coordinate maxima."""
        inst = generate_pdb_instance(5, 3, 4, seed=9)
        self.assertEqual((inst.n, inst.m1, inst.m2), (5, 3, 4))
        self.assertTrue(np.all((inst.X.rhs >= 1) & (inst.X.rhs <= 2)))
        self.assertTrue(np.all(np.isfinite(inst.theta)) and np.all(np.isfinite(inst.gamma)))
        again = generate_pdb_instance(5, 3, 4, seed=9)
        self.assertEqual(inst.X.matrix.tobytes(), again.X.matrix.tobytes())

    def test_small_family(self):
        """Small instances honour m, zero_a and signed B."""
        inst = generate_small_ar_instance(3, 2, seed=4, m=2)
        self.assertEqual((inst.m, inst.n), (2, 3))
        self.assertTrue(np.all(inst.B > 0))
        self.assertFalse(np.any(generate_small_ar_instance(3, 2, seed=4, zero_a=True).A))
        signed = generate_small_ar_instance(3, 2, seed=4, nonnegative_b=False)
        self.assertTrue(np.all(np.isfinite(signed.bounds.theta)))

    def test_dimension_checks(self):
        """Non-positive dimensions and bad seeds are rejected."""
        with self.assertRaises(ConfigError):
            generate_ar_instance(0, 2, seed=0)
        with self.assertRaises(ConfigError):
            generate_pdb_instance(3, 0, 1, seed=0)
        with self.assertRaises(ConfigError):
            check_seed(-1)

    def test_substreams_are_independent(self):
        """Named substreams of one seed differ; the same name repeats."""
        a = substream(5, "rounding", 0).random(4)
        b = substream(5, "rounding", 1).random(4)
        c = substream(5, "rounding", 0).random(4)
        self.assertFalse(np.array_equal(a, b))
        np.testing.assert_array_equal(a, c)


if __name__ == "__main__":
    unittest.main()
