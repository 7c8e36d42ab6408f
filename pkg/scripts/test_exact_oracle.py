#!/usr/bin/env python3
"""
Unit tests for the exact PDB optimum and the exact worst-case recourse Q(x).

Usage: pytest scripts/test_exact_oracle.py
"""

import itertools
import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from ar_solver import ArInstance, induced_pdb_instance
from errors import EnumerationTooLarge
from exact_oracle import exact_pdb, exact_q, recourse_cost
from generators import generate_small_ar_instance
from pdb_solver import PdbInstance
from polytope import PackingPolytope, contains


class ExactOracleTestSuite(unittest.TestCase):
    """exact_pdb, recourse_cost and exact_q."""

    @classmethod
    def setUpClass(cls):
        cls.unit_box = PackingPolytope([[1.0]], [1.0])
        cls.unit = ArInstance(A=[[1.0]], B=[[1.0]], c=[1.0], d=[1.0], uncertainty=cls.unit_box)

    def test_pdb_examples(self):
        """Example optimum 3, unit boxes 1 and a zero polytope 0."""
        example = PdbInstance(PackingPolytope([[1.0, 2.0]], [2.0]), PackingPolytope(np.eye(2), [1.0, 3.0]))
        self.assertAlmostEqual(exact_pdb(example), 3.0, places=9)
        self.assertAlmostEqual(exact_pdb(PdbInstance(self.unit_box, self.unit_box)), 1.0, places=9)
        zero = PdbInstance(PackingPolytope([[1.0]], [0.0]), self.unit_box)
        self.assertEqual(exact_pdb(zero), 0.0)

    def test_pdb_cap(self):
        """The enumeration cap is enforced, never subsampled."""
        inst = PdbInstance(PackingPolytope(np.eye(3), np.ones(3)), PackingPolytope(np.eye(3), np.ones(3)))
        with self.assertRaises(EnumerationTooLarge):
            exact_pdb(inst, cap=10)

    def test_unit_q(self):
        """Q(0) = 1 at scenario h = 1, Q(1) = 0."""
        q = exact_q(self.unit, [0.0])
        self.assertAlmostEqual(q.value, 1.0, places=9)
        self.assertTrue(q.bounded)
        np.testing.assert_allclose(q.scenario, [1.0])
        self.assertAlmostEqual(exact_q(self.unit, [1.0]).value, 0.0, places=9)

    def test_infinite_q(self):
        """A scenario without recourse makes Q infinite."""
        inst = ArInstance(A=[[1.0]], B=[[0.0]], c=[1.0], d=[1.0], uncertainty=self.unit_box)
        q = exact_q(inst, [0.5])
        self.assertFalse(q.bounded)
        self.assertEqual(q.value, math.inf)
        self.assertEqual(recourse_cost(inst, np.array([0.5]), np.array([1.0])), math.inf)
        self.assertEqual(exact_q(inst, [1.0]).value, 0.0)

    def test_monotone_in_x(self):
        """With A >= 0, raising x never raises Q(x)."""
        for seed in range(4):
            inst = generate_small_ar_instance(2, 2, seed=200 + seed)
            inst = ArInstance(A=np.abs(inst.A), B=inst.B, c=inst.c, d=inst.d, uncertainty=inst.uncertainty)
            x = np.array([0.2, 0.1])
            self.assertLessEqual(exact_q(inst, 2 * x).value, exact_q(inst, x).value + 1e-9)

    def test_vertex_maximum(self):
        """No grid point of U beats the vertex maximum."""
        inst = generate_small_ar_instance(2, 1, seed=7)
        x = np.zeros(inst.n)
        q = exact_q(inst, x).value
        grid = np.linspace(0.0, 1.0, 6)
        for h in itertools.product(grid, repeat=inst.m):
            h = np.array(h)
            if contains(inst.uncertainty, h):
                self.assertLessEqual(recourse_cost(inst, x, h), q + 1e-7)

    def test_zero_first_stage_matches_pdb(self):
        """With A = 0, Q(0) is the exact optimum of the induced PDB instance."""
        for seed in range(4):
            inst = generate_small_ar_instance(2, 2, seed=300 + seed, zero_a=True)
            self.assertAlmostEqual(exact_q(inst, np.zeros(inst.n)).value,
                                   exact_pdb(induced_pdb_instance(inst)), places=7)


if __name__ == "__main__":
    unittest.main()
