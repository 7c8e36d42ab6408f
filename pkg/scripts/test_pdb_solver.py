#!/usr/bin/env python3
"""
Unit tests for the PDB relaxation and its randomized rounding.

Usage: pytest scripts/test_pdb_solver.py
"""

import math
import sys
import unittest
from pathlib import Path

import numpy as np

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from errors import ConfigError, DimensionMismatch, UnboundedCoordinate
from exact_oracle import exact_pdb
from generators import generate_pdb_instance
from lp_core import export_lp
from pdb_solver import (PdbInstance, RoundingConfig, build_lp_pdb,
                        estimate_event_frequency, pdb_objective,
                        relaxation_witness, round_pdb, solve_lp_pdb, zeta)
from polytope import PackingPolytope, contains

ZETA_16 = 2 * math.log(16) / math.log(math.log(16)) + 2


class PdbSolverTestSuite(unittest.TestCase):
    """zeta, LP-PDB construction and round_pdb."""

    @classmethod
    def setUpClass(cls):
        unit = PackingPolytope([[1.0]], [1.0])
        cls.box = PdbInstance(unit, unit)
        cls.example = PdbInstance(PackingPolytope([[1.0, 2.0]], [2.0], name="X"),
                                  PackingPolytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 3.0], name="Y"))
        cls.random = generate_pdb_instance(12, 10, 10, seed=4)

    def test_zeta_values(self):
        """zeta(100) is about 8.031 and small m is clamped to 16."""
        self.assertAlmostEqual(zeta(100), 2 * math.log(100) / math.log(math.log(100)) + 2, places=12)
        self.assertAlmostEqual(zeta(100), 8.031, places=3)
        self.assertAlmostEqual(zeta(16), ZETA_16, places=12)
        self.assertAlmostEqual(zeta(16), 7.4376, places=3)
        self.assertEqual(zeta(2), zeta(16))
        self.assertLessEqual(zeta(16), zeta(17))
        with self.assertRaises(ConfigError):
            zeta(0)

    def test_box_relaxation(self):
        """n = 1 unit boxes: max omega with two rows omega <= 1, optimum 1."""
        problem = build_lp_pdb(self.box)
        self.assertEqual(problem.num_rows, 2)
        self.assertAlmostEqual(solve_lp_pdb(self.box).objective, 1.0, places=9)

    def test_example_relaxation(self):
        """The two-variable example has z_LP-PDB = 3 and exact optimum 3."""
        solution = solve_lp_pdb(self.example)
        self.assertAlmostEqual(solution.objective, 3.0, places=9)
        self.assertTrue(np.all(solution.x <= 1 + 1e-9))
        self.assertAlmostEqual(exact_pdb(self.example), 3.0, places=9)
        np.testing.assert_allclose(build_lp_pdb(self.example).objective, [2.0, 3.0])

    def test_export_row_count(self):
        """The exported LP has m1 + m2 constraint lines."""
        text = export_lp(build_lp_pdb(self.example))
        self.assertEqual(sum(1 for line in text.splitlines() if line.strip().startswith(("P(", "Q("))), 3)

    def test_relaxation_bound_random(self):
        """exact_pdb never exceeds the relaxation on small random instances."""
        for seed in range(15):
            inst = generate_pdb_instance(1 + seed % 4, 1 + seed % 3, 2 + seed % 2, seed)
            self.assertLessEqual(exact_pdb(inst), solve_lp_pdb(inst).objective + 1e-6)

    def test_witness_is_relaxation_feasible(self):
        """omega_i = (x_i/theta_i)(y_i/gamma_i) of a feasible pair is LP-feasible with value x^T y."""
        inst = self.random
        rng = np.random.default_rng(2)
        problem = build_lp_pdb(inst)
        for _ in range(10):
            x = inst.theta * rng.uniform(0, 1, inst.n) / inst.n
            y = inst.gamma * rng.uniform(0, 1, inst.n) / inst.n
            self.assertTrue(contains(inst.X, x) and contains(inst.Y, y))
            omega = relaxation_witness(inst, x, y)
            self.assertLessEqual(problem.max_violation(omega), 1e-9)
            self.assertAlmostEqual(float(problem.objective @ omega), pdb_objective(x, y), places=9)

    def test_box_rounding_is_deterministic(self):
        """omega* = 1 makes every draw 1: x = 1/zeta1, y = 1/zeta2 with T = 16."""
        solution = round_pdb(self.box, RoundingConfig(epsilon=0.25, seed=0))
        self.assertEqual(solution.iterations_used, 16)
        self.assertFalse(solution.exhausted)
        self.assertAlmostEqual(solution.x[0], 1 / ZETA_16, places=12)
        self.assertAlmostEqual(solution.y[0], 1 / ZETA_16, places=12)
        self.assertAlmostEqual(solution.objective, 1 / ZETA_16 ** 2, places=12)
        self.assertTrue(solution.meets_threshold)

    def test_rounding_support_and_feasibility(self):
        """Outputs are feasible and near-integral at theta/zeta1 and gamma/zeta2."""
        inst = self.random
        for seed in range(5):
            solution = round_pdb(inst, RoundingConfig(seed=seed))
            z1, z2 = solution.zeta
            self.assertTrue(contains(inst.X, solution.x, 1e-7))
            self.assertTrue(contains(inst.Y, solution.y, 1e-7))
            self.assertTrue(solution.near_integral)
            ratio_x = np.divide(solution.x, inst.theta / z1, out=np.zeros(inst.n), where=inst.theta > 0)
            ratio_y = np.divide(solution.y, inst.gamma / z2, out=np.zeros(inst.n), where=inst.gamma > 0)
            self.assertTrue(np.all(np.minimum(np.abs(ratio_x), np.abs(ratio_x - 1)) <= 1e-9))
            self.assertTrue(np.all(np.minimum(np.abs(ratio_y), np.abs(ratio_y - 1)) <= 1e-9))
            self.assertAlmostEqual(solution.objective, pdb_objective(solution.x, solution.y), places=12)

    def test_rounding_determinism(self):
        """Same instance, seed and epsilon give identical output; iterations are prefix-stable."""
        first = round_pdb(self.random, RoundingConfig(epsilon=0.1, seed=123))
        second = round_pdb(self.random, RoundingConfig(epsilon=0.1, seed=123))
        self.assertEqual(first.x.tobytes(), second.x.tobytes())
        self.assertEqual(first.best_iteration, second.best_iteration)
        longer = round_pdb(self.random, RoundingConfig(seed=123, max_iterations_override=40))
        self.assertGreaterEqual(longer.objective, first.objective)

    def test_iteration_count(self):
        """T = 8 ceil(ln(1/epsilon))."""
        self.assertEqual(RoundingConfig(epsilon=0.25).iterations, 16)
        self.assertEqual(RoundingConfig(epsilon=0.01).iterations, 40)
        self.assertEqual(RoundingConfig(max_iterations_override=3).iterations, 3)

    def test_config_validation(self):
        """epsilon outside (0, 1) and bad overrides are rejected."""
        for eps in (0.0, 1.0, -0.5):
            with self.assertRaises(ConfigError):
                RoundingConfig(epsilon=eps)
        with self.assertRaises(ConfigError):
            RoundingConfig(zeta_override=(0.0, 1.0))
        with self.assertRaises(ConfigError):
            RoundingConfig(seed=-1)

    def test_zeta_override(self):
        """zeta_override replaces the logarithmic shrink factors."""
        solution = round_pdb(self.box, RoundingConfig(seed=0, zeta_override=(2.0, 4.0)))
        self.assertAlmostEqual(solution.x[0], 0.5, places=12)
        self.assertAlmostEqual(solution.y[0], 0.25, places=12)

    def test_event_frequency(self):
        """The joint event frequency is a probability and bounded by each single event."""
        stats = estimate_event_frequency(self.random, 50, seed=1)
        self.assertGreaterEqual(stats["all_events"], 0.0)
        self.assertLessEqual(stats["all_events"], min(stats["x_feasible"], stats["y_feasible"], stats["threshold"]))

    def test_objective_dimension(self):
        """pdb_objective examples and shape checks."""
        self.assertEqual(pdb_objective([2, 0], [1, 3]), 2.0)
        self.assertEqual(pdb_objective([0, 1], [1, 3]), 3.0)
        self.assertEqual(pdb_objective([0, 0], [5, 7]), 0.0)
        with self.assertRaises(DimensionMismatch):
            pdb_objective([1, 2], [1])

    def test_unbounded_coordinate_rejected(self):
        """An unbounded X coordinate is rejected by build_lp_pdb."""
        inst = PdbInstance(PackingPolytope([[1.0, 0.0]], [1.0]), PackingPolytope(np.eye(2), np.ones(2)))
        with self.assertRaises(UnboundedCoordinate):
            build_lp_pdb(inst)


if __name__ == "__main__":
    unittest.main()
