#!/usr/bin/env python3
"""
Unit tests for the benchmark harness and the Chernoff tail check.

Usage: pytest scripts/test_benchmark.py
"""

import math
import os
import sys
import tempfile
import time
import unittest
import warnings
from pathlib import Path

import pandas as pd

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from benchmark import (CSV_COLUMNS, EXTRA_COLUMNS, REDUCE_COLUMNS, TIMING_COLUMNS,
                       ExperimentConfig, ResultRow, chernoff_check,
                       lower_tail_bound, run_benchmark, run_experiment,
                       run_pdb_experiment, run_row, standard_chernoff_cases,
                       summarize_rows, upper_tail_bound)
from errors import ConfigError


class ChernoffTestSuite(unittest.TestCase):
    """Monte-Carlo tail frequencies."""

    def test_standard_cases_within_bounds(self):
        """All three standard parameterizations stay within their bounds."""
        for case in standard_chernoff_cases():
            report = chernoff_check(case["r"], case["weights"], case["probs"], case["delta"],
                                    samples=10_000, seed=0)
            self.assertTrue(report.within_bound, case["name"])

    def test_degenerate_case(self):
        """r = 1, w = p = 1: Xi is always 1, so the upper tail at 1.5 is never hit."""
        report = chernoff_check(1, [1.0], [1.0], 0.5, samples=10_000, seed=3)
        self.assertEqual(report.upper_frequency, 0.0)
        self.assertEqual(report.lower_frequency, 0.0)
        self.assertEqual(report.s, 1.0)

    def test_lower_tail_frequency(self):
        """P(Xi = 0) for 100 trials at p = 0.01 is about 0.366."""
        report = chernoff_check(100, [1.0] * 100, [0.01] * 100, 0.5, samples=20_000, seed=1)
        self.assertAlmostEqual(report.lower_frequency, 0.99 ** 100, delta=5 * report.lower_se + 1e-3)
        self.assertLessEqual(report.lower_frequency, report.lower_bound)

    def test_bounds(self):
        """Analytic bound values."""
        self.assertAlmostEqual(upper_tail_bound(1.0, 1.0), math.e / 4, places=12)
        self.assertAlmostEqual(lower_tail_bound(0.5, 1.0), math.exp(-0.125), places=12)

    def test_no_lower_tail_for_large_delta(self):
        """delta >= 1 reports only the upper tail."""
        report = chernoff_check(10, [0.5] * 10, [0.5] * 10, 2.0, samples=10_000, seed=0)
        self.assertIsNone(report.lower_frequency)
        self.assertNotIn("details", report.to_dict())

    def test_validation(self):
        """Bad lengths, ranges, delta and sample counts are rejected."""
        with self.assertRaises(ConfigError):
            chernoff_check(2, [1.0], [0.5, 0.5], 0.5, 10_000, 0)
        with self.assertRaises(ConfigError):
            chernoff_check(1, [1.5], [0.5], 0.5, 10_000, 0)
        with self.assertRaises(ConfigError):
            chernoff_check(1, [1.0], [0.5], 0.0, 10_000, 0)
        with self.assertRaises(ConfigError):
            chernoff_check(1, [1.0], [0.5], 0.5, 100, 0)

    def test_determinism(self):
        """Same seed, same frequencies."""
        first = chernoff_check(20, [0.3] * 20, [0.2] * 20, 0.5, 10_000, 9)
        second = chernoff_check(20, [0.3] * 20, [0.2] * 20, 0.5, 10_000, 9)
        self.assertEqual(first.to_dict(), second.to_dict())


class BenchmarkTestSuite(unittest.TestCase):
    """Experiment configuration, rows, summaries and CSV output."""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_ratio(self):
        """The ratio column is z_lp_ar / z_aff and NaN when z_aff is 0."""
        self.assertAlmostEqual(ResultRow(n=1, L=1, seed=0, z_lp_ar=3.0, z_aff=2.0).ratio, 1.5)
        self.assertTrue(math.isnan(ResultRow(n=1, L=1, seed=0, z_lp_ar=3.0, z_aff=0.0).ratio))

    def test_single_row(self):
        """One row solves both models with the expected sizes."""
        row = run_row(4, 2, 0)
        self.assertTrue(row.ok, row.status)
        self.assertEqual(row.lp_vars, 3 * 4 + 6)
        self.assertEqual(row.aff_vars, 2 * 4 + 16 + (4 + 4 + 1) * 6 + 1)
        self.assertGreater(row.z_lp_ar, 0.0)
        self.assertAlmostEqual(row.ratio, row.z_lp_ar / row.z_aff, places=12)

    def test_csv_output(self):
        """The CSV has the fixed columns, sorted rows and a median row per (n, L)."""
        output = self.root / "out" / "bench.csv"
        config = ExperimentConfig(mode="ar-vs-affine", n=4, L=2, seeds=(1, 0), output=str(output))
        rows = run_benchmark(config)
        self.assertEqual([r.seed for r in rows], [0, 1])
        frame = pd.read_csv(output)
        self.assertEqual(list(frame.columns), CSV_COLUMNS + EXTRA_COLUMNS)
        self.assertEqual(len(frame), 3)
        self.assertEqual(str(frame["seed"].iloc[-1]), "median")
        self.assertAlmostEqual(float(frame["ratio"].iloc[-1]),
                               float(pd.Series([r.ratio for r in rows]).median()), places=12)

    def test_backup_when_not_overwriting(self):
        """overwrite=False moves the previous file aside."""
        output = self.root / "bench.csv"
        output.write_text("old\n", encoding="utf-8")
        config = ExperimentConfig(mode="ar-vs-affine", n=3, L=1, seeds=(0,), output=str(output))
        run_benchmark(config, overwrite=False)
        backups = list(self.root.glob("bench.backup_*.csv"))
        self.assertEqual(len(backups), 1)
        self.assertEqual(backups[0].read_text(encoding="utf-8"), "old\n")

    def test_rows_are_deterministic(self):
        """Apart from timing columns, reruns give identical rows."""
        config = ExperimentConfig(mode="ar-vs-affine", n=4, L=2, seeds=(0, 1))
        first = [r.to_dict() for r in run_benchmark(config)]
        second = [r.to_dict() for r in run_benchmark(config)]
        for a, b in zip(first, second):
            for col in TIMING_COLUMNS:
                a.pop(col)
                b.pop(col)
            self.assertEqual(a, b)

    def test_summary_skips_failures(self):
        """Median rows use only successful rows."""
        rows = [ResultRow(n=2, L=1, seed=0, z_lp_ar=1.0, z_aff=1.0),
                ResultRow(n=2, L=1, seed=1, z_lp_ar=3.0, z_aff=2.0),
                ResultRow(n=2, L=1, seed=2, status="GeneratorExhausted")]
        summary = summarize_rows(rows)
        self.assertEqual(len(summary), 1)
        self.assertAlmostEqual(summary[0]["ratio"], 1.25)
        self.assertEqual(summary[0]["status"], "summary 2/3 ok")

    def test_summary_all_nan_columns_are_quiet(self):
        """Columns with no finite value among the successful rows summarize to NaN without warnings."""
        rows = [ResultRow(n=2, L=1, seed=0, z_lp_ar=1.0, z_aff=1.0),
                ResultRow(n=2, L=1, seed=1, z_lp_ar=3.0, z_aff=2.0),
                ResultRow(n=3, L=1, seed=0, status="GeneratorExhausted"),
                ResultRow(n=3, L=1, seed=1, status="NumericalBreakdown")]
        with warnings.catch_warnings():
            warnings.simplefilter("error", RuntimeWarning)
            summary = summarize_rows(rows)
        self.assertEqual(len(summary), 2)
        self.assertTrue(math.isnan(summary[0]["t_lp_s"]))
        self.assertAlmostEqual(summary[0]["ratio"], 1.25)
        self.assertTrue(math.isnan(summary[1]["ratio"]))
        self.assertEqual(summary[1]["status"], "summary 0/2 ok")

    def test_config_validation(self):
        """Unknown modes and bad parameters are rejected."""
        with self.assertRaises(ConfigError):
            ExperimentConfig(mode="sweep", n=2, L=1, seeds=(0,))
        with self.assertRaises(ConfigError):
            ExperimentConfig(mode="pdb", n=0, L=1, seeds=(0,))
        with self.assertRaises(ConfigError):
            ExperimentConfig(mode="pdb", n=2, L=1, seeds=(0,), epsilon=1.0)
        with self.assertRaises(ConfigError):
            ExperimentConfig(mode="pdb", n=2, L=1, seeds=(0,), workers=0)
        with self.assertRaises(ConfigError):
            ExperimentConfig(mode="chernoff", n=2, L=1, seeds=(0,), samples=100)

    def test_from_config(self):
        """The benchmark section fills the grid; non-None overrides win."""
        config = {"benchmark": {"n_values": [5, 6], "L_values": [3], "seeds": [0, 1, 2]},
                  "rounding": {"epsilon": 0.1}}
        experiment = ExperimentConfig.from_config(config, seeds=(7,), g_scale=None)
        self.assertEqual(experiment.grid(), [(5, 3, 7), (6, 3, 7)])
        self.assertEqual(experiment.epsilon, 0.1)
        self.assertIsNone(experiment.g_scale)

    def test_pdb_experiment(self):
        """The PDB experiment writes one row per seed."""
        output = self.root / "pdb.csv"
        config = ExperimentConfig(mode="pdb", n=5, L=1, seeds=(0, 1), m=4, output=str(output))
        frame = run_pdb_experiment(config)
        self.assertEqual(len(frame), 2)
        self.assertTrue((frame["status"] == "OK").all())
        self.assertTrue((frame["objective"] <= frame["z_lp_pdb"] + 1e-9).all())
        self.assertTrue(output.exists())

    def test_from_config_reads_samples(self):
        """The chernoff section sets the sample count."""
        experiment = ExperimentConfig.from_config({"chernoff": {"samples": 20_000}}, mode="chernoff")
        self.assertEqual(experiment.samples, 20_000)


class ExperimentModeTestSuite(unittest.TestCase):
    """run_experiment dispatches every mode."""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_ar_vs_affine_mode(self):
        """Row and median records, as in the CSV."""
        config = ExperimentConfig(mode="ar-vs-affine", n=3, L=1, seeds=(0, 1))
        frame = run_experiment(config)
        self.assertEqual(list(frame.columns), CSV_COLUMNS + EXTRA_COLUMNS)
        self.assertEqual(len(frame), 3)
        self.assertEqual(frame["seed"].iloc[-1], "median")

    def test_pdb_mode(self):
        """Same table as run_pdb_experiment."""
        config = ExperimentConfig(mode="pdb", n=4, L=1, seeds=(2,), m=3)
        frame = run_experiment(config)
        expected = run_pdb_experiment(config)
        self.assertEqual(len(frame), 1)
        self.assertEqual(frame["objective"].tolist(), expected["objective"].tolist())

    def test_chernoff_mode(self):
        """Three standard cases per seed, all within their bounds, written to CSV."""
        output = self.root / "chernoff.csv"
        config = ExperimentConfig(mode="chernoff", n=1, L=1, seeds=(0, 5), samples=10_000, output=str(output))
        frame = run_experiment(config)
        self.assertEqual(len(frame), 2 * len(standard_chernoff_cases()))
        self.assertEqual(frame["seed"].tolist(), [0, 0, 0, 5, 5, 5])
        self.assertEqual(frame["case"].tolist()[:3], [c["name"] for c in standard_chernoff_cases()])
        self.assertTrue(frame["within_bound"].all())
        self.assertEqual(len(pd.read_csv(output)), 6)

    def test_chernoff_mode_case_seeds(self):
        """Case k of seed s reproduces chernoff_check at master seed s + k."""
        config = ExperimentConfig(mode="chernoff", n=1, L=1, seeds=(3,), samples=10_000)
        frame = run_experiment(config)
        case = standard_chernoff_cases()[2]
        report = chernoff_check(case["r"], case["weights"], case["probs"], case["delta"], 10_000, 5)
        self.assertEqual(frame["lower_frequency"].iloc[2], report.lower_frequency)

    def test_reduce_mode(self):
        """NAE-satisfiability agrees with the covering witness on every seed."""
        output = self.root / "reduce.csv"
        config = ExperimentConfig(mode="reduce", n=6, L=1, m=10, seeds=(0, 1, 2, 3), output=str(output))
        frame = run_experiment(config)
        self.assertEqual(list(frame.columns), REDUCE_COLUMNS)
        self.assertEqual(len(frame), 4)
        self.assertTrue((frame["status"] == "OK").all())
        self.assertTrue(frame["agree"].astype(bool).all())
        self.assertTrue((frame["num_clauses"] == 10).all())
        self.assertTrue(output.exists())

    def test_reduce_mode_variable_cap(self):
        """More variables than the exhaustive cap is a configuration error."""
        config = ExperimentConfig(mode="reduce", n=40, L=1, seeds=(0,))
        with self.assertRaises(ConfigError):
            run_experiment(config)


class RealSizeTestSuite(unittest.TestCase):
    """The n = m = 20 comparison at the sizes the acceptance run uses."""

    ROW_BUDGET_S = 30.0

    def test_n20_row(self):
        """One n = m = 20, L = 20 row: sizes, affine optimum and a per-row time budget."""
        row = run_row(20, 20, 0)
        self.assertTrue(row.ok, row.status)
        self.assertEqual(row.lp_vars, 100)
        self.assertEqual(row.aff_vars, 2081)
        self.assertGreaterEqual(row.aff_vars, 5 * row.lp_vars)
        self.assertAlmostEqual(row.z_aff, 21.486, delta=5e-3)
        self.assertGreater(row.z_lp_ar, 0.0)
        self.assertLess(row.t_aff_s + row.t_lp_incl_s, self.ROW_BUDGET_S)

    @unittest.skipUnless(os.environ.get("BILIN_SLOW"), "set BILIN_SLOW=1 for the full 10-seed sweep")
    def test_full_sweep(self):
        """Ten seeds at L = 20 and L = 100: median ratio bands within ten minutes."""
        config = ExperimentConfig(mode="ar-vs-affine", n=20, L=20, seeds=tuple(range(10)), L_values=(20, 100))
        started = time.perf_counter()
        rows = run_benchmark(config)
        elapsed = time.perf_counter() - started
        self.assertTrue(all(r.ok for r in rows), [r.status for r in rows if not r.ok])
        for L, low, high in [(20, 1.1, 1.5), (100, 1.15, 1.55)]:
            median = float(pd.Series([r.ratio for r in rows if r.L == L]).median())
            self.assertGreaterEqual(median, low, f"L={L}")
            self.assertLessEqual(median, high, f"L={L}")
        self.assertLess(elapsed, 600.0)


if __name__ == "__main__":
    unittest.main()
