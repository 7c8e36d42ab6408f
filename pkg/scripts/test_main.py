#!/usr/bin/env python3
"""
Unit tests for configuration loading and the command line.

Usage: pytest scripts/test_main.py
"""

import logging
import sys
import tempfile
import unittest
from pathlib import Path

import pandas as pd
import yaml

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from errors import ConfigError
from hardness_reduction import MnaeInstance
from instance_io import write_instance, write_mnae
from main import DEFAULT_CONFIG, apply_overrides, build_parser, load_config, main
from pdb_solver import PdbInstance
from polytope import PackingPolytope


class ConfigTestSuite(unittest.TestCase):
    """load_config and apply_overrides."""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)

    def tearDown(self):
        self.tmpdir.cleanup()

    def test_partial_file_is_merged(self):
        """Keys missing from the file fall back to the defaults."""
        path = self.root / "config.yaml"
        path.write_text("solver:\n  feas_tol: 1.0e-6\n", encoding="utf-8")
        config = load_config(str(path))
        self.assertEqual(config["solver"]["feas_tol"], 1e-6)
        self.assertEqual(config["solver"]["opt_tol"], DEFAULT_CONFIG["solver"]["opt_tol"])
        self.assertEqual(config["paths"], DEFAULT_CONFIG["paths"])

    def test_bad_files(self):
        """Missing files and non-mapping documents are rejected."""
        with self.assertRaises(FileNotFoundError):
            load_config(str(self.root / "missing.yaml"))
        path = self.root / "list.yaml"
        path.write_text("- 1\n- 2\n", encoding="utf-8")
        with self.assertRaises(ConfigError):
            load_config(str(path))

    def test_repository_config_loads(self):
        """config/config.yaml parses with float tolerances."""
        config = load_config(str(Path(__file__).parent.parent / "config" / "config.yaml"))
        self.assertIsInstance(config["solver"]["feas_tol"], float)
        self.assertEqual(config["benchmark"]["L_values"], [20, 100])

    def test_overrides(self):
        """Common flags override the file; the defaults stay untouched."""
        args = build_parser().parse_args(["bench", "--seed", "5", "--tol-feas", "1e-6", "--workers", "2"])
        config = apply_overrides(DEFAULT_CONFIG, args)
        self.assertEqual(config["acceptance"]["seed"], 5)
        self.assertEqual(config["solver"]["feas_tol"], 1e-6)
        self.assertEqual(config["benchmark"]["workers"], 2)
        self.assertEqual(DEFAULT_CONFIG["benchmark"]["workers"], 1)


class CommandLineTestSuite(unittest.TestCase):
    """main() end to end on tiny inputs."""

    def setUp(self):
        self.tmpdir = tempfile.TemporaryDirectory()
        self.root = Path(self.tmpdir.name)
        self.config = self.root / "config.yaml"
        self.config.write_text(yaml.safe_dump({
            "paths": {"outputs": str(self.root / "out"), "logs": str(self.root / "logs"),
                      "instances": str(self.root / "instances")},
            "options": {"log_level": "WARNING"},
        }), encoding="utf-8")

    def tearDown(self):
        root = logging.getLogger()
        for handler in list(root.handlers):
            handler.close()
            root.removeHandler(handler)
        self.tmpdir.cleanup()

    def run_main(self, *argv) -> int:
        with self.assertRaises(SystemExit) as ctx:
            main([*argv, "--config", str(self.config)])
        return ctx.exception.code

    def test_solve_pdb(self):
        """solve-pdb writes its result document."""
        out = self.root / "pdb.yaml"
        self.assertEqual(self.run_main("solve-pdb", "--n", "4", "--seed", "1", "--out", str(out)), 0)
        doc = yaml.safe_load(out.read_text(encoding="utf-8"))
        self.assertLessEqual(doc["objective"], doc["lp_relaxation_value"] + 1e-9)
        self.assertEqual(len(doc["x"]), 4)

    def test_reduce_unsatisfiable(self):
        """A single (1, 1, 1) clause has no witness."""
        formula = write_mnae(MnaeInstance(1, ((1, 1, 1),)), self.root / "f.cnf")
        out = self.root / "reduce.yaml"
        self.assertEqual(self.run_main("reduce", "--formula", str(formula), "--out", str(out)), 0)
        doc = yaml.safe_load(out.read_text(encoding="utf-8"))
        self.assertFalse(doc["nae_satisfiable"])
        self.assertIsNone(doc["witness"])

    def test_oracle_cap_exit_code(self):
        """Exceeding the enumeration cap exits with code 3."""
        box = PackingPolytope([[1.0, 0.0], [0.0, 1.0]], [1.0, 1.0])
        instance = write_instance(PdbInstance(box, box), self.root / "box.yaml")
        self.config.write_text(yaml.safe_dump({
            "paths": {"outputs": str(self.root / "out"), "logs": str(self.root / "logs")},
            "oracle": {"enumeration_cap": 2},
        }), encoding="utf-8")
        self.assertEqual(self.run_main("oracle", "--instance", str(instance)), 3)

    def test_missing_instance_exit_code(self):
        """A missing instance file is a generic failure."""
        self.assertEqual(self.run_main("oracle", "--instance", str(self.root / "missing.yaml")), 1)

    def test_generate_then_solve(self):
        """generate writes an AR instance that solve-ar reads back."""
        instance = self.root / "ar.yaml"
        self.assertEqual(self.run_main("generate", "--kind", "small-ar", "--n", "2", "--L", "1",
                                       "--out", str(instance)), 0)
        out = self.root / "ar_result.yaml"
        self.assertEqual(self.run_main("solve-ar", "--instance", str(instance), "--separate", "--exact",
                                       "--out", str(out)), 0)
        doc = yaml.safe_load(out.read_text(encoding="utf-8"))
        self.assertLessEqual(doc["first_stage_cost"], doc["z_lp_ar"] + 1e-6)
        self.assertIn("separation", doc)

    def test_bench_reduce_mode(self):
        """bench --mode reduce writes one agreeing row per seed."""
        out = self.root / "reduce.csv"
        self.assertEqual(self.run_main("bench", "--mode", "reduce", "--n", "5", "--m", "7",
                                       "--seeds", "0", "1", "--out", str(out)), 0)
        frame = pd.read_csv(out)
        self.assertEqual(frame["seed"].tolist(), [0, 1])
        self.assertTrue(frame["agree"].all())

    def test_bench_chernoff_mode(self):
        """bench --mode chernoff runs the standard cases for each seed."""
        out = self.root / "chernoff.csv"
        self.assertEqual(self.run_main("bench", "--mode", "chernoff", "--seeds", "2",
                                       "--samples", "10000", "--out", str(out)), 0)
        self.assertEqual(len(pd.read_csv(out)), 3)


class ModuleHeaderTestSuite(unittest.TestCase):
    """Every library module carries the executable header."""

    def test_headers(self):
        """Shebang on the first line and an Author line in the module docstring."""
        for path in sorted(Path(__file__).parent.glob("*.py")):
            if path.name.startswith("test_"):
                continue
            lines = path.read_text(encoding="utf-8").splitlines()
            self.assertEqual(lines[0], "#!/usr/bin/env python3", path.name)
            self.assertIn("Author: Bilinear Toolkit", lines[:40], path.name)


if __name__ == "__main__":
    unittest.main()
