#!/usr/bin/env python3
"""
Unit tests for the acceptance validator (quick mode) and its report.

Usage: pytest scripts/test_validate.py
"""

import sys
import tempfile
import unittest
from pathlib import Path

import pandas as pd

# Add scripts directory to path
sys.path.insert(0, str(Path(__file__).parent))

from validate import AcceptanceValidator, generate_acceptance_report


class AcceptanceValidatorTestSuite(unittest.TestCase):
    """Quick-mode acceptance checks."""

    @classmethod
    def setUpClass(cls):
        config = {"acceptance": {"seed": 0}, "chernoff": {"samples": 10_000}, "oracle": {"enumeration_cap": 100_000}}
        cls.validator = AcceptanceValidator(config, quick=True)

    def assertPassed(self, result):
        self.assertEqual(result["status"], "PASSED", result)
        self.assertEqual(result["passed"], result["total"], result)

    def test_result_shape(self):
        """Every check reports the same keys."""
        result = self.validator.check_zero_a_identity()
        self.assertEqual(set(result), {"criterion", "name", "status", "passed", "total", "details", "seconds"})

    def test_relaxation_bound(self):
        """Exact optimum never exceeds the LP relaxation."""
        self.assertPassed(self.validator.check_relaxation_bound())

    def test_q_bounds_and_restriction(self):
        """Sandwich on Q(x), restriction direction and restriction ratio."""
        results = self.validator.check_q_bounds_and_restriction()
        self.assertEqual([r["criterion"] for r in results], ["4", "5a", "5b"])
        for result in results:
            self.assertPassed(result)

    def test_zero_a_identity(self):
        """A = 0 makes the restriction equal the induced relaxation."""
        self.assertPassed(self.validator.check_zero_a_identity())

    def test_near_integral_support(self):
        """Every non-zero rounding output is near-integral."""
        results = {r["criterion"]: r for r in self.validator.check_structural_rounding()}
        self.assertEqual(set(results), {"2a", "2b", "3"})
        self.assertPassed(results["3"])

    def test_size_asymmetry(self):
        """Quick mode skips the ratio bands but checks problem sizes."""
        results = self.validator.check_ratio_band()
        self.assertEqual([r["criterion"] for r in results], ["7-size"])
        self.assertPassed(results[0])

    def test_chernoff(self):
        """The three standard tail cases are within their bounds."""
        self.assertPassed(self.validator.check_chernoff())

    def test_reduction_equivalence(self):
        """Satisfiability matches witness existence."""
        self.assertPassed(self.validator.check_reduction_equivalence())

    def test_determinism(self):
        """Reruns are byte-identical."""
        self.assertPassed(self.validator.check_determinism())


class AcceptanceReportTestSuite(unittest.TestCase):
    """Acceptance_Report.csv."""

    def test_report_rows(self):
        """Summary row first, then one row per result."""
        results = {
            "results": [
                {"criterion": "1", "name": "relaxation bound", "status": "PASSED", "passed": 2, "total": 2,
                 "details": "ok", "seconds": 0.1},
                {"criterion": "9", "name": "reduction equivalence", "status": "FAILED", "passed": 1, "total": 2,
                 "details": "mismatch", "seconds": 0.2},
            ],
            "summary": {"total_checks": 2, "passed_checks": 1, "failed_checks": 1, "overall_status": "FAILED"},
        }
        with tempfile.TemporaryDirectory() as tmp:
            self.assertTrue(generate_acceptance_report(results, Path(tmp) / "reports"))
            frame = pd.read_csv(Path(tmp) / "reports" / "Acceptance_Report.csv")
        self.assertEqual(list(frame["Criterion"].astype(str)), ["SUMMARY", "1", "9"])
        self.assertEqual(frame["Status"].iloc[0], "FAILED")
        self.assertEqual(frame["Details"].iloc[0], "Failed: 1")


if __name__ == "__main__":
    unittest.main()
