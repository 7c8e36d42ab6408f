#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Acceptance Validation and Testing Module

This module runs the acceptance criteria of the toolkit as executable checks:
1. Relaxation bound of the PDB LP against the exact vertex-pair optimum
2-3. Rounding success frequency and near-integral support of round_pdb
4-5. Bounds on Q(x) and the LP restriction against the exact oracle
6. A = 0 identity between the LP restriction and the induced PDB relaxation
7. Ratio band and problem-size asymmetry against the affine policy
8. Chernoff tail frequencies against their analytic bounds
9. NAE-satisfiability versus zero-objective covering witnesses
10. Determinism of seeded outputs

It also writes the acceptance report CSV and runs the unit test suites.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
import sys
import time
import unittest
from datetime import datetime
from pathlib import Path
from typing import Any, Callable, Dict, List

import numpy as np
import pandas as pd

from ar_solver import (evaluate_first_stage, induced_pdb_instance,
                       minimal_static_recourse, solve_lp_ar, solve_qlp)
from benchmark import (TIMING_COLUMNS, ExperimentConfig,
                       chernoff_check, rows_to_frame, run_benchmark, run_row,
                       standard_chernoff_cases)
from exact_oracle import exact_pdb, exact_q
from generators import (generate_ar_instance, generate_pdb_instance,
                        generate_small_ar_instance)
from hardness_reduction import nae_satisfiable, random_mnae, witness_exists
from instance_io import dump_instance
from lp_core import SolverTolerances
from pdb_solver import (RoundingConfig, estimate_event_frequency, round_pdb,
                        solve_lp_pdb)
from seeding import substream

ABS_TOL = 1e-6
SUPPORT_TOL = 1e-9
RATIO_BAND_BUDGET_S = 600.0


class AcceptanceValidator:
    """
    Runs the acceptance criteria and collects one result dictionary per criterion.

    Each check returns a dictionary with 'criterion', 'name', 'status'
    ('PASSED', 'FAILED' or 'SKIPPED'), 'passed', 'total', 'details' and 'seconds'.
    In quick mode every check runs at reduced counts.
    """

    def __init__(self, config: Dict[str, Any], quick: bool = False):
        """
        Initialize the validator with configuration settings.

        Args:
            config: Configuration dictionary loaded from config.yaml
            quick: Run reduced counts (used by the unit tests)
        """
        self.config = config
        self.quick = quick
        self.logger = logging.getLogger(__name__)
        self.tolerances = SolverTolerances.from_config(config)
        acceptance = config.get("acceptance", {}) or {}
        self.seed = int(acceptance.get("seed", 0))
        self.chernoff_samples = int((config.get("chernoff", {}) or {}).get("samples", 100_000))
        self.enumeration_cap = int((config.get("oracle", {}) or {}).get("enumeration_cap", 2_000_000))
        self.logger.info(f"AcceptanceValidator initialized (quick={quick}, seed={self.seed})")

    def _count(self, full: int, quick: int) -> int:
        return quick if self.quick else full

    def _rng(self, criterion: int, k: int) -> np.random.Generator:
        return substream(self.seed, "acceptance", criterion, k)

    @staticmethod
    def _result(criterion: str, name: str, passed: int, total: int, details: str,
                started: float, ok: bool = None) -> Dict[str, Any]:
        ok = (passed == total) if ok is None else ok
        return {
            "criterion": criterion,
            "name": name,
            "status": "PASSED" if ok else "FAILED",
            "passed": passed,
            "total": total,
            "details": details,
            "seconds": round(time.perf_counter() - started, 3),
        }

    def check_relaxation_bound(self) -> Dict[str, Any]:
        """Exact PDB optimum never exceeds the LP relaxation."""
        started = time.perf_counter()
        total = self._count(200, 20)
        passed = 0
        worst = -math.inf
        for k in range(total):
            rng = self._rng(1, k)
            n, m1, m2 = int(rng.integers(1, 7)), int(rng.integers(1, 6)), int(rng.integers(1, 6))
            inst = generate_pdb_instance(n, m1, m2, self.seed + k)
            z_lp = solve_lp_pdb(inst, self.tolerances).objective
            z_exact = exact_pdb(inst, cap=self.enumeration_cap, tolerances=self.tolerances)
            worst = max(worst, z_exact - z_lp)
            passed += z_exact <= z_lp + ABS_TOL
        return self._result("1", "relaxation bound", passed, total,
                            f"max(z_exact - z_lp) = {worst:.3e}", started)

    def check_structural_rounding(self) -> List[Dict[str, Any]]:
        """Per-iteration event frequency, threshold rate of round_pdb, and near-integral support."""
        started = time.perf_counter()
        instances = self._count(20, 2)
        trials = self._count(500, 100)
        runs_per_instance = self._count(10, 5)
        n, m = (50, 100) if not self.quick else (20, 40)

        freq_passed = 0
        lowest = math.inf
        runs = 0
        threshold_hits = 0
        support_passed = 0
        nonzero_runs = 0
        for k in range(instances):
            inst = generate_pdb_instance(n, m, m, self.seed + 1000 + k)
            stats = estimate_event_frequency(inst, trials, self.seed + k, tolerances=self.tolerances)
            lowest = min(lowest, stats["all_events"])
            freq_passed += stats["all_events"] >= 0.05
            for j in range(runs_per_instance):
                solution = round_pdb(inst, RoundingConfig(epsilon=0.25, seed=self.seed + 100 * k + j),
                                     self.tolerances)
                runs += 1
                threshold_hits += (not solution.exhausted) and solution.meets_threshold
                if solution.objective > 0:
                    nonzero_runs += 1
                    support_passed += self._near_integral(solution, inst)

        rate = threshold_hits / runs
        frequency = self._result("2a", "rounding event frequency", freq_passed, instances,
                                 f"lowest per-instance frequency {lowest:.3f} over {trials} trials", started)
        threshold = self._result("2b", "rounding threshold rate", threshold_hits, runs,
                                 f"{rate:.1%} of runs meet the threshold (need >= 75%)", started, ok=rate >= 0.75)
        support = self._result("3", "near-integral support", support_passed, nonzero_runs,
                               f"{nonzero_runs} non-zero outputs checked", started)
        return [frequency, threshold, support]

    @staticmethod
    def _near_integral(solution, inst) -> bool:
        z1, z2 = solution.zeta
        x_levels = inst.theta / z1
        y_levels = inst.gamma / z2
        x_ok = np.all(np.minimum(np.abs(solution.x), np.abs(solution.x - x_levels)) <= SUPPORT_TOL)
        y_ok = np.all(np.minimum(np.abs(solution.y), np.abs(solution.y - y_levels)) <= SUPPORT_TOL)
        return bool(x_ok and y_ok)

    def check_q_bounds_and_restriction(self) -> List[Dict[str, Any]]:
        """Bounds on Q(x) for random feasible (x, y0), and the LP restriction sandwich."""
        started = time.perf_counter()
        total = self._count(100, 10)
        sandwich_passed = 0
        restriction_passed = 0
        ratio_passed = 0
        for k in range(total):
            rng = self._rng(4, k)
            n = int(rng.integers(1, 6))
            L = int(rng.integers(1, 4))
            inst = generate_small_ar_instance(n, L, self.seed + k)
            tg = inst.bounds

            x = rng.uniform(0.0, 1.0, n) * rng.uniform(0.0, 2.0)
            y0 = minimal_static_recourse(inst, x, self.tolerances) + rng.uniform(0.0, 0.5, n)
            q = exact_q(inst, x, cap=self.enumeration_cap, tolerances=self.tolerances).value
            lower = solve_qlp(inst, tg.beta * x, tg.beta * y0, tg, self.tolerances).value / (2 * tg.eta * tg.beta)
            upper = solve_qlp(inst, x, y0, tg, self.tolerances).value + float(inst.d @ y0)
            sandwich_passed += (lower <= q + ABS_TOL) and (q <= upper + ABS_TOL)

            lp = solve_lp_ar(inst, self.tolerances)
            cost = evaluate_first_stage(inst, lp.x, self.tolerances, cap=self.enumeration_cap)
            restriction_passed += cost <= lp.z_lp_ar + ABS_TOL
            ratio_passed += lp.z_lp_ar <= 3 * tg.eta * tg.beta * cost + ABS_TOL

        return [
            self._result("4", "Q(x) sandwich", sandwich_passed, total, f"{total} random (x, y0) pairs", started),
            self._result("5a", "restriction direction", restriction_passed, total,
                         "c^T x + Q(x) <= z_lp_ar", started),
            self._result("5b", "restriction ratio", ratio_passed, total,
                         "z_lp_ar <= 3 eta beta (c^T x + Q(x))", started),
        ]

    def check_zero_a_identity(self) -> Dict[str, Any]:
        """With A = 0 the LP restriction equals the induced PDB relaxation."""
        started = time.perf_counter()
        total = self._count(50, 5)
        passed = 0
        worst = 0.0
        for k in range(total):
            rng = self._rng(6, k)
            n, L = int(rng.integers(1, 7)), int(rng.integers(1, 5))
            inst = generate_small_ar_instance(n, L, self.seed + 5000 + k, zero_a=True)
            z_ar = solve_lp_ar(inst, self.tolerances).z_lp_ar
            z_pdb = solve_lp_pdb(induced_pdb_instance(inst), self.tolerances).objective
            gap = abs(z_ar - z_pdb)
            worst = max(worst, gap / (1 + abs(z_ar)))
            passed += gap <= ABS_TOL * (1 + abs(z_ar))
        return self._result("6", "A = 0 identity", passed, total, f"max relative gap {worst:.3e}", started)

    def check_ratio_band(self) -> List[Dict[str, Any]]:
        """Median z_lp_ar / z_aff bands at n = m = 20, and the variable-count asymmetry."""
        started = time.perf_counter()
        section = self.config.get("benchmark", {}) or {}
        workers = int(section.get("workers", 1) or 1)
        g_scale = section.get("g_scale")
        results = []
        if self.quick:
            rows = [run_row(6, 4, self.seed, self.tolerances, g_scale)]
            bands = []
        else:
            config = ExperimentConfig(mode="ar-vs-affine", n=20, L=20, seeds=tuple(range(self.seed, self.seed + 10)),
                                      tolerances=self.tolerances, g_scale=g_scale, workers=workers,
                                      L_values=(20, 100))
            rows = run_benchmark(config)
            bands = [(20, 1.1, 1.5), (100, 1.15, 1.55)]

        for L, low, high in bands:
            ratios = [r.ratio for r in rows if r.L == L and r.ok]
            median = float(np.median(ratios)) if ratios else math.nan
            results.append(self._result(f"7-L{L}", f"ratio band L={L}", len(ratios), 10,
                                        f"median ratio {median:.4f} (band [{low}, {high}])", started,
                                        ok=low <= median <= high))

        ok_rows = [r for r in rows if r.ok]
        size_passed = sum(r.aff_vars >= (r.n / 4) * r.lp_vars for r in ok_rows)
        results.append(self._result("7-size", "problem-size asymmetry", size_passed, len(rows),
                                    "affine variables >= (m/4) x LP-AR variables", started))
        if bands:
            elapsed = time.perf_counter() - started
            results.append(self._result("7-time", "ratio band runtime", int(elapsed <= RATIO_BAND_BUDGET_S), 1,
                                        f"{len(rows)} rows in {elapsed:.1f}s (budget {RATIO_BAND_BUDGET_S:.0f}s)", started))
        return results

    def check_chernoff(self) -> Dict[str, Any]:
        started = time.perf_counter()
        samples = self._count(self.chernoff_samples, 10_000)
        cases = standard_chernoff_cases()
        passed = 0
        details = []
        for k, case in enumerate(cases):
            report = chernoff_check(case["r"], case["weights"], case["probs"], case["delta"], samples, self.seed + k)
            passed += report.within_bound
            details.append(f"{case['name']}: {report.upper_frequency:.4f}<={report.upper_bound:.4f}")
        return self._result("8", "Chernoff tails", passed, len(cases), "; ".join(details), started)

    def check_reduction_equivalence(self) -> Dict[str, Any]:
        """NAE-satisfiable iff a zero-objective covering witness exists."""
        started = time.perf_counter()
        total = self._count(100, 10)
        passed = 0
        satisfiable = 0
        for k in range(total):
            rng = self._rng(9, k)
            num_vars = int(rng.integers(3, 11))
            num_clauses = int(rng.integers(1, 3 * num_vars + 1))
            formula = random_mnae(num_vars, num_clauses, self.seed + k)
            sat = nae_satisfiable(formula)
            satisfiable += sat
            passed += sat == witness_exists(formula)
        return self._result("9", "reduction equivalence", passed, total,
                            f"{satisfiable} satisfiable formulas", started)

    def check_determinism(self) -> Dict[str, Any]:
        """Identical seeds reproduce identical non-timing outputs."""
        started = time.perf_counter()
        checks: List[Callable[[], Any]] = [
            lambda: dump_instance(generate_ar_instance(4, 3, self.seed)),
            lambda: dump_instance(generate_pdb_instance(5, 4, 4, self.seed)),
            lambda: round_pdb(generate_pdb_instance(8, 6, 6, self.seed),
                              RoundingConfig(seed=self.seed), self.tolerances).x.tobytes(),
            lambda: rows_to_frame([run_row(3, 2, s, self.tolerances) for s in (self.seed, self.seed + 1)])
                    .drop(columns=TIMING_COLUMNS).to_csv(index=False, float_format="%.17g"),
            lambda: chernoff_check(10, [0.5] * 10, [0.3] * 10, 0.5, 10_000, self.seed).to_dict(),
        ]
        passed = sum(check() == check() for check in checks)
        return self._result("10", "determinism", passed, len(checks), "byte-for-byte reruns", started)

    def run_all(self) -> Dict[str, Any]:
        """
        Run every acceptance check.

        Returns:
            Dictionary with a timestamp, the per-check results and a summary
        """
        self.logger.info("=== Acceptance Validation Started ===")
        checks = [
            self.check_relaxation_bound,
            self.check_structural_rounding,
            self.check_q_bounds_and_restriction,
            self.check_zero_a_identity,
            self.check_ratio_band,
            self.check_chernoff,
            self.check_reduction_equivalence,
            self.check_determinism,
        ]
        results: List[Dict[str, Any]] = []
        for check in checks:
            self.logger.info(f"Running {check.__name__}...")
            try:
                outcome = check()
            except Exception as e:
                self.logger.error(f"{check.__name__} raised: {e}", exc_info=True)
                outcome = {"criterion": check.__name__, "name": check.__name__, "status": "FAILED",
                           "passed": 0, "total": 0, "details": f"{type(e).__name__}: {e}", "seconds": 0.0}
            for result in outcome if isinstance(outcome, list) else [outcome]:
                self.logger.info(f"Criterion {result['criterion']} ({result['name']}): {result['status']} "
                                 f"{result['passed']}/{result['total']} - {result['details']} "
                                 f"[{result['seconds']}s]")
                results.append(result)

        failed = [r for r in results if r["status"] == "FAILED"]
        summary = {
            "total_checks": len(results),
            "passed_checks": sum(r["status"] == "PASSED" for r in results),
            "failed_checks": len(failed),
            "overall_status": "ALL_PASSED" if not failed else "FAILED",
        }
        self.logger.info(f"=== Acceptance Validation Finished: {summary['overall_status']} "
                         f"({summary['passed_checks']}/{summary['total_checks']}) ===")
        return {"validation_timestamp": datetime.now().isoformat(), "results": results, "summary": summary}


def generate_acceptance_report(validation_results: Dict[str, Any], output_path: Path) -> bool:
    """
    Write Acceptance_Report.csv.

    Args:
        validation_results: Output of AcceptanceValidator.run_all
        output_path: Directory for the report

    Returns:
        True if the report was written
    """
    logger = logging.getLogger(__name__)
    try:
        summary = validation_results.get("summary", {})
        report_data = [{
            "Criterion": "SUMMARY",
            "Name": "All",
            "Status": summary.get("overall_status", "UNKNOWN"),
            "Passed": summary.get("passed_checks", 0),
            "Total": summary.get("total_checks", 0),
            "Details": f"Failed: {summary.get('failed_checks', 0)}",
            "Seconds": "",
        }]
        for result in validation_results.get("results", []):
            report_data.append({
                "Criterion": result["criterion"],
                "Name": result["name"],
                "Status": result["status"],
                "Passed": result["passed"],
                "Total": result["total"],
                "Details": result["details"],
                "Seconds": result["seconds"],
            })
        output_path = Path(output_path)
        output_path.mkdir(parents=True, exist_ok=True)
        report_file = output_path / "Acceptance_Report.csv"
        pd.DataFrame(report_data).to_csv(report_file, index=False)
        logger.info(f"Acceptance report saved: {report_file}")
        return True
    except Exception as e:
        logger.error(f"Failed to generate acceptance report: {str(e)}")
        return False


def run_unit_tests() -> bool:
    """
    Discover and run the test_*.py suites next to this module.

    Returns:
        True if all tests pass, False otherwise
    """
    logger = logging.getLogger(__name__)
    logger.info("Running unit tests...")
    try:
        suite = unittest.TestLoader().discover(str(Path(__file__).parent), pattern="test_*.py")
        result = unittest.TextTestRunner(verbosity=2).run(suite)
        if result.wasSuccessful():
            logger.info("All unit tests passed!")
            return True
        logger.error(f"Unit tests failed: {len(result.failures)} failures, {len(result.errors)} errors")
        return False
    except Exception as e:
        logger.error(f"Error running unit tests: {str(e)}")
        return False


if __name__ == "__main__":
    """
    Script can be run directly to execute unit tests.

    Usage: python validate.py
    """
    logging.basicConfig(
        level=logging.INFO,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )

    if not run_unit_tests():
        sys.exit(1)
