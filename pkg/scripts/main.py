#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Command Line Entry Point

This script is the main entry point of the toolkit. It:
1. Loads configuration settings (config/config.yaml merged over built-in defaults)
2. Configures logging (BILIN_LOG, then options.log_level, then INFO)
3. Dispatches one subcommand:
   solve-pdb, solve-ar, solve-affine, bench, chernoff, reduce, oracle, generate, validate

Exit codes: 0 success, 2 infeasible/unbounded or malformed model,
3 enumeration cap exceeded, 1 anything else.

Usage: python scripts/main.py <command> [options]

Author: Bilinear Toolkit
Date: October 2025
"""

import argparse
import copy
import logging
import os
import sys
from pathlib import Path
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd
import yaml

from affine_baseline import build_affine_lp, certify_policy, solve_affine
from ar_solver import (build_lp_ar, evaluate_first_stage, round_separation,
                       solve_lp_ar)
from benchmark import MODES, ExperimentConfig, chernoff_check, run_experiment, standard_chernoff_cases
from errors import BilinearError, ConfigError
from exact_oracle import exact_pdb, exact_q
from generators import (generate_ar_instance, generate_pdb_instance,
                        generate_small_ar_instance)
from hardness_reduction import (cdb_zero_witness, decode_assignment, nae_assignments,
                                nae_satisfiable, random_mnae, reduce)
from instance_io import (read_ar_instance, read_instance, read_mnae,
                         read_pdb_instance, write_document, write_instance,
                         write_mnae)
from lp_core import SolverTolerances, export_lp
from pdb_solver import PdbInstance, RoundingConfig, build_lp_pdb, round_pdb
from validate import AcceptanceValidator, generate_acceptance_report, run_unit_tests

ROOT = Path(__file__).resolve().parent.parent
DEFAULT_CONFIG_PATH = ROOT / "config" / "config.yaml"

DEFAULT_CONFIG: Dict[str, Any] = {
    "paths": {"outputs": "./outputs", "logs": "./logs", "instances": "./instances"},
    "solver": {"feas_tol": 1e-7, "opt_tol": 1e-7, "pivot_tol": 1e-10, "comp_tol": 1e-6,
               "max_iterations": 200_000, "pricing": "devex"},
    "rounding": {"epsilon": 0.25, "separation_attempts": 16},
    "oracle": {"enumeration_cap": 2_000_000, "dedup_tol": 1e-8, "max_mnae_variables": 24},
    "benchmark": {"n_values": [20], "L_values": [20, 100], "seeds": list(range(10)), "g_scale": None,
                  "workers": 1, "max_resamples": 32},
    "chernoff": {"samples": 100_000},
    "acceptance": {"seed": 0},
    "options": {"log_level": "INFO", "overwrite": True},
}

BENCH_OUTPUTS = {"ar-vs-affine": "bench.csv", "pdb": "pdb_rounding.csv", "chernoff": "chernoff.csv",
                 "reduce": "reduce.csv"}


def setup_logging(log_level: str = "INFO", log_dir: str = "logs") -> None:
    """
    Configure logging for the toolkit.

    Args:
        log_level: The logging level (INFO, DEBUG, WARNING, ERROR)
        log_dir: Directory of bilinear.log
    """
    log_path = Path(log_dir)
    log_path.mkdir(parents=True, exist_ok=True)

    level = getattr(logging, str(log_level).upper(), None)
    if not isinstance(level, int):
        level = logging.INFO

    logging.basicConfig(
        level=level,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_path / "bilinear.log", mode='w'),
            logging.StreamHandler(sys.stdout)
        ],
        force=True
    )


def _merge(base: Dict[str, Any], override: Dict[str, Any]) -> Dict[str, Any]:
    merged = copy.deepcopy(base)
    for key, value in (override or {}).items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = _merge(merged[key], value)
        else:
            merged[key] = value
    return merged


def load_config(config_path: str = str(DEFAULT_CONFIG_PATH)) -> Dict[str, Any]:
    """
    Load configuration settings from YAML file, merged over DEFAULT_CONFIG.

    Args:
        config_path: Path to the configuration file

    Returns:
        Dictionary containing configuration settings

    Raises:
        FileNotFoundError: If configuration file doesn't exist
        ConfigError: If configuration file is invalid
    """
    config_file = Path(config_path)

    if not config_file.exists():
        raise FileNotFoundError(f"Configuration file not found: {config_path}")

    try:
        with open(config_file, 'r', encoding='utf-8') as file:
            loaded = yaml.safe_load(file) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Error parsing configuration file: {e}") from e
    if not isinstance(loaded, dict):
        raise ConfigError(f"Configuration file {config_path} must hold a mapping")
    return _merge(DEFAULT_CONFIG, loaded)


def apply_overrides(config: Dict[str, Any], args: argparse.Namespace) -> Dict[str, Any]:
    """Fold the common CLI flags into the configuration."""
    config = copy.deepcopy(config)
    if getattr(args, "tol_feas", None) is not None:
        config["solver"]["feas_tol"] = args.tol_feas
    if getattr(args, "epsilon", None) is not None:
        config["rounding"]["epsilon"] = args.epsilon
    if getattr(args, "g_scale", None) is not None:
        config["benchmark"]["g_scale"] = args.g_scale
    if getattr(args, "workers", None) is not None:
        config["benchmark"]["workers"] = args.workers
    if getattr(args, "seed", None) is not None:
        config["acceptance"]["seed"] = args.seed
    return config


def _output_path(args: argparse.Namespace, config: Dict[str, Any], default_name: str) -> Path:
    if args.out:
        return Path(args.out)
    return Path(config["paths"]["outputs"]) / default_name


def _seed(args: argparse.Namespace) -> int:
    return 0 if args.seed is None else args.seed


def _parse_vector(text: Optional[str], size: int, label: str) -> np.ndarray:
    if text is None:
        return np.zeros(size)
    values = np.array([float(v) for v in text.replace(",", " ").split()])
    if values.size != size:
        raise ConfigError(f"{label} needs {size} entries, got {values.size}")
    return values


def _export_lp(problem, path: Optional[str]) -> None:
    if path:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Path(path).write_text(export_lp(problem), encoding="utf-8")
        logging.getLogger(__name__).info(f"LP written: {path}")


def _ar_instance(args: argparse.Namespace, config: Dict[str, Any], tolerances: SolverTolerances):
    if args.instance:
        return read_ar_instance(args.instance)
    return generate_ar_instance(args.n, args.L, _seed(args), g_scale=config["benchmark"]["g_scale"],
                                max_resamples=int(config["benchmark"]["max_resamples"]), tolerances=tolerances)


def cmd_solve_pdb(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    tolerances = SolverTolerances.from_config(config)
    if args.instance:
        inst = read_pdb_instance(args.instance)
    else:
        m = args.m or 2 * args.n
        inst = generate_pdb_instance(args.n, args.m1 or m, args.m2 or m, _seed(args))
    _export_lp(build_lp_pdb(inst), args.export_lp)

    rounding = RoundingConfig(epsilon=config["rounding"]["epsilon"], seed=_seed(args),
                              max_iterations_override=args.iterations)
    solution = round_pdb(inst, rounding, tolerances)
    logger.info(f"PDB n={inst.n}, m1={inst.m1}, m2={inst.m2}: objective {solution.objective:.10g}, "
                f"LP value {solution.lp_relaxation_value:.10g}, threshold {solution.threshold:.6g}, "
                f"met={solution.meets_threshold}, exhausted={solution.exhausted}")
    if args.out:
        write_document({
            "command": "solve-pdb", "objective": solution.objective,
            "lp_relaxation_value": solution.lp_relaxation_value, "threshold": solution.threshold,
            "meets_threshold": solution.meets_threshold, "exhausted": solution.exhausted,
            "best_iteration": solution.best_iteration, "iterations": solution.iterations_used,
            "zeta": list(solution.zeta), "x": solution.x, "y": solution.y,
        }, args.out)
    return 0


def cmd_solve_ar(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    tolerances = SolverTolerances.from_config(config)
    inst = _ar_instance(args, config, tolerances)
    solution = solve_lp_ar(inst, tolerances)
    _export_lp(build_lp_ar(inst, solution.theta_gamma), args.export_lp)
    logger.info(f"LP-AR value {solution.z_lp_ar:.10g} with {solution.variable_count} variables "
                f"(build+solve {solution.lp_seconds:.3f}s, with precompute {solution.lp_seconds_inclusive:.3f}s)")

    result: Dict[str, Any] = {
        "command": "solve-ar", "z_lp_ar": solution.z_lp_ar, "variables": solution.variable_count,
        "eta": solution.theta_gamma.eta, "beta": solution.theta_gamma.beta,
        "x": solution.x, "y0": solution.y0, "y": solution.y, "alpha": solution.alpha,
    }
    if args.separate:
        point = round_separation(inst, solution.x, solution.y0, _seed(args),
                                 attempts=int(config["rounding"]["separation_attempts"]),
                                 tg=solution.theta_gamma, tolerances=tolerances)
        logger.info(f"Separation point: certified {point.certified_value:.6g} vs threshold "
                    f"{point.threshold:.6g} (success={point.success}, attempts={point.attempts})")
        result["separation"] = {"h": point.h, "z": point.z, "certified_value": point.certified_value,
                                "threshold": point.threshold, "success": point.success,
                                "attempts": point.attempts}
    if args.exact:
        cost = evaluate_first_stage(inst, solution.x, tolerances, cap=int(config["oracle"]["enumeration_cap"]))
        logger.info(f"Exact first-stage cost c^T x + Q(x) = {cost:.10g}")
        result["first_stage_cost"] = cost
    if args.out:
        write_document(result, args.out)
    return 0


def cmd_solve_affine(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    tolerances = SolverTolerances.from_config(config)
    inst = _ar_instance(args, config, tolerances)
    _export_lp(build_affine_lp(inst), args.export_lp)
    policy = solve_affine(inst, tolerances)
    logger.info(f"Affine policy value {policy.z_aff:.10g} with {policy.variable_count} variables "
                f"({policy.total_seconds:.3f}s)")
    result: Dict[str, Any] = {"command": "solve-affine", "z_aff": policy.z_aff,
                              "variables": policy.variable_count, "x": policy.x,
                              "y0": policy.y0_aff, "Y": policy.Y}
    if args.certify:
        report = certify_policy(inst, policy, int(config["oracle"]["enumeration_cap"]), tolerances)
        logger.info(f"Policy certification over {report['vertices']} vertices: certified={report['certified']}")
        result["certification"] = report
    if args.out:
        write_document(result, args.out)
    return 0


def cmd_bench(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    seeds = args.seeds
    if seeds is None and args.num_seeds:
        seeds = list(range(_seed(args), _seed(args) + args.num_seeds))
    elif seeds is None and args.seed is not None:
        seeds = [args.seed]
    seeds = tuple(seeds) if seeds else None

    if args.mode == "ar-vs-affine":
        experiment = ExperimentConfig.from_config(
            config, mode="ar-vs-affine",
            n_values=tuple(args.n) if args.n else None, L_values=tuple(args.L) if args.L else None,
            n=args.n[0] if args.n else None, L=args.L[0] if args.L else None,
            seeds=seeds, output=str(_output_path(args, config, "bench.csv")))
    else:
        experiment = ExperimentConfig.from_config(
            config, mode=args.mode, n=args.n[0] if args.n else None, n_values=(), L_values=(),
            m=args.m, seeds=seeds, samples=args.samples,
            output=str(_output_path(args, config, BENCH_OUTPUTS[args.mode])))
    overwrite = bool(config["options"].get("overwrite", True)) and not args.no_overwrite
    frame = run_experiment(experiment, overwrite=overwrite)

    if args.mode == "ar-vs-affine":
        rows = frame[frame["seed"] != "median"]
        failed = int((rows["status"] != "OK").sum())
        if failed:
            logging.getLogger(__name__).warning(f"{failed} of {len(rows)} benchmark rows failed")
        return 0
    if args.mode == "chernoff":
        return 0 if frame["within_bound"].all() else 1
    ok = frame["status"].eq("OK").all()
    if args.mode == "reduce":
        ok = ok and frame["agree"].astype(bool).all()
    return 0 if ok else 1


def cmd_chernoff(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    samples = args.samples or int(config["chernoff"]["samples"])
    if args.r is None:
        cases = standard_chernoff_cases()
    else:
        cases = [{"name": "custom", "r": args.r, "weights": [args.weight] * args.r,
                  "probs": [args.prob] * args.r, "delta": args.delta}]

    records = []
    for k, case in enumerate(cases):
        report = chernoff_check(case["r"], case["weights"], case["probs"], case["delta"], samples, _seed(args) + k)
        records.append({"case": case["name"], **report.to_dict()})
    frame = pd.DataFrame(records)
    out = _output_path(args, config, "chernoff.csv")
    out.parent.mkdir(parents=True, exist_ok=True)
    frame.to_csv(out, index=False, float_format="%.17g")
    logger.info(f"Chernoff results saved: {out}")
    return 0 if frame["within_bound"].all() else 1


def cmd_reduce(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    cap = int(config["oracle"]["max_mnae_variables"])
    if args.formula:
        formula = read_mnae(args.formula)
    else:
        formula = random_mnae(args.vars, args.clauses, _seed(args), distinct=args.distinct)
    if formula.num_vars > cap:
        raise ConfigError(f"{formula.num_vars} variables exceed oracle.max_mnae_variables={cap}")

    cdb = reduce(formula)
    satisfiable = nae_satisfiable(formula)
    witness = None
    if satisfiable:
        code = int(next(nae_assignments(formula))[0])
        witness = cdb_zero_witness(cdb, decode_assignment(code, formula.num_vars))
    logger.info(f"Formula V={formula.num_vars}, C={formula.num_clauses}: NAE-satisfiable={satisfiable}"
                + (f", zero-objective witness x={witness[0].astype(int).tolist()}" if witness else ""))
    if args.out:
        write_document({
            "command": "reduce", "num_vars": formula.num_vars, "num_clauses": formula.num_clauses,
            "clauses": [list(c) for c in formula.clauses], "incidence": cdb.incidence,
            "nae_satisfiable": satisfiable,
            "witness": None if witness is None else {"x": witness[0], "y": witness[1]},
        }, args.out)
    return 0


def cmd_oracle(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    logger = logging.getLogger(__name__)
    tolerances = SolverTolerances.from_config(config)
    cap = int(config["oracle"]["enumeration_cap"])
    dedup_tol = float(config["oracle"]["dedup_tol"])
    inst = read_instance(args.instance)
    if isinstance(inst, PdbInstance):
        value = exact_pdb(inst, cap, dedup_tol, tolerances)
        logger.info(f"Exact PDB optimum: {value:.10g}")
        result = {"command": "oracle", "kind": "pdb", "value": value}
    else:
        x = _parse_vector(args.x, inst.n, "--x")
        q = exact_q(inst, x, cap, dedup_tol, tolerances)
        logger.info(f"Exact Q(x) = {q.value:.10g} (bounded={q.bounded}); c^T x + Q(x) = {inst.c @ x + q.value:.10g}")
        result = {"command": "oracle", "kind": "ar", "x": x, "q": q.value, "bounded": q.bounded,
                  "scenario": q.scenario, "first_stage_cost": float(inst.c @ x) + q.value}
    if args.out:
        write_document(result, args.out)
    return 0


def cmd_generate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    tolerances = SolverTolerances.from_config(config)
    seed = _seed(args)
    directory = Path(config["paths"]["instances"])
    if args.kind == "mnae":
        formula = random_mnae(args.vars, args.clauses, seed, distinct=args.distinct)
        write_mnae(formula, args.out or directory / f"mnae_v{args.vars}_c{args.clauses}_s{seed}.cnf",
                   comment=f"random monotone formula, seed {seed}")
        return 0
    if args.kind == "ar":
        inst = generate_ar_instance(args.n, args.L, seed, g_scale=config["benchmark"]["g_scale"],
                                    max_resamples=int(config["benchmark"]["max_resamples"]), tolerances=tolerances)
        name = f"ar_n{args.n}_L{args.L}_s{seed}"
    elif args.kind == "small-ar":
        inst = generate_small_ar_instance(args.n, args.L, seed, m=args.m, zero_a=args.zero_a, tolerances=tolerances)
        name = f"small_ar_n{args.n}_L{args.L}_s{seed}"
    else:
        m = args.m or 2 * args.n
        inst = generate_pdb_instance(args.n, args.m1 or m, args.m2 or m, seed)
        name = f"pdb_n{args.n}_s{seed}"
    write_instance(inst, args.out or directory / f"{name}.yaml", name=name)
    return 0


def cmd_validate(args: argparse.Namespace, config: Dict[str, Any]) -> int:
    if args.unit_tests:
        return 0 if run_unit_tests() else 1
    validator = AcceptanceValidator(config, quick=args.quick)
    results = validator.run_all()
    out_dir = Path(args.out) if args.out else Path(config["paths"]["outputs"])
    generate_acceptance_report(results, out_dir)
    return 0 if results["summary"]["overall_status"] == "ALL_PASSED" else 1


def build_parser() -> argparse.ArgumentParser:
    """Argument parser with one subparser per command; common flags are accepted by every command."""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="Configuration file (default config/config.yaml)")
    common.add_argument("--seed", type=int, help="Master seed")
    common.add_argument("--epsilon", type=float, help="Rounding failure probability")
    common.add_argument("--out", help="Output file or directory")
    common.add_argument("--tol-feas", dest="tol_feas", type=float, help="Feasibility tolerance")
    common.add_argument("--g-scale", dest="g_scale", type=float, help="Scale of the Gaussian perturbation")
    common.add_argument("--workers", type=int, help="Benchmark worker processes")

    parser = argparse.ArgumentParser(description="Packing bilinear rounding toolkit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve-pdb", parents=[common], help="Round the LP relaxation of a PDB instance")
    p.add_argument("--instance", help="PDB instance file (otherwise generated)")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--m", type=int)
    p.add_argument("--m1", type=int)
    p.add_argument("--m2", type=int)
    p.add_argument("--iterations", type=int, help="Override the iteration count 8 ceil(ln(1/epsilon))")
    p.add_argument("--export-lp", dest="export_lp", help="Write the LP relaxation in LP text format")
    p.set_defaults(handler=cmd_solve_pdb)

    for name, handler, help_text in (("solve-ar", cmd_solve_ar, "Solve the LP restriction"),
                                     ("solve-affine", cmd_solve_affine, "Solve the affine policy LP")):
        p = sub.add_parser(name, parents=[common], help=help_text)
        p.add_argument("--instance", help="AR instance file (otherwise generated)")
        p.add_argument("--n", type=int, default=20)
        p.add_argument("--L", type=int, default=20)
        p.add_argument("--export-lp", dest="export_lp", help="Write the LP in LP text format")
        if name == "solve-ar":
            p.add_argument("--separate", action="store_true", help="Round the separation problem at the solution")
            p.add_argument("--exact", action="store_true", help="Evaluate c^T x + Q(x) with the exact oracle")
        else:
            p.add_argument("--certify", action="store_true", help="Check the policy at every vertex of U")
        p.set_defaults(handler=handler)

    p = sub.add_parser("bench", parents=[common], help="Run a seeded benchmark")
    p.add_argument("--mode", choices=list(MODES), default="ar-vs-affine")
    p.add_argument("--n", type=int, nargs="+")
    p.add_argument("--L", type=int, nargs="+")
    p.add_argument("--m", type=int)
    p.add_argument("--seeds", type=int, nargs="+")
    p.add_argument("--num-seeds", dest="num_seeds", type=int, help="Use seeds seed..seed+K-1")
    p.add_argument("--samples", type=int, help="Monte-Carlo samples per case (chernoff mode)")
    p.add_argument("--no-overwrite", dest="no_overwrite", action="store_true",
                   help="Back up an existing CSV instead of replacing it")
    p.set_defaults(handler=cmd_bench)

    p = sub.add_parser("chernoff", parents=[common], help="Monte-Carlo Chernoff tail check")
    p.add_argument("--r", type=int, help="Number of trials (default: the three standard cases)")
    p.add_argument("--weight", type=float, default=1.0)
    p.add_argument("--prob", type=float, default=0.01)
    p.add_argument("--delta", type=float, default=0.5)
    p.add_argument("--samples", type=int)
    p.set_defaults(handler=cmd_chernoff)

    p = sub.add_parser("reduce", parents=[common], help="Reduce a monotone NAE-3SAT formula to a CDB instance")
    p.add_argument("--formula", help="Formula file (otherwise random)")
    p.add_argument("--vars", type=int, default=6)
    p.add_argument("--clauses", type=int, default=8)
    p.add_argument("--distinct", action="store_true")
    p.set_defaults(handler=cmd_reduce)

    p = sub.add_parser("oracle", parents=[common], help="Exact vertex-enumeration oracle")
    p.add_argument("--instance", required=True, help="PDB or AR instance file")
    p.add_argument("--x", help="First-stage point for AR instances (default 0)")
    p.set_defaults(handler=cmd_oracle)

    p = sub.add_parser("generate", parents=[common], help="Write a generated instance file")
    p.add_argument("--kind", choices=["ar", "small-ar", "pdb", "mnae"], default="ar")
    p.add_argument("--n", type=int, default=20)
    p.add_argument("--L", type=int, default=20)
    p.add_argument("--m", type=int)
    p.add_argument("--m1", type=int)
    p.add_argument("--m2", type=int)
    p.add_argument("--zero-a", dest="zero_a", action="store_true")
    p.add_argument("--vars", type=int, default=6)
    p.add_argument("--clauses", type=int, default=8)
    p.add_argument("--distinct", action="store_true")
    p.set_defaults(handler=cmd_generate)

    p = sub.add_parser("validate", parents=[common], help="Run the acceptance checks")
    p.add_argument("--quick", action="store_true", help="Reduced counts")
    p.add_argument("--unit-tests", dest="unit_tests", action="store_true", help="Run the unit suites instead")
    p.set_defaults(handler=cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> None:
    """
    Parse the command line, configure logging and run one command.

    Exits with the command's status, the exit code of a BilinearError,
    or 1 for any other failure.
    """
    args = build_parser().parse_args(argv)
    try:
        if args.config:
            config = load_config(args.config)
        elif DEFAULT_CONFIG_PATH.exists():
            config = load_config(str(DEFAULT_CONFIG_PATH))
        else:
            config = copy.deepcopy(DEFAULT_CONFIG)
        config = apply_overrides(config, args)

        log_level = os.environ.get("BILIN_LOG") or config["options"].get("log_level") or "INFO"
        setup_logging(log_level, config["paths"]["logs"])
        logger = logging.getLogger(__name__)
        logger.info(f"=== Bilinear Toolkit: {args.command} Started ===")

        status = args.handler(args, config)
        logger.info(f"=== Bilinear Toolkit: {args.command} Finished (status {status}) ===")
        sys.exit(status)

    except BilinearError as e:
        logger = logging.getLogger(__name__)
        logger.error(f"{args.command} failed: {type(e).__name__}: {e}")
        sys.exit(e.exit_code)
    except Exception as e:
        logger = logging.getLogger(__name__)
        logger.error(f"{args.command} failed: {str(e)}", exc_info=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
