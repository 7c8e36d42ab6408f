#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Covering Bilinear Hardness Reduction

Builds the covering bilinear instance min { x^T y : A x >= e, A y >= e, x, y >= 0 }
from a monotone not-all-equal 3-SAT formula (A is the clause-variable incidence
matrix) and checks by exhaustion that the formula is NAE-satisfiable exactly
when the covering instance has a zero-objective solution.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
from dataclasses import dataclass
from typing import Iterator, Optional, Sequence, Tuple

import numpy as np

from errors import ConfigError, DimensionMismatch, TooManyVariables
from seeding import FORMULA, check_seed, substream

logger = logging.getLogger(__name__)

MAX_BRUTE_FORCE_VARIABLES = 24
CHUNK_BITS = 16


@dataclass(frozen=True)
class MnaeInstance:
    """Monotone formula over variables 1..num_vars; every clause is a triple of variable indices."""

    num_vars: int
    clauses: Tuple[Tuple[int, int, int], ...]

    def __post_init__(self):
        if self.num_vars < 1:
            raise ConfigError("A formula needs at least one variable")
        clauses = tuple(tuple(int(v) for v in clause) for clause in self.clauses)
        for clause in clauses:
            if len(clause) != 3:
                raise ConfigError(f"Clause {clause} does not have exactly 3 variables")
            if any(v < 1 or v > self.num_vars for v in clause):
                raise ConfigError(f"Clause {clause} references a variable outside 1..{self.num_vars}")
        object.__setattr__(self, "clauses", clauses)

    @property
    def num_clauses(self) -> int:
        return len(self.clauses)


@dataclass(frozen=True)
class CdbInstance:
    """Covering bilinear instance; both covering systems use the same incidence matrix."""

    incidence: np.ndarray

    @property
    def num_vars(self) -> int:
        return self.incidence.shape[1]

    def is_feasible(self, x, y, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        if np.any(x < -tol) or np.any(y < -tol):
            return False
        return bool(np.all(self.incidence @ x >= 1 - tol) and np.all(self.incidence @ y >= 1 - tol))

    @staticmethod
    def objective(x, y) -> float:
        return float(np.asarray(x, dtype=float) @ np.asarray(y, dtype=float))


def reduce(inst: MnaeInstance) -> CdbInstance:
    """Incidence matrix with A[c, v] = 1 iff variable v+1 occurs in clause c (set semantics)."""
    incidence = np.zeros((inst.num_clauses, inst.num_vars), dtype=np.int8)
    for c, clause in enumerate(inst.clauses):
        incidence[c, [v - 1 for v in clause]] = 1
    incidence.setflags(write=False)
    return CdbInstance(incidence)


def _clause_masks(inst: MnaeInstance) -> np.ndarray:
    return np.array([[v - 1 for v in clause] for clause in inst.clauses], dtype=np.int64).reshape(-1, 3)


def nae_assignments(inst: MnaeInstance) -> Iterator[np.ndarray]:
    """
    Yield, chunk by chunk, the integer codes of all NAE-satisfying assignments
    (bit v-1 set means variable v is true).

    Raises:
        TooManyVariables: More than 24 variables
    """
    if inst.num_vars > MAX_BRUTE_FORCE_VARIABLES:
        raise TooManyVariables(
            f"{inst.num_vars} variables exceed the brute-force cap of {MAX_BRUTE_FORCE_VARIABLES}")
    clauses = _clause_masks(inst)
    total = 1 << inst.num_vars
    chunk = 1 << min(CHUNK_BITS, inst.num_vars)
    for start in range(0, total, chunk):
        codes = np.arange(start, min(start + chunk, total), dtype=np.int64)
        ok = np.ones(codes.size, dtype=bool)
        for clause in clauses:
            trues = ((codes[:, None] >> clause[None, :]) & 1).sum(axis=1)
            ok &= (trues > 0) & (trues < 3)
        if np.any(ok):
            yield codes[ok]


def nae_satisfiable(inst: MnaeInstance) -> bool:
    """Exhaustive NAE-satisfiability check over all 2^V assignments."""
    for _ in nae_assignments(inst):
        return True
    return False


def decode_assignment(code: int, num_vars: int) -> np.ndarray:
    return np.array([(int(code) >> v) & 1 for v in range(num_vars)], dtype=bool)


def all_assignments(num_vars: int) -> Iterator[np.ndarray]:
    for code in range(1 << num_vars):
        yield decode_assignment(code, num_vars)


def cdb_zero_witness(cdb: CdbInstance, assignment: Sequence[bool]) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    The pair (x, e - x) with x the indicator of the true variables, when both covering systems hold.

    Returns:
        (x, y) with x^T y = 0, or None
    """
    assignment = np.asarray(assignment, dtype=bool).ravel()
    if assignment.size != cdb.num_vars:
        raise DimensionMismatch(f"Assignment has {assignment.size} entries for {cdb.num_vars} variables")
    x = assignment.astype(float)
    y = 1.0 - x
    if np.all(cdb.incidence @ x >= 1) and np.all(cdb.incidence @ y >= 1):
        return x, y
    return None


def threshold_witness(cdb: CdbInstance, x, y, tol: float = 1e-9) -> Optional[Tuple[np.ndarray, np.ndarray]]:
    """
    Round a feasible fractional solution with zero objective to an integral witness
    by setting variable v true iff x_v > tol.

    Returns:
        cdb_zero_witness of the thresholded assignment, or None if (x, y) is not a
        feasible zero-objective solution
    """
    if not cdb.is_feasible(x, y, tol) or abs(CdbInstance.objective(x, y)) > tol:
        return None
    return cdb_zero_witness(cdb, np.asarray(x, dtype=float) > tol)


def witness_exists(inst: MnaeInstance) -> bool:
    """True iff some assignment yields a zero-objective covering pair (exhaustive)."""
    if inst.num_vars > MAX_BRUTE_FORCE_VARIABLES:
        raise TooManyVariables(
            f"{inst.num_vars} variables exceed the brute-force cap of {MAX_BRUTE_FORCE_VARIABLES}")
    cdb = reduce(inst)
    return any(cdb_zero_witness(cdb, a) is not None for a in all_assignments(inst.num_vars))


def random_mnae(num_vars: int, num_clauses: int, seed: int, distinct: bool = False) -> MnaeInstance:
    """
    Random monotone formula drawn from substream(seed, "formula").

    Args:
        num_vars: Variable count
        num_clauses: Clause count
        seed: Master seed
        distinct: Draw three different variables per clause (needs num_vars >= 3)

    Returns:
        MnaeInstance
    """
    if num_clauses < 0:
        raise ConfigError("num_clauses must be nonnegative")
    if distinct and num_vars < 3:
        raise ConfigError("distinct clauses need at least 3 variables")
    rng = substream(check_seed(seed), FORMULA, num_vars, num_clauses)
    clauses = []
    for _ in range(num_clauses):
        if distinct:
            clause = rng.choice(num_vars, size=3, replace=False) + 1
        else:
            clause = rng.integers(1, num_vars + 1, size=3)
        clauses.append(tuple(int(v) for v in clause))
    return MnaeInstance(num_vars=num_vars, clauses=tuple(clauses))
