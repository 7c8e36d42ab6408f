#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Packing Polytopes

Packing polytopes {v >= 0 : Mv <= b}, their per-coordinate maxima,
membership tests and brute-force vertex enumeration for the exact oracles.

Author: Bilinear Toolkit
Date: October 2025
"""

import itertools
import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from errors import (ConfigError, DimensionMismatch, EnumerationTooLarge,
                    UnboundedCoordinate)
from lp_core import (DEFAULT_TOLERANCES, LE, MAXIMIZE, LpProblem, LpStatus,
                     SolverTolerances, solve_lp)

logger = logging.getLogger(__name__)

DEFAULT_ENUMERATION_CAP = 2_000_000
DEFAULT_DEDUP_TOL = 1e-8
MAX_CONDITION = 1e12


@dataclass(frozen=True)
class PackingPolytope:
    """
    The set {v >= 0 : matrix @ v <= rhs}.

    Entries of matrix and rhs must be nonnegative. ``allow_negative`` relaxes
    the matrix check for the dual-feasible set {z >= 0 : B^T z <= d} of a
    signed recourse matrix; rhs must stay nonnegative either way.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    allow_negative: bool = False
    name: str = "polytope"

    def __post_init__(self):
        matrix = np.array(self.matrix, dtype=float, copy=True)
        if matrix.ndim == 1:
            matrix = matrix.reshape(1, -1) if matrix.size else matrix.reshape(0, 0)
        rhs = np.array(self.rhs, dtype=float, copy=True).ravel()
        if matrix.ndim != 2:
            raise DimensionMismatch(f"{self.name}: matrix must be 2-dimensional")
        if matrix.shape[1] < 1:
            raise DimensionMismatch(f"{self.name}: dimension must be at least 1")
        if rhs.size != matrix.shape[0]:
            raise DimensionMismatch(f"{self.name}: rhs has {rhs.size} entries for {matrix.shape[0]} rows")
        if not (np.all(np.isfinite(matrix)) and np.all(np.isfinite(rhs))):
            raise ConfigError(f"{self.name}: data must be finite")
        if np.any(rhs < 0):
            raise ConfigError(f"{self.name}: rhs must be nonnegative")
        if not self.allow_negative and np.any(matrix < 0):
            raise ConfigError(f"{self.name}: packing matrix must be nonnegative")
        matrix.setflags(write=False)
        rhs.setflags(write=False)
        object.__setattr__(self, "matrix", matrix)
        object.__setattr__(self, "rhs", rhs)

    @property
    def rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def scaled(self, factor: float) -> "PackingPolytope":
        """Polytope with rhs multiplied by factor > 0."""
        if not factor > 0:
            raise ConfigError("Scale factor must be positive")
        return PackingPolytope(self.matrix, self.rhs * factor, self.allow_negative, self.name)


@dataclass(frozen=True)
class CoordinateMaxima:
    """Per-coordinate maxima over a polytope; ``finite[i]`` is False when coordinate i is unbounded."""

    values: np.ndarray
    finite: np.ndarray

    @property
    def all_finite(self) -> bool:
        return bool(np.all(self.finite))

    def require_finite(self, label: str = "coordinate") -> np.ndarray:
        """Return the values, raising UnboundedCoordinate at the first infinite entry."""
        bad = np.flatnonzero(~self.finite)
        if bad.size:
            raise UnboundedCoordinate(int(bad[0]), label)
        return self.values


def coordinate_maxima(poly: PackingPolytope,
                      tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> CoordinateMaxima:
    """
    Compute max v_i over the polytope for every coordinate i.

    Args:
        poly: Polytope to scan
        tolerances: Solver tolerances

    Returns:
        CoordinateMaxima; an unbounded LP gives value inf with finite=False
    """
    values = np.zeros(poly.dim)
    finite = np.ones(poly.dim, dtype=bool)
    relations = (LE,) * poly.rows
    for i in range(poly.dim):
        objective = np.zeros(poly.dim)
        objective[i] = 1.0
        problem = LpProblem(sense=MAXIMIZE, objective=objective, matrix=poly.matrix,
                            relations=relations, rhs=poly.rhs, name=f"{poly.name}_max_{i}")
        solution = solve_lp(problem, tolerances)
        if solution.status == LpStatus.UNBOUNDED:
            values[i] = math.inf
            finite[i] = False
        else:
            # 0 is always feasible, so the LP is never infeasible
            values[i] = max(solution.objective, 0.0)
    logger.debug(f"{poly.name}: coordinate maxima computed for {poly.dim} coordinates, "
                 f"{int((~finite).sum())} unbounded")
    values.setflags(write=False)
    finite.setflags(write=False)
    return CoordinateMaxima(values, finite)


def contains(poly: PackingPolytope, point, tol: float = 1e-9) -> bool:
    """
    Membership test with an absolute tolerance on the sign and a relative one on the rows.

    Args:
        poly: Polytope
        point: Candidate point of length dim
        tol: Tolerance

    Returns:
        True iff point >= -tol and M point <= b + tol (1 + |b|)
    """
    point = np.asarray(point, dtype=float).ravel()
    if point.size != poly.dim:
        raise DimensionMismatch(f"Point has {point.size} entries, {poly.name} has dimension {poly.dim}")
    if np.any(point < -tol):
        return False
    if poly.rows == 0:
        return True
    return bool(np.all(poly.matrix @ point <= poly.rhs + tol * (1.0 + np.abs(poly.rhs))))


def basis_candidate_count(poly: PackingPolytope) -> int:
    return math.comb(poly.rows + poly.dim, poly.dim)


def enumerate_vertices(poly: PackingPolytope,
                       cap: int = DEFAULT_ENUMERATION_CAP,
                       dedup_tol: float = DEFAULT_DEDUP_TOL,
                       maxima: Optional[CoordinateMaxima] = None,
                       tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> List[np.ndarray]:
    """
    Enumerate all vertices by solving every square system of dim active constraints.

    Args:
        poly: Polytope with finite coordinate maxima
        cap: Maximum number of basis candidates C(rows+dim, dim)
        dedup_tol: Infinity-norm distance under which two vertices are the same
        maxima: Precomputed coordinate maxima (computed when omitted)

    Returns:
        List of vertices, in the order the candidate bases are visited

    Raises:
        EnumerationTooLarge: Candidate count exceeds cap
        UnboundedCoordinate: Polytope is unbounded
    """
    candidates = basis_candidate_count(poly)
    if candidates > cap:
        raise EnumerationTooLarge(
            f"{poly.name}: {candidates} basis candidates exceed the enumeration cap {cap}")
    if maxima is None:
        maxima = coordinate_maxima(poly, tolerances)
    maxima.require_finite(poly.name)

    dim = poly.dim
    system = np.vstack([poly.matrix, np.eye(dim)])
    targets = np.concatenate([poly.rhs, np.zeros(dim)])

    vertices: List[np.ndarray] = []
    skipped = 0
    for active in itertools.combinations(range(system.shape[0]), dim):
        block = system[list(active)]
        try:
            if np.linalg.cond(block) > MAX_CONDITION:
                skipped += 1
                continue
            point = np.linalg.solve(block, targets[list(active)])
        except np.linalg.LinAlgError:
            skipped += 1
            continue
        if not contains(poly, point, 1e-9):
            continue
        point = np.where(np.abs(point) < 1e-12, 0.0, point)
        if any(np.max(np.abs(point - v)) <= dedup_tol for v in vertices):
            continue
        vertices.append(point)

    logger.debug(f"{poly.name}: {len(vertices)} vertices from {candidates} candidates "
                 f"({skipped} singular)")
    return vertices
