#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Exact Oracles

Brute-force exact values for small instances:
- exact_pdb: max x^T y over all vertex pairs of X and Y
- exact_q: max over vertices h of U of min { d^T y : B y >= h - A x, y >= 0 }

Both refuse to run past the enumeration cap rather than subsample.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from lp_core import (DEFAULT_TOLERANCES, GE, MINIMIZE, LpProblem, LpStatus,
                     SolverTolerances, solve_lp)
from polytope import DEFAULT_DEDUP_TOL, DEFAULT_ENUMERATION_CAP, enumerate_vertices

if TYPE_CHECKING:
    from ar_solver import ArInstance
    from pdb_solver import PdbInstance

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class QValue:
    """Extended-real value of Q(x); ``bounded`` is False when some scenario has no recourse."""

    value: float
    scenario: Optional[np.ndarray]
    bounded: bool = True

    @classmethod
    def infinite(cls, scenario: np.ndarray) -> "QValue":
        return cls(value=math.inf, scenario=scenario, bounded=False)


def exact_pdb(inst: "PdbInstance", cap: int = DEFAULT_ENUMERATION_CAP,
              dedup_tol: float = DEFAULT_DEDUP_TOL,
              tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """
    Exact PDB optimum. A bilinear form over a product of polytopes peaks at a vertex pair.

    Raises:
        EnumerationTooLarge: Either polytope exceeds the enumeration cap
    """
    vx = np.array(enumerate_vertices(inst.X, cap, dedup_tol, tolerances=tolerances))
    vy = np.array(enumerate_vertices(inst.Y, cap, dedup_tol, tolerances=tolerances))
    value = float(np.max(vx @ vy.T))
    logger.debug(f"exact_pdb: {len(vx)} x {len(vy)} vertex pairs, optimum {value:.10g}")
    return value


def recourse_cost(inst: "ArInstance", x: np.ndarray, h: np.ndarray,
                  tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """Inner value min { d^T y : B y >= h - A x, y >= 0 }; +inf when infeasible."""
    problem = LpProblem(sense=MINIMIZE, objective=inst.d, matrix=inst.B,
                        relations=(GE,) * inst.m, rhs=h - inst.A @ x, name="recourse")
    solution = solve_lp(problem, tolerances)
    if solution.status == LpStatus.INFEASIBLE:
        return math.inf
    # d >= 0 and y >= 0 keep the inner problem bounded below by 0
    return max(solution.objective, 0.0)


def exact_q(inst: "ArInstance", x, cap: int = DEFAULT_ENUMERATION_CAP,
            dedup_tol: float = DEFAULT_DEDUP_TOL,
            tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> QValue:
    """
    Exact Q(x). The inner value is convex in h, so the maximum over U sits at a vertex.

    Args:
        inst: AR instance
        x: First-stage point

    Returns:
        QValue with the worst-case scenario; value inf if some vertex has no recourse

    Raises:
        EnumerationTooLarge: U exceeds the enumeration cap
    """
    x = np.asarray(x, dtype=float).ravel()
    vertices = enumerate_vertices(inst.uncertainty, cap, dedup_tol, tolerances=tolerances)
    best = QValue(value=-math.inf, scenario=None)
    for h in vertices:
        cost = recourse_cost(inst, x, h, tolerances)
        if math.isinf(cost):
            logger.debug(f"exact_q: no recourse at scenario {np.round(h, 6).tolist()}")
            return QValue.infinite(h)
        if cost > best.value:
            best = QValue(value=cost, scenario=h)
    logger.debug(f"exact_q: {len(vertices)} scenarios, worst case {best.value:.10g}")
    return best
