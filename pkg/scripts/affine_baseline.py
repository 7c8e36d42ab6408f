#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Affine Policy Baseline

Optimal affine recourse y(h) = y0 + Y h for the two-stage robust problem,
computed as a single LP by dualizing every constraint that must hold for all
h in U = {h >= 0 : R h <= r}. For min_{h in U} g^T h >= -s the dual certificate
is lambda >= 0 with R^T lambda + g >= 0 and r^T lambda <= s.

Column layout (all blocks row-major):
    x       n       >= 0
    y0      n       >= 0
    Y       n*m     free      Y[j, k]
    lambda  m*L     >= 0      covering row i, uncertainty row l
    mu      n*L     >= 0      policy coordinate j, uncertainty row l
    nu      L       >= 0      cost epigraph
    t       1       free      worst-case cost

Row layout:
    budget[i]       r^T lambda_i - (Ax)_i - (B y0)_i <= 0
    cover[i,k]      sum_l R[l,k] lambda_il + sum_j B[i,j] Y[j,k] >= delta_ik
    nonneg[j]       r^T mu_j - y0_j <= 0
    slope[j,k]      sum_l R[l,k] mu_jl + Y[j,k] >= 0
    cost_dual[k]    sum_l R[l,k] nu_l - sum_j d_j Y[j,k] >= 0
    epigraph        t - c^T x - d^T y0 - r^T nu >= 0

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
import time
from dataclasses import dataclass
from typing import Any, Dict

import numpy as np

from ar_solver import ArInstance
from lp_core import (DEFAULT_TOLERANCES, GE, LE, MINIMIZE, LpProblem,
                     SolverTolerances, require_optimal, solve_lp)
from polytope import DEFAULT_ENUMERATION_CAP, enumerate_vertices

logger = logging.getLogger(__name__)


@dataclass
class AffinePolicy:
    x: np.ndarray
    y0_aff: np.ndarray
    Y: np.ndarray
    z_aff: float
    build_seconds: float = 0.0
    solve_seconds: float = 0.0
    variable_count: int = 0
    iterations: int = 0

    @property
    def total_seconds(self) -> float:
        return self.build_seconds + self.solve_seconds

    def recourse(self, h) -> np.ndarray:
        """Second-stage decision for scenario h."""
        return self.y0_aff + self.Y @ np.asarray(h, dtype=float)


@dataclass(frozen=True)
class _Layout:
    n: int
    m: int
    L: int

    @property
    def x(self) -> slice:
        return slice(0, self.n)

    @property
    def y0(self) -> slice:
        return slice(self.n, 2 * self.n)

    @property
    def Y(self) -> slice:
        return slice(2 * self.n, 2 * self.n + self.n * self.m)

    @property
    def lam(self) -> int:
        return 2 * self.n + self.n * self.m

    @property
    def mu(self) -> int:
        return self.lam + self.m * self.L

    @property
    def nu(self) -> int:
        return self.mu + self.n * self.L

    @property
    def t(self) -> int:
        return self.nu + self.L

    @property
    def columns(self) -> int:
        return self.t + 1

    def Y_index(self) -> np.ndarray:
        return self.Y.start + np.arange(self.n)[:, None] * self.m + np.arange(self.m)[None, :]


def affine_variable_count(inst: ArInstance) -> int:
    """n + n + n*m + (m + n + 1)*L_rows + 1."""
    return 2 * inst.n + inst.n * inst.m + (inst.m + inst.n + 1) * inst.L_rows + 1


def build_affine_lp(inst: ArInstance) -> LpProblem:
    """
    Build the robust counterpart LP of the optimal affine policy.

    Args:
        inst: AR instance

    Returns:
        LpProblem minimizing the worst-case cost t
    """
    n, m, L = inst.n, inst.m, inst.L_rows
    R, r = inst.R, inst.r
    lay = _Layout(n, m, L)
    Yidx = lay.Y_index()

    budget_rows = m
    cover_rows = m * m
    nonneg_rows = n
    slope_rows = n * m
    cost_rows = m
    total_rows = budget_rows + cover_rows + nonneg_rows + slope_rows + cost_rows + 1
    matrix = np.zeros((total_rows, lay.columns))
    rhs = np.zeros(total_rows)
    relations = []
    row_names = []

    # budget[i] and cover[i, k]
    base_cover = budget_rows
    for i in range(m):
        lam_cols = slice(lay.lam + i * L, lay.lam + (i + 1) * L)
        matrix[i, lam_cols] = r
        matrix[i, lay.x] = -inst.A[i]
        matrix[i, lay.y0] = -inst.B[i]
        rows = base_cover + i * m + np.arange(m)
        matrix[rows, lam_cols] = R.T
        matrix[rows[:, None], Yidx.T] = inst.B[i][None, :]
        rhs[base_cover + i * m + i] = 1.0
    relations += [LE] * budget_rows + [GE] * cover_rows
    row_names += [f"budget[{i}]" for i in range(m)]
    row_names += [f"cover[{i},{k}]" for i in range(m) for k in range(m)]

    # nonneg[j] and slope[j, k]
    base_nonneg = base_cover + cover_rows
    base_slope = base_nonneg + nonneg_rows
    for j in range(n):
        mu_cols = slice(lay.mu + j * L, lay.mu + (j + 1) * L)
        matrix[base_nonneg + j, mu_cols] = r
        matrix[base_nonneg + j, lay.y0.start + j] = -1.0
        rows = base_slope + j * m + np.arange(m)
        matrix[rows, mu_cols] = R.T
        matrix[rows, Yidx[j]] = 1.0
    relations += [LE] * nonneg_rows + [GE] * slope_rows
    row_names += [f"nonneg[{j}]" for j in range(n)]
    row_names += [f"slope[{j},{k}]" for j in range(n) for k in range(m)]

    # cost_dual[k] and the epigraph row
    base_cost = base_slope + slope_rows
    rows = base_cost + np.arange(m)
    matrix[rows, lay.nu:lay.nu + L] = R.T
    matrix[rows[:, None], Yidx.T] = -inst.d[None, :]
    epigraph = total_rows - 1
    matrix[epigraph, lay.t] = 1.0
    matrix[epigraph, lay.x] = -inst.c
    matrix[epigraph, lay.y0] = -inst.d
    matrix[epigraph, lay.nu:lay.nu + L] = -r
    relations += [GE] * cost_rows + [GE]
    row_names += [f"cost_dual[{k}]" for k in range(m)] + ["epigraph"]

    lower = np.zeros(lay.columns)
    upper = np.full(lay.columns, np.inf)
    lower[lay.Y] = -np.inf
    lower[lay.t] = -np.inf
    objective = np.zeros(lay.columns)
    objective[lay.t] = 1.0

    var_names = ([f"x[{j}]" for j in range(n)] + [f"y0[{j}]" for j in range(n)]
                 + [f"Y[{j},{k}]" for j in range(n) for k in range(m)]
                 + [f"lambda[{i},{l}]" for i in range(m) for l in range(L)]
                 + [f"mu[{j},{l}]" for j in range(n) for l in range(L)]
                 + [f"nu[{l}]" for l in range(L)] + ["t"])

    return LpProblem(sense=MINIMIZE, objective=objective, matrix=matrix, relations=tuple(relations),
                     rhs=rhs, lower=lower, upper=upper, var_names=tuple(var_names),
                     row_names=tuple(row_names), name="affine_policy")


def solve_affine(inst: ArInstance, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> AffinePolicy:
    """
    Solve the affine policy LP and unpack the policy.

    Raises:
        UnboundedCoordinate: theta or gamma is infinite
        InfeasibleModel, UnboundedModel: The LP is not Optimal
    """
    _ = inst.bounds  # raises on infinite coordinate maxima

    started = time.perf_counter()
    problem = build_affine_lp(inst)
    build = time.perf_counter() - started

    started = time.perf_counter()
    solution = require_optimal(solve_lp(problem, tolerances), "affine policy LP")
    solve = time.perf_counter() - started

    lay = _Layout(inst.n, inst.m, inst.L_rows)
    v = solution.x
    policy = AffinePolicy(
        x=v[lay.x].copy(), y0_aff=v[lay.y0].copy(), Y=v[lay.Y].reshape(inst.n, inst.m),
        z_aff=solution.objective, build_seconds=build, solve_seconds=solve,
        variable_count=problem.num_cols, iterations=solution.iterations,
    )
    logger.debug(f"Affine policy: z_aff {policy.z_aff:.10g}, {policy.variable_count} variables, "
                 f"{solution.iterations} pivots, {solve:.3f}s")
    return policy


def certify_policy(inst: ArInstance, policy: AffinePolicy, cap: int = DEFAULT_ENUMERATION_CAP,
                   tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> Dict[str, Any]:
    """
    Check the policy at every vertex of U.

    Returns:
        Dictionary with the worst covering shortfall, the most negative recourse entry,
        the worst realized cost, its excess over z_aff and a 'certified' flag
    """
    vertices = enumerate_vertices(inst.uncertainty, cap, tolerances=tolerances)
    Ax = inst.A @ policy.x
    worst_cover = 0.0
    worst_sign = 0.0
    worst_cost = -math.inf
    for h in vertices:
        y = policy.recourse(h)
        worst_cover = max(worst_cover, float(np.max(h - Ax - inst.B @ y, initial=0.0)))
        worst_sign = max(worst_sign, float(np.max(-y, initial=0.0)))
        worst_cost = max(worst_cost, float(inst.c @ policy.x + inst.d @ y))
    excess = max(0.0, worst_cost - policy.z_aff)
    tol = tolerances.feas_tol * 10
    certified = worst_cover <= tol and worst_sign <= tol and excess <= tol * (1.0 + abs(policy.z_aff))
    return {
        "vertices": len(vertices),
        "cover_violation": worst_cover,
        "sign_violation": worst_sign,
        "worst_cost": worst_cost,
        "cost_excess": excess,
        "certified": certified,
    }
