#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Two-Stage Adjustable Robust Optimization

Model: min_x c^T x + Q(x),  Q(x) = max_{h in U} min_{y >= 0} { d^T y : B y >= h - A x }
with U = {h >= 0 : R h <= r} a packing uncertainty set and x in the nonnegative orthant.

This module builds:
1. theta_gamma - coordinate maxima of {z >= 0 : B^T z <= d} and of U, with eta and beta
2. build_qlp / solve_qlp - the LP upper bound Q^LP(x, y0) of the separation problem
3. build_lp_ar / solve_lp_ar - the compact LP restriction of the robust problem
4. round_separation - near-integral rounding of the separation problem
5. evaluate_first_stage - c^T x + Q(x) through the exact oracle

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import time
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional

import numpy as np

from errors import (ConfigError, DimensionMismatch, InfeasibleModel,
                    InfeasibleRestriction, PreconditionViolated,
                    UnboundedModel)
from lp_core import (DEFAULT_TOLERANCES, GE, LE, MAXIMIZE, MINIMIZE,
                     LpProblem, LpStatus, SolverTolerances,
                     require_optimal, solve_lp)
from pdb_solver import PdbInstance, zeta
from polytope import PackingPolytope, contains, coordinate_maxima
from seeding import SEPARATION, check_seed, substream

logger = logging.getLogger(__name__)

ORTHANT = "orthant"
DEFAULT_SEPARATION_ATTEMPTS = 16
THRESHOLD_SLACK = 1e-9


@dataclass
class ArInstance:
    """Data (A, B, c, d, R, r) of a two-stage robust covering problem."""

    A: np.ndarray
    B: np.ndarray
    c: np.ndarray
    d: np.ndarray
    uncertainty: PackingPolytope
    first_stage: str = ORTHANT
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        self.A = np.array(self.A, dtype=float, ndmin=2)
        self.B = np.array(self.B, dtype=float, ndmin=2)
        self.c = np.array(self.c, dtype=float).ravel()
        self.d = np.array(self.d, dtype=float).ravel()
        m, n = self.A.shape
        if self.B.shape != (m, n):
            raise DimensionMismatch(f"A is {self.A.shape} but B is {self.B.shape}")
        if self.c.size != n or self.d.size != n:
            raise DimensionMismatch(f"c and d must have {n} entries")
        if self.uncertainty.dim != m:
            raise DimensionMismatch(f"Uncertainty set has dimension {self.uncertainty.dim}, expected {m}")
        if self.uncertainty.allow_negative:
            raise ConfigError("Uncertainty set must be a packing polytope")
        for label, arr in (("A", self.A), ("B", self.B), ("c", self.c), ("d", self.d)):
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"{label} contains non-finite values")
        if np.any(self.c < 0) or np.any(self.d < 0):
            raise ConfigError("Cost vectors c and d must be nonnegative")
        if self.first_stage != ORTHANT:
            raise ConfigError(f"Unsupported first-stage set {self.first_stage!r}; only '{ORTHANT}' is implemented")
        for arr in (self.A, self.B, self.c, self.d):
            arr.setflags(write=False)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    @property
    def L_rows(self) -> int:
        return self.uncertainty.rows

    @property
    def R(self) -> np.ndarray:
        return self.uncertainty.matrix

    @property
    def r(self) -> np.ndarray:
        return self.uncertainty.rhs

    def dual_polytope(self) -> PackingPolytope:
        """The set {z >= 0 : B^T z <= d} (B may be signed)."""
        return PackingPolytope(self.B.T, self.d, allow_negative=True, name="dual_feasible")

    @cached_property
    def bounds(self) -> "ArThetaGamma":
        return theta_gamma(self)


@dataclass(frozen=True)
class ArThetaGamma:
    theta: np.ndarray
    gamma: np.ndarray
    eta: float
    beta: float
    seconds: float = 0.0


@dataclass
class ArSolution:
    """Optimal LP-AR point split into its x, y0, y and alpha blocks."""

    x: np.ndarray
    y0: np.ndarray
    y: np.ndarray
    alpha: np.ndarray
    z_lp_ar: float
    theta_gamma: ArThetaGamma
    precompute_seconds: float
    build_seconds: float
    solve_seconds: float
    variable_count: int
    iterations: int

    @property
    def lp_seconds(self) -> float:
        """Build plus solve time, excluding theta/gamma precomputation."""
        return self.build_seconds + self.solve_seconds

    @property
    def lp_seconds_inclusive(self) -> float:
        return self.precompute_seconds + self.build_seconds + self.solve_seconds


@dataclass
class QlpResult:
    value: float
    omega: np.ndarray
    coefficients: np.ndarray


@dataclass
class SeparationPoint:
    """Near-integral (h, z) for the separation problem at (x, y0)."""

    h: np.ndarray
    z: np.ndarray
    objective: float
    certified_value: float
    qlp_value: float
    threshold: float
    success: bool
    attempts: int
    h_feasible: bool = True
    z_feasible: bool = True


def theta_gamma(inst: ArInstance, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> ArThetaGamma:
    """
    Coordinate maxima of the dual-feasible set and of U, plus eta = zeta(n) and beta = zeta(L_rows).

    Raises:
        UnboundedCoordinate: theta_i or gamma_i is infinite
    """
    started = time.perf_counter()
    theta = coordinate_maxima(inst.dual_polytope(), tolerances).require_finite("theta")
    gamma = coordinate_maxima(inst.uncertainty, tolerances).require_finite("gamma")
    elapsed = time.perf_counter() - started
    return ArThetaGamma(theta=theta, gamma=gamma, eta=zeta(inst.n), beta=zeta(inst.L_rows), seconds=elapsed)


def _check_first_stage(inst: ArInstance, x, y0, tolerances: SolverTolerances):
    x = np.asarray(x, dtype=float).ravel()
    y0 = np.asarray(y0, dtype=float).ravel()
    if x.size != inst.n or y0.size != inst.n:
        raise DimensionMismatch(f"x and y0 must have {inst.n} entries")
    if np.any(x < -tolerances.feas_tol) or np.any(y0 < -tolerances.feas_tol):
        raise PreconditionViolated("x and y0 must be nonnegative")
    coverage = inst.A @ x + inst.B @ y0
    worst = float(coverage.min(initial=0.0))
    if worst < -tolerances.feas_tol:
        raise PreconditionViolated(f"Ax + By0 has entry {worst:.3e} below -{tolerances.feas_tol}")
    return x, y0, coverage


def build_qlp(inst: ArInstance, x, y0, tg: Optional[ArThetaGamma] = None,
              tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> LpProblem:
    """
    Build Q^LP(x, y0) = max sum_i (theta_i gamma_i - theta_i (a_i^T x + b_i^T y0)) omega_i
    over sum_i theta_i b_i omega_i <= d and sum_i gamma_i R_i omega_i <= r.

    Args:
        inst: AR instance
        x: First-stage point
        y0: Static recourse with Ax + By0 >= 0

    Returns:
        LpProblem with m columns and n + L_rows rows

    Raises:
        PreconditionViolated: Ax + By0 has an entry below -feas_tol
    """
    tg = tg or inst.bounds
    _, _, coverage = _check_first_stage(inst, x, y0, tolerances)
    theta, gamma = tg.theta, tg.gamma
    coefficients = theta * gamma - theta * coverage
    matrix = np.vstack([(inst.B * theta[:, None]).T, inst.R * gamma[None, :]])
    return LpProblem(
        sense=MAXIMIZE,
        objective=coefficients,
        matrix=matrix,
        relations=(LE,) * (inst.n + inst.L_rows),
        rhs=np.concatenate([inst.d, inst.r]),
        var_names=tuple(f"omega[{i}]" for i in range(inst.m)),
        row_names=tuple(f"dual[{j}]" for j in range(inst.n)) + tuple(f"U[{l}]" for l in range(inst.L_rows)),
        name="qlp",
    )


def solve_qlp(inst: ArInstance, x, y0, tg: Optional[ArThetaGamma] = None,
              tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> QlpResult:
    """Solve Q^LP(x, y0); returns its value, optimal omega and objective coefficients."""
    problem = build_qlp(inst, x, y0, tg, tolerances)
    solution = require_optimal(solve_lp(problem, tolerances), "Q^LP")
    return QlpResult(value=solution.objective, omega=solution.x, coefficients=np.array(problem.objective))


def build_lp_ar(inst: ArInstance, tg: Optional[ArThetaGamma] = None) -> LpProblem:
    """
    Build the LP restriction over (x, y0, y, alpha):

        min  c^T x + d^T y0 + d^T y + r^T alpha
        s.t. theta_i a_i^T x + theta_i b_i^T y0 + theta_i b_i^T y + gamma_i R_i^T alpha >= theta_i gamma_i
             A x + B y0 >= 0
             x, y0, y, alpha >= 0

    Returns:
        LpProblem with 3n + L_rows columns and 2m rows
    """
    tg = tg or inst.bounds
    theta, gamma = tg.theta, tg.gamma
    n, m, L_rows = inst.n, inst.m, inst.L_rows

    scaled_B = inst.B * theta[:, None]
    cover = np.hstack([inst.A * theta[:, None], scaled_B, scaled_B, inst.R.T * gamma[:, None]])
    static = np.hstack([inst.A, inst.B, np.zeros((m, n)), np.zeros((m, L_rows))])
    names = (tuple(f"x[{j}]" for j in range(n)) + tuple(f"y0[{j}]" for j in range(n))
             + tuple(f"y[{j}]" for j in range(n)) + tuple(f"alpha[{l}]" for l in range(L_rows)))

    return LpProblem(
        sense=MINIMIZE,
        objective=np.concatenate([inst.c, inst.d, inst.d, inst.r]),
        matrix=np.vstack([cover, static]),
        relations=(GE,) * (2 * m),
        rhs=np.concatenate([theta * gamma, np.zeros(m)]),
        var_names=names,
        row_names=tuple(f"cover[{i}]" for i in range(m)) + tuple(f"static[{i}]" for i in range(m)),
        name="lp_ar",
    )


def lp_ar_variable_count(inst: ArInstance) -> int:
    return 3 * inst.n + inst.L_rows


def solve_lp_ar(inst: ArInstance, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> ArSolution:
    """
    Solve the LP restriction and unpack it.

    Raises:
        InfeasibleRestriction: The restriction has no feasible point
        UnboundedModel: The restriction is unbounded (corrupt data)
    """
    started = time.perf_counter()
    tg = theta_gamma(inst, tolerances)
    precompute = time.perf_counter() - started

    started = time.perf_counter()
    problem = build_lp_ar(inst, tg)
    build = time.perf_counter() - started

    started = time.perf_counter()
    solution = solve_lp(problem, tolerances)
    solve = time.perf_counter() - started

    if solution.status == LpStatus.INFEASIBLE:
        raise InfeasibleRestriction("LP-AR restriction is infeasible")
    if solution.status == LpStatus.UNBOUNDED:
        raise UnboundedModel("LP-AR restriction is unbounded; check the cost vectors")

    n = inst.n
    v = solution.x
    logger.debug(f"LP-AR value {solution.objective:.10g} after {solution.iterations} pivots "
                 f"(precompute {precompute:.3f}s, build {build:.3f}s, solve {solve:.3f}s)")
    return ArSolution(
        x=v[:n], y0=v[n:2 * n], y=v[2 * n:3 * n], alpha=v[3 * n:],
        z_lp_ar=solution.objective, theta_gamma=tg,
        precompute_seconds=precompute, build_seconds=build, solve_seconds=solve,
        variable_count=problem.num_cols, iterations=solution.iterations,
    )


def round_separation(inst: ArInstance, x, y0, seed: int,
                     attempts: int = DEFAULT_SEPARATION_ATTEMPTS,
                     tg: Optional[ArThetaGamma] = None,
                     tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> SeparationPoint:
    """
    Round Q^LP(beta x, beta y0) to a near-integral separation point.

    h_i = gamma_i w_i / beta and z_i = theta_i w_i / eta with w_i ~ Bernoulli(omega*_i).
    Attempt a draws from substream(seed, "separation", a). The first attempt with
    h in U, B^T z <= d and
    sum_i h_i z_i - (a_i^T x + b_i^T y0) z_i >= Q^LP(beta x, beta y0) / (2 eta beta)
    is returned. Otherwise the feasible attempt with the largest certified value
    (or the zero point) is returned with success=False.

    Args:
        inst: AR instance
        x: First-stage point
        y0: Static recourse with Ax + By0 >= 0
        seed: Master seed
        attempts: Maximum number of draws

    Returns:
        SeparationPoint
    """
    if attempts < 1:
        raise ConfigError("attempts must be at least 1")
    seed = check_seed(seed)
    tg = tg or inst.bounds
    x, y0, coverage = _check_first_stage(inst, x, y0, tolerances)
    eta, beta = tg.eta, tg.beta

    qlp = solve_qlp(inst, beta * x, beta * y0, tg, tolerances)
    probs = np.clip(qlp.omega, 0.0, 1.0)
    probs[qlp.coefficients < 0] = 0.0
    threshold = qlp.value / (2.0 * eta * beta)
    dual_set = inst.dual_polytope()
    Ax = inst.A @ x

    best: Optional[SeparationPoint] = None
    for a in range(attempts):
        rng = substream(seed, SEPARATION, a)
        draws = (rng.random(inst.m) < probs).astype(float)
        h = tg.gamma * draws / beta
        z = tg.theta * draws / eta
        h_ok = contains(inst.uncertainty, h, tolerances.feas_tol)
        z_ok = contains(dual_set, z, tolerances.feas_tol)
        certified = float(h @ z - coverage @ z)
        point = SeparationPoint(
            h=h, z=z, objective=float(h @ z - Ax @ z), certified_value=certified,
            qlp_value=qlp.value, threshold=threshold,
            success=h_ok and z_ok and certified >= threshold - THRESHOLD_SLACK,
            attempts=a + 1, h_feasible=h_ok, z_feasible=z_ok,
        )
        if point.success:
            logger.debug(f"Separation rounding succeeded at attempt {a}: certified {certified:.6g}")
            return point
        if h_ok and z_ok and (best is None or certified > best.certified_value):
            best = point

    logger.warning(f"Separation rounding failed in {attempts} attempts (Q^LP {qlp.value:.6g})")
    if best is None:
        zeros = np.zeros(inst.m)
        best = SeparationPoint(h=zeros, z=zeros.copy(), objective=0.0, certified_value=0.0,
                               qlp_value=qlp.value, threshold=threshold, success=False, attempts=attempts)
    best.success = False
    best.attempts = attempts
    return best


def minimal_static_recourse(inst: ArInstance, x,
                            tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> np.ndarray:
    """
    Cheapest y0 >= 0 with B y0 >= -A x.

    Raises:
        InfeasibleModel: No such y0 exists
    """
    x = np.asarray(x, dtype=float).ravel()
    problem = LpProblem(sense=MINIMIZE, objective=inst.d, matrix=inst.B, relations=(GE,) * inst.m,
                        rhs=-(inst.A @ x), name="static_recourse")
    solution = solve_lp(problem, tolerances)
    if solution.status == LpStatus.INFEASIBLE:
        raise InfeasibleModel("No static recourse y0 >= 0 with Ax + By0 >= 0")
    if solution.status == LpStatus.UNBOUNDED:
        # d >= 0 makes this impossible; keep the solver's point
        logger.warning("Static recourse LP reported unbounded")
    return np.maximum(solution.x, 0.0)


def evaluate_first_stage(inst: ArInstance, x, tolerances: SolverTolerances = DEFAULT_TOLERANCES,
                         cap: Optional[int] = None) -> float:
    """
    Exact first-stage cost c^T x + Q(x) via vertex enumeration of U.

    Raises:
        EnumerationTooLarge: U has too many basis candidates
    """
    from exact_oracle import exact_q

    x = np.asarray(x, dtype=float).ravel()
    kwargs = {} if cap is None else {"cap": cap}
    q = exact_q(inst, x, tolerances=tolerances, **kwargs)
    return float(inst.c @ x) + q.value


def induced_pdb_instance(inst: ArInstance) -> PdbInstance:
    """
    PDB instance with X = {z >= 0 : B^T z <= d} and Y = U.

    Raises:
        ConfigError: B has negative entries (X would not be a packing polytope)
    """
    if np.any(inst.B < 0):
        raise ConfigError("The induced PDB instance needs a nonnegative B")
    X = PackingPolytope(inst.B.T, inst.d, name="X_induced")
    return PdbInstance(X=X, Y=inst.uncertainty, metadata={"source": "ar", **inst.metadata})
