#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Packing Disjoint Bilinear Programs

Solves max { x^T y : x in X, y in Y } for packing polytopes X and Y:
1. build_lp_pdb / solve_lp_pdb - the LP relaxation over omega in R^n
2. round_pdb - randomized rounding to a near-integral feasible pair,
   x_i in {0, theta_i/zeta1}, y_i in {0, gamma_i/zeta2}
3. rounding_trial / estimate_event_frequency - one rounding draw and the
   Monte-Carlo frequency of the success events

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Dict, Optional, Tuple

import numpy as np

from errors import ConfigError, DimensionMismatch
from lp_core import (DEFAULT_TOLERANCES, LE, MAXIMIZE, LpProblem, LpSolution,
                     SolverTolerances, require_optimal, solve_lp)
from polytope import PackingPolytope, contains, coordinate_maxima
from seeding import ROUNDING, check_seed, substream

logger = logging.getLogger(__name__)

ZETA_CLAMP = 16
THRESHOLD_SLACK = 1e-9


def zeta(m: int) -> float:
    """
    Logarithmic shrink factor 2 ln(m)/ln(ln(m)) + 2, with m clamped to at least 16.

    Args:
        m: Row count (>= 1)

    Returns:
        Shrink factor (about 7.4376 for m <= 16)
    """
    if m < 1:
        raise ConfigError(f"zeta needs m >= 1, got {m}")
    m_eff = max(int(m), ZETA_CLAMP)
    log_m = math.log(m_eff)
    return 2.0 * log_m / math.log(log_m) + 2.0


@dataclass
class PdbInstance:
    """Pair of packing polytopes X, Y of the same dimension n."""

    X: PackingPolytope
    Y: PackingPolytope
    metadata: Dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.X.dim != self.Y.dim:
            raise DimensionMismatch(f"X has dimension {self.X.dim}, Y has dimension {self.Y.dim}")
        if self.X.allow_negative or self.Y.allow_negative:
            raise ConfigError("PDB polytopes must be packing polytopes")

    @property
    def n(self) -> int:
        return self.X.dim

    @property
    def m1(self) -> int:
        return self.X.rows

    @property
    def m2(self) -> int:
        return self.Y.rows

    @cached_property
    def theta(self) -> np.ndarray:
        return coordinate_maxima(self.X).require_finite("theta")

    @cached_property
    def gamma(self) -> np.ndarray:
        return coordinate_maxima(self.Y).require_finite("gamma")


@dataclass
class PdbSolution:
    x: np.ndarray
    y: np.ndarray
    objective: float
    near_integral: bool
    iterations_used: int
    lp_relaxation_value: float
    zeta: Tuple[float, float]
    exhausted: bool = False
    best_iteration: Optional[int] = None
    meets_threshold: bool = False
    omega: Optional[np.ndarray] = None

    @property
    def threshold(self) -> float:
        return self.lp_relaxation_value / (2.0 * self.zeta[0] * self.zeta[1])


@dataclass(frozen=True)
class RoundingConfig:
    """Parameters of the rounding loop; T = 8 ceil(ln(1/epsilon)) unless overridden."""

    epsilon: float = 0.25
    seed: int = 0
    zeta_override: Optional[Tuple[float, float]] = None
    max_iterations_override: Optional[int] = None

    def __post_init__(self):
        if not (0.0 < self.epsilon < 1.0):
            raise ConfigError(f"epsilon must lie in (0, 1), got {self.epsilon}")
        object.__setattr__(self, "seed", check_seed(self.seed))
        if self.zeta_override is not None:
            z1, z2 = self.zeta_override
            if not (z1 > 0 and z2 > 0):
                raise ConfigError("zeta_override entries must be positive")
            object.__setattr__(self, "zeta_override", (float(z1), float(z2)))
        if self.max_iterations_override is not None and self.max_iterations_override < 1:
            raise ConfigError("max_iterations_override must be at least 1")

    @property
    def iterations(self) -> int:
        if self.max_iterations_override is not None:
            return int(self.max_iterations_override)
        return 8 * math.ceil(math.log(1.0 / self.epsilon))

    def zetas(self, inst: PdbInstance) -> Tuple[float, float]:
        if self.zeta_override is not None:
            return self.zeta_override
        return zeta(inst.m1), zeta(inst.m2)


@dataclass
class RoundingTrial:
    """One Bernoulli draw and its three success events."""

    x: np.ndarray
    y: np.ndarray
    objective: float
    x_feasible: bool
    y_feasible: bool
    meets_threshold: bool

    @property
    def feasible(self) -> bool:
        return self.x_feasible and self.y_feasible

    @property
    def all_events(self) -> bool:
        return self.feasible and self.meets_threshold


def pdb_objective(x, y) -> float:
    """Bilinear objective x^T y."""
    x = np.asarray(x, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if x.size != y.size:
        raise DimensionMismatch(f"x has {x.size} entries, y has {y.size}")
    return float(x @ y)


def build_lp_pdb(inst: PdbInstance) -> LpProblem:
    """
    Build the LP relaxation max sum theta_i gamma_i omega_i over the scaled P and Q blocks.

    Args:
        inst: PDB instance with finite coordinate maxima

    Returns:
        LpProblem with n columns and m1 + m2 rows

    Raises:
        UnboundedCoordinate: Some theta_i or gamma_i is infinite
    """
    theta, gamma = inst.theta, inst.gamma
    matrix = np.vstack([inst.X.matrix * theta[None, :], inst.Y.matrix * gamma[None, :]])
    rhs = np.concatenate([inst.X.rhs, inst.Y.rhs])
    return LpProblem(
        sense=MAXIMIZE,
        objective=theta * gamma,
        matrix=matrix.reshape(inst.m1 + inst.m2, inst.n),
        relations=(LE,) * (inst.m1 + inst.m2),
        rhs=rhs,
        var_names=tuple(f"omega[{i}]" for i in range(inst.n)),
        row_names=tuple(f"P[{j}]" for j in range(inst.m1)) + tuple(f"Q[{j}]" for j in range(inst.m2)),
        name="lp_pdb",
    )


def solve_lp_pdb(inst: PdbInstance, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """Solve the LP relaxation; raises when it is not Optimal."""
    solution = require_optimal(solve_lp(build_lp_pdb(inst), tolerances), "LP-PDB")
    logger.debug(f"LP-PDB value {solution.objective:.10g} (n={inst.n}, m1={inst.m1}, m2={inst.m2})")
    return solution


def relaxation_witness(inst: PdbInstance, x, y) -> np.ndarray:
    """
    Map a feasible pair (x, y) to omega_i = (x_i/theta_i)(y_i/gamma_i), the LP point
    whose value equals x^T y. Coordinates with theta_i gamma_i = 0 map to 0.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    theta, gamma = inst.theta, inst.gamma
    active = (theta > 0) & (gamma > 0)
    omega = np.zeros(inst.n)
    omega[active] = (x[active] / theta[active]) * (y[active] / gamma[active])
    return omega


def sampling_probabilities(inst: PdbInstance, omega: np.ndarray) -> np.ndarray:
    """Clip omega to [0, 1] and zero the coordinates that cannot contribute objective."""
    probs = np.clip(np.asarray(omega, dtype=float), 0.0, 1.0)
    probs[(inst.theta * inst.gamma) == 0.0] = 0.0
    return probs


def rounding_trial(inst: PdbInstance, probs: np.ndarray, zetas: Tuple[float, float],
                   z_lp: float, rng: np.random.Generator, feas_tol: float) -> RoundingTrial:
    """
    Draw omega~_i ~ Bernoulli(probs_i) and build x_i = theta_i omega~_i / zeta1, y_i = gamma_i omega~_i / zeta2.

    Args:
        inst: PDB instance
        probs: Sampling probabilities (see sampling_probabilities)
        zetas: (zeta1, zeta2)
        z_lp: LP relaxation value
        rng: Generator of this iteration's substream
        feas_tol: Membership tolerance

    Returns:
        RoundingTrial with the point and its event flags
    """
    draws = (rng.random(inst.n) < probs).astype(float)
    x = inst.theta * draws / zetas[0]
    y = inst.gamma * draws / zetas[1]
    objective = pdb_objective(x, y)
    threshold = z_lp / (2.0 * zetas[0] * zetas[1])
    return RoundingTrial(
        x=x, y=y, objective=objective,
        x_feasible=contains(inst.X, x, feas_tol),
        y_feasible=contains(inst.Y, y, feas_tol),
        meets_threshold=objective >= threshold - THRESHOLD_SLACK,
    )


def round_pdb(inst: PdbInstance, config: RoundingConfig,
              tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> PdbSolution:
    """
    Run the randomized rounding loop and keep the best feasible iterate.

    Iteration t draws from substream(seed, "rounding", t), so its outcome does
    not depend on the number of iterations requested.

    Args:
        inst: PDB instance
        config: Rounding parameters
        tolerances: Solver tolerances (feas_tol is the membership tolerance)

    Returns:
        PdbSolution; the zero solution with exhausted=True if no iterate was feasible
    """
    lp_solution = solve_lp_pdb(inst, tolerances)
    z_lp = lp_solution.objective
    probs = sampling_probabilities(inst, lp_solution.x)
    zetas = config.zetas(inst)
    iterations = config.iterations

    best: Optional[RoundingTrial] = None
    best_iteration = None
    for t in range(iterations):
        trial = rounding_trial(inst, probs, zetas, z_lp, substream(config.seed, ROUNDING, t),
                               tolerances.feas_tol)
        logger.debug(f"Rounding iteration {t}: objective {trial.objective:.6g}, "
                     f"feasible={trial.feasible}, threshold={trial.meets_threshold}")
        if trial.feasible and (best is None or trial.objective > best.objective):
            best, best_iteration = trial, t

    if best is None:
        logger.warning(f"No feasible iterate in {iterations} rounding iterations; returning zero solution")
        return PdbSolution(
            x=np.zeros(inst.n), y=np.zeros(inst.n), objective=0.0, near_integral=True,
            iterations_used=iterations, lp_relaxation_value=z_lp, zeta=zetas,
            exhausted=True, best_iteration=None,
            meets_threshold=0.0 >= z_lp / (2.0 * zetas[0] * zetas[1]) - THRESHOLD_SLACK,
            omega=lp_solution.x,
        )

    logger.info(f"Rounding: objective {best.objective:.6g} at iteration {best_iteration} "
                f"(LP value {z_lp:.6g}, threshold met: {best.meets_threshold})")
    return PdbSolution(
        x=best.x, y=best.y, objective=best.objective, near_integral=True,
        iterations_used=iterations, lp_relaxation_value=z_lp, zeta=zetas,
        exhausted=False, best_iteration=best_iteration,
        meets_threshold=best.meets_threshold, omega=lp_solution.x,
    )


def estimate_event_frequency(inst: PdbInstance, trials: int, seed: int,
                             zetas: Optional[Tuple[float, float]] = None,
                             tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> Dict[str, float]:
    """
    Monte-Carlo frequency of the rounding events over independent trials.

    Args:
        inst: PDB instance
        trials: Number of independent draws
        seed: Master seed (trial t uses the same substream as rounding iteration t)
        zetas: Shrink factors (defaults to zeta(m1), zeta(m2))

    Returns:
        Dictionary with per-event and joint frequencies
    """
    if trials < 1:
        raise ConfigError("trials must be at least 1")
    lp_solution = solve_lp_pdb(inst, tolerances)
    probs = sampling_probabilities(inst, lp_solution.x)
    zetas = zetas or (zeta(inst.m1), zeta(inst.m2))

    counts = np.zeros(4, dtype=int)
    for t in range(trials):
        trial = rounding_trial(inst, probs, zetas, lp_solution.objective,
                               substream(seed, ROUNDING, t), tolerances.feas_tol)
        counts += (trial.x_feasible, trial.y_feasible, trial.meets_threshold, trial.all_events)

    x_freq, y_freq, threshold_freq, joint_freq = (counts / trials).tolist()
    return {
        "trials": trials,
        "z_lp": lp_solution.objective,
        "x_feasible": x_freq,
        "y_feasible": y_freq,
        "threshold": threshold_freq,
        "all_events": joint_freq,
    }
