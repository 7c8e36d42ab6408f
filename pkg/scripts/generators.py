#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Instance Generators

Seeded instance families:
1. generate_ar_instance - A = B = I + G, c = d = e, budget-of-uncertainty set
   {h in [0,1]^m : w_l^T h <= 1} with |Gaussian| unit-norm weight vectors
2. generate_pdb_instance - random packing pairs with uniform data
3. generate_small_ar_instance - desk-scale robust instances for exact-oracle checks

All draws come from named substreams of the master seed, so the same
(arguments, seed) always produce the same instance.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
from typing import Optional, Tuple

import numpy as np

from ar_solver import ArInstance
from errors import ConfigError, GeneratorExhausted
from lp_core import DEFAULT_TOLERANCES, SolverTolerances
from pdb_solver import PdbInstance
from polytope import PackingPolytope, coordinate_maxima
from seeding import check_seed, substream

logger = logging.getLogger(__name__)

DEFAULT_MAX_RESAMPLES = 32
ZERO_COLUMN_PATCH = 1e-3


def _check_dims(**dims: int) -> None:
    for name, value in dims.items():
        if value is None or int(value) < 1:
            raise ConfigError(f"{name} must be a positive integer, got {value}")


def budget_weights(rng: np.random.Generator, L: int, m: int) -> np.ndarray:
    """L rows |g| / ||g|| with g standard Gaussian in R^m."""
    g = np.abs(rng.standard_normal((L, m)))
    norms = np.linalg.norm(g, axis=1, keepdims=True)
    return g / np.where(norms > 0, norms, 1.0)


def budget_uncertainty_set(weights: np.ndarray, budget_rhs: Optional[np.ndarray] = None) -> PackingPolytope:
    """{h >= 0 : h <= 1, W h <= budget_rhs}; box rows come first."""
    L, m = weights.shape
    rhs = np.ones(L) if budget_rhs is None else np.asarray(budget_rhs, dtype=float)
    return PackingPolytope(np.vstack([np.eye(m), weights]), np.concatenate([np.ones(m), rhs]), name="U")


def _dual_bounded(B: np.ndarray, d: np.ndarray, tolerances: SolverTolerances) -> bool:
    dual = PackingPolytope(B.T, d, allow_negative=True, name="dual_feasible")
    return coordinate_maxima(dual, tolerances).all_finite


def generate_ar_instance(n: int, L: int, seed: int, g_scale: Optional[float] = None,
                         max_resamples: int = DEFAULT_MAX_RESAMPLES,
                         tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> ArInstance:
    """
    Draw one instance of the Gaussian-perturbed identity family (m = n).

    Args:
        n: Dimension (m = n)
        L: Number of budget rows
        seed: Master seed
        g_scale: Scale of G entries (default 1/sqrt(m))
        max_resamples: Redraws of G allowed while theta is unbounded

    Returns:
        ArInstance with R = [I_m; W], r = e, first stage in the nonnegative orthant

    Raises:
        GeneratorExhausted: theta stayed unbounded after max_resamples redraws
    """
    _check_dims(n=n, L=L)
    seed = check_seed(seed)
    m = n
    scale = 1.0 / math.sqrt(m) if g_scale is None else float(g_scale)
    if not (scale >= 0 and math.isfinite(scale)):
        raise ConfigError(f"g_scale must be finite and nonnegative, got {g_scale}")

    ones = np.ones(m)
    weights = budget_weights(substream(seed, "instance.weights", n, L), L, m)
    uncertainty = budget_uncertainty_set(weights)

    for attempt in range(max_resamples + 1):
        G = substream(seed, "instance.g", n, attempt).standard_normal((m, m)) * scale
        B = np.eye(m) + G
        if _dual_bounded(B, ones, tolerances):
            if attempt:
                logger.warning(f"AR instance n={n}, L={L}, seed={seed}: resampled G {attempt} time(s)")
            return ArInstance(
                A=B.copy(), B=B, c=ones.copy(), d=ones.copy(), uncertainty=uncertainty,
                metadata={"family": "gaussian_identity", "n": n, "L": L, "seed": seed,
                          "g_scale": scale, "resamples": attempt},
            )
        logger.debug(f"Seed {seed}: theta unbounded on draw {attempt}, resampling G")

    raise GeneratorExhausted(
        f"No draw with finite theta after {max_resamples} resamples (n={n}, L={L}, seed={seed})")


def _patch_zero_columns(matrix: np.ndarray, rng: np.random.Generator) -> Tuple[np.ndarray, list]:
    patched = []
    for j in np.flatnonzero(matrix.sum(axis=0) <= 0):
        row = int(rng.integers(matrix.shape[0]))
        matrix[row, j] += ZERO_COLUMN_PATCH
        patched.append((row, int(j)))
    return matrix, patched


def generate_pdb_instance(n: int, m1: int, m2: int, seed: int) -> PdbInstance:
    """
    Random packing pair: P, Q ~ U[0,1], p, q ~ U[1,2].

    Columns with zero sum get 1e-3 added to one random entry so every theta_i and
    gamma_i is finite; the patched (row, column) pairs are recorded in metadata.
    """
    _check_dims(n=n, m1=m1, m2=m2)
    seed = check_seed(seed)
    rng = substream(seed, "instance.pdb", n, m1, m2)
    P = rng.random((m1, n))
    p = 1.0 + rng.random(m1)
    Q = rng.random((m2, n))
    q = 1.0 + rng.random(m2)
    P, patched_p = _patch_zero_columns(P, rng)
    Q, patched_q = _patch_zero_columns(Q, rng)
    if patched_p or patched_q:
        logger.warning(f"PDB instance seed={seed}: patched zero columns P{patched_p} Q{patched_q}")
    return PdbInstance(
        X=PackingPolytope(P, p, name="X"), Y=PackingPolytope(Q, q, name="Y"),
        metadata={"family": "uniform_packing", "n": n, "m1": m1, "m2": m2, "seed": seed,
                  "patched_P": patched_p, "patched_Q": patched_q},
    )


def generate_small_ar_instance(n: int, L: int, seed: int, m: Optional[int] = None,
                               nonnegative_b: bool = True, zero_a: bool = False,
                               max_resamples: int = DEFAULT_MAX_RESAMPLES,
                               tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> ArInstance:
    """
    Desk-scale robust instance for the exact-oracle checks.

    A is Gaussian (or zero), B ~ U[0.1, 1] (or I + G/sqrt(m) when signed),
    c, d ~ U[0.5, 1.5], U = {h in [0,1]^m : W h <= b} with b ~ U[0.5, 2].

    Args:
        n: First-stage dimension
        L: Number of budget rows
        seed: Master seed
        m: Number of covering rows (default n)
        nonnegative_b: Draw B with positive entries
        zero_a: Use A = 0

    Returns:
        ArInstance
    """
    m = n if m is None else m
    _check_dims(n=n, L=L, m=m)
    seed = check_seed(seed)
    rng = substream(seed, "instance.small", n, m, L)
    A = np.zeros((m, n)) if zero_a else rng.standard_normal((m, n))
    c = rng.uniform(0.5, 1.5, n)
    d = rng.uniform(0.5, 1.5, n)
    uncertainty = budget_uncertainty_set(budget_weights(rng, L, m), rng.uniform(0.5, 2.0, L))

    resamples = 0
    if nonnegative_b:
        B = rng.uniform(0.1, 1.0, (m, n))
    else:
        for resamples in range(max_resamples + 1):
            B = np.eye(m, n) + substream(seed, "instance.small.b", n, m, resamples).standard_normal((m, n)) / math.sqrt(m)
            if _dual_bounded(B, d, tolerances):
                break
        else:
            raise GeneratorExhausted(f"No signed B with finite theta after {max_resamples} resamples")

    return ArInstance(
        A=A, B=B, c=c, d=d, uncertainty=uncertainty,
        metadata={"family": "small", "n": n, "m": m, "L": L, "seed": seed,
                  "nonnegative_b": nonnegative_b, "zero_a": zero_a, "resamples": resamples},
    )
