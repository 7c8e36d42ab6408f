#!/usr/bin/env python3
"""
Packing Bilinear Toolkit - Linear Programming Core

This module holds the dense LP model and the solver every other module uses:
1. LpProblem - immutable dense LP (objective, rows, relations, bounds, names)
2. solve_lp - two-phase bounded revised simplex returning primal and dual values
3. export_lp / parse_lp - LP text serialization for cross-checking
4. dual_objective - dual objective value including bound terms

The basis inverse is kept dense and refreshed every 100 pivots, with
product-form eta updates in between. Free and bounded columns are handled
directly, without splitting. Pricing is Devex by default (Dantzig's rule on
request); after 3*(rows+cols) consecutive degenerate pivots the phase switches
to Bland's rule. Solves are deterministic.

Author: Bilinear Toolkit
Date: October 2025
"""

import logging
import math
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from errors import (ConfigError, DimensionMismatch, InfeasibleModel,
                    NumericalBreakdown, UnboundedModel)

logger = logging.getLogger(__name__)

MAXIMIZE = "maximize"
MINIMIZE = "minimize"
LE = "<="
GE = ">="
EQ = "="

_RELATIONS = (LE, GE, EQ)
PRICING_RULES = ("devex", "dantzig")


class LpStatus(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"


@dataclass(frozen=True)
class SolverTolerances:
    """Numerical tolerances of the simplex and of the downstream feasibility checks."""

    feas_tol: float = 1e-7
    opt_tol: float = 1e-7
    pivot_tol: float = 1e-10
    comp_tol: float = 1e-6
    max_iterations: int = 200000
    pricing: str = "devex"

    def __post_init__(self):
        for name in ("feas_tol", "opt_tol", "pivot_tol", "comp_tol"):
            value = getattr(self, name)
            if not (value > 0 and math.isfinite(value)):
                raise ConfigError(f"Tolerance {name} must be positive and finite, got {value}")
        if self.max_iterations < 1:
            raise ConfigError("max_iterations must be at least 1")
        if self.pricing not in PRICING_RULES:
            raise ConfigError(f"Unknown pricing rule {self.pricing!r}, expected one of {PRICING_RULES}")

    @classmethod
    def from_config(cls, config: Optional[Dict[str, Any]]) -> "SolverTolerances":
        """
        Build tolerances from the ``solver`` section of a configuration dictionary.

        Args:
            config: Configuration dictionary loaded from config.yaml (may be None)

        Returns:
            SolverTolerances with defaults for missing keys
        """
        section = (config or {}).get("solver", {}) or {}
        known = {k: section[k] for k in ("feas_tol", "opt_tol", "pivot_tol", "comp_tol", "max_iterations")
                 if section.get(k) is not None}
        if "max_iterations" in known:
            known["max_iterations"] = int(known["max_iterations"])
        for k in ("feas_tol", "opt_tol", "pivot_tol", "comp_tol"):
            if k in known:
                known[k] = float(known[k])
        if section.get("pricing") is not None:
            known["pricing"] = str(section["pricing"]).lower()
        return cls(**known)


DEFAULT_TOLERANCES = SolverTolerances()


def _frozen(array: np.ndarray) -> np.ndarray:
    array = np.array(array, dtype=float, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class LpProblem:
    """
    Dense linear program ``opt c^T x  s.t.  a_i^T x (<=|>=|=) b_i,  l <= x <= u``.

    Arrays are copied and made read-only on construction, so a problem can be
    shared between concurrent solves.
    """

    sense: str
    objective: np.ndarray
    matrix: np.ndarray
    relations: Tuple[str, ...]
    rhs: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None
    var_names: Optional[Tuple[str, ...]] = None
    row_names: Optional[Tuple[str, ...]] = None
    name: str = "lp"

    def __post_init__(self):
        if self.sense not in (MAXIMIZE, MINIMIZE):
            raise ConfigError(f"Unknown sense {self.sense!r}")

        objective = np.asarray(self.objective, dtype=float).ravel()
        ncols = objective.size
        matrix = np.asarray(self.matrix, dtype=float)
        if matrix.size == 0:
            matrix = matrix.reshape(0, ncols)
        if matrix.ndim != 2 or matrix.shape[1] != ncols:
            raise DimensionMismatch(
                f"Constraint matrix shape {matrix.shape} does not match {ncols} objective coefficients")
        nrows = matrix.shape[0]

        rhs = np.asarray(self.rhs, dtype=float).ravel()
        if rhs.size != nrows:
            raise DimensionMismatch(f"rhs has {rhs.size} entries for {nrows} rows")
        relations = tuple(self.relations)
        if len(relations) != nrows:
            raise DimensionMismatch(f"{len(relations)} relations for {nrows} rows")
        bad = [r for r in relations if r not in _RELATIONS]
        if bad:
            raise ConfigError(f"Unknown row relation(s): {bad}")

        lower = np.zeros(ncols) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        upper = np.full(ncols, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if lower.size != ncols or upper.size != ncols:
            raise DimensionMismatch("Bound vectors must have one entry per column")
        if np.any(lower > upper):
            raise ConfigError("Every lower bound must be <= its upper bound")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ConfigError("Lower bounds cannot be +inf and upper bounds cannot be -inf")

        for label, arr in (("objective", objective), ("matrix", matrix), ("rhs", rhs)):
            if not np.all(np.isfinite(arr)):
                raise ConfigError(f"LP {label} contains non-finite values")

        var_names = tuple(self.var_names) if self.var_names is not None else tuple(f"x{j}" for j in range(ncols))
        row_names = tuple(self.row_names) if self.row_names is not None else tuple(f"r{i}" for i in range(nrows))
        if len(var_names) != ncols or len(row_names) != nrows:
            raise DimensionMismatch("Name labels must match the column and row counts")

        object.__setattr__(self, "objective", _frozen(objective))
        object.__setattr__(self, "matrix", _frozen(matrix))
        object.__setattr__(self, "rhs", _frozen(rhs))
        object.__setattr__(self, "lower", _frozen(lower))
        object.__setattr__(self, "upper", _frozen(upper))
        object.__setattr__(self, "relations", relations)
        object.__setattr__(self, "var_names", var_names)
        object.__setattr__(self, "row_names", row_names)

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_cols(self) -> int:
        return self.matrix.shape[1]

    def row_activity(self, x: np.ndarray) -> np.ndarray:
        return self.matrix @ np.asarray(x, dtype=float)

    def max_violation(self, x: np.ndarray) -> float:
        """Largest violation of any row or bound at x (0 when feasible)."""
        x = np.asarray(x, dtype=float)
        if x.size != self.num_cols:
            raise DimensionMismatch(f"Point has {x.size} entries, LP has {self.num_cols} columns")
        worst = 0.0
        if self.num_rows:
            slack = self.rhs - self.row_activity(x)
            rel = np.array(self.relations)
            le = np.where(rel == LE, -slack, 0.0)
            ge = np.where(rel == GE, slack, 0.0)
            eq = np.where(rel == EQ, np.abs(slack), 0.0)
            worst = max(worst, float(np.max(np.maximum(np.maximum(le, ge), eq))))
        worst = max(worst, float(np.max(self.lower - x, initial=0.0)))
        worst = max(worst, float(np.max(x - self.upper, initial=0.0)))
        return worst


@dataclass
class LpSolution:
    """Result of solve_lp. Duals are shadow prices d(objective)/d(rhs), one per row."""

    status: LpStatus
    x: np.ndarray
    duals: np.ndarray
    objective: float
    iterations: int
    phase_one_iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == LpStatus.OPTIMAL


def require_optimal(solution: LpSolution, what: str = "LP") -> LpSolution:
    """Raise InfeasibleModel/UnboundedModel unless the solve is Optimal."""
    if solution.status == LpStatus.INFEASIBLE:
        raise InfeasibleModel(f"{what} is infeasible")
    if solution.status == LpStatus.UNBOUNDED:
        raise UnboundedModel(f"{what} is unbounded")
    return solution


_BASIC = 0
_AT_LOWER = 1
_AT_UPPER = 2
_FREE = 3

_REFACTOR_EVERY = 100
_DEVEX_RESET = 1e8


class _BasisFactor:
    """
    Dense inverse of the basis at the last refactorization plus product-form
    eta updates, one per pivot since then.
    """

    def __init__(self, matrix: np.ndarray):
        self.matrix = matrix
        self.base_inverse = np.zeros((0, 0))
        self.etas: List[Tuple[int, np.ndarray]] = []

    def refactor(self, basis: np.ndarray) -> None:
        if basis.size == 0:
            self.base_inverse = np.zeros((0, 0))
        else:
            try:
                self.base_inverse = np.linalg.inv(self.matrix[:, basis])
            except np.linalg.LinAlgError as exc:
                raise NumericalBreakdown("Basis matrix is singular at refactorization") from exc
        self.etas = []

    @property
    def stale(self) -> bool:
        return len(self.etas) >= _REFACTOR_EVERY

    def ftran(self, vector: np.ndarray) -> np.ndarray:
        """B^-1 v."""
        x = self.base_inverse @ vector
        for row, eta in self.etas:
            pivot_value = x[row]
            if pivot_value != 0.0:
                x += pivot_value * eta
        return x

    def ftran_column(self, column: np.ndarray) -> np.ndarray:
        nz = np.flatnonzero(column)
        x = self.base_inverse[:, nz] @ column[nz]
        for row, eta in self.etas:
            pivot_value = x[row]
            if pivot_value != 0.0:
                x += pivot_value * eta
        return x

    def btran(self, vector: np.ndarray) -> np.ndarray:
        """v^T B^-1."""
        u = np.array(vector, dtype=float)
        for row, eta in reversed(self.etas):
            u[row] += eta @ u
        return u @ self.base_inverse

    def update(self, row: int, alpha: np.ndarray) -> None:
        eta = -alpha / alpha[row]
        eta[row] = 1.0 / alpha[row] - 1.0
        self.etas.append((row, eta))


@dataclass
class _StandardForm:
    """
    ``min costs^T v  s.t.  matrix v = rhs,  lower <= v <= upper`` over the
    original columns, one slack per inequality row and the artificial columns.
    The starting basis holds a slack where its value is nonnegative and an
    artificial elsewhere.
    """

    matrix: np.ndarray
    rhs: np.ndarray
    costs: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    basis: np.ndarray
    values: np.ndarray
    artificial: np.ndarray
    structural: int
    _rows: np.ndarray = field(init=False, repr=False)
    _cols: np.ndarray = field(init=False, repr=False)
    _vals: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        self._rows, self._cols = np.nonzero(self.matrix)
        self._vals = self.matrix[self._rows, self._cols]

    @property
    def num_rows(self) -> int:
        return self.matrix.shape[0]

    @property
    def num_cols(self) -> int:
        return self.matrix.shape[1]

    def row_times(self, u: np.ndarray) -> np.ndarray:
        """u^T matrix, summed over the stored nonzeros."""
        return np.bincount(self._cols, weights=u[self._rows] * self._vals, minlength=self.num_cols)


def _standard_form(problem: LpProblem) -> _StandardForm:
    nrows, ncols = problem.num_rows, problem.num_cols
    lower, upper = problem.lower, problem.upper
    start = np.where(np.isfinite(lower), lower, np.where(np.isfinite(upper), upper, 0.0))
    residual = problem.rhs - problem.matrix @ start

    slack_rows = [i for i, rel in enumerate(problem.relations) if rel != EQ]
    nslack = len(slack_rows)
    slack_block = np.zeros((nrows, nslack))
    slack_values = np.zeros(nslack)
    basis = np.full(nrows, -1, dtype=int)
    for k, i in enumerate(slack_rows):
        coef = 1.0 if problem.relations[i] == LE else -1.0
        slack_block[i, k] = coef
        if residual[i] * coef >= 0.0:
            basis[i] = ncols + k
            slack_values[k] = residual[i] * coef

    art_rows = np.flatnonzero(basis < 0)
    nart = art_rows.size
    art_block = np.zeros((nrows, nart))
    art_block[art_rows, np.arange(nart)] = np.where(residual[art_rows] < 0.0, -1.0, 1.0)
    artificial = ncols + nslack + np.arange(nart)
    basis[art_rows] = artificial

    sign = -1.0 if problem.sense == MAXIMIZE else 1.0
    extra = nslack + nart
    return _StandardForm(
        matrix=np.hstack([problem.matrix, slack_block, art_block]),
        rhs=problem.rhs.copy(),
        costs=np.concatenate([sign * problem.objective, np.zeros(extra)]),
        lower=np.concatenate([lower, np.zeros(extra)]),
        upper=np.concatenate([upper, np.full(extra, np.inf)]),
        basis=basis,
        values=np.concatenate([start, slack_values, np.abs(residual[art_rows])]),
        artificial=artificial,
        structural=ncols,
    )


class _RevisedSimplex:
    """
    Bounded primal revised simplex over a _StandardForm.

    Nonbasic columns sit at a finite bound, or at zero when free. Reduced costs
    are updated from the pivot row and recomputed at every refactorization and
    before optimality is declared.
    """

    def __init__(self, form: _StandardForm, tolerances: SolverTolerances):
        self.form = form
        self.tol = tolerances
        self.lower = form.lower.copy()
        self.upper = form.upper.copy()
        self.x = form.values.copy()
        self.basis = form.basis.copy()
        self.state = np.where(np.isfinite(self.lower), _AT_LOWER,
                              np.where(np.isfinite(self.upper), _AT_UPPER, _FREE))
        self.state[self.basis] = _BASIC
        self.factor = _BasisFactor(form.matrix)
        self.weights = np.ones(form.num_cols)
        self.iterations = 0

    def fix_artificials(self) -> None:
        """Pin every artificial column to zero; basic ones leave at the first blocking pivot."""
        art = self.form.artificial
        self.upper[art] = 0.0
        nonbasic = art[self.state[art] != _BASIC]
        self.x[nonbasic] = 0.0
        self.state[nonbasic] = _AT_LOWER

    def artificial_sum(self) -> float:
        return float(self.x[self.form.artificial].sum())

    def duals(self, costs: np.ndarray) -> np.ndarray:
        return self.factor.btran(costs[self.basis])

    def _recompute(self, costs: np.ndarray) -> np.ndarray:
        self.factor.refactor(self.basis)
        nonbasic = self.x.copy()
        nonbasic[self.basis] = 0.0
        self.x[self.basis] = self.factor.ftran(self.form.rhs - self.form.matrix @ nonbasic)
        reduced = costs - self.form.row_times(self.duals(costs))
        reduced[self.basis] = 0.0
        return reduced

    def _eligible(self, reduced: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        movable = self.upper > self.lower
        up = ((self.state == _AT_LOWER) | (self.state == _FREE)) & (reduced < -self.tol.opt_tol) & movable
        down = ((self.state == _AT_UPPER) | (self.state == _FREE)) & (reduced > self.tol.opt_tol) & movable
        return up, down

    def _entering(self, reduced: np.ndarray, candidates: np.ndarray, bland: bool) -> int:
        if bland:
            return int(candidates[0])
        if self.tol.pricing == "devex":
            scores = reduced[candidates] ** 2 / self.weights[candidates]
        else:
            scores = np.abs(reduced[candidates])
        return int(candidates[np.argmax(scores)])

    def _blocking(self, move: np.ndarray) -> np.ndarray:
        """Step length at which each basic variable reaches a bound (inf when it never does)."""
        xb = self.x[self.basis]
        lo, hi = self.lower[self.basis], self.upper[self.basis]
        limits = np.full(move.size, np.inf)
        dec = (move > self.tol.pivot_tol) & np.isfinite(lo)
        limits[dec] = np.maximum(xb[dec] - lo[dec], 0.0) / move[dec]
        inc = (move < -self.tol.pivot_tol) & np.isfinite(hi)
        limits[inc] = np.maximum(hi[inc] - xb[inc], 0.0) / -move[inc]
        return limits

    def _tiny_pivots(self, move: np.ndarray) -> bool:
        lo, hi = self.lower[self.basis], self.upper[self.basis]
        small = (np.abs(move) > 0.0) & (np.abs(move) <= self.tol.pivot_tol)
        return bool(np.any(small & (((move > 0) & np.isfinite(lo)) | ((move < 0) & np.isfinite(hi)))))

    def optimize(self, costs: np.ndarray, phase: int) -> str:
        """
        Run primal simplex iterations for the given column costs.

        Returns:
            'optimal' or 'unbounded'
        """
        nrows, ncols = self.form.num_rows, self.form.num_cols
        reduced = self._recompute(costs)
        fresh = True
        phase_start = self.iterations
        degenerate_limit = 3 * (nrows + ncols)
        degenerate_run = 0
        bland = False

        while True:
            up, down = self._eligible(reduced)
            candidates = np.flatnonzero(up | down)
            if candidates.size == 0:
                if fresh:
                    return "optimal"
                reduced, fresh = self._recompute(costs), True
                continue
            if self.iterations - phase_start >= self.tol.max_iterations:
                raise NumericalBreakdown(f"Iteration limit {self.tol.max_iterations} reached in phase {phase}")

            q = self._entering(reduced, candidates, bland)
            direction = 1.0 if up[q] else -1.0
            alpha = self.factor.ftran_column(self.form.matrix[:, q])
            move = direction * alpha
            limits = self._blocking(move)
            best = float(limits.min()) if nrows else math.inf
            flip = self.upper[q] - self.lower[q]

            if best == math.inf and flip == math.inf:
                if not fresh:
                    reduced, fresh = self._recompute(costs), True
                    continue
                if self._tiny_pivots(move):
                    if bland:
                        raise NumericalBreakdown(
                            f"Pivot magnitude below {self.tol.pivot_tol} in column {q} (phase {phase})")
                    logger.debug(f"Phase {phase}: tiny pivots in column {q}, switching to Bland's rule")
                    bland = True
                    continue
                return "unbounded"

            self.iterations += 1
            if flip <= best:
                # bound flip, the basis is unchanged
                self.x[self.basis] -= flip * move
                if direction > 0:
                    self.x[q], self.state[q] = self.upper[q], _AT_UPPER
                else:
                    self.x[q], self.state[q] = self.lower[q], _AT_LOWER
                fresh = False
                degenerate_run = 0
                continue

            ties = np.flatnonzero(limits <= best + 1e-12 * (1.0 + best))
            if bland:
                row = int(ties[np.argmin(self.basis[ties])])
            else:
                row = int(ties[np.argmax(np.abs(alpha[ties]))])
            step = float(limits[row])
            leaving = int(self.basis[row])
            pivot_value = alpha[row]

            pivot_row = self.form.row_times(self.factor.btran(np.eye(1, nrows, row).ravel()))
            ratio = reduced[q] / pivot_value
            reduced = reduced - ratio * pivot_row

            weight_q = self.weights[q]
            self.weights = np.maximum(self.weights, (pivot_row / pivot_value) ** 2 * weight_q)
            self.weights[leaving] = max(weight_q / pivot_value ** 2, 1.0)
            if self.weights.max() > _DEVEX_RESET:
                self.weights[:] = 1.0

            self.x[self.basis] -= step * move
            self.x[q] += direction * step
            if move[row] > 0:
                self.x[leaving], self.state[leaving] = self.lower[leaving], _AT_LOWER
            else:
                self.x[leaving], self.state[leaving] = self.upper[leaving], _AT_UPPER
            self.basis[row] = q
            self.state[q] = _BASIC
            reduced[self.basis] = 0.0
            reduced[leaving] = -ratio
            self.factor.update(row, alpha)

            if self.factor.stale:
                reduced, fresh = self._recompute(costs), True
            else:
                fresh = False

            if step <= self.tol.feas_tol:
                degenerate_run += 1
                if not bland and degenerate_run >= degenerate_limit:
                    logger.debug(f"Phase {phase}: {degenerate_run} degenerate pivots, switching to Bland's rule")
                    bland = True
            else:
                degenerate_run = 0


def solve_lp(problem: LpProblem, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> LpSolution:
    """
    Solve an LP with the two-phase bounded revised simplex.

    Args:
        problem: Well-formed LpProblem
        tolerances: Solver tolerances

    Returns:
        LpSolution with primal values, one dual per row, objective and iteration count

    Raises:
        NumericalBreakdown: Pivot below pivot_tol under Bland's rule, singular basis, or iteration limit
    """
    form = _standard_form(problem)
    simplex = _RevisedSimplex(form, tolerances)
    sign = -1.0 if problem.sense == MAXIMIZE else 1.0

    if form.artificial.size:
        if simplex.artificial_sum() > 0.0:
            phase_costs = np.zeros(form.num_cols)
            phase_costs[form.artificial] = 1.0
            if simplex.optimize(phase_costs, phase=1) == "unbounded":
                raise NumericalBreakdown(f"{problem.name}: phase 1 reported an unbounded ray")
        infeasibility = simplex.artificial_sum()
        scale = 1.0 + float(np.max(np.abs(form.rhs), initial=0.0))
        if infeasibility > tolerances.feas_tol * scale:
            logger.debug(f"{problem.name}: phase 1 ended with infeasibility {infeasibility:.3e}")
            return LpSolution(LpStatus.INFEASIBLE, np.full(problem.num_cols, np.nan),
                              np.zeros(problem.num_rows), math.nan, simplex.iterations, simplex.iterations)
        simplex.fix_artificials()
    phase_one = simplex.iterations

    outcome = simplex.optimize(form.costs, phase=2)
    x = simplex.x[:form.structural].copy()

    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, x, np.zeros(problem.num_rows),
                          math.inf if problem.sense == MAXIMIZE else -math.inf,
                          simplex.iterations, phase_one)

    duals = sign * simplex.duals(form.costs)
    objective = float(problem.objective @ x)
    logger.debug(f"{problem.name}: optimal {objective:.10g} after {simplex.iterations} pivots "
                 f"({phase_one} in phase 1)")
    return LpSolution(LpStatus.OPTIMAL, x, duals, objective, simplex.iterations, phase_one)


def dual_objective(problem: LpProblem, solution: LpSolution, tolerances: SolverTolerances = DEFAULT_TOLERANCES) -> float:
    """
    Dual objective value b^T y plus the bound terms of the reduced costs.

    Args:
        problem: The solved problem
        solution: An Optimal solution of it

    Returns:
        Dual objective (equals the primal objective at optimality within opt_tol)
    """
    y = solution.duals
    reduced = problem.objective - problem.matrix.T @ y if problem.num_rows else problem.objective.copy()
    total = float(problem.rhs @ y)
    for j, r in enumerate(reduced):
        if abs(r) <= tolerances.comp_tol:
            continue
        at_lower = r < 0 if problem.sense == MAXIMIZE else r > 0
        bound = problem.lower[j] if at_lower else problem.upper[j]
        if not math.isfinite(bound):
            return math.inf if problem.sense == MAXIMIZE else -math.inf
        total += r * bound
    return total


def _format_number(value: float) -> str:
    if value == math.inf:
        return "+inf"
    if value == -math.inf:
        return "-inf"
    return "%.17g" % value


_NAME_RE = re.compile(r"[^A-Za-z0-9_.,()!\"#$%&/;?@`'{}|~]")
_BRACKETS = str.maketrans("[]", "()")


def _safe_name(name: str) -> str:
    # square brackets open a quadratic section in LP files
    cleaned = _NAME_RE.sub("_", str(name).translate(_BRACKETS))
    if not cleaned or cleaned[0].isdigit() or cleaned[0] == "." or re.match(r"[eE](\d|$)", cleaned):
        cleaned = "v_" + cleaned
    return cleaned


def _format_terms(coefs: np.ndarray, names: Sequence[str]) -> str:
    parts = []
    for coef, name in zip(coefs, names):
        if coef == 0.0:
            continue
        sign = "-" if coef < 0 else "+"
        parts.append(f"{sign} {_format_number(abs(coef))} {name}")
    if not parts:
        parts.append(f"+ 0 {names[0]}")
    return " ".join(parts)


def export_lp(problem: LpProblem) -> str:
    """
    Serialize a problem as LP text (objective, constraints, bounds, names).

    Args:
        problem: Well-formed LpProblem

    Returns:
        LP text readable by parse_lp and by external LP-format readers
    """
    names = [_safe_name(n) for n in problem.var_names]
    rows = [_safe_name(n) for n in problem.row_names]
    lines = [f"\\ Problem: {problem.name}",
             "Maximize" if problem.sense == MAXIMIZE else "Minimize"]
    if problem.num_cols:
        lines.append(f" obj: {_format_terms(problem.objective, names)}")
    lines.append("Subject To")
    for i in range(problem.num_rows):
        lines.append(f" {rows[i]}: {_format_terms(problem.matrix[i], names)} "
                     f"{problem.relations[i]} {_format_number(problem.rhs[i])}")
    lines.append("Bounds")
    for j, name in enumerate(names):
        lo, hi = problem.lower[j], problem.upper[j]
        if lo == -math.inf and hi == math.inf:
            lines.append(f" {name} free")
        else:
            lines.append(f" {_format_number(lo)} <= {name} <= {_format_number(hi)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


_TERM_RE = re.compile(r"([+-])\s+(\S+)\s+(\S+)")


def _parse_number(token: str) -> float:
    lowered = token.lower()
    if lowered in ("+inf", "inf", "+infinity", "infinity"):
        return math.inf
    if lowered in ("-inf", "-infinity"):
        return -math.inf
    return float(token)


def parse_lp(text: str) -> LpProblem:
    """
    Parse LP text written by export_lp back into an LpProblem.

    Args:
        text: LP text

    Returns:
        Equivalent LpProblem
    """
    sense = None
    name = "lp"
    section = None
    objective_terms: Dict[str, float] = {}
    rows: List[Tuple[str, Dict[str, float], str, float]] = []
    bounds: Dict[str, Tuple[float, float]] = {}
    order: List[str] = []

    def remember(var: str) -> None:
        if var not in order:
            order.append(var)

    def parse_terms(expr: str) -> Dict[str, float]:
        terms: Dict[str, float] = {}
        for sign, coef, var in _TERM_RE.findall(expr):
            value = float(coef) * (-1.0 if sign == "-" else 1.0)
            terms[var] = terms.get(var, 0.0) + value
            remember(var)
        return terms

    for raw in text.splitlines():
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            match = re.match(r"\\\s*Problem:\s*(.+)", line)
            if match:
                name = match.group(1).strip()
            continue
        lowered = line.lower()
        if lowered in ("maximize", "minimize"):
            sense = MAXIMIZE if lowered == "maximize" else MINIMIZE
            section = "objective"
            continue
        if lowered == "subject to":
            section = "rows"
            continue
        if lowered == "bounds":
            section = "bounds"
            continue
        if lowered == "end":
            break

        if section == "objective":
            objective_terms = parse_terms(line.split(":", 1)[1])
        elif section == "rows":
            label, body = line.split(":", 1)
            match = re.match(r"(.*)\s(<=|>=|=)\s+(\S+)$", body)
            if not match:
                raise ConfigError(f"Cannot parse constraint line: {line}")
            rows.append((label.strip(), parse_terms(match.group(1)), match.group(2),
                         _parse_number(match.group(3))))
        elif section == "bounds":
            parts = line.split()
            if len(parts) == 2 and parts[1].lower() == "free":
                remember(parts[0])
                bounds[parts[0]] = (-math.inf, math.inf)
            elif len(parts) == 5 and parts[1] == "<=" and parts[3] == "<=":
                remember(parts[2])
                bounds[parts[2]] = (_parse_number(parts[0]), _parse_number(parts[4]))
            else:
                raise ConfigError(f"Cannot parse bound line: {line}")

    if sense is None:
        raise ConfigError("LP text has no Maximize/Minimize section")

    # Column order follows the Bounds section, which lists every variable
    order = list(bounds) + [v for v in order if v not in bounds]
    index = {v: j for j, v in enumerate(order)}
    matrix = np.zeros((len(rows), len(order)))
    for i, (_, terms, _, _) in enumerate(rows):
        for var, coef in terms.items():
            matrix[i, index[var]] = coef
    objective = np.zeros(len(order))
    for var, coef in objective_terms.items():
        objective[index[var]] = coef
    lower = np.array([bounds.get(v, (0.0, math.inf))[0] for v in order])
    upper = np.array([bounds.get(v, (0.0, math.inf))[1] for v in order])

    return LpProblem(sense=sense, objective=objective, matrix=matrix,
                     relations=tuple(r[2] for r in rows), rhs=np.array([r[3] for r in rows]),
                     lower=lower, upper=upper, var_names=tuple(order),
                     row_names=tuple(r[0] for r in rows), name=name)
