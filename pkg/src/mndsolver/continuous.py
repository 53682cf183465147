"""Two-player game with a nonconvex power constraint on the unit square.

Player 1 minimizes ``-2 y1 x2`` and player 2 minimizes ``x1 y2``, both
subject to ``y1**r + y2**r <= 1`` with ``r`` in (0, 1). All subproblems
are two-dimensional, so they are solved globally by grid search with
local refinement.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple, Sequence

import numpy as np

from .cutting_plane import SolveReport, SolverConfig, initialize_cuts_joint, solve_mnd
from .game import GameInfeasibleError, GameInstance, LowerBoundingResult, LowerLevelResult

FEAS_TOL = 1e-9
REFINE_ROUNDS = 2
REFINE_FACTOR = 4

Evaluator = Callable[[np.ndarray, np.ndarray], np.ndarray]


class GridResult(NamedTuple):
    point: np.ndarray
    value: float
    w: float


def _grid_argmin(vals: np.ndarray) -> int | None:
    k = int(np.argmin(vals))
    return None if not np.isfinite(vals.flat[k]) else k


def global_solve_2d(
    objective: Evaluator,
    constraint: Evaluator,
    cuts: Sequence[np.ndarray] = (),
    cut_rhs: Callable[[np.ndarray, np.ndarray, np.ndarray], np.ndarray] | None = None,
    resolution: int = 1024,
) -> GridResult:
    """Global minimization over ``{y in [0,1]^2 : constraint(y) <= 0}``.

    The coarse pass evaluates every point of the uniform grid with spacing
    ``1/resolution`` (ties go to the lowest flat index, first coordinate
    major). Two refinement rounds then rescan a ``+-h`` box around the
    incumbent at spacing ``h/4``, replacing it only on strict improvement.
    For an objective with Lipschitz constant ``L`` the value error after a
    round is at most ``L * sqrt(2) * h``.

    With ``cuts``, the objective becomes ``objective(y) - w(y)`` where
    ``w(y) = min_c cut_rhs(y1, y2, c)``; this eliminates the epigraph
    variable of a cut relaxation analytically.
    """
    if resolution < 64:
        raise ValueError("resolution must be at least 64")
    cuts = [np.asarray(c, dtype=float) for c in cuts]
    if cuts and cut_rhs is None:
        raise ValueError("cut_rhs is required when cuts are given")

    def evaluate(Y1, Y2):
        w = np.full(Y1.shape, np.nan)
        val = np.asarray(objective(Y1, Y2), dtype=float)
        if cuts:
            w = np.min([cut_rhs(Y1, Y2, c) for c in cuts], axis=0)
            val = val - w
        feasible = np.asarray(constraint(Y1, Y2)) <= FEAS_TOL
        return np.where(feasible, val, np.inf), w

    t = np.linspace(0.0, 1.0, resolution + 1)
    Y1, Y2 = np.meshgrid(t, t, indexing="ij")
    vals, ws = evaluate(Y1, Y2)
    k = _grid_argmin(vals)
    if k is None:
        raise GameInfeasibleError("no feasible grid point")
    best = np.array([Y1.flat[k], Y2.flat[k]])
    best_val, best_w = float(vals.flat[k]), float(ws.flat[k])

    h = 1.0 / resolution
    for _ in range(REFINE_ROUNDS):
        fine = h / REFINE_FACTOR
        axes = [np.clip(best[i] + fine * np.arange(-REFINE_FACTOR, REFINE_FACTOR + 1), 0.0, 1.0) for i in range(2)]
        R1, R2 = np.meshgrid(np.unique(axes[0]), np.unique(axes[1]), indexing="ij")
        vals, ws = evaluate(R1, R2)
        k = _grid_argmin(vals)
        if k is not None and vals.flat[k] < best_val:
            best = np.array([R1.flat[k], R2.flat[k]])
            best_val, best_w = float(vals.flat[k]), float(ws.flat[k])
        h = fine
    return GridResult(best, best_val, best_w)


def _global_solve_1d(objective, constraint, resolution: int) -> tuple[float, float]:
    t = np.linspace(0.0, 1.0, resolution + 1)
    vals = np.where(constraint(t) <= FEAS_TOL, objective(t), np.inf)
    k = _grid_argmin(vals)
    if k is None:
        raise GameInfeasibleError("no feasible grid point")
    best, best_val = float(t[k]), float(vals[k])
    h = 1.0 / resolution
    for _ in range(REFINE_ROUNDS):
        fine = h / REFINE_FACTOR
        r = np.unique(np.clip(best + fine * np.arange(-REFINE_FACTOR, REFINE_FACTOR + 1), 0.0, 1.0))
        vals = np.where(constraint(r) <= FEAS_TOL, objective(r), np.inf)
        k = _grid_argmin(vals)
        if k is not None and vals[k] < best_val:
            best, best_val = float(r[k]), float(vals[k])
        h = fine
    return best, best_val


@dataclass(frozen=True, eq=False)
class PowerConstraintGame(GameInstance):
    r: float = 0.5
    resolution: int = 1024

    def __post_init__(self):
        if not 0.0 < self.r < 1.0:
            raise ValueError("exponent r must lie in (0, 1)")
        if self.resolution < 64:
            raise ValueError("resolution must be at least 64")

    dims = (1, 1)

    def constraint(self, y1, y2):
        y1 = np.clip(y1, 0.0, None)
        y2 = np.clip(y2, 0.0, None)
        return np.power(y1, self.r) + np.power(y2, self.r) - 1.0

    def player_objective(self, i, x, y_i):
        y_i = float(np.asarray(y_i).ravel()[0])
        if i == 0:
            return -2.0 * y_i * float(x[1])
        return float(x[0]) * y_i

    def contains(self, y):
        y = np.asarray(y, dtype=float)
        if np.any(y < -FEAS_TOL) or np.any(y > 1 + FEAS_TOL):
            return False
        return bool(self.constraint(y[0], y[1]) <= FEAS_TOL)

    def best_response(self, i, x):
        x = np.asarray(x, dtype=float)
        if i == 0:
            y, v = _global_solve_1d(lambda t: -2.0 * t * x[1], lambda t: self.constraint(t, x[1]), self.resolution)
        else:
            y, v = _global_solve_1d(lambda t: x[0] * t, lambda t: self.constraint(x[0], t), self.resolution)
        return np.array([y]), v

    @staticmethod
    def _cut_rhs(Y1, Y2, cut):
        # sum_i g_i(x, y'_i) with x = (Y1, Y2)
        return -2.0 * cut[0] * Y2 + Y1 * cut[1]

    def lower_bounding(self, cuts):
        res = global_solve_2d(lambda a, b: -a * b, self.constraint, cuts, self._cut_rhs, self.resolution)
        return LowerBoundingResult(res.point, res.w, res.value)

    def lower_level(self, x):
        x = np.asarray(x, dtype=float)
        res = global_solve_2d(lambda a, b: -2.0 * a * x[1] + x[0] * b, self.constraint, resolution=self.resolution)
        return LowerLevelResult(res.point, res.value)

    def joint_optimum(self):
        return global_solve_2d(lambda a, b: -a * b, self.constraint, resolution=self.resolution).point


def run_example_trace(config: SolverConfig | None = None, r: float = 0.5, resolution: int = 1024,
                      on_iteration=None) -> SolveReport:
    """Seed with the joint optimum and run the cutting-plane loop."""
    game = PowerConstraintGame(r=r, resolution=resolution)
    cuts = initialize_cuts_joint(game)
    return solve_mnd(game, cuts, config or SolverConfig(), on_iteration=on_iteration)


def format_trace(report: SolveReport, seed_point) -> str:
    """Human-readable transcript numbered like the algorithm's steps."""
    lines = [f"initialize: F^L = {{({seed_point[0]:.6g}, {seed_point[1]:.6g})}} from the joint problem"]
    for rec in report.records:
        lines.append(f"iteration {rec.iteration}")
        lines.append(f"  step 3: lower-bounding problem -> w = {rec.w:.6g}, delta_L = {rec.delta_l:.6g}")
        lines.append(f"  step 4: lower-level problem -> g^N(x) = {rec.gN:.6g}")
        if rec.w <= rec.gN + 1e-7:
            lines.append("  step 5: w <= g^N(x), return (x, y)")
        else:
            lines.append(f"  step 9: w > g^N(x), add cut (|F^L| = {rec.cuts})")
            lines.append(f"  step 11: delta_U = {rec.delta_u:.6g}")
    y = report.y
    step = "step 13" if report.status.value == "ToleranceReached" else "stop"
    lines.append(f"{step}: {report.status.value}, y* = ({y[0]:.6g}, {y[1]:.6g}), "
                 f"delta_U = {report.final_delta_u:.3g}")
    return "\n".join(lines)
