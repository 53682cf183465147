"""Cutting-plane method for minimum normalized disequilibrium.

Alternates a finite relaxation (only the cuts generated by points in
``cuts``) with the lower-level problem ``g^N(x)``. The relaxation value is
a lower bound ``delta_L`` on the minimum normalized disequilibrium, and
``sum_i g_i(x, y_i) - g^N(x)`` at any relaxation iterate is an upper bound
``delta_U``.
"""

from __future__ import annotations

import enum
import json
import time
from dataclasses import asdict, dataclass, field
from typing import Callable, Iterable

import numpy as np

from .game import GameInfeasibleError, GameInstance, LowerBoundingResult, LowerLevelResult, aggregate_objective

STEP5_TOL = 1e-7


class DuplicateCutError(RuntimeError):
    """A lower-level solution already in the cut set failed the stopping test."""


class SubproblemError(RuntimeError):
    """A subsolver failed; carries the iteration at which it happened."""

    def __init__(self, iteration: int, stage: str, cause: Exception):
        super().__init__(f"iteration {iteration}, {stage}: {cause}")
        self.iteration = iteration
        self.stage = stage


class CutSet:
    """Ordered, deduplicated collection of lower-level points."""

    def __init__(self, points: Iterable = ()):
        self._points: list[np.ndarray] = []
        self._keys: set[tuple] = set()
        for p in points:
            self.add(p)

    @staticmethod
    def _key(p: np.ndarray) -> tuple:
        return tuple(np.round(p, 12).tolist())

    def add(self, p) -> bool:
        """Append ``p``; returns False if it was already present."""
        p = np.array(p, dtype=float).ravel()
        key = self._key(p)
        if key in self._keys:
            return False
        p.setflags(write=False)
        self._points.append(p)
        self._keys.add(key)
        return True

    def __contains__(self, p) -> bool:
        return self._key(np.asarray(p, dtype=float).ravel()) in self._keys

    def __len__(self) -> int:
        return len(self._points)

    def __iter__(self):
        return iter(self._points)

    def __getitem__(self, k):
        return self._points[k]

    def copy(self) -> "CutSet":
        return CutSet(self._points)


class Status(enum.Enum):
    EQUILIBRIUM_FOUND = "EquilibriumFound"
    TOLERANCE_REACHED = "ToleranceReached"
    ITERATION_LIMIT = "IterationLimit"

    @property
    def converged(self) -> bool:
        return self is not Status.ITERATION_LIMIT


@dataclass(frozen=True)
class SolverConfig:
    epsilon: float = 0.01
    max_iterations: int = 100
    node_limit: int = 100_000

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be at least 1")


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    delta_l: float
    delta_u: float
    w: float
    gN: float
    cuts: int
    seconds: float
    lbp_nodes: int = 0
    llp_nodes: int = 0

    def to_json(self) -> str:
        return json.dumps(asdict(self), allow_nan=True)


@dataclass
class SolveReport:
    status: Status
    y: np.ndarray
    w: float
    delta_l: list[float] = field(default_factory=list)
    delta_u: list[float] = field(default_factory=list)
    cut_counts: list[int] = field(default_factory=list)
    iter_seconds: list[float] = field(default_factory=list)
    lbp_nodes: list[int] = field(default_factory=list)
    llp_nodes: list[int] = field(default_factory=list)
    records: list[IterationRecord] = field(default_factory=list)
    final_cuts: CutSet | None = None
    #: True when the last ``delta_u`` entry was computed after a step-5 return
    delta_u_post_hoc: bool = False

    @property
    def x(self) -> np.ndarray:
        return self.y

    @property
    def iterations(self) -> int:
        return len(self.delta_l)

    @property
    def final_delta_u(self) -> float:
        return self.delta_u[-1] if self.delta_u else np.inf

    @property
    def final_delta_l(self) -> float:
        return self.delta_l[-1] if self.delta_l else -np.inf

    def summary(self) -> dict:
        return {
            "status": self.status.value,
            "iterations": self.iterations,
            "delta_l": self.final_delta_l,
            "delta_u": self.final_delta_u,
            "delta_u_post_hoc": self.delta_u_post_hoc,
            "w": self.w,
            "y": self.y.tolist(),
            "cuts": self.cut_counts[-1] if self.cut_counts else 0,
        }


def solve_lower_bounding(game: GameInstance, cuts: CutSet) -> LowerBoundingResult:
    if len(cuts) == 0:
        raise ValueError("the cut set must be nonempty")
    return game.lower_bounding(list(cuts))


def solve_lower_level(game: GameInstance, x) -> LowerLevelResult:
    return game.lower_level(game.point(x))


def initialize_cuts_joint(game: GameInstance) -> CutSet:
    """Seed the cut set with a global minimizer of the players' summed objective."""
    y = game.joint_optimum()
    if not game.contains(y):
        raise GameInfeasibleError("joint problem returned an infeasible point")
    return CutSet([y])


def solve_mnd(
    game: GameInstance,
    cuts: CutSet | None = None,
    config: SolverConfig | None = None,
    on_iteration: Callable[[IterationRecord], None] | None = None,
) -> SolveReport:
    """Run the cutting-plane loop until an equilibrium or the epsilon gap.

    ``cuts`` is copied, never mutated; when omitted it is seeded from the
    joint problem. ``on_iteration`` receives one record per major iteration.
    """
    config = config or SolverConfig()
    cuts = initialize_cuts_joint(game) if cuts is None else cuts.copy()
    if len(cuts) == 0:
        raise ValueError("the cut set must be nonempty")
    for p in cuts:
        if not game.contains(p):
            raise ValueError("cut points must lie in the joint feasible set")

    delta_u = np.inf
    best_y: np.ndarray | None = None
    best_w = np.nan
    report = SolveReport(Status.ITERATION_LIMIT, np.empty(0), np.nan)

    def log(it, dl, du, w, gN, seconds, lbp, llp):
        report.delta_l.append(dl)
        report.delta_u.append(du)
        report.cut_counts.append(len(cuts))
        report.iter_seconds.append(seconds)
        report.lbp_nodes.append(lbp.nodes)
        report.llp_nodes.append(llp.nodes)
        rec = IterationRecord(it, dl, du, w, gN, len(cuts), seconds, lbp.nodes, llp.nodes)
        report.records.append(rec)
        if on_iteration is not None:
            on_iteration(rec)

    for it in range(1, config.max_iterations + 1):
        start = time.perf_counter()
        try:
            lbp = solve_lower_bounding(game, cuts)
        except GameInfeasibleError:
            raise
        except Exception as exc:
            raise SubproblemError(it, "lower-bounding problem", exc) from exc
        x = lbp.y
        try:
            llp = solve_lower_level(game, x)
        except Exception as exc:
            raise SubproblemError(it, "lower-level problem", exc) from exc
        candidate = aggregate_objective(game, x) - llp.value

        if lbp.w <= llp.value + STEP5_TOL:
            # step-5 return: (x, y) solves the disequilibrium problem itself
            du = min(delta_u, candidate)
            log(it, lbp.value, du, lbp.w, llp.value, time.perf_counter() - start, lbp, llp)
            report.status = Status.EQUILIBRIUM_FOUND
            report.y, report.w = x.copy(), lbp.w
            report.delta_u_post_hoc = True
            report.final_cuts = cuts
            return report

        if not cuts.add(llp.y):
            raise DuplicateCutError(
                f"iteration {it}: lower-level point already in the cut set while "
                f"w={lbp.w!r} > g^N={llp.value!r}; subsolver tolerances are inconsistent"
            )
        if candidate < delta_u:
            delta_u = candidate
            best_y, best_w = x.copy(), lbp.w
        log(it, lbp.value, delta_u, lbp.w, llp.value, time.perf_counter() - start, lbp, llp)
        if delta_u - max(lbp.value, 0.0) < config.epsilon:
            report.status = Status.TOLERANCE_REACHED
            break

    report.y, report.w = best_y, best_w
    report.final_cuts = cuts
    return report
