"""Generalized games in jointly constrained form.

A game is stored only through the host set ``Y`` of joint decisions
``y = (y_1, ..., y_m)``; the parameter copy ``x`` seen by each player is
identified with ``y`` itself. Player ``i`` then solves

    min_{y_i} g_i(x, y_i)  s.t.  (x_{-i}, y_i) in Y

and the normalized value function is

    g^N(x) = min_{y' in Y} sum_i g_i(x, y'_i).

Concrete games subclass :class:`GameInstance` and supply global solvers for
the subproblems used by the cutting-plane method.
"""

from __future__ import annotations

import enum
import itertools
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

FEAS_TOL = 1e-9


class GameInfeasibleError(RuntimeError):
    """The joint feasible set (or a relaxation of it) is empty."""


class Measure(enum.Enum):
    """Aggregate of per-player regrets; zero exactly when every regret is zero."""

    SUM = "sum"
    MAX = "max"

    def __call__(self, values) -> float:
        v = np.asarray(values, dtype=float)
        if v.size == 0:
            return 0.0
        return float(v.sum()) if self is Measure.SUM else float(v.max())


@dataclass(frozen=True)
class LowerBoundingResult:
    y: np.ndarray
    w: float
    value: float
    nodes: int = 0


@dataclass(frozen=True)
class LowerLevelResult:
    y: np.ndarray
    value: float
    nodes: int = 0


class GameInstance(ABC):
    """A game in jointly constrained form with global subproblem solvers."""

    #: decision dimension of each player
    dims: tuple[int, ...]

    @property
    def num_players(self) -> int:
        return len(self.dims)

    @property
    def size(self) -> int:
        return int(sum(self.dims))

    def blocks(self) -> list[slice]:
        offsets = np.concatenate([[0], np.cumsum(self.dims)])
        return [slice(int(a), int(b)) for a, b in zip(offsets[:-1], offsets[1:])]

    def point(self, y) -> np.ndarray:
        """Validate and return ``y`` as a float vector of the right size."""
        y = np.asarray(y, dtype=float).ravel()
        if y.size != self.size:
            raise ValueError(f"point has dimension {y.size}, game expects {self.size}")
        return y

    @abstractmethod
    def player_objective(self, i: int, x: np.ndarray, y_i: np.ndarray) -> float:
        """``g_i(x, y_i)``: player ``i``'s cost when others play ``x_{-i}``."""

    @abstractmethod
    def contains(self, y: np.ndarray) -> bool:
        """Membership test for the joint host set ``Y``."""

    @abstractmethod
    def best_response(self, i: int, x: np.ndarray) -> tuple[np.ndarray, float]:
        """Global minimizer and value of player ``i``'s problem at ``x``."""

    @abstractmethod
    def lower_bounding(self, cuts: Sequence[np.ndarray]) -> LowerBoundingResult:
        """Global solution of the cut relaxation of the disequilibrium problem."""

    @abstractmethod
    def lower_level(self, x: np.ndarray) -> LowerLevelResult:
        """Global solution of ``min_{y' in Y} sum_i g_i(x, y'_i)``."""

    @abstractmethod
    def joint_optimum(self) -> np.ndarray:
        """Global minimizer of ``sum_i g_i(y, y_i)`` over ``Y``."""

    def cut_value(self, x: np.ndarray, y_cut: np.ndarray) -> float:
        """Right-hand side ``sum_i g_i(x, y'_i)`` of the cut generated by ``y_cut``."""
        return float(sum(self.player_objective(i, x, y_cut[s]) for i, s in enumerate(self.blocks())))


def aggregate_objective(game: GameInstance, y) -> float:
    """``sum_i g_i(y, y_i)``."""
    y = game.point(y)
    return game.cut_value(y, y)


def is_feasible(game: GameInstance, y) -> bool:
    return bool(game.contains(game.point(y)))


def per_player_disequilibrium(
    game: GameInstance,
    y,
    best_response: Callable[[GameInstance, int, np.ndarray], float] | None = None,
) -> np.ndarray:
    """Regret ``g_i(y, y_i) - g*_i(y)`` of every player at ``y``.

    ``best_response(game, i, x)`` must return the globally optimal value of
    player ``i``'s problem; by default the game's own solver is used.
    """
    y = game.point(y)
    out = np.empty(game.num_players)
    for i, s in enumerate(game.blocks()):
        if best_response is None:
            best = game.best_response(i, y)[1]
        else:
            best = best_response(game, i, y)
        out[i] = game.player_objective(i, y, y[s]) - best
    return out


def normalized_disequilibrium(game: GameInstance, y, gN_value: float) -> float:
    """``sum_i g_i(y, y_i) - g^N(y)`` given a precomputed ``g^N(y)``."""
    return aggregate_objective(game, y) - float(gN_value)


class FiniteGame(GameInstance):
    """Game over an explicitly listed finite host set.

    All subproblems are solved by enumeration, so this class doubles as a
    reference implementation for small instances.

    Parameters
    ----------
    dims : sequence of int
        Decision dimension per player.
    points : array_like, shape (k, sum(dims))
        Every element of ``Y``. Order matters only for tie-breaking.
    objectives : sequence of callables
        ``objectives[i](x, y_i)`` returns player ``i``'s cost.
    """

    def __init__(self, dims, points, objectives):
        self.dims = tuple(int(d) for d in dims)
        pts = np.asarray(points, dtype=float).reshape(-1, self.size)
        if pts.shape[0] == 0:
            raise GameInfeasibleError("empty host set")
        if len(objectives) != len(self.dims):
            raise ValueError("one objective per player is required")
        self.points = pts
        self.points.setflags(write=False)
        self._objectives = tuple(objectives)
        self._keys = {tuple(p): k for k, p in enumerate(pts)}

    def player_objective(self, i, x, y_i):
        return float(self._objectives[i](np.asarray(x, dtype=float), np.asarray(y_i, dtype=float)))

    def contains(self, y):
        return tuple(np.asarray(y, dtype=float)) in self._keys

    def best_response(self, i, x):
        s = self.blocks()[i]
        best, best_val = None, np.inf
        for p in self.points:
            trial = x.copy()
            trial[s] = p[s]
            if not self.contains(trial):
                continue
            val = self.player_objective(i, x, p[s])
            if val < best_val:
                best, best_val = p[s].copy(), val
        if best is None:
            raise GameInfeasibleError(f"player {i} has no feasible response")
        return best, best_val

    def lower_level(self, x):
        vals = [self.cut_value(x, p) for p in self.points]
        k = int(np.argmin(vals))
        return LowerLevelResult(self.points[k].copy(), float(vals[k]))

    def lower_bounding(self, cuts):
        if len(cuts) == 0:
            raise ValueError("at least one cut is required")
        best = None
        for p in self.points:
            w = min(self.cut_value(p, c) for c in cuts)
            val = aggregate_objective(self, p) - w
            if best is None or val < best.value:
                best = LowerBoundingResult(p.copy(), float(w), float(val))
        return best

    def joint_optimum(self):
        vals = [aggregate_objective(self, p) for p in self.points]
        return self.points[int(np.argmin(vals))].copy()


def binary_points(n: int) -> np.ndarray:
    """All 0/1 vectors of length ``n`` in lexicographic order."""
    return np.array(list(itertools.product((0.0, 1.0), repeat=n))).reshape(-1, n)
