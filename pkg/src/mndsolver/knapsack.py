"""Discretely constrained Nash-Cournot game with knapsack players.

Player ``j`` chooses which markets ``l`` to enter (``y_jl`` in {0, 1}) and
pays

    f_j(y) = sum_l (c_jl - (alpha_l - beta_l * z_l)) * y_jl,   z_l = sum_i y_il

subject to a private budget ``sum_l a_jl y_jl <= b_j`` and the shared
market caps ``sum_j d_jl y_jl <= e_l``. Joint decisions are flattened
row-major by player: index ``j * L + l``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .game import FEAS_TOL, GameInfeasibleError, GameInstance, LowerBoundingResult, LowerLevelResult
from .milp import EQ, GE, LE, LinearProgram, MixedIntegerProgram, SolverError, Status, solve_mip

DEFAULT_GAMMA = 1000
BRUTE_FORCE_LIMIT = 16


def _int_array(values, shape) -> np.ndarray:
    arr = np.asarray(values)
    if arr.shape != shape:
        raise ValueError(f"expected shape {shape}, got {arr.shape}")
    if not np.all(np.equal(np.mod(arr, 1), 0)):
        raise ValueError("instance parameters must be integers")
    arr = arr.astype(np.int64)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class KnapsackInstance:
    players: int
    markets: int
    alpha: np.ndarray
    beta: np.ndarray
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    d: np.ndarray
    e: np.ndarray
    seed: int | None = None
    gamma: int | None = None

    def __post_init__(self):
        J, L = int(self.players), int(self.markets)
        if J < 1 or L < 1:
            raise ValueError("need at least one player and one market")
        object.__setattr__(self, "players", J)
        object.__setattr__(self, "markets", L)
        for name, shape in (("alpha", (L,)), ("beta", (L,)), ("c", (J, L)), ("a", (J, L)),
                            ("b", (J,)), ("d", (J, L)), ("e", (L,))):
            object.__setattr__(self, name, _int_array(getattr(self, name), shape))
        for name in ("alpha", "beta", "c", "a", "b", "d", "e"):
            if np.any(getattr(self, name) < 1):
                raise ValueError(f"parameter {name} must be >= 1")
        if np.any(self.b < self.a.max(axis=1)):
            raise ValueError("budget b_j below max_l a_jl: some player cannot enter every market")
        if np.any(self.e < self.d.max(axis=0)):
            raise ValueError("cap e_l below max_j d_jl: some market cannot host every player")
        if self.gamma is not None:
            g = int(self.gamma)
            if np.any(self.alpha > J * g) or any(np.any(getattr(self, k) > g) for k in ("beta", "c", "a", "d")):
                raise ValueError(f"parameters exceed the generation range for gamma={g}")

    @property
    def num_vars(self) -> int:
        return self.players * self.markets

    def grid(self, y) -> np.ndarray:
        """Reshape a flat decision vector to ``(players, markets)``."""
        y = np.asarray(y, dtype=float)
        if y.size != self.num_vars:
            raise ValueError(f"point has dimension {y.size}, instance expects {self.num_vars}")
        return y.reshape(self.players, self.markets)

    def to_dict(self) -> dict:
        return {
            "players": self.players,
            "markets": self.markets,
            "alpha": self.alpha.tolist(),
            "beta": self.beta.tolist(),
            "c": self.c.tolist(),
            "a": self.a.tolist(),
            "b": self.b.tolist(),
            "d": self.d.tolist(),
            "e": self.e.tolist(),
            "seed": self.seed,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "KnapsackInstance":
        keys = ("players", "markets", "alpha", "beta", "c", "a", "b", "d", "e")
        missing = [k for k in keys if k not in data]
        if missing:
            raise ValueError(f"missing fields: {', '.join(missing)}")
        return cls(**{k: data[k] for k in keys}, seed=data.get("seed"), gamma=data.get("gamma"))


def generate_instance(seed: int, players: int, markets: int, gamma: int = DEFAULT_GAMMA) -> KnapsackInstance:
    """Draw a random instance; identical arguments give identical instances.

    Uses numpy's PCG64 bit generator seeded through ``SeedSequence``.
    Draw order: alpha, beta, c, a, d.
    """
    if min(players, markets, gamma) < 1 or seed < 0:
        raise ValueError("players, markets and gamma must be positive and seed non-negative")
    rng = np.random.Generator(np.random.PCG64(seed))
    J, L = players, markets
    alpha = rng.integers(1, J * gamma, size=L, endpoint=True)
    beta = rng.integers(1, gamma, size=L, endpoint=True)
    c = rng.integers(1, gamma, size=(J, L), endpoint=True)
    a = rng.integers(1, gamma, size=(J, L), endpoint=True)
    d = rng.integers(1, gamma, size=(J, L), endpoint=True)
    return KnapsackInstance(J, L, alpha, beta, c, a, a.max(axis=1), d, d.max(axis=0), seed=seed, gamma=gamma)


# ---------------------------------------------------------------------------
# direct evaluation
# ---------------------------------------------------------------------------


def player_costs(inst: KnapsackInstance, y) -> np.ndarray:
    """``f_j(y)`` for every player."""
    Y = inst.grid(y)
    z = Y.sum(axis=0)
    return ((inst.c - inst.alpha + inst.beta * z) * Y).sum(axis=1)


def total_cost(inst: KnapsackInstance, y) -> float:
    """``sum_j f_j(y)`` written in the market-total form."""
    Y = inst.grid(y)
    z = Y.sum(axis=0)
    return float((inst.c * Y).sum() + ((-inst.alpha + inst.beta * z) * z).sum())


def response_costs(inst: KnapsackInstance, y) -> np.ndarray:
    """Linear cost of ``y'_jl`` in ``sum_j f_j(y_{-j}, y'_j)`` for binary ``y'``."""
    Y = inst.grid(y)
    others = Y.sum(axis=0) - Y
    return inst.c - inst.alpha + inst.beta + inst.beta * others


def is_feasible_point(inst: KnapsackInstance, y, tol: float = FEAS_TOL) -> bool:
    Y = inst.grid(y)
    if np.any(np.abs(Y - np.round(Y)) > tol) or np.any(Y < -tol) or np.any(Y > 1 + tol):
        return False
    if np.any((inst.a * Y).sum(axis=1) > inst.b + tol):
        return False
    return not np.any((inst.d * Y).sum(axis=0) > inst.e + tol)


# ---------------------------------------------------------------------------
# MILP encodings
# ---------------------------------------------------------------------------


def _layout(inst: KnapsackInstance):
    J, L = inst.players, inst.markets
    n_y = J * L
    u0 = n_y
    z0 = u0 + L * J
    w = z0 + L
    return n_y, u0, z0, w


def _feasibility_rows(inst: KnapsackInstance, ncols: int):
    J, L = inst.players, inst.markets
    rows, senses, rhs = [], [], []
    for j in range(J):
        r = np.zeros(ncols)
        r[j * L:(j + 1) * L] = inst.a[j]
        rows.append(r)
        senses.append(LE)
        rhs.append(inst.b[j])
    for l in range(L):
        r = np.zeros(ncols)
        r[l:J * L:L] = inst.d[:, l]
        rows.append(r)
        senses.append(LE)
        rhs.append(inst.e[l])
    return rows, senses, rhs


def _names(inst: KnapsackInstance, with_w: bool) -> tuple[str, ...]:
    J, L = inst.players, inst.markets
    names = [f"y_{j}_{l}" for j in range(J) for l in range(L)]
    names += [f"u_{l}_{k}" for l in range(L) for k in range(1, J + 1)]
    names += [f"z_{l}" for l in range(L)]
    if with_w:
        names.append("w")
    return tuple(names)


def _quadratic_core(inst: KnapsackInstance, cuts: Sequence[np.ndarray] | None) -> MixedIntegerProgram:
    J, L = inst.players, inst.markets
    n_y, u0, z0, w = _layout(inst)
    with_w = cuts is not None
    n = w + 1 if with_w else w

    c = np.zeros(n)
    c[:n_y] = inst.c.ravel()
    c[z0:z0 + L] = -inst.alpha
    steps = 2 * np.arange(1, J + 1) - 1
    for l in range(L):
        c[u0 + l * J:u0 + (l + 1) * J] = inst.beta[l] * steps
    if with_w:
        c[w] = -1.0

    rows, senses, rhs = _feasibility_rows(inst, n)
    for l in range(L):
        r = np.zeros(n)  # z_l = sum_j y_jl
        r[z0 + l] = 1.0
        r[l:n_y:L] = -1.0
        rows.append(r)
        senses.append(EQ)
        rhs.append(0.0)
    for l in range(L):
        r = np.zeros(n)  # z_l = sum_k u_lk
        r[z0 + l] = 1.0
        r[u0 + l * J:u0 + (l + 1) * J] = -1.0
        rows.append(r)
        senses.append(EQ)
        rhs.append(0.0)
    for l in range(L):
        for k in range(J - 1):
            r = np.zeros(n)  # u_lk >= u_l,k+1
            r[u0 + l * J + k] = 1.0
            r[u0 + l * J + k + 1] = -1.0
            rows.append(r)
            senses.append(GE)
            rhs.append(0.0)
    if with_w:
        for yc in cuts:
            Yc = inst.grid(yc)
            zc = Yc.sum(axis=0)
            r = np.zeros(n)
            r[w] = 1.0
            r[:n_y] = -(inst.beta * (zc - Yc)).ravel()
            rows.append(r)
            senses.append(LE)
            rhs.append(float(((inst.c - inst.alpha + inst.beta) * Yc).sum()))

    lb = np.zeros(n)
    ub = np.ones(n)
    ub[z0:z0 + L] = J
    if with_w:
        lb[w], ub[w] = -np.inf, np.inf
    A = np.array(rows) if rows else np.zeros((0, n))
    lp = LinearProgram(c, A, tuple(senses), np.array(rhs, dtype=float), lb, ub, _names(inst, with_w))
    return MixedIntegerProgram(lp, tuple(range(z0)), integral_objective=True)


def build_lbp(inst: KnapsackInstance, cuts: Sequence[np.ndarray]) -> MixedIntegerProgram:
    """Lower-bounding MILP over ``(y, u, z, w)``.

    ``z_l^2`` is written as ``sum_k (2k - 1) u_lk`` with ordered unit steps
    ``u_l1 >= u_l2 >= ...``, which is exact whenever ``z_l`` is integral.
    Each cut ``y'`` bounds ``w`` by ``sum_j f_j(y_{-j}, y'_j)``.
    """
    if len(cuts) == 0:
        raise ValueError("the lower-bounding problem needs at least one cut")
    for yc in cuts:
        if not is_feasible_point(inst, yc):
            raise ValueError("cut points must be feasible")
    return _quadratic_core(inst, list(cuts))


def build_joint(inst: KnapsackInstance) -> MixedIntegerProgram:
    """``min sum_j f_j(y)`` over the joint feasible set (no ``w``)."""
    return _quadratic_core(inst, None)


def build_llp(inst: KnapsackInstance, y) -> MixedIntegerProgram:
    """0-1 program for ``g^N(y)``: minimize ``sum_j f_j(y_{-j}, y'_j)`` over ``y'``."""
    if not is_feasible_point(inst, y):
        raise ValueError("the lower-level problem is parameterized by a feasible point")
    n = inst.num_vars
    rows, senses, rhs = _feasibility_rows(inst, n)
    names = tuple(f"yp_{j}_{l}" for j in range(inst.players) for l in range(inst.markets))
    lp = LinearProgram(response_costs(inst, y).ravel(), np.array(rows), tuple(senses),
                       np.array(rhs, dtype=float), np.zeros(n), np.ones(n), names)
    return MixedIntegerProgram(lp, tuple(range(n)), integral_objective=True)


def build_best_response(inst: KnapsackInstance, y, j: int) -> MixedIntegerProgram:
    """Player ``j``'s knapsack with the other players fixed at ``y``."""
    Y = inst.grid(y)
    L = inst.markets
    others = Y.sum(axis=0) - Y[j]
    cost = inst.c[j] - inst.alpha + inst.beta + inst.beta * others
    cap = inst.e - (inst.d * Y).sum(axis=0) + inst.d[j] * Y[j]
    A = np.vstack([inst.a[j][None, :], np.diag(inst.d[j].astype(float))])
    rhs = np.concatenate([[inst.b[j]], cap])
    lp = LinearProgram(cost, A, (LE,) * (L + 1), rhs, np.zeros(L), np.ones(L))
    return MixedIntegerProgram(lp, tuple(range(L)), integral_objective=True)


def _solve(mip: MixedIntegerProgram, node_limit: int, what: str):
    sol = solve_mip(mip, node_limit=node_limit)
    if sol.status is Status.INFEASIBLE:
        raise GameInfeasibleError(f"{what} is infeasible")
    if not sol.optimal:
        raise SolverError(f"{what} not solved to optimality: {sol.status.value}")
    return sol


def _binary(x, n) -> np.ndarray:
    return np.round(np.asarray(x[:n], dtype=float))


class KnapsackGame(GameInstance):
    """:class:`GameInstance` adapter solving every subproblem with the MILP engine."""

    def __init__(self, instance: KnapsackInstance, node_limit: int = 100_000):
        self.instance = instance
        self.node_limit = node_limit
        self.dims = (instance.markets,) * instance.players

    def player_objective(self, i, x, y_i):
        X = self.instance.grid(x)
        y_i = np.asarray(y_i, dtype=float)
        inst = self.instance
        total = X.sum(axis=0) - X[i] + y_i
        return float(((inst.c[i] - inst.alpha + inst.beta * total) * y_i).sum())

    def contains(self, y):
        return is_feasible_point(self.instance, y)

    # Values below are re-evaluated at the rounded binary point, so they are
    # exact integers instead of carrying simplex round-off.

    def best_response(self, i, x):
        sol = _solve(build_best_response(self.instance, x, i), self.node_limit, f"best response of player {i}")
        y_i = _binary(sol.x, self.instance.markets)
        return y_i, self.player_objective(i, x, y_i)

    def lower_bounding(self, cuts):
        sol = _solve(build_lbp(self.instance, cuts), self.node_limit, "lower-bounding problem")
        y = _binary(sol.x, self.instance.num_vars)
        w = min(self.cut_value(y, c) for c in cuts)
        return LowerBoundingResult(y, float(w), total_cost(self.instance, y) - w, sol.nodes)

    def lower_level(self, x):
        sol = _solve(build_llp(self.instance, x), self.node_limit, "lower-level problem")
        y = _binary(sol.x, self.instance.num_vars)
        return LowerLevelResult(y, float(response_costs(self.instance, x).ravel() @ y), sol.nodes)

    def joint_optimum(self):
        sol = _solve(build_joint(self.instance), self.node_limit, "joint problem")
        return _binary(sol.x, self.instance.num_vars)


def verify_gne(inst: KnapsackInstance, y, tol: float = 1e-6, node_limit: int = 100_000) -> bool:
    """True iff no player can lower its cost by more than ``tol`` unilaterally."""
    if not is_feasible_point(inst, y):
        raise ValueError("verify_gne needs a feasible point")
    return bool(player_regrets(inst, y, node_limit).max() <= tol)


def player_regrets(inst: KnapsackInstance, y, node_limit: int = 100_000) -> np.ndarray:
    """Best-response improvement available to each player, via the MILP engine."""
    costs = player_costs(inst, y)
    out = np.empty(inst.players)
    for j in range(inst.players):
        mip = build_best_response(inst, y, j)
        sol = _solve(mip, node_limit, f"best response of player {j}")
        out[j] = costs[j] - float(mip.lp.c @ _binary(sol.x, inst.markets))
    return out


# ---------------------------------------------------------------------------
# enumeration oracles
# ---------------------------------------------------------------------------


def feasible_points(inst: KnapsackInstance) -> np.ndarray:
    """Every feasible 0/1 point, lexicographic in the flat encoding."""
    n = inst.num_vars
    if n > BRUTE_FORCE_LIMIT:
        raise ValueError(f"enumeration limited to {BRUTE_FORCE_LIMIT} binaries, instance has {n}")
    codes = np.arange(2 ** n, dtype=np.int64)
    P = ((codes[:, None] >> np.arange(n - 1, -1, -1)) & 1).astype(float)
    G = P.reshape(-1, inst.players, inst.markets)
    ok = np.all((G * inst.a).sum(axis=2) <= inst.b, axis=1)
    ok &= np.all((G * inst.d).sum(axis=1) <= inst.e, axis=1)
    return P[ok]


def brute_force_gN(inst: KnapsackInstance, ys: np.ndarray, points: np.ndarray | None = None,
                   chunk: int = 2048) -> np.ndarray:
    """``g^N`` at each row of ``ys`` by scanning all feasible ``y'``."""
    if points is None:
        points = feasible_points(inst)
    J, L = inst.players, inst.markets
    G = ys.reshape(-1, J, L)
    coef = (inst.c - inst.alpha + inst.beta + inst.beta * (G.sum(axis=1, keepdims=True) - G)).reshape(len(ys), -1)
    out = np.empty(len(ys))
    for s in range(0, len(ys), chunk):
        out[s:s + chunk] = (coef[s:s + chunk] @ points.T).min(axis=1)
    return out


def brute_force_mnd(inst: KnapsackInstance) -> tuple[float, np.ndarray]:
    """Exact minimum normalized disequilibrium and its first minimizer.

    Double enumeration over the feasible set; limited to 16 binaries.
    """
    P = feasible_points(inst)
    G = P.reshape(-1, inst.players, inst.markets)
    z = G.sum(axis=1)
    totals = (G * inst.c).sum(axis=(1, 2)) + ((-inst.alpha + inst.beta * z) * z).sum(axis=1)
    gaps = totals - brute_force_gN(inst, P, P)
    k = int(np.argmin(gaps))
    return float(gaps[k]), P[k].copy()


def brute_force_regrets(inst: KnapsackInstance, y) -> np.ndarray:
    """Per-player regret at ``y`` by enumerating each player's ``2^L`` responses."""
    Y = inst.grid(y)
    L = inst.markets
    if L > BRUTE_FORCE_LIMIT:
        raise ValueError("too many markets to enumerate responses")
    codes = np.arange(2 ** L, dtype=np.int64)
    R = ((codes[:, None] >> np.arange(L - 1, -1, -1)) & 1).astype(float)
    costs = player_costs(inst, y)
    out = np.empty(inst.players)
    for j in range(inst.players):
        others = Y.sum(axis=0) - Y[j]
        load = (inst.d * Y).sum(axis=0) - inst.d[j] * Y[j]
        ok = ((R * inst.a[j]).sum(axis=1) <= inst.b[j]) & np.all(R * inst.d[j] + load <= inst.e, axis=1)
        vals = ((inst.c[j] - inst.alpha + inst.beta * (others + R)) * R).sum(axis=1)
        out[j] = costs[j] - vals[ok].min()
    return out
