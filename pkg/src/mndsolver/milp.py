"""Dense bounded-variable simplex and 0-1 branch-and-bound.

Every subproblem of the knapsack game (joint problem, lower-bounding
problem, lower-level problem, best responses) is a small 0-1 linear
program, so the engine only supports continuous and binary variables.
"""

from __future__ import annotations

import enum
import heapq
import itertools
from collections import OrderedDict
from dataclasses import dataclass

import numpy as np

FEAS_TOL = 1e-9
INT_TOL = 1e-6
GAP_TOL = 1e-6
PIVOT_TOL = 1e-11
_RATIO_TOL = 1e-9
_TABLEAU_BYTES = 256 * 2**20  # memory for parent tableaux kept by branch and bound
_TABLEAU_REUSE = 16  # generations before a child refactors its basis
_OPT_TOL = 1e-9
_BLAND_AFTER = 500

LE, GE, EQ = "<=", ">=", "="
_SENSES = (LE, GE, EQ)


class SolverError(RuntimeError):
    """Raised on numerical breakdown inside the simplex method."""


class Status(enum.Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    NODE_LIMIT = "NodeLimit"


@dataclass(frozen=True, eq=False)
class LinearProgram:
    """``min c @ x`` subject to ``A x (sense) b`` and ``lb <= x <= ub``.

    Bounds may be infinite. ``names`` is only used by :func:`to_lp_text`.
    """

    c: np.ndarray
    A: np.ndarray
    senses: tuple[str, ...]
    b: np.ndarray
    lb: np.ndarray
    ub: np.ndarray
    names: tuple[str, ...] | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        n = c.size
        A = np.asarray(self.A, dtype=float).reshape(-1, n)
        b = np.asarray(self.b, dtype=float).ravel()
        lb = np.asarray(self.lb, dtype=float).ravel()
        ub = np.asarray(self.ub, dtype=float).ravel()
        senses = tuple(self.senses)
        if A.shape[0] != b.size or len(senses) != b.size:
            raise ValueError("row count mismatch between A, b and senses")
        if lb.size != n or ub.size != n:
            raise ValueError("bound vectors must match the number of variables")
        if any(s not in _SENSES for s in senses):
            raise ValueError(f"unknown constraint sense in {senses!r}")
        if not (np.all(np.isfinite(c)) and np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
            raise ValueError("coefficients must be finite")
        if np.any(lb > ub) or np.any(lb == np.inf) or np.any(ub == -np.inf):
            raise ValueError("inconsistent bounds")
        if self.names is not None and len(self.names) != n:
            raise ValueError("names must match the number of variables")
        for attr, val in (("c", c), ("A", A), ("b", b), ("lb", lb), ("ub", ub)):
            val.setflags(write=False)
            object.__setattr__(self, attr, val)
        object.__setattr__(self, "senses", senses)
        object.__setattr__(self, "_is_ge", np.array([s == GE for s in senses], dtype=bool))
        object.__setattr__(self, "_is_eq", np.array([s == EQ for s in senses], dtype=bool))

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.b.size

    def with_bounds(self, lb, ub) -> "LinearProgram":
        return LinearProgram(self.c, self.A, self.senses, self.b, lb, ub, self.names)

    def _tightened(self, lb: np.ndarray, ub: np.ndarray) -> "LinearProgram":
        # unchecked copy for branch and bound, whose bounds only ever shrink
        new = object.__new__(LinearProgram)
        new.__dict__.update(self.__dict__, lb=lb, ub=ub)
        return new

    def max_violation(self, x) -> float:
        """Largest violation of any row or bound at ``x``."""
        x = np.asarray(x, dtype=float)
        viol = 0.0
        if self.num_rows:
            excess = self.A @ x - self.b
            excess = np.where(self._is_ge, -excess, excess)
            excess = np.where(self._is_eq, np.abs(excess), excess)
            viol = max(viol, float(excess.max()))
        viol = max(viol, float(np.max(self.lb - x, initial=0.0)))
        viol = max(viol, float(np.max(x - self.ub, initial=0.0)))
        return viol


@dataclass(frozen=True, eq=False)
class MixedIntegerProgram:
    """A :class:`LinearProgram` with some variables restricted to {0, 1}.

    Set ``integral_objective`` when every integer-feasible point's best
    completion has an integer objective value; branch and bound then
    rounds node bounds up before pruning.
    """

    lp: LinearProgram
    binaries: tuple[int, ...]
    integral_objective: bool = False

    def __post_init__(self):
        binaries = tuple(sorted(set(int(i) for i in self.binaries)))
        for i in binaries:
            if not 0 <= i < self.lp.num_vars:
                raise ValueError(f"binary index {i} out of range")
            if self.lp.lb[i] < 0 or self.lp.ub[i] > 1:
                raise ValueError(f"binary variable {i} has bounds outside [0, 1]")
        object.__setattr__(self, "binaries", binaries)

    def is_integral(self, x, tol: float = INT_TOL) -> bool:
        if not self.binaries:
            return True
        xb = np.asarray(x)[list(self.binaries)]
        return bool(np.all(np.abs(xb - np.round(xb)) <= tol))


@dataclass
class MipSolution:
    status: Status
    x: np.ndarray | None
    objective: float
    bound: float
    nodes: int = 0
    pivots: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


# ---------------------------------------------------------------------------
# simplex
# ---------------------------------------------------------------------------


@dataclass
class _Tableau:
    T: np.ndarray  # B^-1 [A I R], one row per constraint
    basis: np.ndarray
    x: np.ndarray  # values of all columns, basic ones included
    lo: np.ndarray
    hi: np.ndarray
    pivots: int = 0
    degenerate_run: int = 0
    bland: bool = False


def _nonbasic_start(lo: float, hi: float) -> float:
    if np.isfinite(lo):
        return lo
    if np.isfinite(hi):
        return hi
    return 0.0


def _run_simplex(tab: _Tableau, cost: np.ndarray, max_pivots: int) -> Status:
    T, basis, x, lo, hi = tab.T, tab.basis, tab.x, tab.lo, tab.hi
    m, N = T.shape
    nonbasic_movable = hi > lo
    nonbasic_movable[basis] = False
    lob, hib = lo[basis].copy(), hi[basis].copy()
    d = cost - cost[basis] @ T
    ratios = np.empty(m)

    while True:
        if tab.pivots > max_pivots:
            raise SolverError(f"simplex exceeded {max_pivots} pivots without converging")
        can_up = nonbasic_movable & (d < -_OPT_TOL) & (x < hi - FEAS_TOL)
        can_down = nonbasic_movable & (d > _OPT_TOL) & (x > lo + FEAS_TOL)
        eligible = can_up | can_down
        if tab.bland:
            cands = np.flatnonzero(eligible)
            if cands.size == 0:
                return Status.OPTIMAL
            j = int(cands[0])
        else:
            score = np.where(eligible, np.abs(d), -1.0)
            j = int(score.argmax())
            if score[j] < 0:
                return Status.OPTIMAL
        direction = 1.0 if can_up[j] else -1.0

        col = T[:, j] * direction  # basic values move by -t * col
        step = hi[j] - lo[j]
        leave = -1
        if m:
            xb = x[basis]
            ratios.fill(np.inf)
            dec = col > _RATIO_TOL
            inc = col < -_RATIO_TOL
            np.divide(xb - lob, col, out=ratios, where=dec)
            np.divide(hib - xb, -col, out=ratios, where=inc)
            np.maximum(ratios, 0.0, out=ratios)
            rmin = ratios.min()
            if rmin < step:
                ties = np.flatnonzero(ratios <= rmin + _RATIO_TOL)
                if ties.size == 1:
                    leave = int(ties[0])
                elif tab.bland:
                    leave = int(ties[np.argmin(basis[ties])])
                else:
                    leave = int(ties[np.argmax(np.abs(col[ties]))])
                step = ratios[leave]
        if not np.isfinite(step):
            return Status.UNBOUNDED

        if step <= FEAS_TOL:
            tab.degenerate_run += 1
            if tab.degenerate_run >= _BLAND_AFTER:
                tab.bland = True
        else:
            tab.degenerate_run = 0

        tab.pivots += 1
        if step > 0:
            x[basis] -= step * col
            x[j] += direction * step
        if leave < 0:
            continue  # bound flip, basis unchanged

        piv = T[leave, j]
        if abs(piv) < PIVOT_TOL:
            raise SolverError(f"pivot element {piv:.3e} below {PIVOT_TOL:g} (column {j}, row {leave})")
        out = basis[leave]
        # snap the leaving variable exactly onto the bound it hit
        x[out] = lob[leave] if col[leave] > 0 else hib[leave]
        prow = T[leave] / piv
        T[leave] = prow
        rows = np.flatnonzero(T[:, j])
        rows = rows[rows != leave]
        if rows.size:
            T[rows] -= T[rows, j][:, None] * prow
        d -= d[j] * prow
        basis[leave] = j
        lob[leave], hib[leave] = lo[j], hi[j]
        nonbasic_movable[j] = False
        nonbasic_movable[out] = hi[out] > lo[out]


def _recompute_basics(A_full: np.ndarray, b: np.ndarray, tab: _Tableau) -> None:
    m = b.size
    if m == 0:
        return
    nonbasic = np.ones(tab.x.size, dtype=bool)
    nonbasic[tab.basis] = False
    rhs = b - A_full[:, nonbasic] @ tab.x[nonbasic]
    try:
        tab.x[tab.basis] = np.linalg.solve(A_full[:, tab.basis], rhs)
    except np.linalg.LinAlgError as exc:  # pragma: no cover - singular basis
        raise SolverError("final basis is singular") from exc


def _slack_bounds(lp: LinearProgram) -> tuple[np.ndarray, np.ndarray]:
    # slack s_i: A_i x + s_i = b_i
    slack_lo = np.array([0.0 if s in (LE, EQ) else -np.inf for s in lp.senses])
    slack_hi = np.array([np.inf if s == LE else 0.0 for s in lp.senses])
    return slack_lo, slack_hi


def solve_lp(lp: LinearProgram, max_pivots: int | None = None) -> MipSolution:
    """Solve ``lp`` with a two-phase bounded-variable primal simplex.

    Returns a vertex solution. Dantzig pricing is used until 500
    consecutive degenerate pivots have occurred, after which Bland's
    rule takes over for the remainder of the solve.
    """
    return _solve_lp_cold(lp, max_pivots)[0]


def _finish(lp: LinearProgram, A_full: np.ndarray | None, tab: _Tableau) -> tuple[MipSolution, "_Basis | None"]:
    """Package the final basis; without ``A_full`` the basics are assumed current."""
    n = lp.num_vars
    if A_full is not None:
        _recompute_basics(A_full, lp.b, tab)
    sol = tab.x[:n].copy()
    # drop round-off below the feasibility tolerance onto the bounds
    sol = np.where(np.abs(sol - lp.lb) <= FEAS_TOL, lp.lb, sol)
    sol = np.where(np.abs(sol - lp.ub) <= FEAS_TOL, lp.ub, sol)
    obj = float(lp.c @ sol)
    basis = None
    width = n + lp.num_rows
    if np.all(tab.basis < width):  # an artificial left in the basis rules out reuse
        at_upper = (tab.x[:width] >= tab.hi[:width] - FEAS_TOL) & np.isfinite(tab.hi[:width])
        basis = _Basis(tab.basis.copy(), at_upper, tab.T[:, :width])
    return MipSolution(Status.OPTIMAL, sol, obj, obj, nodes=0, pivots=tab.pivots), basis


def _solve_lp_cold(lp: LinearProgram, max_pivots: int | None = None) -> tuple[MipSolution, "_Basis | None"]:
    m, n = lp.num_rows, lp.num_vars
    if max_pivots is None:
        max_pivots = 50 * (m + n) + 1000
    slack_lo, slack_hi = _slack_bounds(lp)

    x0 = np.array([_nonbasic_start(lo, hi) for lo, hi in zip(lp.lb, lp.ub)]) if n else np.zeros(0)
    if not np.all(np.isfinite(x0)):
        raise SolverError("variable without finite start value")
    resid = lp.b - lp.A @ x0 if m else np.zeros(0)
    s0 = np.clip(resid, slack_lo, slack_hi)
    art = resid - s0
    needs_art = np.abs(art) > FEAS_TOL
    art_rows = np.flatnonzero(needs_art)
    k = art_rows.size

    N = n + m + k
    A_full = np.zeros((m, N))
    A_full[:, :n] = lp.A
    A_full[:, n:n + m] = np.eye(m)
    for t, i in enumerate(art_rows):
        A_full[i, n + m + t] = np.sign(art[i])

    lo = np.concatenate([lp.lb, slack_lo, np.zeros(k)])
    hi = np.concatenate([lp.ub, slack_hi, np.full(k, np.inf)])
    x = np.concatenate([x0, s0, np.abs(art[art_rows])])
    basis = np.arange(n, n + m)
    for t, i in enumerate(art_rows):
        basis[i] = n + m + t
    T = A_full.copy()
    for t, i in enumerate(art_rows):
        T[i] *= np.sign(art[i])  # B^-1 for a signed artificial column
    tab = _Tableau(T=T, basis=basis, x=x, lo=lo, hi=hi)

    if k:
        cost1 = np.zeros(N)
        cost1[n + m:] = 1.0
        _run_simplex(tab, cost1, max_pivots)
        infeas = float(x[n + m:].sum())
        if infeas > FEAS_TOL * max(1.0, float(np.abs(lp.b).max(initial=0.0))):
            return MipSolution(Status.INFEASIBLE, None, np.inf, np.inf, pivots=tab.pivots), None
        hi[n + m:] = 0.0
        x[n + m:] = 0.0
        _recompute_basics(A_full, lp.b, tab)

    cost2 = np.zeros(N)
    cost2[:n] = lp.c
    status = _run_simplex(tab, cost2, max_pivots)
    if status is Status.UNBOUNDED:
        return MipSolution(Status.UNBOUNDED, None, -np.inf, -np.inf, pivots=tab.pivots), None
    return _finish(lp, A_full, tab)


@dataclass
class _Basis:
    """Final basis of a solved LP: basic column per row, and which nonbasics sit at their upper bound."""

    basic: np.ndarray
    at_upper: np.ndarray
    tableau: np.ndarray | None = None  # B^-1 [A I] at that basis, if kept


def _run_dual_simplex(tab: _Tableau, cost: np.ndarray, max_pivots: int) -> Status:
    """Bounded dual simplex from a dual-feasible basis; stops once primal feasible.

    Returns INFEASIBLE when some row proves the bounds cannot be met.
    """
    T, basis, x, lo, hi = tab.T, tab.basis, tab.x, tab.lo, tab.hi
    m = T.shape[0]
    movable = hi > lo
    movable[basis] = False
    d = cost - cost[basis] @ T
    while True:
        if tab.pivots > max_pivots:
            raise SolverError("dual simplex exceeded its pivot budget")
        xb = x[basis]
        below = lo[basis] - xb
        above = xb - hi[basis]
        infeas = np.maximum(below, above)
        r = int(infeas.argmax()) if m else 0
        if m == 0 or infeas[r] <= FEAS_TOL:
            return Status.OPTIMAL
        raise_r = below[r] > 0  # the leaving variable must move up to its lower bound
        alpha = T[r]
        at_lo = movable & (x <= lo + FEAS_TOL)
        at_hi = movable & (x >= hi - FEAS_TOL)
        free = movable & ~at_lo & ~at_hi
        # x_r moves by -alpha_j * dx_j
        if raise_r:
            ok = (at_lo & (alpha < -_RATIO_TOL)) | (at_hi & (alpha > _RATIO_TOL))
        else:
            ok = (at_lo & (alpha > _RATIO_TOL)) | (at_hi & (alpha < -_RATIO_TOL))
        ok |= free & (np.abs(alpha) > _RATIO_TOL)
        cands = np.flatnonzero(ok)
        if cands.size == 0:
            return Status.INFEASIBLE
        ratios = np.abs(d[cands]) / np.abs(alpha[cands])
        best = ratios.min()
        ties = cands[ratios <= best + _RATIO_TOL]
        j = int(ties[np.argmax(np.abs(alpha[ties]))])

        piv = alpha[j]
        if abs(piv) < PIVOT_TOL:
            raise SolverError(f"dual pivot element {piv:.3e} below {PIVOT_TOL:g}")
        out = basis[r]
        target = lo[out] if raise_r else hi[out]
        dx = (xb[r] - target) / piv  # change of x_j that puts x_out on its bound
        x[basis] -= dx * T[:, j]
        x[j] += dx
        x[out] = target
        prow = T[r] / piv
        T[r] = prow
        rows = np.flatnonzero(T[:, j])
        rows = rows[rows != r]
        if rows.size:
            T[rows] -= T[rows, j][:, None] * prow
        d -= d[j] * prow
        basis[r] = j
        movable[j] = False
        movable[out] = hi[out] > lo[out]
        tab.pivots += 1


def _solve_lp_warm(lp: LinearProgram, start: _Basis, max_pivots: int | None = None,
                   tableau: np.ndarray | None = None) -> tuple[MipSolution, "_Basis | None"]:
    """Re-solve ``lp`` from the optimal basis of an LP that differs only in its bounds.

    ``tableau`` is that basis's ``B^-1 [A I]``; when given it is updated in
    place instead of being refactored.
    """
    m, n = lp.num_rows, lp.num_vars
    if max_pivots is None:
        max_pivots = 50 * (m + n) + 1000
    slack_lo, slack_hi = _slack_bounds(lp)
    A_full = np.hstack([lp.A, np.eye(m)])
    lo = np.concatenate([lp.lb, slack_lo])
    hi = np.concatenate([lp.ub, slack_hi])
    x = np.where(start.at_upper, hi, lo)
    x = np.where(np.isfinite(x), x, np.where(np.isfinite(lo), lo, np.where(np.isfinite(hi), hi, 0.0)))
    basis = start.basic.copy()
    x[basis] = 0.0
    if tableau is None:
        try:
            T = np.linalg.solve(A_full[:, basis], np.column_stack([A_full, lp.b]))
        except np.linalg.LinAlgError:
            return _solve_lp_cold(lp, max_pivots)
        T, binv_b = T[:, :-1], T[:, -1]
    else:
        T = tableau
        binv_b = T[:, n:] @ lp.b
    x[basis] = binv_b - T @ x
    cost = np.concatenate([lp.c, np.zeros(m)])
    tab = _Tableau(T=T, basis=basis, x=x, lo=lo, hi=hi)
    try:
        if _run_dual_simplex(tab, cost, max_pivots) is Status.INFEASIBLE:
            return MipSolution(Status.INFEASIBLE, None, np.inf, np.inf, pivots=tab.pivots), None
        # primal clean-up; normally zero pivots
        if _run_simplex(tab, cost, max_pivots) is Status.UNBOUNDED:
            return MipSolution(Status.UNBOUNDED, None, -np.inf, -np.inf, pivots=tab.pivots), None
    except SolverError:
        return _solve_lp_cold(lp, max_pivots)
    # re-derive the basics from the final tableau to shed pivot-by-pivot drift
    x[basis] = 0.0
    x[basis] = T[:, n:] @ lp.b - T @ x
    if lp.max_violation(x[:n]) > 1e-7:  # pragma: no cover - numerical drift
        return _solve_lp_cold(lp, max_pivots)
    return _finish(lp, None, tab)


# ---------------------------------------------------------------------------
# branch and bound
# ---------------------------------------------------------------------------


def _most_fractional(x: np.ndarray, binaries: np.ndarray) -> int | None:
    frac = np.abs(x[binaries] - np.round(x[binaries]))
    if frac.max(initial=0.0) <= INT_TOL:
        return None
    # closest to 0.5; argmax returns the lowest index on ties
    return int(binaries[np.argmax(frac)])


def _polish_incumbent(mip: MixedIntegerProgram, x: np.ndarray, lb: np.ndarray, ub: np.ndarray):
    """Snap binaries to 0/1 and re-derive continuous values if needed."""
    bins = np.asarray(mip.binaries, dtype=int)
    snapped = x.copy()
    snapped[bins] = np.round(x[bins])
    if mip.lp.max_violation(snapped) <= FEAS_TOL:
        return snapped, float(mip.lp.c @ snapped)
    lb = lb.copy()
    ub = ub.copy()
    lb[bins] = snapped[bins]
    ub[bins] = snapped[bins]
    fixed = solve_lp(mip.lp.with_bounds(lb, ub))
    if not fixed.optimal:  # pragma: no cover - numerically pathological
        return None, np.inf
    return fixed.x, fixed.objective


def solve_mip(mip: MixedIntegerProgram, node_limit: int = 100_000) -> MipSolution:
    """Best-first branch and bound over the binary variables of ``mip``.

    Branches on the most fractional binary (lowest index on ties), explores
    the node with the smallest parent bound first (FIFO on ties) and stops
    once the incumbent is within ``GAP_TOL`` of the best open bound. Child
    relaxations start from the parent's optimal basis with a dual simplex.
    """
    lp = mip.lp
    bins = np.asarray(mip.binaries, dtype=int)
    # final tableaux of recently solved nodes, keyed by node id, with their
    # number of generations since the last refactorization
    tableaux: OrderedDict[int, list] = OrderedDict()  # id -> [T, age, children left]
    cached_bytes = 0
    counter = itertools.count()
    heap: list = [(-np.inf, next(counter), lp.lb.copy(), lp.ub.copy(), None)]
    incumbent: np.ndarray | None = None
    inc_obj = np.inf
    nodes = 0
    pivots = 0
    unbounded_root = False

    def dominated(bound: float) -> bool:
        if mip.integral_objective and np.isfinite(bound):
            bound = np.ceil(bound - GAP_TOL)
        return bound >= inc_obj - GAP_TOL

    while heap:
        parent_bound, _, lb, ub, warm = heap[0]
        if dominated(parent_bound):
            break  # every open node is dominated
        if nodes >= node_limit:
            bound = min(parent_bound, inc_obj)
            return MipSolution(Status.NODE_LIMIT, incumbent, inc_obj, bound, nodes, pivots)
        _, node_id, *_ = heapq.heappop(heap)
        nodes += 1
        node_lp = lp._tightened(lb, ub)
        age = 0
        if warm is None:
            relax, basis = _solve_lp_cold(node_lp)
        else:
            start, parent = warm
            cached = tableaux.get(parent)
            tableau = None
            if cached is not None:
                cached[2] -= 1
                if cached[2] == 0:
                    del tableaux[parent]
                    cached_bytes -= cached[0].nbytes
                if cached[1] < _TABLEAU_REUSE:
                    age = cached[1] + 1
                    tableau = cached[0] if cached[2] == 0 else cached[0].copy()
            relax, basis = _solve_lp_warm(node_lp, start, tableau=tableau)
        pivots += relax.pivots
        if basis is not None and basis.tableau is not None:
            tableaux[node_id] = [basis.tableau, age, 2]
            cached_bytes += basis.tableau.nbytes
            while cached_bytes > _TABLEAU_BYTES:
                cached_bytes -= tableaux.popitem(last=False)[1][0].nbytes
            basis = _Basis(basis.basic, basis.at_upper)
        if relax.status is Status.INFEASIBLE:
            continue
        if relax.status is Status.UNBOUNDED:
            if nodes == 1:
                unbounded_root = True
                break
            continue  # pragma: no cover - children of a bounded root stay bounded
        if dominated(relax.objective):
            continue
        j = _most_fractional(relax.x, bins) if bins.size else None
        if j is None:
            cand, cand_obj = _polish_incumbent(mip, relax.x, lb, ub) if bins.size else (relax.x, relax.objective)
            if cand is not None and cand_obj < inc_obj:
                incumbent, inc_obj = cand, cand_obj
            continue
        for val in (0.0, 1.0):
            clb, cub = lb.copy(), ub.copy()
            clb[j] = cub[j] = val
            heapq.heappush(heap, (relax.objective, next(counter), clb, cub, None if basis is None else (basis, node_id)))

    if unbounded_root:
        return MipSolution(Status.UNBOUNDED, None, -np.inf, -np.inf, nodes, pivots)
    if incumbent is None:
        return MipSolution(Status.INFEASIBLE, None, np.inf, np.inf, nodes, pivots)
    bound = min(heap[0][0], inc_obj) if heap else inc_obj
    return MipSolution(Status.OPTIMAL, incumbent, inc_obj, bound, nodes, pivots)


def to_lp_text(program: LinearProgram | MixedIntegerProgram) -> str:
    """Plain-text dump in an LP-file-like layout with stable line order."""
    if isinstance(program, MixedIntegerProgram):
        lp, binaries = program.lp, program.binaries
    else:
        lp, binaries = program, ()
    names = lp.names or tuple(f"x{i}" for i in range(lp.num_vars))

    def linear(coefs) -> str:
        terms = [f"{'-' if v < 0 else '+'} {abs(v):.12g} {names[i]}" for i, v in enumerate(coefs) if v != 0]
        if not terms:
            return "0"
        text = " ".join(terms)
        return text[2:] if text.startswith("+ ") else text

    lines = ["Minimize", f" obj: {linear(lp.c)}", "Subject To"]
    for r in range(lp.num_rows):
        lines.append(f" r{r}: {linear(lp.A[r])} {lp.senses[r]} {lp.b[r]:.12g}")
    lines.append("Bounds")
    for i in range(lp.num_vars):
        lo = "-inf" if lp.lb[i] == -np.inf else f"{lp.lb[i]:.12g}"
        hi = "+inf" if lp.ub[i] == np.inf else f"{lp.ub[i]:.12g}"
        lines.append(f" {lo} <= {names[i]} <= {hi}")
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[i] for i in binaries))
    lines.append("End")
    return "\n".join(lines) + "\n"
