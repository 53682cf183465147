import json

import numpy as np
import pytest

from mndsolver.cutting_plane import (
    CutSet, DuplicateCutError, SolverConfig, Status, SubproblemError, initialize_cuts_joint, solve_lower_bounding,
    solve_lower_level, solve_mnd,
)
from mndsolver.game import FiniteGame, aggregate_objective, per_player_disequilibrium
from mndsolver.knapsack import (
    KnapsackGame, brute_force_gN, brute_force_mnd, generate_instance, total_cost, verify_gne,
)

# (players, markets, seed) needing two iterations from the joint-problem seed
TWO_STEP = (2, 2, 7)


def parabola_game():
    return FiniteGame((1,), [[0.0], [1.0], [2.0], [3.0]], [lambda x, y: float((y[0] - 2.0) ** 2)])


class LyingLowerLevel(FiniteGame):
    """Reports an already-cut point with an impossible value."""

    def lower_level(self, x):
        from mndsolver.game import LowerLevelResult
        return LowerLevelResult(np.array([3.0]), -5.0)


class BrokenLowerLevel(FiniteGame):
    def lower_level(self, x):
        raise RuntimeError("subsolver exploded")


def test_cutset_deduplicates():
    cs = CutSet([[0, 1], [1, 0]])
    assert not cs.add([0.0, 1.0])
    assert cs.add([1, 1])
    assert len(cs) == 3 and [1, 0] in cs and [0, 0] not in cs
    copy = cs.copy()
    copy.add([0, 0])
    assert len(cs) == 3 and len(copy) == 4
    assert cs[0].tolist() == [0, 1]


def test_config_validation():
    with pytest.raises(ValueError):
        SolverConfig(epsilon=0)
    with pytest.raises(ValueError):
        SolverConfig(max_iterations=0)


def test_single_player_seeded_at_optimum_stops_at_step5():
    game = parabola_game()
    assert initialize_cuts_joint(game)[0].tolist() == [2.0]
    report = solve_mnd(game)
    assert report.status is Status.EQUILIBRIUM_FOUND
    assert report.iterations == 1
    assert report.x.tolist() == [2.0]
    assert report.delta_l == [0.0] and report.delta_u == [0.0]
    assert report.delta_u_post_hoc
    assert per_player_disequilibrium(game, report.y).max() <= 1e-6


def test_single_player_lower_level_is_own_optimum():
    game = parabola_game()
    for x in ([0.0], [3.0]):
        res = solve_lower_level(game, x)
        assert res.y.tolist() == [2.0] and res.value == 0.0


def test_duplicate_cut_aborts():
    game = LyingLowerLevel((1,), [[0.0], [1.0], [2.0], [3.0]], [lambda x, y: float((y[0] - 2.0) ** 2)])
    with pytest.raises(DuplicateCutError):
        solve_mnd(game, CutSet([[3.0]]))


def test_subproblem_failure_is_wrapped():
    game = BrokenLowerLevel((1,), [[0.0], [1.0]], [lambda x, y: float(y[0])])
    with pytest.raises(SubproblemError) as info:
        solve_mnd(game)
    assert info.value.iteration == 1
    assert "lower-level" in info.value.stage


def test_rejects_bad_cut_sets():
    game = parabola_game()
    with pytest.raises(ValueError):
        solve_mnd(game, CutSet())
    with pytest.raises(ValueError):
        solve_mnd(game, CutSet([[1.5]]))
    with pytest.raises(ValueError):
        solve_lower_bounding(game, CutSet())


def test_caller_cut_set_is_not_mutated():
    J, L, seed = TWO_STEP
    game = KnapsackGame(generate_instance(seed, J, L))
    cuts = initialize_cuts_joint(game)
    report = solve_mnd(game, cuts)
    assert len(cuts) == 1
    assert len(report.final_cuts) == 2


def test_golden_solve(golden):
    report = solve_mnd(KnapsackGame(golden))
    assert report.status is Status.EQUILIBRIUM_FOUND
    assert report.x.tolist() == [1, 0, 0, 0]
    assert report.final_delta_u == 0.0 == brute_force_mnd(golden)[0]
    assert verify_gne(golden, report.y)


def test_two_step_instance_trace():
    J, L, seed = TWO_STEP
    inst = generate_instance(seed, J, L)
    report = solve_mnd(KnapsackGame(inst))
    assert report.iterations == 2
    assert report.status is Status.EQUILIBRIUM_FOUND
    assert report.delta_l[0] < report.delta_l[1]
    assert report.delta_u[0] > report.delta_u[1] == 0.0
    assert report.cut_counts == [2, 2]


def test_iteration_limit_returns_incumbent():
    J, L, seed = TWO_STEP
    inst = generate_instance(seed, J, L)
    report = solve_mnd(KnapsackGame(inst), config=SolverConfig(max_iterations=1))
    assert report.status is Status.ITERATION_LIMIT
    assert not report.status.converged
    gN = brute_force_gN(inst, report.y[None, :])[0]
    assert total_cost(inst, report.y) - gN == report.final_delta_u


def test_huge_epsilon_stops_after_first_iteration():
    J, L, seed = TWO_STEP
    report = solve_mnd(KnapsackGame(generate_instance(seed, J, L)), config=SolverConfig(epsilon=1e9))
    assert report.iterations == 1
    assert report.status is Status.TOLERANCE_REACHED


def test_new_cut_only_tightens_the_relaxation():
    J, L, seed = TWO_STEP
    game = KnapsackGame(generate_instance(seed, J, L))
    cuts = initialize_cuts_joint(game)
    first = solve_lower_bounding(game, cuts)
    ll = solve_lower_level(game, first.y)
    assert game.contains(ll.y)
    assert cuts.add(ll.y)
    w_old_point = min(game.cut_value(first.y, c) for c in cuts)
    assert w_old_point <= first.w
    second = solve_lower_bounding(game, cuts)
    assert second.value >= first.value


@pytest.mark.parametrize("seed", range(15))
def test_bounds_sandwich_exact_value(seed):
    rng = np.random.default_rng(100 + seed)
    J, L = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    inst = generate_instance(seed, J, L)
    dN, _ = brute_force_mnd(inst)
    report = solve_mnd(KnapsackGame(inst))
    assert report.status.converged
    assert abs(report.final_delta_u - dN) <= 1e-6
    assert all(b >= a - 1e-9 for a, b in zip(report.delta_l, report.delta_l[1:]))
    assert all(b <= a + 1e-9 for a, b in zip(report.delta_u, report.delta_u[1:]))
    for dl, du in zip(report.delta_l, report.delta_u):
        assert dl <= dN <= du + 1e-6
    # a zero gap certifies an equilibrium through a fresh lower-level solve
    fresh = aggregate_objective(KnapsackGame(inst), report.y) - brute_force_gN(inst, report.y[None, :])[0]
    assert fresh <= 1e-6
    assert verify_gne(inst, report.y)


def test_report_bookkeeping(golden):
    records = []
    report = solve_mnd(KnapsackGame(golden), on_iteration=records.append)
    n = report.iterations
    assert len(records) == n == len(report.delta_u) == len(report.cut_counts) == len(report.iter_seconds)
    assert len(report.lbp_nodes) == len(report.llp_nodes) == n
    assert all(t >= 0 for t in report.iter_seconds)
    rec = json.loads(records[0].to_json())
    assert rec["iteration"] == 1 and rec["cuts"] == 1
    summary = report.summary()
    assert summary["status"] == "EquilibriumFound"
    json.dumps(summary)


def test_solve_is_deterministic():
    inst = generate_instance(9, 3, 3)
    a, b = solve_mnd(KnapsackGame(inst)), solve_mnd(KnapsackGame(inst))
    assert a.delta_l == b.delta_l and a.delta_u == b.delta_u
    assert a.y.tolist() == b.y.tolist() and a.lbp_nodes == b.lbp_nodes

