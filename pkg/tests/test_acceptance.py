"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py`` (lines appear in the terminal
summary) or ``python tests/test_acceptance.py``.
"""

import itertools
import sys
import time
from contextlib import contextmanager

import numpy as np
import pytest

from mndsolver.batch import DESK_PAIRS, BatchConfig, run_batch
from mndsolver.continuous import run_example_trace
from mndsolver.cutting_plane import Status, solve_mnd
from mndsolver.kkt import NoCounterexample, construct_multipliers, demonstrate_failure, verify_kkt
from mndsolver.knapsack import (
    KnapsackGame, brute_force_mnd, brute_force_regrets, build_lbp, feasible_points, generate_instance, verify_gne,
)
from mndsolver.milp import Status as MipStatus
from mndsolver.milp import solve_lp, solve_mip
from oracles import binary_enumeration, random_binary_program, random_box_lp, vertex_enumeration, violation

RESULTS: dict[int, str] = {}


@contextmanager
def criterion(number: int, title: str, already_spent: float = 0.0):
    start = time.perf_counter() - already_spent
    try:
        yield
    except BaseException as exc:
        detail = str(exc).splitlines()[0] if str(exc) else ""
        RESULTS[number] = f"[FAIL] criterion {number}: {title} ({type(exc).__name__}: {detail})"
        print(RESULTS[number])
        raise
    RESULTS[number] = f"[PASS] criterion {number}: {title} ({time.perf_counter() - start:.1f}s)"
    print(RESULTS[number])


def tiny_shapes(rng, count, max_binaries=12):
    shapes = [(j, l) for j in range(1, 5) for l in range(1, 7) if 2 <= j * l <= max_binaries]
    return [shapes[k] for k in rng.integers(0, len(shapes), count)]


# --- 1 -------------------------------------------------------------------


def test_criterion_1_example_trace():
    with criterion(1, "two-player power-constraint trace"):
        start = time.perf_counter()
        report = run_example_trace()
        elapsed = time.perf_counter() - start
        assert report.iterations == 1, f"{report.iterations} iterations"
        assert report.status is Status.TOLERANCE_REACHED
        assert report.y.tolist() == [1.0, 0.0], report.y
        assert report.final_delta_u <= 1e-6
        rec = report.records[0]
        assert abs(rec.w - 0.25) <= 2e-3, rec.w
        assert abs(rec.delta_l + 0.25) <= 2e-3, rec.delta_l
        assert abs(rec.gN) <= 2e-3, rec.gN
        assert elapsed < 5, f"{elapsed:.1f}s"


# --- 2 and 3 -------------------------------------------------------------


@pytest.fixture(scope="module")
def oracle_runs():
    rng = np.random.default_rng(20240601)
    runs = []
    start = time.perf_counter()
    for k, (J, L) in enumerate(tiny_shapes(rng, 50)):
        inst = generate_instance(1000 + k, J, L)
        report = solve_mnd(KnapsackGame(inst))
        runs.append((inst, report, brute_force_mnd(inst)[0]))
    return runs, time.perf_counter() - start


def test_criterion_2_oracle_equivalence(oracle_runs):
    runs, elapsed = oracle_runs
    with criterion(2, "solver gap equals enumerated minimum on 50 instances", elapsed):
        start = time.perf_counter()
        assert len(runs) == 50
        for inst, report, dN in runs:
            assert report.status.converged, (inst.seed, report.status)
            assert abs(report.final_delta_u - dN) <= 1e-6, (inst.seed, report.final_delta_u, dN)
            assert verify_gne(inst, report.y, tol=1e-6), inst.seed
        elapsed += time.perf_counter() - start
        assert elapsed < 60, f"{elapsed:.1f}s"


def test_criterion_3_bound_discipline(oracle_runs):
    with criterion(3, "bound monotonicity and sandwich"):
        for inst, report, dN in oracle_runs[0]:
            dl, du = report.delta_l, report.delta_u
            assert all(b >= a for a, b in zip(dl, dl[1:])), (inst.seed, dl)
            assert all(b <= a for a, b in zip(du, du[1:])), (inst.seed, du)
            for lo, hi in zip(dl, du):
                assert lo <= dN <= hi + 1e-6, (inst.seed, lo, dN, hi)


# --- 4 -------------------------------------------------------------------


@pytest.mark.slow
def test_criterion_4_desk_scale():
    with criterion(4, "desk-scale batch: all within epsilon, mode 1, max <= 25"):
        start = time.perf_counter()
        cfg = BatchConfig(pairs=DESK_PAIRS, instances=100, epsilon=0.01)
        result = run_batch(cfg)
        elapsed = time.perf_counter() - start
        for pid, entry in result.summary["pairs"].items():
            assert entry["instances"] == 100
            assert entry["within_epsilon"] == 100, (pid, entry)
            assert entry["iteration_mode"] == 1, (pid, entry["histogram"])
            assert entry["max_iterations"] <= 25, (pid, entry["max_iterations"])
            print(f"  {pid}: histogram {entry['histogram']}, "
                  f"max iteration time {entry.get('max_iter_time_s', float('nan')):.3f}s")
        assert elapsed < 15 * 60, f"{elapsed:.0f}s"


# --- 5 -------------------------------------------------------------------


def test_criterion_5_kkt_universality():
    with criterion(5, "every feasible point is KKT; witnesses on >= 15 of 20"):
        start = time.perf_counter()
        witnesses = 0
        for k, (J, L) in enumerate(itertools.islice(itertools.cycle([(2, 2), (2, 3), (3, 2), (3, 3)]), 20)):
            inst = generate_instance(500 + k, J, L)
            for y in feasible_points(inst):
                assert verify_kkt(inst, y, construct_multipliers(inst, y)) <= 1e-12
            try:
                w = demonstrate_failure(inst)
            except NoCounterexample:
                print(f"  seed {500 + k} ({J}x{L}): NoCounterexample")
                continue
            assert verify_kkt(inst, w.y, w.certificate) <= 1e-12
            assert brute_force_regrets(inst, w.y).max() > 0
            witnesses += 1
        assert witnesses >= 15, witnesses
        elapsed = time.perf_counter() - start
        assert elapsed < 60, f"{elapsed:.1f}s"


# --- 6 -------------------------------------------------------------------


def test_criterion_6_engine_soundness():
    with criterion(6, "MILP and LP engine against enumeration"):
        start = time.perf_counter()
        rng = np.random.default_rng(6)
        for _ in range(200):
            mip = random_binary_program(rng, max_bins=12)
            ref = binary_enumeration(mip)
            sol = solve_mip(mip)
            if ref is None:
                assert sol.status is MipStatus.INFEASIBLE
                continue
            assert sol.status is MipStatus.OPTIMAL
            assert abs(sol.objective - ref[0]) <= 1e-9, (sol.objective, ref[0])
            assert violation(mip.lp, sol.x) <= 1e-9 and mip.is_integral(sol.x)
        for _ in range(200):
            lp = random_box_lp(rng, max_vars=6, max_rows=5)
            ref = vertex_enumeration(lp)
            sol = solve_lp(lp)
            if ref is None:
                assert sol.status is MipStatus.INFEASIBLE
                continue
            assert sol.status is MipStatus.OPTIMAL
            assert abs(sol.objective - ref) <= 1e-8, (sol.objective, ref)
        elapsed = time.perf_counter() - start
        assert elapsed < 120, f"{elapsed:.1f}s"


# --- 7 -------------------------------------------------------------------


def test_criterion_7_linearization_exactness():
    with criterion(7, "linearized objective equals quadratic form exactly"):
        rng = np.random.default_rng(7)
        for k, (J, L) in enumerate(tiny_shapes(rng, 20)):
            inst = generate_instance(700 + k, J, L)
            c = build_lbp(inst, [np.zeros(J * L)]).lp.c
            Y = np.array(list(itertools.product((0.0, 1.0), repeat=J * L))).reshape(-1, J, L)
            z = Y.sum(axis=1)
            steps = (np.arange(1, J + 1)[None, None, :] <= z[:, :, None]).astype(float).reshape(len(Y), -1)
            lifted = np.hstack([Y.reshape(len(Y), -1), steps, z, np.zeros((len(Y), 1))])
            quad = (Y * inst.c).sum(axis=(1, 2)) + (-inst.alpha * z + inst.beta * z**2).sum(axis=1)
            assert np.array_equal(lifted @ c, quad), inst.seed


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q", *sys.argv[1:]]))
