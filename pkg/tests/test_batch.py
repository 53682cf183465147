import json

import pytest

from mndsolver.batch import (
    CSV_HEADER, BatchConfig, BatchResultRow, histogram, rows_to_csv, run_batch, summarize,
)
from mndsolver.knapsack import brute_force_mnd, generate_instance, verify_gne


@pytest.fixture(scope="module")
def small_batch(tmp_path_factory):
    out = tmp_path_factory.mktemp("batch")
    cfg = BatchConfig(pairs=((2, 2), (2, 3)), instances=10, base_seed=3, out_dir=out, timings=False)
    return cfg, run_batch(cfg)


def test_rows_converge_and_match_brute_force(small_batch):
    cfg, result = small_batch
    assert len(result.rows) == 20
    for row in result.rows:
        assert row.converged and row.delta_u <= 0.01
        inst = generate_instance(row.seed, row.players, row.markets)
        assert row.delta_u == pytest.approx(brute_force_mnd(inst)[0], abs=1e-6)
        assert row.verified_gne
        assert verify_gne(inst, row.y, tol=cfg.epsilon)


def test_generation_order(small_batch):
    _, result = small_batch
    assert [(r.pair, r.seed) for r in result.rows] == [(p, s) for p in ("2x2", "2x3") for s in range(3, 13)]


def test_output_files(small_batch):
    cfg, result = small_batch
    out = cfg.out_dir
    lines = (out / "results.csv").read_text().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 21
    assert lines[1].endswith(",,")  # timing columns left empty
    jsonl = [json.loads(line) for line in (out / "rows.jsonl").read_text().splitlines()]
    assert len(jsonl) == 20 and "max_iter_time_s" not in jsonl[0]
    summary = json.loads((out / "summary.json").read_text())
    assert summary["pairs"]["2x2"]["within_epsilon"] == 10
    for pid in ("2x2", "2x3"):
        hist = [tuple(map(int, line.split())) for line in (out / f"hist_{pid}.txt").read_text().splitlines()]
        assert sum(n for _, n in hist) == 10
        assert hist == sorted(result.histograms[pid].items())


def test_rerun_is_byte_identical(small_batch, tmp_path):
    cfg, result = small_batch
    again = run_batch(BatchConfig(pairs=cfg.pairs, instances=cfg.instances, base_seed=cfg.base_seed,
                                  out_dir=tmp_path, timings=False))
    assert (tmp_path / "results.csv").read_bytes() == (cfg.out_dir / "results.csv").read_bytes()
    assert rows_to_csv(again.rows, False) == rows_to_csv(result.rows, False)


def test_workers_match_serial(small_batch):
    cfg, result = small_batch
    par = run_batch(BatchConfig(pairs=cfg.pairs, instances=cfg.instances, base_seed=cfg.base_seed,
                                workers=2, timings=False))
    assert rows_to_csv(sorted(par.rows, key=lambda r: (r.pair, r.seed)), False) == rows_to_csv(result.rows, False)


def test_huge_epsilon_single_iteration():
    result = run_batch(BatchConfig(pairs=((3, 3),), instances=1, epsilon=1e9))
    assert result.rows[0].iterations == 1
    assert result.rows[0].max_iter_time_s >= 0


def test_histogram_fills_gaps():
    rows = [BatchResultRow("p", 1, 1, s, it, "ToleranceReached", 0.0, 0.0, 0.0) for s, it in enumerate([1, 1, 4])]
    assert histogram(rows) == {1: 2, 2: 0, 3: 0, 4: 1}
    assert histogram([]) == {}


def test_error_rows_are_counted():
    rows = [BatchResultRow("1x1", 1, 1, 0, 0, "Error", float("nan"), float("nan"), float("nan"), error="boom")]
    summary, hists = summarize(rows, BatchConfig(pairs=((1, 1),), instances=1))
    assert summary["pairs"]["1x1"]["errors"] == 1
    assert summary["pairs"]["1x1"]["iteration_mode"] is None
    assert hists["1x1"] == {0: 1}


def test_config_validation():
    with pytest.raises(ValueError):
        BatchConfig(instances=0)
    with pytest.raises(ValueError):
        BatchConfig(pairs=())
    with pytest.raises(ValueError):
        BatchConfig(epsilon=-1)
