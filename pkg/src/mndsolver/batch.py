"""Batch experiments over randomly generated knapsack games."""

from __future__ import annotations

import csv
import io
import json
import logging
import statistics
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .cutting_plane import SolverConfig, solve_mnd
from .knapsack import DEFAULT_GAMMA, KnapsackGame, generate_instance, verify_gne

log = logging.getLogger(__name__)

CSV_HEADER = ("pair", "players", "markets", "seed", "iterations", "status",
              "delta_u", "max_iter_time_s", "mean_iter_time_s")
DESK_PAIRS = ((3, 4), (5, 6), (5, 10))
FULL_PAIRS = tuple((j, l) for j in (5, 25, 50) for l in (10, 20))


@dataclass(frozen=True)
class BatchConfig:
    pairs: tuple[tuple[int, int], ...] = DESK_PAIRS
    instances: int = 100
    base_seed: int = 0
    epsilon: float = 0.01
    gamma: int = DEFAULT_GAMMA
    out_dir: Path | None = None
    workers: int = 1
    max_iterations: int = 100
    timings: bool = True
    verify: bool = True

    def __post_init__(self):
        if self.instances < 1 or self.workers < 1 or self.gamma < 1 or self.max_iterations < 1:
            raise ValueError("counts must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if not self.pairs or any(j < 1 or l < 1 for j, l in self.pairs):
            raise ValueError("pairs must be nonempty (players, markets) tuples of positive ints")


@dataclass
class BatchResultRow:
    pair: str
    players: int
    markets: int
    seed: int
    iterations: int
    status: str
    delta_u: float
    max_iter_time_s: float
    mean_iter_time_s: float
    lbp_nodes: list[int] = field(default_factory=list)
    llp_nodes: list[int] = field(default_factory=list)
    verified_gne: bool | None = None
    y: list[int] = field(default_factory=list)
    error: str | None = None

    @property
    def converged(self) -> bool:
        return self.status in ("EquilibriumFound", "ToleranceReached")


@dataclass
class BatchResult:
    rows: list[BatchResultRow]
    summary: dict
    histograms: dict[str, dict[int, int]]

    @property
    def all_converged(self) -> bool:
        return all(r.converged for r in self.rows)


def pair_id(players: int, markets: int) -> str:
    return f"{players}x{markets}"


def _solve_one(task) -> BatchResultRow:
    players, markets, seed, cfg = task
    pid = pair_id(players, markets)
    try:
        inst = generate_instance(seed, players, markets, cfg.gamma)
        report = solve_mnd(KnapsackGame(inst), config=SolverConfig(cfg.epsilon, cfg.max_iterations))
    except Exception as exc:  # recorded in-row; the batch carries on
        log.warning("instance %s seed %d failed: %s", pid, seed, exc)
        return BatchResultRow(pid, players, markets, seed, 0, "Error", float("nan"),
                              float("nan"), float("nan"), error=f"{type(exc).__name__}: {exc}")
    times = report.iter_seconds
    verified = None
    if cfg.verify and report.status.converged:
        verified = verify_gne(inst, report.y, tol=cfg.epsilon)
    return BatchResultRow(
        pid, players, markets, seed, report.iterations, report.status.value, report.final_delta_u,
        max(times), statistics.fmean(times), list(report.lbp_nodes), list(report.llp_nodes),
        verified, [int(v) for v in report.y],
    )


def _tasks(cfg: BatchConfig):
    for players, markets in cfg.pairs:
        for k in range(cfg.instances):
            yield players, markets, cfg.base_seed + k, cfg


def histogram(rows: list[BatchResultRow]) -> dict[int, int]:
    """Iteration count -> frequency, with every bin from the smallest to the largest count."""
    counts = Counter(r.iterations for r in rows)
    if not counts:
        return {}
    return {b: counts.get(b, 0) for b in range(min(counts), max(counts) + 1)}


def summarize(rows: list[BatchResultRow], cfg: BatchConfig) -> tuple[dict, dict[str, dict[int, int]]]:
    summary = {"epsilon": cfg.epsilon, "gamma": cfg.gamma, "base_seed": cfg.base_seed,
               "instances_per_pair": cfg.instances, "pairs": {}}
    hists = {}
    for players, markets in cfg.pairs:
        pid = pair_id(players, markets)
        sub = [r for r in rows if r.pair == pid]
        hist = histogram(sub)
        hists[pid] = hist
        ok = [r for r in sub if r.converged]
        iters = [r.iterations for r in ok]
        entry = {
            "players": players,
            "markets": markets,
            "instances": len(sub),
            "converged": len(ok),
            "within_epsilon": sum(1 for r in ok if r.delta_u <= cfg.epsilon),
            "errors": sum(1 for r in sub if r.error),
            "iteration_mode": Counter(iters).most_common(1)[0][0] if iters else None,
            "max_iterations": max(iters) if iters else None,
            "histogram": {str(k): v for k, v in hist.items()},
        }
        if cfg.verify:
            entry["verified_gne"] = sum(1 for r in ok if r.verified_gne)
        if cfg.timings and ok:
            entry["max_iter_time_s"] = max(r.max_iter_time_s for r in ok)
            entry["mean_iter_time_s"] = statistics.fmean(r.mean_iter_time_s for r in ok)
        summary["pairs"][pid] = entry
    return summary, hists


def rows_to_csv(rows: list[BatchResultRow], timings: bool = True) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for r in rows:
        tmax = f"{r.max_iter_time_s:.6f}" if timings else ""
        tmean = f"{r.mean_iter_time_s:.6f}" if timings else ""
        writer.writerow([r.pair, r.players, r.markets, r.seed, r.iterations, r.status,
                         repr(float(r.delta_u)), tmax, tmean])
    return buf.getvalue()


def run_batch(cfg: BatchConfig, progress=None) -> BatchResult:
    """Generate and solve every instance; write outputs if ``cfg.out_dir`` is set.

    Rows come back in generation order (pair, then seed) for any worker count.
    """
    tasks = list(_tasks(cfg))
    if cfg.workers == 1:
        rows = []
        for t in tasks:
            rows.append(_solve_one(t))
            if progress:
                progress(rows[-1])
    else:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            rows = []
            for row in pool.map(_solve_one, tasks):
                rows.append(row)
                if progress:
                    progress(row)
    summary, hists = summarize(rows, cfg)
    result = BatchResult(rows, summary, hists)
    if cfg.out_dir is not None:
        write_outputs(result, cfg)
    return result


def write_outputs(result: BatchResult, cfg: BatchConfig) -> None:
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(rows_to_csv(result.rows, cfg.timings))
    with open(out / "rows.jsonl", "w") as fh:
        for r in result.rows:
            rec = asdict(r)
            if not cfg.timings:
                rec.pop("max_iter_time_s")
                rec.pop("mean_iter_time_s")
            fh.write(json.dumps(rec, sort_keys=True) + "\n")
    for pid, hist in result.histograms.items():
        lines = [f"{b} {n}" for b, n in hist.items()]
        (out / f"hist_{pid}.txt").write_text("\n".join(lines) + "\n")
    (out / "summary.json").write_text(json.dumps(result.summary, indent=2, sort_keys=True) + "\n")
