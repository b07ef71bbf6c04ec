"""Seeded multi-replication experiments, summary tables and paired comparisons."""

from __future__ import annotations

import json
import logging
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Callable

from scipy.stats import binomtest

from .algorithms import (
    EaParams,
    HyperbandParams,
    MutantUcbParams,
    ea_run,
    hyperband_run,
    mutant_ucb_run,
    random_search_run,
    successive_halving_run,
    ucb_e_run,
)
from .errors import InvalidComparison, OracleUnavailable
from .trace import EventTrace, RunResult, replay

log = logging.getLogger(__name__)

ALGORITHMS = ("mutant-ucb", "ucb-e", "rs", "sh", "hyperband", "ea")

METRICS = ("final_true_accuracy", "final_observed_mean", "tested_models", "total_subtrains")


def _mutant_ucb(space, p, seed):
    return mutant_ucb_run(space, MutantUcbParams(**p), seed)


def _ucb_e(space, p, seed):
    return ucb_e_run(space, p["T"], p["E"], p["K"], seed)


def _rs(space, p, seed):
    return random_search_run(space, p["T"], p["N"], seed)


def _sh(space, p, seed):
    return successive_halving_run(space, p["B"], p["n"], p["eta"], seed, N=p.get("N"))


def _hyperband(space, p, seed):
    return hyperband_run(space, HyperbandParams(**p), seed)


def _ea(space, p, seed):
    return ea_run(space, EaParams(**p), seed)


RUNNERS: dict[str, Callable[[Any, dict, int], RunResult]] = {
    "mutant-ucb": _mutant_ucb,
    "ucb-e": _ucb_e,
    "rs": _rs,
    "sh": _sh,
    "hyperband": _hyperband,
    "ea": _ea,
}


def run_algorithm(name: str, space: Any, params: dict, seed: int) -> RunResult:
    """Dispatch one run by algorithm name."""
    try:
        runner = RUNNERS[name]
    except KeyError:
        raise ValueError(f"unknown algorithm {name!r}; expected one of {ALGORITHMS}") from None
    return runner(space, params, seed)


@dataclass
class AlgorithmSpec:
    name: str
    params: dict


@dataclass
class ExperimentSpec:
    algorithms: list[AlgorithmSpec]
    space: Any
    replications: int = 1
    base_seed: int = 0
    out_dir: Path | None = None
    workers: int = 1

    def seeds(self) -> list[int]:
        return [self.base_seed + r for r in range(self.replications)]


@dataclass
class Replication:
    seed: int
    selected: int
    tested_models: int
    final_true_accuracy: float
    final_observed_mean: float
    total_subtrains: int
    misidentified: bool | None
    trace_file: str | None = None


@dataclass
class AlgorithmSummary:
    algorithm: str
    replications: list[Replication]
    incumbent_curve: list[float]

    def values(self, metric: str) -> list[float]:
        if metric not in METRICS:
            raise ValueError(f"unknown metric {metric!r}; expected one of {METRICS}")
        return [float(getattr(r, metric)) for r in self.replications]

    def mean(self, metric: str) -> float:
        return statistics.fmean(self.values(metric))

    def sd(self, metric: str) -> float:
        vals = self.values(metric)
        return statistics.stdev(vals) if len(vals) > 1 else 0.0

    @property
    def seeds(self) -> list[int]:
        return [r.seed for r in self.replications]

    @property
    def misidentification_rate(self) -> float | None:
        flags = [r.misidentified for r in self.replications]
        if any(f is None for f in flags):
            return None
        return sum(flags) / len(flags)


@dataclass
class MetricsSummary:
    algorithms: dict[str, AlgorithmSummary]
    oracle: tuple[Any, float] | None = None

    def __getitem__(self, name: str) -> AlgorithmSummary:
        return self.algorithms[name]

    def table(self) -> str:
        """Tab-separated summary, one row per algorithm."""
        cols = [
            "algorithm", "replications", "tested_models_mean", "final_true_accuracy_mean",
            "final_true_accuracy_sd", "final_observed_mean_mean", "misidentification_rate",
            "subtrains_mean",
        ]
        rows = ["\t".join(cols)]
        for name, s in self.algorithms.items():
            rate = s.misidentification_rate
            rows.append(
                "\t".join(
                    [
                        name,
                        str(len(s.replications)),
                        f"{s.mean('tested_models'):.3f}",
                        f"{s.mean('final_true_accuracy'):.6f}",
                        f"{s.sd('final_true_accuracy'):.6f}",
                        f"{s.mean('final_observed_mean'):.6f}",
                        "NA" if rate is None else f"{rate:.4f}",
                        f"{s.mean('total_subtrains'):.3f}",
                    ]
                )
            )
        return "\n".join(rows) + "\n"

    def to_dict(self) -> dict:
        return {
            "oracle": None if self.oracle is None else {"config": self.oracle[0], "asymptote": self.oracle[1]},
            "algorithms": {
                name: {
                    "replications": [asdict(r) for r in s.replications],
                    "incumbent_curve": s.incumbent_curve,
                }
                for name, s in self.algorithms.items()
            },
        }


def _oracle(space: Any) -> tuple[Any, float] | None:
    try:
        return space.oracle_best()
    except (OracleUnavailable, AttributeError):
        return None


def _mean_curve(curves: list[list[float]]) -> list[float]:
    # Shorter curves (e.g. Hyperband stopping early) hold their last value.
    length = max(len(c) for c in curves)
    padded = [c + [c[-1]] * (length - len(c)) for c in curves]
    return [statistics.fmean(col) for col in zip(*padded)]


def summarize(name: str, results: list[RunResult], space: Any, oracle: tuple[Any, float] | None,
              trace_files: list[str | None] | None = None) -> AlgorithmSummary:
    """Aggregate one algorithm's replications."""
    files = trace_files or [None] * len(results)
    reps = []
    for res, path in zip(results, files):
        config = space.decode(res.config)
        reps.append(
            Replication(
                seed=res.seed,
                selected=res.selected,
                tested_models=res.tested_models,
                final_true_accuracy=float(space.true_accuracy(config)),
                final_observed_mean=res.mean,
                total_subtrains=res.consumed,
                misidentified=None if oracle is None else config != oracle[0],
                trace_file=path,
            )
        )
    return AlgorithmSummary(name, reps, _mean_curve([r.incumbent for r in results]))


def _job(name: str, params: dict, space: Any, seed: int) -> str:
    return run_algorithm(name, space, params, seed).trace.dumps()


def run_experiment(spec: ExperimentSpec) -> MetricsSummary:
    """Run every (algorithm, replication) pair and aggregate.

    Replication ``r`` uses seed ``base_seed + r`` for every algorithm. When
    ``out_dir`` is set, traces are written to
    ``out_dir/traces/<algorithm>/rep<r>.jsonl`` and the summary is computed
    from the files on disk; a failing replication aborts the experiment.
    """
    jobs = [(a.name, a.params, spec.space, seed) for a in spec.algorithms for seed in spec.seeds()]
    if spec.workers > 1:
        with ProcessPoolExecutor(max_workers=spec.workers) as pool:
            texts = list(pool.map(_job, *zip(*jobs)))
    else:
        texts = [_job(*j) for j in jobs]

    oracle = _oracle(spec.space)
    out = Path(spec.out_dir) if spec.out_dir is not None else None
    summaries: dict[str, AlgorithmSummary] = {}
    for k, algo in enumerate(spec.algorithms):
        chunk = texts[k * spec.replications : (k + 1) * spec.replications]
        files: list[str | None] = []
        results = []
        for r, text in enumerate(chunk):
            if out is not None:
                path = out / "traces" / algo.name / f"rep{r:03d}.jsonl"
                try:
                    path.parent.mkdir(parents=True, exist_ok=True)
                    path.write_text(text)
                    text = path.read_text()
                except OSError as exc:
                    raise OSError(f"cannot write trace {path}: {exc}") from exc
                files.append(str(path.relative_to(out)))
            else:
                files.append(None)
            results.append(replay(EventTrace.loads(text)).result)
        summaries[algo.name] = summarize(algo.name, results, spec.space, oracle, files)
        log.info("%s: %d replications done", algo.name, spec.replications)

    summary = MetricsSummary(summaries, oracle)
    if out is not None:
        write_outputs(summary, out)
    return summary


def write_outputs(summary: MetricsSummary, out: Path) -> None:
    (out / "summary.tsv").write_text(summary.table())
    (out / "summary.json").write_text(json.dumps(summary.to_dict(), indent=2) + "\n")
    curves = out / "curves"
    curves.mkdir(parents=True, exist_ok=True)
    for name, s in summary.algorithms.items():
        lines = ["subtrains\tbest_mean"] + [f"{i + 1}\t{v:.6f}" for i, v in enumerate(s.incumbent_curve)]
        (curves / f"{name}.tsv").write_text("\n".join(lines) + "\n")


@dataclass
class Comparison:
    metric: str
    a: str
    b: str
    differences: list[float]
    mean_difference: float
    wins_a: int
    wins_b: int
    ties: int
    p_value: float

    def report(self) -> str:
        return (
            f"{self.b} vs {self.a} on {self.metric}: mean diff {self.mean_difference:+.6f}, "
            f"wins {self.wins_b}/{self.wins_a}/{self.ties} (B/A/tie), sign-test p={self.p_value:.3g}"
        )


def compare(a: AlgorithmSummary, b: AlgorithmSummary, metric: str = "final_true_accuracy") -> Comparison:
    """Paired comparison of ``b`` against ``a`` with a two-sided sign test.

    Differences are ``b - a`` per replication; ties are dropped from the
    sign test, and with no untied pair the p-value is 1.
    """
    if a.seeds != b.seeds:
        raise InvalidComparison(f"{a.algorithm} and {b.algorithm} were not run on the same seeds")
    diffs = [vb - va for va, vb in zip(a.values(metric), b.values(metric))]
    wins_b = sum(d > 0 for d in diffs)
    wins_a = sum(d < 0 for d in diffs)
    n = wins_a + wins_b
    p = binomtest(wins_b, n, 0.5).pvalue if n else 1.0
    return Comparison(
        metric=metric,
        a=a.algorithm,
        b=b.algorithm,
        differences=diffs,
        mean_difference=statistics.fmean(diffs) if diffs else 0.0,
        wins_a=wins_a,
        wins_b=wins_b,
        ties=len(diffs) - n,
        p_value=min(1.0, float(p)),
    )


__all__ = [
    "ALGORITHMS",
    "AlgorithmSpec",
    "AlgorithmSummary",
    "Comparison",
    "ExperimentSpec",
    "MetricsSummary",
    "Replication",
    "compare",
    "run_algorithm",
    "run_experiment",
    "summarize",
    "write_outputs",
]
