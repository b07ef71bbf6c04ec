"""Command-line entry point: ``run``, ``bench`` and ``inspect``.

Exit codes: 0 success, 2 invalid config or usage, 3 runtime failure or
invalid trace.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Sequence

from . import __version__
from .algorithms import EaParams, HyperbandParams, MutantUcbParams
from .errors import BanditError, InvalidParams, TraceError
from .harness import ALGORITHMS, AlgorithmSpec, ExperimentSpec, compare, run_algorithm, run_experiment
from .landscapes import landscape_from_dict
from .trace import SCHEMA_VERSION, EventTrace, replay

log = logging.getLogger(__name__)


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    """Every knob a run or benchmark reads, with defaults scaled down from T=10,000."""

    T: int = 2000
    N: int = 10
    E: float = 0.05
    K: int | None = None
    schedule: str = "linear"
    warm_start: float = 0.0
    R: int | None = None
    eta: int = 3
    K_ea: int | None = None
    sh_n: int | None = None
    algorithms: list[str] = field(default_factory=lambda: list(ALGORITHMS))
    landscape: dict = field(
        default_factory=lambda: {
            "kind": "vector", "dims": 12, "alphabet": 3, "seed": 0,
            "slope": 0.05, "curve_rate": 0.2, "noise_sd": 0.02,
        }
    )
    replications: int = 1
    base_seed: int = 0
    out: str = "runs"
    workers: int = 1
    base_dir: Path | None = field(default=None, repr=False)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "RunConfig":
        known = {f.name for f in fields(cls)} - {"base_dir"}
        for key in data:
            if key not in known:
                raise ConfigError(f"unknown config key {key!r}")
        cfg = cls(**data, base_dir=base_dir)
        cfg.check()
        return cfg

    @classmethod
    def load(cls, path: str | Path, overrides: dict | None = None) -> "RunConfig":
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
        if not isinstance(data, dict):
            raise ConfigError(f"config {path} must hold a JSON object")
        data.update(overrides or {})
        return cls.from_dict(data, base_dir=path.parent)

    def check(self) -> None:
        for key in ("T", "N", "eta", "replications", "workers"):
            value = getattr(self, key)
            if not isinstance(value, int) or isinstance(value, bool) or value < 1:
                raise ConfigError(f"config key {key!r} must be a positive integer, got {value!r}")
        for key in ("K", "R", "K_ea", "sh_n"):
            value = getattr(self, key)
            if value is not None and (not isinstance(value, int) or value < 1):
                raise ConfigError(f"config key {key!r} must be a positive integer, got {value!r}")
        if not isinstance(self.base_seed, int) or self.base_seed < 0:
            raise ConfigError(f"config key 'base_seed' must be a non-negative integer, got {self.base_seed!r}")
        unknown = [a for a in self.algorithms if a not in ALGORITHMS]
        if unknown:
            raise ConfigError(f"config key 'algorithms' lists unknown algorithms {unknown}")
        if not isinstance(self.landscape, dict):
            raise ConfigError("config key 'landscape' must be an object")

    @property
    def models(self) -> int:
        return self.T // self.N

    def params_for(self, name: str) -> dict:
        """Algorithm parameters derived from the shared knobs, validated."""
        # K a bit below T/N; K_ea well below it.
        K = self.K if self.K is not None else max(1, self.models * 3 // 4)
        K_ea = self.K_ea if self.K_ea is not None else max(1, self.models // 10)
        if name == "mutant-ucb":
            p = MutantUcbParams(T=self.T, E=self.E, K=K, N=self.N, schedule=self.schedule, warm_start=self.warm_start)
            p.validate()
            return vars(p).copy()
        if name == "ucb-e":
            if self.T < K:
                raise InvalidParams(f"UCB-E needs T >= K, got T={self.T}, K={K}")
            return {"T": self.T, "E": self.E, "K": K}
        if name == "rs":
            if self.T < self.N:
                raise InvalidParams(f"random search needs N <= T, got T={self.T}, N={self.N}")
            return {"T": self.T, "N": self.N}
        if name == "sh":
            return {"B": self.T, "n": self.sh_n or self.models, "eta": self.eta, "N": self.N}
        if name == "hyperband":
            p = HyperbandParams(T=self.T, R=self.R or self.N, eta=self.eta)
            p.validate()
            return vars(p).copy()
        if name == "ea":
            p = EaParams(T=self.T, K_ea=K_ea, N=self.N)
            p.validate()
            return vars(p).copy()
        raise ConfigError(f"unknown algorithm {name!r}")

    def space(self) -> Any:
        try:
            return landscape_from_dict(self.landscape, self.base_dir)
        except (ValueError, TypeError, KeyError) as exc:
            raise ConfigError(f"config key 'landscape': {exc}") from None
        except OSError as exc:
            raise ConfigError(f"config key 'landscape': cannot read {exc.filename}") from None

    def experiment(self, out_dir: Path | None = None) -> ExperimentSpec:
        algos = [AlgorithmSpec(name, self.params_for(name)) for name in self.algorithms]
        return ExperimentSpec(
            algorithms=algos,
            space=self.space(),
            replications=self.replications,
            base_seed=self.base_seed,
            out_dir=out_dir,
            workers=self.workers,
        )


def _overrides(pairs: Sequence[str]) -> dict:
    out = {}
    for pair in pairs:
        key, sep, raw = pair.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {pair!r}")
        try:
            out[key] = json.loads(raw)
        except json.JSONDecodeError:
            out[key] = raw
    return out


def _load(args: argparse.Namespace, extra: dict) -> RunConfig:
    overrides = _overrides(args.set or [])
    overrides.update({k: v for k, v in extra.items() if v is not None})
    if args.config is None:
        return RunConfig.from_dict(overrides)
    return RunConfig.load(args.config, overrides)


def cmd_run(args: argparse.Namespace) -> int:
    cfg = _load(args, {"base_seed": args.seed, "out": args.out})
    params = cfg.params_for(args.algo)
    space = cfg.space()
    result = run_algorithm(args.algo, space, params, cfg.base_seed)

    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = f"{args.algo}-seed{cfg.base_seed}"
    result.trace.save(out / f"{stem}.trace.jsonl")
    result.save(out / f"{stem}.result.json")

    config = space.decode(result.config)
    parts = [
        f"algo={args.algo}",
        f"seed={cfg.base_seed}",
        f"selected={result.selected}",
        f"mean={result.mean:.6f}",
        f"true={space.true_accuracy(config):.6f}",
    ]
    try:
        parts.append(f"oracle={space.oracle_best()[1]:.6f}")
    except BanditError:
        pass
    parts += [f"tested_models={result.tested_models}", f"subtrains={result.consumed}"]
    print(" ".join(parts))
    for w in result.warnings:
        print(f"warning: {w}")
    return 0


def cmd_bench(args: argparse.Namespace) -> int:
    cfg = _load(args, {"base_seed": args.seed, "out": args.out, "workers": args.workers})
    out = Path(cfg.out)
    if out.exists() and any(out.iterdir()) and not args.force:
        print(f"error: output directory {out} is not empty; pass --force to overwrite", file=sys.stderr)
        return 2
    spec = cfg.experiment(out)
    summary = run_experiment(spec)
    print(summary.table(), end="")

    names = list(summary.algorithms)
    ref = "mutant-ucb" if "mutant-ucb" in names else names[0]
    metric = "final_true_accuracy"
    lines = [compare(summary[other], summary[ref], metric).report() for other in names if other != ref]
    (out / "comparison.txt").write_text("\n".join(lines) + ("\n" if lines else ""))
    for line in lines:
        print(line)
    return 0


def cmd_inspect(args: argparse.Namespace) -> int:
    try:
        trace = EventTrace.load(args.trace)
        rep = replay(trace)
    except OSError as exc:
        print(f"error: cannot read {args.trace}: {exc.strerror}", file=sys.stderr)
        return 3
    except TraceError as exc:
        print(f"invalid trace: {exc}", file=sys.stderr)
        return 3

    h = trace.header
    print(f"algorithm={h.get('algorithm')} seed={h.get('seed')} schema={h.get('schema')}")
    print(f"params={json.dumps(h.get('params'), sort_keys=True)}")
    print(f"space={h.get('space', {}).get('kind')}")
    print("events: " + ", ".join(f"{k}={v}" for k, v in sorted(rep.counts.items())))
    res = rep.result
    print(f"selected={res.selected} trains={res.trains} mean={res.mean:.6f} "
          f"tested_models={res.tested_models} subtrains={res.consumed}")

    rows = rep.arms
    if args.arm is not None:
        if not 0 <= args.arm < len(rows):
            print(f"error: trace has no arm {args.arm}", file=sys.stderr)
            return 2
        a = rows[args.arm]
        for key in ("arm", "origin", "parent", "pulls", "trains", "mutants", "train_progress", "mean", "config"):
            print(f"{key}: {a[key]}")
        return 0
    print("arm\tpulls\ttrains\tmutants\tmean")
    for a in rows:
        print(f"{a['arm']}\t{a['pulls']}\t{a['trains']}\t{a['mutants']}\t{a['mean']:.6f}")
    print("valid")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mutant-ucb", description=__doc__.splitlines()[0])
    parser.add_argument(
        "--version", action="version", version=f"%(prog)s {__version__} (trace schema {SCHEMA_VERSION})"
    )
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute one algorithm once")
    run.add_argument("--algo", required=True, choices=ALGORITHMS)
    run.add_argument("--config", type=Path)
    run.add_argument("--seed", type=int)
    run.add_argument("--out")
    run.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key (JSON value)")
    run.set_defaults(func=cmd_run)

    bench = sub.add_parser("bench", help="run the paired multi-algorithm experiment")
    bench.add_argument("--config", type=Path, required=True)
    bench.add_argument("--seed", type=int, help="override base_seed")
    bench.add_argument("--out")
    bench.add_argument("--workers", type=int)
    bench.add_argument("--force", action="store_true", help="write into a non-empty output directory")
    bench.add_argument("--set", action="append", metavar="KEY=VALUE")
    bench.set_defaults(func=cmd_bench)

    inspect = sub.add_parser("inspect", help="validate and summarize a trace file")
    inspect.add_argument("trace", type=Path)
    inspect.add_argument("--arm", type=int)
    inspect.set_defaults(func=cmd_inspect)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidParams) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (BanditError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
