"""Simulated search spaces standing in for "train a model, read validation accuracy".

Two families:

* ``VectorLandscape``: configurations are integer vectors; the asymptotic
  accuracy falls linearly with Hamming distance to a hidden optimum, and
  each sub-train moves along a saturating learning curve.
* ``TabularLandscape``: explicit per-configuration curves and mutation
  neighbors, loaded from JSON. Used for golden traces.

Tabular file schema (JSON object, unknown keys rejected)::

    {
      "n_max": 4,                  # every curve has at least this many points
      "deterministic": true,       # no noise, no RNG draw in sub_train
      "noise_sd": 0.0,             # optional, only used when not deterministic
      "arms": [
        {"config_id": "a", "curve": [0.5, 0.6, 0.65, 0.7],
         "neighbors": ["b"], "asymptote": 0.7},
        ...
      ]
    }

``curve[i]`` is the accuracy after ``i + 1`` cumulative sub-trains.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

import numpy as np

from .core import RngStreams
from .errors import CrossoverUnsupported, CurveExhausted, MutationImpossible, OracleUnavailable

ORACLE_LIMIT = 10**7


def _clamp(x: float, lo: float = 0.0, hi: float = 1.0) -> float:
    return min(hi, max(lo, x))


def hamming(a: Sequence[int], b: Sequence[int]) -> int:
    return sum(x != y for x, y in zip(a, b))


def one_point_crossover(a: Sequence[int], b: Sequence[int], cut: int) -> tuple[int, ...]:
    return tuple(a[:cut]) + tuple(b[cut:])


@dataclass(frozen=True)
class VectorLandscape:
    dims: int
    alphabet: int
    optimum: tuple[int, ...]
    slope: float = 0.05
    a_max: float = 0.95
    a_min: float = 0.0
    curve_rate: float = 0.5
    noise_sd: float = 0.0
    overfit_peak: int | None = None
    overfit_decay: float = 0.0
    supports_crossover: bool = field(default=True, init=False)

    def __post_init__(self) -> None:
        if self.dims < 1 or self.alphabet < 1:
            raise ValueError("dims and alphabet must be positive")
        object.__setattr__(self, "optimum", tuple(int(v) for v in self.optimum))
        if len(self.optimum) != self.dims or not all(0 <= v < self.alphabet for v in self.optimum):
            raise ValueError(f"optimum must be a length-{self.dims} vector over 0..{self.alphabet - 1}")
        if not 0.0 <= self.a_min <= self.a_max <= 1.0:
            raise ValueError("need 0 <= a_min <= a_max <= 1")
        if self.slope < 0:
            raise ValueError("slope must be >= 0")
        if not 0.0 < self.curve_rate < 1.0:
            raise ValueError("curve_rate must lie in (0, 1)")
        if self.noise_sd < 0:
            raise ValueError("noise_sd must be >= 0")
        if self.overfit_peak is not None and (self.overfit_peak < 1 or self.overfit_decay < 0):
            raise ValueError("overfit needs peak >= 1 and decay >= 0")

    @classmethod
    def generate(cls, dims: int, alphabet: int, seed: int = 0, **kwargs: Any) -> "VectorLandscape":
        """Landscape whose hidden optimum is drawn from ``seed``."""
        rng = RngStreams(seed)["landscape"]
        optimum = tuple(int(v) for v in rng.integers(alphabet, size=dims))
        return cls(dims=dims, alphabet=alphabet, optimum=optimum, **kwargs)

    def asymptote(self, config: Sequence[int]) -> float:
        return _clamp(self.a_max - self.slope * hamming(config, self.optimum), self.a_min, self.a_max)

    true_accuracy = asymptote

    def mean_curve(self, config: Sequence[int], epoch: int) -> float:
        """Noise-free accuracy after the sub-train that follows ``epoch`` completed ones."""
        n = epoch + 1
        m = self.asymptote(config) * (1.0 - self.curve_rate**n)
        if self.overfit_peak is not None and n > self.overfit_peak:
            m -= self.overfit_decay * (n - self.overfit_peak)
        return m

    def sub_train(self, config: Sequence[int], epoch: int, rng: np.random.Generator) -> float:
        if epoch < 0:
            raise ValueError(f"epoch must be >= 0, got {epoch}")
        m = self.mean_curve(config, epoch)
        if self.noise_sd > 0:
            m += self.noise_sd * rng.standard_normal()
        return _clamp(m)

    def sample(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(v) for v in rng.integers(self.alphabet, size=self.dims))

    def mutate(self, config: Sequence[int], train_progress: int, rng: np.random.Generator) -> tuple[int, ...]:
        """Resample one uniformly chosen coordinate to a different symbol."""
        if self.alphabet == 1:
            raise MutationImpossible("alphabet of size 1 has no neighbors")
        pos = int(rng.integers(self.dims))
        value = int(rng.integers(self.alphabet - 1))
        if value >= config[pos]:
            value += 1
        out = list(config)
        out[pos] = value
        return tuple(out)

    def crossover(self, a: Sequence[int], b: Sequence[int], rng: np.random.Generator) -> tuple[int, ...]:
        if len(a) != len(b):
            raise ValueError("crossover parents must have equal length")
        if self.dims == 1:
            return tuple(a)
        return one_point_crossover(a, b, int(rng.integers(1, self.dims)))

    def encode(self, config: Sequence[int]) -> list[int]:
        return [int(v) for v in config]

    def decode(self, data: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(v) for v in data)

    def descriptor(self) -> dict:
        return {
            "kind": "vector",
            "dims": self.dims,
            "alphabet": self.alphabet,
            "optimum": list(self.optimum),
            "slope": self.slope,
            "a_max": self.a_max,
            "a_min": self.a_min,
            "curve_rate": self.curve_rate,
            "noise_sd": self.noise_sd,
            "overfit_peak": self.overfit_peak,
            "overfit_decay": self.overfit_decay,
        }

    def oracle_best(self) -> tuple[tuple[int, ...], float]:
        size = self.alphabet**self.dims
        if size > ORACLE_LIMIT:
            raise OracleUnavailable(f"{size} configurations exceed the enumeration limit {ORACLE_LIMIT}")
        weights = self.alphabet ** np.arange(self.dims - 1, -1, -1, dtype=np.int64)
        target = np.asarray(self.optimum, dtype=np.int64)
        best_idx, best_val = -1, -math.inf
        chunk = 1 << 18
        for start in range(0, size, chunk):
            idx = np.arange(start, min(size, start + chunk), dtype=np.int64)
            digits = (idx[:, None] // weights) % self.alphabet
            dist = (digits != target).sum(axis=1)
            acc = np.clip(self.a_max - self.slope * dist, self.a_min, self.a_max)
            k = int(np.argmax(acc))
            if acc[k] > best_val:
                best_idx, best_val = int(idx[k]), float(acc[k])
        config = tuple(int(v) for v in (best_idx // weights) % self.alphabet)
        return config, self.asymptote(config)


@dataclass(frozen=True)
class TabularArm:
    config_id: Any
    curve: tuple[float, ...]
    neighbors: tuple[Any, ...]
    asymptote: float


_TABULAR_KEYS = {"n_max", "deterministic", "noise_sd", "arms"}
_ARM_KEYS = {"config_id", "curve", "neighbors", "asymptote"}


@dataclass(frozen=True)
class TabularLandscape:
    arms: tuple[TabularArm, ...]
    n_max: int
    deterministic: bool = True
    noise_sd: float = 0.0
    supports_crossover: bool = field(default=False, init=False)

    def __post_init__(self) -> None:
        ids = [a.config_id for a in self.arms]
        if not ids:
            raise ValueError("tabular landscape needs at least one arm")
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate config_id in tabular landscape")
        known = set(ids)
        for a in self.arms:
            if len(a.curve) < self.n_max:
                raise ValueError(f"arm {a.config_id!r}: curve shorter than n_max={self.n_max}")
            if not all(0.0 <= v <= 1.0 for v in a.curve):
                raise ValueError(f"arm {a.config_id!r}: curve values must lie in [0, 1]")
            if not 0.0 <= a.asymptote <= 1.0:
                raise ValueError(f"arm {a.config_id!r}: asymptote must lie in [0, 1]")
            missing = [n for n in a.neighbors if n not in known]
            if missing:
                raise ValueError(f"arm {a.config_id!r}: unknown neighbors {missing}")
        object.__setattr__(self, "_by_id", {a.config_id: a for a in self.arms})

    @classmethod
    def from_dict(cls, data: dict) -> "TabularLandscape":
        extra = set(data) - _TABULAR_KEYS
        if extra:
            raise ValueError(f"unknown tabular landscape keys: {sorted(extra)}")
        arms = []
        for raw in data["arms"]:
            extra = set(raw) - _ARM_KEYS
            if extra:
                raise ValueError(f"unknown arm keys: {sorted(extra)}")
            curve = tuple(float(v) for v in raw["curve"])
            arms.append(
                TabularArm(
                    config_id=raw["config_id"],
                    curve=curve,
                    neighbors=tuple(raw.get("neighbors", ())),
                    asymptote=float(raw.get("asymptote", curve[-1])),
                )
            )
        return cls(
            arms=tuple(arms),
            n_max=int(data["n_max"]),
            deterministic=bool(data.get("deterministic", True)),
            noise_sd=float(data.get("noise_sd", 0.0)),
        )

    @classmethod
    def load(cls, path: str | Path) -> "TabularLandscape":
        return cls.from_dict(json.loads(Path(path).read_text()))

    def arm(self, config_id: Any) -> TabularArm:
        return self._by_id[config_id]  # type: ignore[attr-defined]

    def sample(self, rng: np.random.Generator) -> Any:
        return self.arms[int(rng.integers(len(self.arms)))].config_id

    def mutate(self, config_id: Any, train_progress: int, rng: np.random.Generator) -> Any:
        neighbors = self.arm(config_id).neighbors
        if not neighbors:
            raise MutationImpossible(f"config {config_id!r} lists no neighbors")
        if len(neighbors) == 1:
            return neighbors[0]
        return neighbors[int(rng.integers(len(neighbors)))]

    def crossover(self, a: Any, b: Any, rng: np.random.Generator) -> Any:
        raise CrossoverUnsupported("tabular landscapes have no crossover")

    def sub_train(self, config_id: Any, epoch: int, rng: np.random.Generator) -> float:
        curve = self.arm(config_id).curve
        if not 0 <= epoch < len(curve):
            raise CurveExhausted(f"config {config_id!r} has {len(curve)} curve points, asked for epoch {epoch + 1}")
        value = curve[epoch]
        if self.deterministic or self.noise_sd == 0:
            return value
        return _clamp(value + self.noise_sd * rng.standard_normal())

    def true_accuracy(self, config_id: Any) -> float:
        return self.arm(config_id).asymptote

    def encode(self, config_id: Any) -> Any:
        return config_id

    def decode(self, data: Any) -> Any:
        return data

    def descriptor(self) -> dict:
        return {
            "kind": "tabular",
            "n_max": self.n_max,
            "deterministic": self.deterministic,
            "noise_sd": self.noise_sd,
            "arms": [
                {
                    "config_id": a.config_id,
                    "curve": list(a.curve),
                    "neighbors": list(a.neighbors),
                    "asymptote": a.asymptote,
                }
                for a in self.arms
            ],
        }

    def oracle_best(self) -> tuple[Any, float]:
        best = max(a.asymptote for a in self.arms)
        winner = min(a.config_id for a in self.arms if a.asymptote == best)
        return winner, best


def oracle_best(space: VectorLandscape | TabularLandscape) -> tuple[Any, float]:
    """Configuration with the highest asymptotic accuracy; ties go to the smallest."""
    return space.oracle_best()


def landscape_from_dict(data: dict, base_dir: str | Path | None = None) -> VectorLandscape | TabularLandscape:
    """Build a landscape from a run-config ``landscape`` block.

    ``{"kind": "vector", "dims": 12, "alphabet": 3, "seed": 0, ...}`` draws the
    optimum from ``seed`` unless ``optimum`` is given explicitly;
    ``{"kind": "tabular", "path": "space.json"}`` loads a tabular file (a
    relative path resolves against ``base_dir``), and an inline tabular
    object is accepted under ``"spec"``.
    """
    data = dict(data)
    kind = data.pop("kind", "vector")
    if kind == "vector":
        allowed = {
            "dims", "alphabet", "seed", "optimum", "slope", "a_max", "a_min",
            "curve_rate", "noise_sd", "overfit_peak", "overfit_decay",
        }
        extra = set(data) - allowed
        if extra:
            raise ValueError(f"unknown landscape keys: {sorted(extra)}")
        seed = int(data.pop("seed", 0))
        if "optimum" in data:
            return VectorLandscape(**data)
        return VectorLandscape.generate(seed=seed, **data)
    if kind == "tabular":
        extra = set(data) - {"path", "spec"}
        if extra:
            raise ValueError(f"unknown landscape keys: {sorted(extra)}")
        if "spec" in data:
            return TabularLandscape.from_dict(data["spec"])
        path = Path(data["path"])
        if base_dir is not None and not path.is_absolute():
            path = Path(base_dir) / path
        return TabularLandscape.load(path)
    raise ValueError(f"unknown landscape kind {kind!r}")
