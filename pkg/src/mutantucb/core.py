"""Shared arithmetic, budget accounting, RNG streams and arm bookkeeping."""

from __future__ import annotations

import math
import zlib
from dataclasses import dataclass
from typing import Any, Hashable, Protocol, Sequence

import numpy as np

from .errors import BudgetExhausted

LINEAR = "linear"
EXPONENTIAL = "exponential"
SCHEDULES = (LINEAR, EXPONENTIAL)

Config = Any


def ucb_index(mean: float, pulls: int, E: float) -> float:
    """Optimistic index ``mean + sqrt(E / pulls)``."""
    if pulls < 1:
        raise ValueError("ucb_index needs pulls >= 1; arms are trained once before indexing")
    if E < 0:
        raise ValueError(f"exploration parameter must be >= 0, got {E}")
    return mean + math.sqrt(E / pulls)


def running_mean_update(mean: float, count: int, reward: float) -> float:
    """Mean after appending ``reward`` to ``count`` values whose mean is ``mean``."""
    return (reward + count * mean) / (count + 1)


def mutation_probability(trains: int, N: int, schedule: str = LINEAR) -> float:
    """Probability of training (not mutating) an arm that has been trained ``trains`` times.

    The name follows the algorithm's variable: callers draw X ~ Bernoulli(p)
    and mutate when X is 0.
    """
    if not 1 <= trains <= N:
        raise ValueError(f"need 1 <= trains <= N, got trains={trains}, N={N}")
    if schedule == LINEAR:
        return 1.0 - trains / N
    if schedule == EXPONENTIAL:
        return min(1.0, max(0.0, 1.0 - math.exp(trains - N)))
    raise ValueError(f"unknown schedule {schedule!r}; expected one of {SCHEDULES}")


class BudgetLedger:
    """Append-only count of consumed sub-trains."""

    __slots__ = ("limit", "_consumed")

    def __init__(self, limit: int) -> None:
        if limit < 1:
            raise ValueError(f"budget limit must be positive, got {limit}")
        self.limit = int(limit)
        self._consumed = 0

    @property
    def consumed(self) -> int:
        return self._consumed

    @property
    def remaining(self) -> int:
        return self.limit - self._consumed

    def consume(self) -> None:
        if self._consumed >= self.limit:
            raise BudgetExhausted(f"budget of {self.limit} sub-trains already spent")
        self._consumed += 1

    def __repr__(self) -> str:
        return f"BudgetLedger(limit={self.limit}, consumed={self._consumed})"


def budget_consume(ledger: BudgetLedger) -> None:
    ledger.consume()


# Stream names are hashed with crc32 into the SeedSequence spawn key, so the
# mapping is fixed by the name alone and adding a stream never moves another.
STREAM_NAMES = ("sample", "mutate", "train", "tiebreak", "bernoulli", "parents")


class RngStreams:
    """Deterministic per-run random streams, split by concern.

    Each named sub-stream is a ``numpy.random.Generator`` over PCG64, seeded
    with ``SeedSequence(seed, spawn_key=(crc32(name),))``. Draws from one
    concern (say mutation) never shift the values seen by another (say the
    training noise). Golden traces depend on this construction; do not
    change it without bumping the trace schema version.
    """

    def __init__(self, seed: int) -> None:
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = int(seed)
        self._streams: dict[str, np.random.Generator] = {}

    def stream(self, name: str) -> np.random.Generator:
        gen = self._streams.get(name)
        if gen is None:
            key = zlib.crc32(name.encode("utf-8"))
            seq = np.random.SeedSequence(self.seed, spawn_key=(key,))
            gen = np.random.Generator(np.random.PCG64(seq))
            self._streams[name] = gen
        return gen

    def __getitem__(self, name: str) -> np.random.Generator:
        return self.stream(name)


def argmax_values(values: np.ndarray, rng: np.random.Generator) -> int:
    """Position of the maximum of ``values``; ties broken uniformly via ``rng``.

    ``rng`` is only drawn from when there is an actual tie.
    """
    if len(values) == 0:
        raise ValueError("argmax over an empty set of arms")
    best = values.max()
    ties = np.flatnonzero(values == best)
    if len(ties) == 1:
        return int(ties[0])
    return int(ties[rng.integers(len(ties))])


def argmax_arm(indices: Sequence[tuple[int, float]], rng: np.random.Generator) -> int:
    """Arm id attaining the largest value among ``(arm_id, value)`` pairs."""
    if not indices:
        raise ValueError("argmax over an empty set of arms")
    ids = [arm for arm, _ in indices]
    values = np.array([v for _, v in indices], dtype=float)
    return ids[argmax_values(values, rng)]


class SearchSpace(Protocol):
    """What a strategy needs from a search space.

    All randomness must come from the generator passed in. ``sub_train`` is
    the only source of rewards and must return values in [0, 1].
    """

    supports_crossover: bool

    def sample(self, rng: np.random.Generator) -> Config: ...

    def mutate(self, config: Config, train_progress: int, rng: np.random.Generator) -> Config: ...

    def crossover(self, a: Config, b: Config, rng: np.random.Generator) -> Config: ...

    def sub_train(self, config: Config, epoch: int, rng: np.random.Generator) -> float: ...

    def encode(self, config: Config) -> Hashable | list | str | int: ...

    def true_accuracy(self, config: Config) -> float: ...

    def descriptor(self) -> dict: ...


@dataclass(frozen=True)
class ArmRecord:
    """Snapshot of one arm.

    ``mean`` is the mean of the arm's own sub-train rewards; rewards of its
    mutants never enter it. ``pulls - trains`` counts mutants spawned from
    this arm.
    """

    arm: int
    mean: float
    pulls: int
    trains: int
    parent: int | None
    config: Any
    train_progress: int
    origin: str = "sample"


@dataclass(frozen=True)
class TrainOutcome:
    arm: int
    reward: float
    epoch: int


class ArmTable:
    """Growable column store for arm statistics.

    Means are derived from ``(sum, trains)`` rather than updated in place,
    so they never drift from the exact mean of the recorded rewards.
    """

    def __init__(self, capacity: int = 64) -> None:
        self.size = 0
        self.sums = np.zeros(capacity)
        self.pulls = np.zeros(capacity, dtype=np.int64)
        self.trains = np.zeros(capacity, dtype=np.int64)
        self.progress = np.zeros(capacity, dtype=np.int64)
        self.configs: list[Any] = []
        self.parents: list[int | None] = []
        self.origins: list[str] = []

    def __len__(self) -> int:
        return self.size

    def _grow(self) -> None:
        cap = 2 * len(self.sums)
        for name in ("sums", "pulls", "trains", "progress"):
            old = getattr(self, name)
            new = np.zeros(cap, dtype=old.dtype)
            new[: self.size] = old[: self.size]
            setattr(self, name, new)

    def add(self, config: Any, parent: int | None = None, origin: str = "sample", progress: int = 0) -> int:
        if self.size == len(self.sums):
            self._grow()
        arm = self.size
        self.progress[arm] = progress
        self.configs.append(config)
        self.parents.append(parent)
        self.origins.append(origin)
        self.size += 1
        return arm

    def record_reward(self, arm: int, reward: float) -> None:
        self.sums[arm] += reward
        self.trains[arm] += 1
        self.pulls[arm] += 1
        self.progress[arm] += 1

    def mean(self, arm: int) -> float:
        return float(self.sums[arm] / self.trains[arm])

    def means(self) -> np.ndarray:
        n = self.size
        return self.sums[:n] / self.trains[:n]

    def indices(self, E: float) -> np.ndarray:
        # Same float operations as ucb_index, element-wise.
        n = self.size
        return self.sums[:n] / self.trains[:n] + np.sqrt(E / self.pulls[:n])

    def record(self, arm: int) -> ArmRecord:
        return ArmRecord(
            arm=arm,
            mean=self.mean(arm),
            pulls=int(self.pulls[arm]),
            trains=int(self.trains[arm]),
            parent=self.parents[arm],
            config=self.configs[arm],
            train_progress=int(self.progress[arm]),
            origin=self.origins[arm],
        )

    def records(self) -> list[ArmRecord]:
        return [self.record(k) for k in range(self.size)]
