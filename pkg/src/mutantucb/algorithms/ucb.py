"""UCB-E and Mutant-UCB."""

from __future__ import annotations

from dataclasses import asdict, dataclass
from typing import Any, Iterable, Iterator, Sequence

from ..core import LINEAR, SCHEDULES, SearchSpace, argmax_values, mutation_probability
from ..errors import InvalidParams
from ..trace import RunResult
from ._run import Run


def _validate_exploration(E: float) -> None:
    if E < 0:
        raise InvalidParams(f"E must be >= 0, got {E}")


def ucb_e_run(
    space: SearchSpace,
    T: int,
    E: float,
    K: int,
    seed: int = 0,
    pool: Sequence[Any] | None = None,
) -> RunResult:
    """Fixed-budget UCB-E over ``K`` sampled models.

    Each model gets one sub-train, then the remaining ``T - K`` sub-trains go
    to the arm with the highest ``mean + sqrt(E / pulls)``. Returns the arm
    with the best empirical mean.
    """
    if K < 1:
        raise InvalidParams(f"K must be >= 1, got {K}")
    if T < K:
        raise InvalidParams(f"UCB-E needs T >= K (one sub-train per initial arm), got T={T}, K={K}")
    _validate_exploration(E)

    run = Run("ucb-e", space, T, seed, {"T": T, "E": E, "K": K}, pool)
    for _ in range(K):
        run.new_arm(run.sample_config())

    tie = run.rngs["tiebreak"]
    for t in range(K + 1, T + 1):
        index = run.arms.indices(E)
        arm = argmax_values(index, tie)
        run.select(t, arm, index[arm])
        run.train(arm)

    return run.finish(run.best_by_mean())


@dataclass(frozen=True)
class MutantUcbParams:
    T: int
    E: float = 0.05
    K: int = 150
    N: int = 10
    schedule: str = LINEAR
    warm_start: float = 0.0

    def validate(self) -> None:
        if self.K < 1:
            raise InvalidParams(f"K must be >= 1, got {self.K}")
        if self.N < 1:
            raise InvalidParams(f"N must be >= 1, got {self.N}")
        if self.T < self.K + self.N:
            raise InvalidParams(
                f"Mutant-UCB needs T >= K + N (K initial sub-trains, up to N-1 finalization "
                f"sub-trains and at least one round), got T={self.T}, K={self.K}, N={self.N}"
            )
        _validate_exploration(self.E)
        if self.schedule not in SCHEDULES:
            raise InvalidParams(f"schedule must be one of {SCHEDULES}, got {self.schedule!r}")
        if not 0.0 <= self.warm_start <= 1.0:
            raise InvalidParams(f"warm_start must lie in [0, 1], got {self.warm_start}")


def _scripted(bits: Iterable[int]) -> Iterator[int]:
    for i, b in enumerate(bits):
        if b not in (0, 1):
            raise InvalidParams(f"scripted Bernoulli draw {i} is {b!r}, expected 0 or 1")
        yield int(b)
    raise InvalidParams("scripted Bernoulli sequence ran out before the last round")


def mutant_ucb_run(
    space: SearchSpace,
    params: MutantUcbParams,
    seed: int = 0,
    pool: Sequence[Any] | None = None,
    bernoulli: Iterable[int] | None = None,
) -> RunResult:
    """Mutant-UCB: UCB-E whose well-trained arms spawn mutants instead of training further.

    At each round the optimistic arm is trained with probability
    ``mutation_probability(trains, N, schedule)`` and otherwise mutated; the
    mutant joins the arm set after one sub-train. Rounds run up to
    ``T - N + 1`` so that the arm with the best mean can then be topped up to
    exactly ``N`` sub-trains.

    ``bernoulli`` replaces the random training draws with a fixed 0/1
    sequence, used verbatim. A sequence of ones disables mutation (and the
    cap with it); the caller is responsible for its consistency.
    """
    params.validate()
    T, E, K, N = params.T, params.E, params.K, params.N
    header = asdict(params)
    if bernoulli is not None:
        header["scripted_bernoulli"] = True
        draws = _scripted(bernoulli)
    run = Run("mutant-ucb", space, T, seed, header, pool)

    for _ in range(K):
        run.new_arm(run.sample_config())

    tie = run.rngs["tiebreak"]
    coin = run.rngs["bernoulli"]
    arms = run.arms
    for t in range(K + 1, T - N + 2):
        index = arms.indices(E)
        arm = argmax_values(index, tie)
        run.select(t, arm, index[arm])
        if bernoulli is not None:
            x = next(draws)
        else:
            p = mutation_probability(int(arms.trains[arm]), N, params.schedule)
            x = int(coin.random() < p)
        if x:
            run.train(arm)
        else:
            run.mutate(arm, params.warm_start)

    best = run.best_by_mean()
    for _ in range(max(0, N - int(arms.trains[best]))):
        run.train(best, "finalize_train")
    return run.finish(best)
