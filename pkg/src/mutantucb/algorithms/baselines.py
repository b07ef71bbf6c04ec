"""Baselines: Random Search, Successive Halving, Hyperband and a steady-state EA."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Any, Sequence

import numpy as np

from ..core import SearchSpace, argmax_values
from ..errors import CrossoverUnsupported, InvalidParams
from ..trace import RunResult
from ._run import Run


def random_search_run(
    space: SearchSpace,
    T: int,
    N: int,
    seed: int = 0,
    pool: Sequence[Any] | None = None,
) -> RunResult:
    """Train ``T // N`` fresh configurations ``N`` times each; keep the best mean.

    A remainder ``T % N`` is left unspent and reported as a warning.
    """
    if N < 1 or T < N:
        raise InvalidParams(f"random search needs 1 <= N <= T, got T={T}, N={N}")
    run = Run("rs", space, T, seed, {"T": T, "N": N}, pool)
    for _ in range(T // N):
        arm = run.new_arm(run.sample_config())
        for _ in range(N - 1):
            run.train(arm)
    warnings = []
    if T % N:
        warnings.append(f"{T % N} sub-trains left unspent: N={N} does not divide T={T}")
    return run.finish(run.best_by_mean(), warnings)


def _rounds(n: int, eta: int) -> int:
    # ceil(log_eta n) in integer arithmetic, at least one round.
    rounds, reach = 0, 1
    while reach < n:
        reach *= eta
        rounds += 1
    return max(1, rounds)


def successive_halving_run(
    space: SearchSpace,
    B: int,
    n: int,
    eta: int = 2,
    seed: int = 0,
    N: int | None = None,
    pool: Sequence[Any] | None = None,
) -> RunResult:
    """Successive Halving with a fixed total budget ``B``.

    Over ``L = ceil(log_eta n)`` rounds, each surviving arm receives
    ``floor(B / (|survivors| * L))`` more sub-trains (never past ``N`` when a
    cap is given), then only the best ``floor(|survivors| / eta)`` arms (at
    least one) move on.
    """
    if n < 1:
        raise InvalidParams(f"n must be >= 1, got {n}")
    if eta < 2:
        raise InvalidParams(f"eta must be >= 2, got {eta}")
    L = _rounds(n, eta)
    if B // (n * L) < 1:
        raise InvalidParams(f"budget B={B} cannot give each of {n} arms one sub-train over {L} rounds")
    if N is not None and N < 1:
        raise InvalidParams(f"cap N must be >= 1, got {N}")

    run = Run("sh", space, B, seed, {"B": B, "n": n, "eta": eta, "N": N}, pool)
    per_arm = B // (n * L)
    survivors = []
    for _ in range(n):
        arm = run.new_arm(run.sample_config())
        _train_more(run, arm, per_arm - 1, N)
        survivors.append(arm)

    for r in range(1, L + 1):
        survivors = _top_by_mean(run, survivors, max(1, len(survivors) // eta))
        if r == L:
            break
        per_arm = B // (len(survivors) * L)
        for arm in survivors:
            _train_more(run, arm, per_arm, N)
    return run.finish(survivors[0])


def _train_more(run: Run, arm: int, amount: int, cap: int | None = None) -> bool:
    """Up to ``amount`` more sub-trains on ``arm``; False once the budget is gone."""
    for _ in range(amount):
        if cap is not None and run.arms.trains[arm] >= cap:
            break
        if run.ledger.remaining == 0:
            return False
        run.train(arm)
    return True


def _top_by_mean(run: Run, arms: list[int], keep: int) -> list[int]:
    """Best ``keep`` arms by mean, ties broken with the tie-break stream."""
    chosen = []
    left = list(arms)
    for _ in range(keep):
        best = run.best_by_mean(left)
        chosen.append(best)
        left.remove(best)
    return chosen


@dataclass(frozen=True)
class HyperbandParams:
    T: int
    R: int = 10
    eta: int = 3

    def validate(self) -> None:
        if self.R < 1:
            raise InvalidParams(f"R must be >= 1, got {self.R}")
        if self.eta < 2:
            raise InvalidParams(f"eta must be >= 2, got {self.eta}")
        if self.T < 1:
            raise InvalidParams(f"T must be >= 1, got {self.T}")

    @property
    def s_max(self) -> int:
        s = 0
        while self.eta ** (s + 1) <= self.R:
            s += 1
        return s

    def brackets(self) -> list[tuple[int, int, list[tuple[int, int]]]]:
        """``(s, n_s, [(arms_i, resource_i), ...])`` for one sweep, s from s_max down to 0."""
        s_max, eta, R = self.s_max, self.eta, self.R
        out = []
        for s in range(s_max, -1, -1):
            n = -(-(s_max + 1) * eta**s // (s + 1))
            rounds = [(n // eta**i, max(1, R * eta**i // eta**s)) for i in range(s + 1)]
            out.append((s, n, rounds))
        return out

    def sweep_cost(self) -> int:
        return sum(k * r for _, _, rounds in self.brackets() for k, r in rounds)


def hyperband_run(
    space: SearchSpace,
    params: HyperbandParams,
    seed: int = 0,
    pool: Sequence[Any] | None = None,
) -> RunResult:
    """Hyperband with per-model cap ``R`` and total budget ``T``.

    Brackets ``s = s_max .. 0`` start ``n_s`` fresh configurations at
    resource ``R / eta**s`` and run successive halving inside the bracket.
    A survivor is retrained from scratch at each rung (a new arm with origin
    ``promote``), so no model ever exceeds ``R`` sub-trains. Sweeps repeat
    until the budget runs out, possibly mid-bracket.
    """
    params.validate()
    header = {"T": params.T, "R": params.R, "eta": params.eta, "N": params.R}
    run = Run("hyperband", space, params.T, seed, header, pool)
    plan = params.brackets()

    def bracket(s: int, n: int, rounds: list[tuple[int, int]]) -> bool:
        run.trace.append("bracket", s=s, n=n, r=rounds[0][1])
        current: list[int] = []
        for i, (count, resource) in enumerate(rounds):
            if i == 0:
                sources: list[tuple[Any, int | None]] = [(None, None)] * count
            else:
                sources = [(run.arms.configs[a], a) for a in _top_by_mean(run, current, count)]
            current = []
            for config, parent in sources:
                if run.ledger.remaining == 0:
                    return False
                if parent is None:
                    arm = run.new_arm(run.sample_config())
                else:
                    arm = run.new_arm(config, origin="promote", parent=parent)
                current.append(arm)
                if not _train_more(run, arm, resource - 1):
                    return False
        return True

    while run.ledger.remaining > 0:
        if not all(bracket(s, n, rounds) for s, n, rounds in plan):
            break
    return run.finish(run.best_by_mean())


@dataclass(frozen=True)
class EaParams:
    T: int
    K_ea: int = 20
    N: int = 10

    def validate(self) -> None:
        if self.N < 1:
            raise InvalidParams(f"N must be >= 1, got {self.N}")
        if self.K_ea < 1:
            raise InvalidParams(f"K_ea must be >= 1, got {self.K_ea}")
        if self.K_ea > self.T // self.N:
            raise InvalidParams(
                f"EA needs K_ea <= T/N to afford its initial population, got K_ea={self.K_ea}, T/N={self.T // self.N}"
            )


def ea_run(
    space: SearchSpace,
    params: EaParams,
    seed: int = 0,
    pool: Sequence[Any] | None = None,
) -> RunResult:
    """Steady-state evolutionary algorithm with replace-worst survival.

    ``K_ea`` random individuals are trained ``N`` times each. Then
    ``T // N - K_ea`` offspring are bred one at a time: two distinct parents
    drawn uniformly, crossover followed by mutation (mutation alone if the
    space has no crossover or the population has one member), ``N``
    sub-trains, and the offspring replaces the worst individual if its mean
    is strictly higher.
    """
    params.validate()
    T, K, N = params.T, params.K_ea, params.N
    run = Run("ea", space, T, seed, asdict(params), pool)
    pick = run.rngs["parents"]
    vary = run.rngs["mutate"]
    tie = run.rngs["tiebreak"]
    arms = run.arms

    population = []
    for _ in range(K):
        arm = run.new_arm(run.sample_config())
        _train_more(run, arm, N - 1)
        population.append(arm)

    for _ in range(T // N - K):
        if len(population) >= 2:
            i, j = pick.choice(len(population), size=2, replace=False)
            a, b = population[int(i)], population[int(j)]
        else:
            a = b = population[0]
        config = arms.configs[a]
        if a != b and getattr(space, "supports_crossover", False):
            try:
                config = space.crossover(config, arms.configs[b], vary)
            except CrossoverUnsupported:
                pass
        config = space.mutate(config, 0, vary)
        child = run.new_arm(config, origin="offspring", parent=a)
        _train_more(run, child, N - 1)

        ids = np.asarray(population)
        means = arms.sums[ids] / arms.trains[ids]
        slot = argmax_values(-means, tie)
        worst = population[slot]
        if arms.mean(child) > arms.mean(worst):
            population[slot] = child
            run.trace.append("replace", removed=worst, added=child)

    warnings = []
    if T % N:
        warnings.append(f"{T % N} sub-trains left unspent: N={N} does not divide T={T}")
    return run.finish(run.best_by_mean(population), warnings)
