from __future__ import annotations

import math
from typing import Any, Sequence

import numpy as np

from ..core import ArmTable, BudgetLedger, RngStreams, SearchSpace, argmax_values
from ..errors import BanditError
from ..trace import SCHEMA_VERSION, EventTrace, RunResult


class Run:
    """Mutable state of one strategy run: arms, ledger, RNG streams and trace.

    Every reward flows through ``train`` or ``mutate`` so the ledger, arm
    statistics and trace can never disagree.
    """

    def __init__(
        self,
        algorithm: str,
        space: SearchSpace,
        budget: int,
        seed: int,
        params: dict,
        pool: Sequence[Any] | None = None,
    ) -> None:
        self.algorithm = algorithm
        self.space = space
        self.ledger = BudgetLedger(budget)
        self.rngs = RngStreams(seed)
        self.seed = seed
        self.arms = ArmTable()
        self.trace = EventTrace(
            header={
                "type": "header",
                "schema": SCHEMA_VERSION,
                "algorithm": algorithm,
                "params": params,
                "seed": seed,
                "space": space.descriptor(),
            }
        )
        self.incumbent: list[float] = []
        self._best = -math.inf
        self._pool = list(pool) if pool is not None else []

    def sample_config(self) -> Any:
        if self._pool:
            return self._pool.pop(0)
        return self.space.sample(self.rngs["sample"])

    def _reward(self, arm: int) -> float:
        self.ledger.consume()
        reward = float(self.space.sub_train(self.arms.configs[arm], int(self.arms.progress[arm]), self.rngs["train"]))
        if not 0.0 <= reward <= 1.0:
            raise BanditError(f"search space returned reward {reward} outside [0, 1]")
        self.arms.record_reward(arm, reward)
        mean = self.arms.mean(arm)
        if mean > self._best:
            self._best = mean
        self.incumbent.append(self._best)
        return reward

    def new_arm(self, config: Any, origin: str = "sample", parent: int | None = None) -> int:
        """Create an arm and give it its first sub-train."""
        arm = self.arms.add(config, parent=parent, origin=origin)
        reward = self._reward(arm)
        self.trace.append(
            "init_train",
            arm=arm,
            reward=reward,
            epoch=1,
            config=self.space.encode(config),
            origin=origin,
            parent=parent,
        )
        return arm

    def train(self, arm: int, kind: str = "sub_train") -> float:
        reward = self._reward(arm)
        self.trace.append(kind, arm=arm, reward=reward, epoch=int(self.arms.trains[arm]))
        return reward

    def mutate(self, parent: int, warm_start: float = 0.0) -> int:
        """Spawn a mutant of ``parent``'s trained model and train it once."""
        progress = int(self.arms.progress[parent])
        config = self.space.mutate(self.arms.configs[parent], progress, self.rngs["mutate"])
        start = math.floor(warm_start * progress)
        child = self.arms.add(config, parent=parent, origin="mutate", progress=start)
        self.arms.pulls[parent] += 1
        reward = self._reward(child)
        self.trace.append(
            "mutate",
            parent=parent,
            child=child,
            child_reward=reward,
            config=self.space.encode(config),
            start=start,
        )
        return child

    def select(self, t: int, arm: int, index: float) -> None:
        self.trace.append("select", t=t, arm=arm, index=float(index))

    def best_by_mean(self, candidates: Sequence[int] | None = None) -> int:
        tie = self.rngs["tiebreak"]
        if candidates is None:
            return argmax_values(self.arms.means(), tie)
        ids = np.asarray(candidates, dtype=np.int64)
        means = self.arms.sums[ids] / self.arms.trains[ids]
        return int(ids[argmax_values(means, tie)])

    def finish(self, selected: int, warnings: Sequence[str] = ()) -> RunResult:
        self.trace.append("select_final", arm=selected, consumed=self.ledger.consumed, warnings=list(warnings))
        arms = self.arms
        return RunResult(
            algorithm=self.algorithm,
            seed=self.seed,
            selected=selected,
            config=self.space.encode(arms.configs[selected]),
            trains=int(arms.trains[selected]),
            mean=arms.mean(selected),
            tested_models=sum(1 for o in arms.origins if o != "promote"),
            n_arms=len(arms),
            consumed=self.ledger.consumed,
            incumbent=list(self.incumbent),
            warnings=list(warnings),
            trace=self.trace,
        )
