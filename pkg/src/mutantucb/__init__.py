"""Fixed-budget model selection with Mutant-UCB and its baselines on simulated landscapes."""

__version__ = "0.1.0"

from .algorithms import (  # noqa: E402
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
from .core import (  # noqa: E402
    ArmRecord,
    BudgetLedger,
    RngStreams,
    argmax_arm,
    mutation_probability,
    running_mean_update,
    ucb_index,
)
from .landscapes import TabularLandscape, VectorLandscape, oracle_best  # noqa: E402
from .trace import EventTrace, RunResult, replay, replay_trace  # noqa: E402
