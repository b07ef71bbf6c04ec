"""Selection strategies. Each returns a ``RunResult`` whose ``trace`` holds the event log."""

from .baselines import (
    EaParams,
    HyperbandParams,
    ea_run,
    hyperband_run,
    random_search_run,
    successive_halving_run,
)
from .ucb import MutantUcbParams, mutant_ucb_run, ucb_e_run

__all__ = [
    "EaParams",
    "HyperbandParams",
    "MutantUcbParams",
    "ea_run",
    "hyperband_run",
    "mutant_ucb_run",
    "random_search_run",
    "successive_halving_run",
    "ucb_e_run",
]
