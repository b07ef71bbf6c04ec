"""Exception hierarchy shared by every module."""


class BanditError(Exception):
    """Base class for all errors raised by this package."""


class InvalidParams(BanditError, ValueError):
    """Strategy parameters violate a documented precondition."""


class BudgetExhausted(BanditError):
    """A sub-train was requested after the budget ledger hit its limit."""


class MutationImpossible(BanditError):
    """The search space cannot produce a neighbor of this configuration."""


class CrossoverUnsupported(BanditError):
    """The search space does not implement crossover."""


class CurveExhausted(BanditError):
    """A tabular learning curve was asked for an epoch it does not define."""


class OracleUnavailable(BanditError):
    """The landscape is too large to enumerate exhaustively."""


class InvalidComparison(BanditError):
    """Two experiment summaries cannot be paired."""


class TraceError(BanditError):
    """A trace file is malformed or violates a trace invariant.

    ``index`` is the 0-based position of the first offending event (the
    header is not counted), or ``None`` when the problem is not tied to a
    single event.
    """

    def __init__(self, message: str, index: int | None = None) -> None:
        super().__init__(message if index is None else f"event {index}: {message}")
        self.index = index


class SchemaMismatch(TraceError):
    pass


class TruncatedTrace(TraceError):
    pass


class InconsistentTrace(TraceError):
    pass
