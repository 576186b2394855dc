"""Exception hierarchy for midetect."""

from __future__ import annotations


class MIDError(ValueError):
    """Base class for all input and configuration errors raised by midetect."""


class NonFiniteEntry(MIDError):
    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"non-finite entry at row {row}, column {col}")


class TooShort(MIDError):
    pass


class InvalidSplit(MIDError):
    pass


class IntervalTooShort(MIDError):
    pass


class EmptyRange(MIDError):
    pass


class NegativeEntry(MIDError):
    pass


class UnknownAlpha(MIDError):
    pass


class EmptyCandidates(MIDError):
    pass


class DimensionMismatch(MIDError):
    pass


class DegenerateComponent(MIDError):
    def __init__(self, component: int):
        self.component = component
        super().__init__(f"component {component} has zero MAD; cannot estimate its noise scale")


class NegativeCount(MIDError):
    def __init__(self, row: int, col: int):
        self.row = row
        self.col = col
        super().__init__(f"negative count at row {row}, column {col}")


class EmptyTruth(MIDError):
    pass
