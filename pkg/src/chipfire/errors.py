"""Exception types shared across the package."""

from __future__ import annotations


class ChipfireError(Exception):
    """Base class for all domain errors."""


class GameFormatError(ChipfireError):
    """Raised when a game file or dict does not match the JSON schema."""


class WrongKind(ChipfireError):
    """An operation was applied to a game of the wrong kind."""


class NotAnAsm(WrongKind):
    pass


class NotMCFG(WrongKind):
    pass


class NotFireable(ChipfireError):
    """Attempt to fire a vertex that is not fireable in the current state."""


class BudgetExceeded(ChipfireError):
    """A step or state budget ran out before the computation finished."""

    def __init__(self, budget: int, what: str = "steps"):
        super().__init__(f"budget of {budget} {what} exceeded")
        self.budget = budget
        self.what = what


class Undecided(ChipfireError):
    """Convergence could not be certified either way within the budget."""

    def __init__(self, budget: int):
        super().__init__(f"convergence undecided after {budget} steps")
        self.budget = budget


class NonConvergent(ChipfireError):
    """The game does not reach a fixed point."""


class NotSimple(ChipfireError):
    """The operation requires a game in which every vertex fires at most once."""


class UnknownVertex(ChipfireError):
    def __init__(self, name: str):
        super().__init__(f"unknown vertex {name!r}")
        self.name = name


class MissingSink(ChipfireError):
    """The operation needs a designated sink and the game has none."""


class MultipleSinks(ChipfireError):
    """More than one vertex with no outgoing edges where exactly one is required."""

    def __init__(self, sinks):
        super().__init__(f"multiple sinks: {sorted(sinks)}")
        self.sinks = tuple(sorted(sinks))


class CyclicSupport(ChipfireError):
    """The support graph restricted to non-sink vertices contains a cycle."""

    def __init__(self, cycle):
        super().__init__("cycle in support graph: " + " -> ".join(cycle))
        self.cycle = tuple(cycle)


class VertexFiredOnce(ChipfireError):
    """Splitting requires a vertex that fires at least twice."""

    def __init__(self, name: str, count: int):
        super().__init__(f"vertex {name!r} fires {count} time(s), nothing to split")
        self.name = name
        self.count = count


class UnfiredVertex(ChipfireError):
    """A non-sink vertex never fires, which the operation does not allow."""

    def __init__(self, name: str):
        super().__init__(f"non-sink vertex {name!r} never fires")
        self.name = name


class IterationBudget(ChipfireError):
    """An iterative rewrite exceeded its configured number of rounds."""


class NotALattice(ChipfireError):
    """The poset is not a lattice; carries a witness pair."""

    def __init__(self, relation: str, pair, bounds):
        self.relation = relation
        self.pair = tuple(pair)
        self.bounds = tuple(bounds)
        if bounds:
            msg = (f"elements {self.pair} have incomparable minimal common "
                   f"{relation} bounds {self.bounds}")
        else:
            msg = f"elements {self.pair} have no common {relation} bound"
        super().__init__(msg)


class NoUniqueExtremes(ChipfireError):
    """The poset lacks a unique minimum or maximum."""


class InternalInconsistency(ChipfireError):
    """An invariant that must hold by construction was violated."""
