"""Exception types shared by the library and the CLI."""


class ParameterError(ValueError):
    """Invalid market, investor, or simulation parameters."""


class BoundsError(ParameterError):
    """Terminal-wealth bounds are inconsistent with the investor's budget."""


class DomainError(ValueError):
    """Argument outside the domain where a closed form is defined."""


class SolverError(RuntimeError):
    """The shadow-wealth root search could not bracket or converge."""
