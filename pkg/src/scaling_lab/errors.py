"""Exception types raised across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of the operation."""


class QuadratureError(ArithmeticError):
    """Adaptive quadrature did not reach the requested tolerance."""

    def __init__(self, message, estimate=float("nan"), abserr=float("nan")):
        super().__init__(f"{message} (estimate={estimate!r}, abserr={abserr!r})")
        self.estimate = estimate
        self.abserr = abserr


class BracketError(ValueError):
    """The maximiser sits on the edge of the search bracket."""


class ChainError(RuntimeError):
    """The chain hit a state where the log-density is not finite."""

    def __init__(self, message, iteration=None, state=None):
        super().__init__(message)
        self.iteration = iteration
        self.state = state


class NonTerminationError(RuntimeError):
    """A Bernoulli factory exceeded its round budget."""

    def __init__(self, message, rounds=0, coin_flips=0):
        super().__init__(message)
        self.rounds = rounds
        self.coin_flips = coin_flips
