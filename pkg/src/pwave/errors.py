"""Exception hierarchy shared by the simulation and analysis modules."""


class PWaveError(Exception):
    pass


class DomainError(PWaveError, ValueError):
    """A time outside the horizon of a trajectory, or an invalid trajectory."""


class NumericalBlowup(PWaveError, ArithmeticError):
    def __init__(self, t, msg="non-finite values in right-hand side"):
        super().__init__(f"{msg} at t={t:.17g}")
        self.t = t


class StepFailure(PWaveError, ArithmeticError):
    def __init__(self, t, msg="Newton iteration did not converge"):
        super().__init__(f"{msg} at t={t:.17g}")
        self.t = t
        self.reason = msg


class DegenerateTrace(PWaveError, ValueError):
    pass


class HypothesisViolation(PWaveError):
    """An analysis hypothesis (monotone energy, admissible parameters) fails."""

    def __init__(self, condition, msg):
        super().__init__(f"{condition}: {msg}")
        self.condition = condition
