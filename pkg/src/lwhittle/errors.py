"""Exception types shared across the package."""


class SpecError(ValueError):
    """Invalid configuration: bad bounds, bandwidth, taper, or rule."""


class DataError(ValueError):
    """Input data cannot be used: unparseable, too short, non-finite."""


class DegenerateSeriesError(ArithmeticError):
    """Objective undefined because the periodogram has zero ordinates."""


class NonFiniteObjectiveError(ArithmeticError):
    """Objective returned a non-finite value during optimization."""

    def __init__(self, d, value):
        self.d = d
        self.value = value
        super().__init__(f"objective is not finite at d={d!r} (value {value!r})")
