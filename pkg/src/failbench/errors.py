"""Exception hierarchy shared by every stage of the pipeline."""


class FailbenchError(Exception):
    """Base class for all errors raised by failbench."""


class ValidationError(FailbenchError):
    """Input data or configuration violates a documented contract."""


class EmptySpan(ValidationError):
    pass


class NoPriorObservation(ValidationError):
    def __init__(self, variable):
        super().__init__(f"variable {variable!r} has no observation at or before the span start")
        self.variable = variable


class SeriesTooShort(ValidationError):
    pass


class InsufficientFaults(ValidationError):
    pass


class UnknownMovementVariable(ValidationError):
    def __init__(self, name):
        super().__init__(f"unknown movement variable {name!r}")
        self.name = name


class DurationNotMultipleOfPeriod(ValidationError):
    def __init__(self, duration_s, period_s):
        super().__init__(f"duration {duration_s}s is not a multiple of the {period_s}s period")
        self.duration_s = duration_s
        self.period_s = period_s


class NoMinoritySamples(ValidationError):
    pass


class SingleClassInput(ValidationError):
    pass


class ShapeMismatch(ValidationError):
    pass


class LengthMismatch(ValidationError):
    pass


class EmptyMatrix(ValidationError):
    pass


class TooFewWindows(ValidationError):
    pass


class InvalidConfig(ValidationError):
    pass


class SchemaError(ValidationError):
    def __init__(self, line, reason):
        super().__init__(f"line {line}: {reason}")
        self.line = line
        self.reason = reason


class NonMonotonicTimestamps(ValidationError):
    pass


class UnknownVariableColumn(ValidationError):
    pass


class TrainingError(FailbenchError):
    """A model failed to train; the protocol records an absent score."""


class ConvergenceFailure(TrainingError):
    def __init__(self, message, model=None):
        super().__init__(message)
        self.model = model


class NonFiniteLoss(TrainingError):
    pass


class OutputUnwritable(FailbenchError):
    pass
