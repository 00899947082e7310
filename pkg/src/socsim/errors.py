"""Exception hierarchy shared across the simulator."""


class SocSimError(Exception):
    """Base class for every error raised by this package."""


class SpecError(SocSimError):
    """A system description or program failed to parse or validate."""

    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" if column is None else f"line {line}, column {column}"
            message = f"{where}: {message}"
        super().__init__(message)


class SpecSyntaxError(SpecError):
    pass


class NoMasters(SpecError):
    pass


class NoSlaves(SpecError):
    pass


class OverlappingMap(SpecError):
    pass


class DuplicateName(SpecError):
    pass


class BadAlignment(SpecError):
    pass


class ProgramError(SpecError):
    """Bad mnemonic, operand count, or register index in a master program."""


class LimitExceeded(SocSimError):
    """A TLM run hit its transaction budget before every program finished."""


class CycleLimitExceeded(LimitExceeded):
    """An RTL run hit its cycle budget before every program finished."""


class ElaborationError(SocSimError):
    """A netlist could not be turned into a runnable RTL system."""

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class UnconnectedPort(ElaborationError):
    pass


class MultipleDrivers(ElaborationError):
    pass


class CombinationalLoop(ElaborationError):
    def __init__(self, message, cycle=()):
        super().__init__(message)
        self.cycle = list(cycle)


class TransformError(SocSimError):
    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class UnknownBusKind(TransformError):
    pass


class RequirementsUnsatisfiable(SocSimError):
    def __init__(self, message, iterations=0):
        super().__init__(message)
        self.iterations = iterations
