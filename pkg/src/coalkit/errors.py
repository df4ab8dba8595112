"""Exception types shared across the package."""


class CoalkitError(Exception):
    """Base class for all errors raised by coalkit."""


class InputError(CoalkitError):
    """Malformed user input (game files, payoffs, formulas)."""


class EngineUnsupported(CoalkitError):
    """The requested engine cannot handle this game representation."""


class TooManyPlayers(CoalkitError):
    pass


class NotAnImputation(CoalkitError):
    pass


class NotInfeasible(CoalkitError):
    pass


class BadCoalition(CoalkitError):
    pass


class TooLargeForExact(CoalkitError):
    pass


class MalformedCnf(InputError):
    pass


class MalformedQbf(InputError):
    pass


class Not2QBF(MalformedQbf):
    pass
