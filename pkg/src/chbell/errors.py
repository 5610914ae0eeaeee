"""Exception types shared across the toolkit."""


class ValidationError(ValueError):
    """An input violated a documented range or ordering constraint."""

    def __init__(self, message, field=None):
        super().__init__(message)
        self.field = field


class NoViolationError(ValueError):
    """The requested quantity requires a state/configuration able to violate CH."""


class UndefinedRatioError(ArithmeticError):
    """The R ratio has a zero denominator.

    ``result`` carries the partially filled :class:`~chbell.bell.ChResult`
    (CH and its error are still meaningful, ``r`` is ``None``).
    """

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class FormatError(ValueError):
    """Malformed event data (e.g. timestamps out of order)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class ManifestError(ValueError):
    """A run manifest does not describe a complete CH measurement."""
