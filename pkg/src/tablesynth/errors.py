"""Exception hierarchy shared by all modules."""


class TableSynthError(Exception):
    """Base class for all errors raised by this package."""


class MalformedMarkup(TableSynthError):
    pass


class InconsistentSpans(TableSynthError):
    pass


class EmptyTable(TableSynthError):
    pass


class NoOuterBoundary(TableSynthError):
    pass


class NonRectangularSpan(TableSynthError):
    pass


class OrphanText(TableSynthError):
    pass


class InsufficientEvidence(TableSynthError):
    pass


class UnknownCategory(TableSynthError):
    pass


class UnresolvableAttribute(TableSynthError):
    pass


class CanvasOverflow(TableSynthError):
    pass


class BoxOutOfBounds(TableSynthError):
    pass


class ParseFailure(TableSynthError):
    pass


class InsufficientPool(TableSynthError):
    def __init__(self, bucket, needed=None, available=None):
        self.bucket = bucket
        self.needed = needed
        self.available = available
        msg = f"bucket {bucket!r}"
        if needed is not None:
            msg += f": need {needed}, have {available}"
        super().__init__(msg)


class ConfigError(TableSynthError):
    pass
