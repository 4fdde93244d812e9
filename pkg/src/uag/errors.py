"""Exception hierarchy shared by every module."""


class UagError(Exception):
    """Base class for all library errors."""


class InputError(UagError, ValueError):
    """An argument is malformed or inconsistent with its algebra."""


class UnknownSymbolError(InputError):
    pass


class ArityError(InputError):
    pass


class IndexRangeError(InputError):
    pass


class SignatureMismatchError(InputError):
    pass


class RankMismatchError(InputError):
    pass


class EmptyGenerationError(InputError):
    """No generators and no constants: the generated subalgebra would be empty."""


class BudgetError(UagError):
    """A configured size bound (points or generated elements) was exceeded."""


class PreconditionError(UagError):
    """An operation was called outside its documented precondition."""


class NotAMorphismError(PreconditionError):
    """A term morphism does not map the source congruence into the target.

    ``pair`` holds two terms related by the source congruence whose images are
    separated by the target one.
    """

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class TransportError(UagError):
    """Transported congruence failed its closedness re-check."""
