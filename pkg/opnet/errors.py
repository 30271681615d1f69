"""Error handling"""

import logging
from typing import Callable, Dict, Type

logger = logging.getLogger(__name__)


class OpnetError(Exception):
    """Generic opnet error"""

    pass


class InvalidMatrixError(OpnetError):
    """Matrix has non-finite entries or the wrong shape"""

    pass


class LayoutError(OpnetError):
    """Unknown system ids, invalid permutation or mismatched dimensions"""

    pass


class OpenNetworkError(LayoutError):
    """Network has unconnected ports"""

    pass


class InvalidOperationError(OpnetError):
    """Operation is structurally inconsistent"""

    pass


class InvalidStateError(OpnetError):
    """State, effect or process operator violates positivity or normalization"""

    pass


class InvalidTransformError(OpnetError):
    """Singular symmetry operator or transform of the wrong kind"""

    pass


class InvariantError(OpnetError):
    """Validation found invariant failures"""

    pass


class NullCompositionError(OpnetError):
    """Composition has zero normalization (null event)"""

    pass


class IncompatibleNetworkError(NullCompositionError):
    """Network normalization is zero (null event)"""

    pass


class NullUpdateError(OpnetError):
    """Operation update has zero denominator"""

    pass


class ContractionTooLargeError(OpnetError):
    """Contraction plan exceeds the live dimension cap"""

    pass


class DocumentError(OpnetError):
    """Document could not be parsed"""

    pass


class ChainError(DocumentError):
    """Document does not encode a sequential chain"""

    pass


DEFAULT_EXIT_CODES = {
    DocumentError: 2,
    LayoutError: 2,
    InvalidMatrixError: 1,
    InvalidOperationError: 1,
    InvalidStateError: 1,
    InvalidTransformError: 1,
    InvariantError: 1,
    ContractionTooLargeError: 1,
    NullCompositionError: 3,
    NullUpdateError: 3,
    Exception: 1,
}


def exit_code_for(exc: BaseException, exit_codes: Dict[Type[Exception], int]) -> int:
    """resolve the exit code of an exception through its mro"""
    for cls in type(exc).__mro__:
        if cls in exit_codes:
            return exit_codes[cls]
    return 1


def exception_handler_factory(exit_code: int) -> Callable[[BaseException], int]:
    """
    Create a command line exception handler from an exit code.
    """

    def handler(exc: BaseException) -> int:
        logger.error(exc, exc_info=True)
        return exit_code

    return handler
