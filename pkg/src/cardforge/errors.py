"""Exception hierarchy.

Every error carries a stable ``code`` string so that reports and the CLI can
name the failure without depending on the Python class.
"""

from __future__ import annotations


class CardforgeError(Exception):
    code = "ERROR"

    def __init__(self, message: str = "", **context):
        super().__init__(message)
        self.context = context

    def __str__(self) -> str:
        msg = super().__str__()
        return f"{self.code}: {msg}" if msg else self.code


class IllegalAction(CardforgeError):
    code = "ILLEGAL_ACTION"


class ShuffleOnInput(IllegalAction):
    code = "SHUFFLE_ON_INPUT"


class NotOwner(IllegalAction):
    code = "NOT_OWNER"


class SuitExhausted(IllegalAction):
    code = "SUIT_EXHAUSTED"


class IncompleteStep(CardforgeError):
    """No action is defined for a reachable visible state."""

    code = "INCOMPLETE_STEP"


class AmbiguousStep(CardforgeError):
    code = "AMBIGUOUS_STEP"


class DeckShortage(CardforgeError):
    code = "DECK_SHORTAGE"


class NoFreeCell(CardforgeError):
    code = "NO_FREE_CELL"


class ContractMismatch(CardforgeError):
    code = "CONTRACT_MISMATCH"


class LengthMismatch(CardforgeError):
    code = "LENGTH_MISMATCH"


class TooLarge(CardforgeError):
    code = "TOO_LARGE"


class InvalidPair(CardforgeError):
    code = "INVALID_PAIR"


class DecodeFailure(CardforgeError):
    code = "DECODE_FAILURE"


class MalformedHalfCell(CardforgeError):
    code = "MALFORMED_HALF_CELL"


class OddLength(CardforgeError):
    code = "ODD_LENGTH"


class BadChoice(CardforgeError):
    code = "BAD_CHOICE"


class NotRestrictedTerminal(CardforgeError):
    code = "NOT_RESTRICTED_TERMINAL"


class NotNormalized(CardforgeError):
    code = "NOT_NORMALIZED"


class NotRestricted(CardforgeError):
    code = "NOT_RESTRICTED"


class WidthNot5(CardforgeError):
    code = "WIDTH_NOT_5"


class NotReadOnly(CardforgeError):
    code = "NOT_READ_ONLY"


class NotOpenOutput(CardforgeError):
    code = "NOT_OPEN_OUTPUT"


class ParseError(CardforgeError):
    code = "PARSE_ERROR"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        loc = ""
        if line is not None:
            loc = f"line {line}"
            if column is not None:
                loc += f", column {column}"
            loc += ": "
        super().__init__(loc + message, line=line, column=column)
        self.line = line
        self.column = column


class ValidationError(CardforgeError):
    code = "VALIDATION_ERROR"
