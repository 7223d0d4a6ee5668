"""Exception hierarchy.

Input/contract problems derive from :class:`InputError` (a ``ValueError``)
so the CLI can map them to exit code 1.
"""


class CKLabError(Exception):
    """Base class for every error raised by cklab."""


class InputError(CKLabError, ValueError):
    """Malformed or out-of-contract input."""


# matrix validation
class NonSquare(InputError):
    pass


class BadEntry(InputError):
    pass


class ZeroRow(InputError):
    def __init__(self, row):
        self.row = row
        super().__init__(f"row {row} is zero")


class ZeroColumn(InputError):
    def __init__(self, column):
        self.column = column
        super().__init__(f"column {column} is zero")


class TooSmall(InputError):
    pass


# words and levels
class InadmissibleWord(InputError):
    pass


class LengthZero(InputError):
    pass


class DepthTooLarge(InputError):
    pass


class PrefixTooShort(InputError):
    pass


class LevelMismatch(InputError):
    pass


# truncated representations
class TruncationTooSmall(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class NotPureDegree(InputError):
    pass


class LevelExceedsTruncation(InputError):
    pass


class NoConvergence(CKLabError, ArithmeticError):
    pass


# bimodules
class NotInjective(InputError):
    pass


class BlockOutOfRange(InputError):
    pass


# uniqueness experiments
class ConditionIHolds(InputError):
    pass


class ConditionIFails(InputError):
    pass


class UnsupportedShape(InputError):
    pass
