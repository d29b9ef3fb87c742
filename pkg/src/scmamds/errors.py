"""Exception hierarchy shared by all modules."""


class ScmaError(ValueError):
    """Base class for invalid parameters or inconsistent artifacts."""


class NotPrimePower(ScmaError):
    pass


class DimensionMismatch(ScmaError):
    pass


class ParamsOutOfRange(ScmaError):
    pass


class WrongField(ScmaError):
    pass


class RankDeficient(ScmaError):
    pass


class SizeMismatch(ScmaError):
    pass


class AlphabetMismatch(ScmaError):
    pass


class TargetTooLarge(ScmaError):
    pass


class NotPowerOfTwo(ScmaError):
    pass


class IndivisibleLoad(ScmaError):
    pass


class IrregularMatrix(ScmaError):
    pass


class ShapeMismatch(ScmaError):
    pass


class NonPositiveNoise(ScmaError):
    pass


class TooLarge(ScmaError):
    pass


class InsufficientErrors(ScmaError):
    pass
