"""Exception hierarchy shared by every module."""


class CorrCipherError(Exception):
    """Base class for all package errors."""


class NegativeProbability(CorrCipherError, ValueError):
    pass


class NotNormalized(CorrCipherError, ValueError):
    pass


class LengthMismatch(CorrCipherError, ValueError):
    pass


class RateBelowSlepianWolf(CorrCipherError, ValueError):
    pass


class NoConsistentPair(CorrCipherError, LookupError):
    """No source pair maps to the received bin indices."""


class ZeroModulus(CorrCipherError, ValueError):
    pass


class OutOfRange(CorrCipherError, ValueError):
    pass


class TargetOutOfRange(CorrCipherError, ValueError):
    pass


class PlanMismatch(CorrCipherError, ValueError):
    pass


class NoKeyedSlotAvailable(CorrCipherError, ValueError):
    pass


class EnumerationTooLarge(CorrCipherError, ValueError):
    pass


class SlotNotKeyed(CorrCipherError, ValueError):
    pass


class ConfigInvalid(CorrCipherError, ValueError):
    pass


class IoFailure(CorrCipherError, OSError):
    pass
