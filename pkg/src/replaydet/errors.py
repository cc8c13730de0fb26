"""Exception hierarchy shared across the package.

``InputError`` subclasses mark violated preconditions or bad input data and
map to CLI exit code 2; everything else under ``ReplayDetError`` is an
internal/runtime failure and maps to exit code 1.
"""


class ReplayDetError(Exception):
    """Base class for all errors raised by this package."""


class InputError(ReplayDetError):
    """Bad input or violated precondition (CLI exit code 2)."""


# -- audio_io ---------------------------------------------------------------

class NotWav(InputError):
    pass


class UnsupportedEncoding(InputError):
    pass


class ChannelMismatch(InputError):
    pass


class RateMismatch(InputError):
    pass


class TruncatedFile(InputError):
    pass


class IoFailure(ReplayDetError):
    pass


# -- features / stores ------------------------------------------------------

class DimensionMismatch(InputError):
    pass


class BadMagic(InputError):
    pass


class DimMismatch(InputError):
    """Kind byte and dimension field of a feature file contradict."""


class DuplicateKey(InputError):
    pass


class Truncated(InputError):
    pass


class MissingKey(InputError):
    pass


class KeyMismatch(InputError):
    pass


class MissingFeature(InputError):
    pass


# -- models -----------------------------------------------------------------

class RankDeficient(UserWarning):
    """PCA fit found fewer nonzero singular values than requested components.

    A warning category, not an error: fit() pads the missing components
    with zeros and keeps going.
    """


class SingleClassTrainingSet(InputError):
    pass


class NonFiniteLoss(ReplayDetError):
    pass


class TooFewSamples(InputError):
    pass


# -- harness ----------------------------------------------------------------

class ParseError(InputError):
    pass


class SpeakerLeakage(InputError):
    pass


class TooFewSpeakers(InputError):
    pass


class EmptySplit(InputError):
    pass
