"""Exception hierarchy shared across the package."""


class HhlinkError(Exception):
    """Base class for every error raised by this package."""


class EmptyFieldError(HhlinkError):
    """A field normalized to the empty string and cannot be encoded."""


class LengthMismatchError(HhlinkError):
    """Two bit vectors (or aligned sequences) have different lengths."""


class BothEmptyError(HhlinkError):
    """Both vectors of a Dice comparison carry zero set bits."""


class VectorSizeMismatchError(HhlinkError):
    """Profiles encoded with different vector sizes were mixed."""


class DegenerateClassError(HhlinkError):
    """A stratified operation was given too few members of one class."""


class UnknownProfileError(HhlinkError):
    """A referenced profile id does not exist in the corpus."""


class UnknownEndpointError(HhlinkError):
    """An edge references a node outside the profile set."""


class UntrainedModelError(HhlinkError):
    """Prediction was requested from a model that has not been fitted."""


class BadDistributionError(HhlinkError):
    """A probability distribution is malformed (negative mass, sum != 1)."""


class PatternInfeasibleError(HhlinkError):
    """A corruption pattern cannot be realized on the given profile."""


class SchemaError(HhlinkError):
    """A file does not match its expected column schema."""


class ParseError(HhlinkError):
    """A file row holds an unparseable value; message carries the line number."""


class DuplicateIdError(HhlinkError):
    """A corpus file repeats a profile id."""


class EmptyInputError(HhlinkError):
    """An operation that needs at least one record received none."""
