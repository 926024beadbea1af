"""Exception hierarchy.

``ValidationError`` covers malformed or ill-defined objects (bad documents,
substitution maps that do not annihilate their source truncation).
``PreconditionError`` covers well-formed objects handed to an operation
whose preconditions they violate.  The CLI maps them to exit codes 1 and 2.
"""


class HSForgeError(Exception):
    kind = "error"


class ValidationError(HSForgeError):
    kind = "validation"


class ParseError(ValidationError):
    kind = "parse"


class PreconditionError(HSForgeError):
    kind = "precondition"


class UniverseMismatch(PreconditionError):
    kind = "universe-mismatch"


class NotAUnit(PreconditionError):
    kind = "not-a-unit"


class UnsupportedGeneratingSet(PreconditionError):
    kind = "unsupported-generating-set"


class Cancelled(HSForgeError):
    kind = "cancelled"
