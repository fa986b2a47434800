"""Exception hierarchy. Every error raised by the library derives from ``SGLError``."""


class SGLError(Exception):
    pass


class InputError(SGLError, ValueError):
    """Bad user input; the CLI maps these to exit code 2."""


class ParseError(InputError):
    pass


class DuplicateEdge(InputError):
    pass


class Disconnected(InputError):
    pass


class TooFewVertices(InputError):
    pass


class VertexOutOfRange(InputError, IndexError):
    pass


class SizeLimit(InputError):
    pass


class SizeMismatch(InputError):
    pass


class BadParticleCount(InputError):
    pass


class BadColorCounts(InputError):
    pass


class TooSmall(InputError):
    pass


class OddVertexCount(InputError):
    pass


class IncompatibleKinds(InputError):
    pass


class DimensionMismatch(InputError):
    pass


class BadSubset(InputError):
    pass


class NotSymmetric(InputError):
    pass


class NonFinite(InputError):
    pass


class ZeroNotSimple(SGLError):
    """The zero eigenvalue of a generator is degenerate (reducible chain or numerical failure)."""


class InvarianceViolated(SGLError):
    pass
