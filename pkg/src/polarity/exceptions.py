"""Exception hierarchy shared by every stage of the pipeline."""


class PolarityError(Exception):
    """Base class for all errors raised by this package."""


class IoFailure(PolarityError, OSError):
    pass


class CorpusError(PolarityError, ValueError):
    pass


class MalformedLine(CorpusError):
    def __init__(self, path, lineno, message):
        self.path = path
        self.lineno = lineno
        super().__init__(f"{path}:{lineno}: {message}")


class UnknownLabel(CorpusError):
    def __init__(self, label, path=None, lineno=None):
        self.label = label
        self.path = path
        self.lineno = lineno
        where = f"{path}:{lineno}: " if lineno is not None else ""
        super().__init__(f"{where}unknown sentiment label {label!r}")


class EmptyCorpus(PolarityError, ValueError):
    pass


class EmbeddingFormatError(PolarityError, ValueError):
    pass


class MalformedHeader(EmbeddingFormatError):
    pass


class TruncatedFile(EmbeddingFormatError):
    pass


class DimensionZero(EmbeddingFormatError):
    pass


class DimensionMismatch(PolarityError, ValueError):
    pass


class SingleClassInput(PolarityError, ValueError):
    pass


class MissingClass(PolarityError, ValueError):
    pass


class LengthMismatch(PolarityError, ValueError):
    pass


class EmptyInput(PolarityError, ValueError):
    pass


class EmptyMatrix(PolarityError, ValueError):
    pass


class ConfigError(PolarityError, ValueError):
    pass


class BundleError(PolarityError):
    pass


class UnsupportedVersion(BundleError):
    pass


class DigestMismatch(BundleError):
    pass
