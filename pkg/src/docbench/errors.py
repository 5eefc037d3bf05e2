"""Exception types shared across the package."""


class DocBenchError(Exception):
    """Base class for all docbench errors."""


class ParseError(DocBenchError):
    """A corpus/queries/triples line could not be parsed."""

    def __init__(self, message, line_number=None):
        if line_number is not None:
            message = f"line {line_number}: {message}"
        super().__init__(message)
        self.line_number = line_number


class NoTabError(ParseError):
    pass


class EmptyIdError(ParseError):
    pass


class InvalidIdError(ParseError):
    pass


class InvalidUtf8Error(ParseError):
    pass


class DuplicateIdError(DocBenchError):
    def __init__(self, doc_id):
        super().__init__(f"duplicate id: {doc_id!r}")
        self.doc_id = doc_id


class DocNotFoundError(DocBenchError, KeyError):
    def __init__(self, doc_id):
        DocBenchError.__init__(self, f"not found: {doc_id!r}")
        self.doc_id = doc_id

    def __str__(self):
        return self.args[0]


class StoreClosedError(DocBenchError):
    pass


class IndexFormatError(DocBenchError):
    """The index file violates the DSIX format."""


class BadMagicError(IndexFormatError):
    pass


class StaleIndexError(DocBenchError):
    """Index checksum/length no longer matches the file it references."""


class CorruptDataError(DocBenchError):
    """Stored payload failed to decode or is out of bounds."""


class CompressionError(DocBenchError):
    pass


class SingleDocCorpusError(DocBenchError):
    pass


class ChildFailedError(DocBenchError):
    def __init__(self, consumer_id, detail):
        super().__init__(f"consumer {consumer_id}: {detail}")
        self.consumer_id = consumer_id
        self.detail = detail


class StagingFailedError(DocBenchError):
    pass


class ZeroDurationError(DocBenchError):
    pass


class ZeroBaselineError(DocBenchError):
    pass


class UsageError(DocBenchError):
    """Invalid configuration supplied by the caller/CLI."""
