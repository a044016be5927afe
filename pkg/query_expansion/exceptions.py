class QueryExpansionError(Exception):
    """ Base class for errors raised by the query_expansion package. """


class MalformedLineError(QueryExpansionError, ValueError):
    """
    A line of an input file could not be parsed.

    :param message: (str) What was wrong with the line.
    :param line_number: (int) 1-based number of the offending line.
    :param path: (str) The file the line came from, if known.
    """

    def __init__(self, message, line_number, path=None):
        self.line_number = line_number
        self.path = path
        location = f"{path}:{line_number}" if path else f"line {line_number}"
        super().__init__(f"{location}: {message}")


class EmptyQueryError(QueryExpansionError, ValueError):
    """ The query holds no usable text. """
    reason = "empty"


class UnsupportedQueryError(QueryExpansionError):
    """ The query cannot be processed, e.g. a one-word query has no grammatical pairs. """
    reason = "one-word"


class MissingParseError(UnsupportedQueryError):
    """ No dependency parse is available for the query. """
    reason = "no-parse"


class UnexpandableQueryError(QueryExpansionError):
    """ No base pairs or no candidate terms remain for the query. """
    reason = "un-expandable"


class DuplicateDocumentError(QueryExpansionError, ValueError):
    """ A document identifier was seen twice while indexing. """


class EvaluationError(QueryExpansionError, ValueError):
    """ A score or metric is undefined for the given input. """
