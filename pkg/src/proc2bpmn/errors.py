"""Exception types shared across the pipeline."""


class Proc2BpmnError(Exception):
    """Base class for all errors raised by this package."""


class MalformedInput(Proc2BpmnError):
    """Input is not valid structured text (bad JSON, bad CoNLL-U layout)."""


class SchemaViolation(Proc2BpmnError):
    """Structurally parseable input that breaks a document invariant.

    The message names the offending sentence/token or span.
    """


class MalformedLexicon(Proc2BpmnError):
    """Lexicon file with a bad line or a conflicting entry."""


class StaleResolution(Proc2BpmnError):
    """A resolution no longer matches the document it is applied to."""


class NoParticipants(Proc2BpmnError):
    """The narrative contains no identifiable actors."""


class EmptyProcess(Proc2BpmnError):
    """No activities could be extracted; there is nothing to compile."""


class DanglingAlternative(Proc2BpmnError):
    """An alternative keyword with no preceding conditional to pair with."""


class BadOrderLabel(Proc2BpmnError):
    """Order label text that does not follow ``digits [letter digits]``."""


class CsvSchemaError(Proc2BpmnError):
    """Process-table CSV with a wrong header, column count or cell value."""


class TableInvariantError(Proc2BpmnError):
    """A parsed or constructed process table violates a table invariant."""


class UnlaidModel(Proc2BpmnError):
    """Serialization was asked for a model with missing geometry."""


class AnnotatorFailure(Proc2BpmnError):
    """The external annotator subprocess failed or returned invalid output."""
