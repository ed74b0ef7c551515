"""Exception hierarchy shared across the package."""


class DurqaError(Exception):
    """Base class for all domain errors raised by durqa."""


class CsvSchemaError(DurqaError):
    """CSV header does not match the expected schema for the category."""


class CsvRowError(DurqaError):
    """A CSV data row is invalid; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class TemplateError(DurqaError):
    """A question or prompt template is missing a required placeholder."""


class DatasetError(DurqaError):
    """A QA dataset file is malformed; carries the 1-based line number."""

    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


class CredentialError(DurqaError):
    """Remote backend rejected the configured credentials (not retried)."""


class ProtocolError(DurqaError):
    """Remote backend returned a response that violates the wire contract."""


class TransportError(DurqaError):
    """Remote backend unreachable after exhausting retries."""


class ConfigurationError(DurqaError):
    """Mismatched or invalid system configuration (embedder tag, chunk sets, paths)."""


class PromptFormatError(DurqaError):
    """Prompt lacks the machine-readable blocks the mock backend requires."""


class AnswerParseError(DurqaError):
    """Model output could not be parsed into a structured answer."""


class SnapshotError(DurqaError):
    """Snapshot directory is missing, incomplete, or corrupt."""


class PipelineStageError(DurqaError):
    """Failure inside one pipeline stage, tagged with the stage name."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"stage '{stage}': {cause}")
        self.stage = stage
        self.cause = cause
