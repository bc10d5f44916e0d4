"""Exception hierarchy shared across the package.

Plain I/O failures are raised as the builtin ``OSError``; everything that
carries pipeline semantics gets its own class below so callers (and the CLI
exit-code mapping) can distinguish config mistakes from data problems.
"""


class MmrecError(Exception):
    """Base class for all package-specific errors."""


class ConfigError(MmrecError):
    """Invalid or inconsistent run configuration."""


class DataError(MmrecError):
    """Invalid or inconsistent input data."""


class UnknownToken(DataError):
    def __init__(self, token: str, entity: str = "token"):
        self.token = token
        super().__init__(f"unknown {entity}: {token!r}")


class Malformed(DataError):
    def __init__(self, line_no: int, detail: str = ""):
        self.line_no = line_no
        msg = f"malformed line {line_no}"
        if detail:
            msg += f": {detail}"
        super().__init__(msg)


class DuplicateItem(DataError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"duplicate item token: {token!r}")


class Degenerate(DataError):
    """A precondition on data shape makes the operation meaningless."""


class MissingFeatureRow(DataError):
    def __init__(self, token: str):
        self.token = token
        super().__init__(f"no feature row for item: {token!r}")


class BadMagic(DataError):
    """Feature file does not start with the expected magic bytes."""


class BadVersion(DataError):
    def __init__(self, version: int):
        self.version = version
        super().__init__(f"unsupported feature file version: {version}")


class TruncatedFile(DataError):
    """Feature file is shorter than its header declares."""


class DimMismatch(MmrecError):
    """Operand dimensions are incompatible."""


class EmptyModalities(MmrecError):
    """An operation that needs at least one modality received none."""


class UnknownModality(MmrecError):
    def __init__(self, modality):
        self.modality = modality
        super().__init__(f"no projection registered for modality: {modality}")


class UnknownUser(MmrecError):
    def __init__(self, user: int):
        self.user = user
        super().__init__(f"user index out of range: {user}")


class InsufficientItems(MmrecError):
    def __init__(self, available: int, k: int):
        self.available = available
        self.k = k
        super().__init__(f"only {available} rankable items, need K={k}")


class EmptyGrid(ConfigError):
    """Hyper-parameter grid has no points."""


class EmptyRecords(MmrecError):
    """Selection over an empty record list."""


class KeyMismatch(MmrecError):
    """Variant report set does not align with the baseline keys."""


class StageError(MmrecError):
    """Wraps an error with the pipeline stage it occurred in."""

    def __init__(self, stage: str, cause: BaseException):
        self.stage = stage
        self.cause = cause
        super().__init__(f"{stage}: {cause}")
