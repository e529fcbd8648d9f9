"""Exception hierarchy shared by every appdiff module."""


class AppdiffError(Exception):
    """Base class for all errors raised by appdiff."""


# -- paths -------------------------------------------------------------------

class PathError(AppdiffError, ValueError):
    pass


class EmptyAfterNormalization(PathError):
    pass


class IllegalSegment(PathError):
    pass


# -- snapshots and hives -----------------------------------------------------

class RootUnreadable(AppdiffError):
    pass


class HiveSyntaxError(AppdiffError):
    def __init__(self, line_number, message):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class OrphanValue(AppdiffError):
    def __init__(self, cellpath):
        super().__init__(f"value has no parent key: {cellpath}")
        self.cellpath = cellpath


class OrphanFile(AppdiffError):
    def __init__(self, path):
        super().__init__(f"file entry has no parent directory: {path}")
        self.path = path


class DuplicateCell(AppdiffError):
    def __init__(self, cellpath):
        super().__init__(f"duplicate entry: {cellpath}")
        self.cellpath = cellpath


class PartNotDisjoint(AppdiffError):
    pass


class SnapshotIOError(AppdiffError):
    pass


class FormatVersionMismatch(AppdiffError):
    pass


# -- apxml -------------------------------------------------------------------

class NotWellFormed(AppdiffError):
    pass


class SchemaViolation(AppdiffError):
    def __init__(self, violations):
        self.violations = list(violations)
        first = self.violations[0] if self.violations else None
        super().__init__(str(first) if first else "schema violation")

    @property
    def path(self):
        return self.violations[0].path if self.violations else None


class UnknownPhase(AppdiffError):
    pass


class InvariantViolation(AppdiffError):
    pass


# -- profiler ----------------------------------------------------------------

class CaptureFailure(AppdiffError):
    pass


class OutputWriteFailure(AppdiffError):
    def __init__(self, message, recovery_path=None):
        super().__init__(message)
        self.recovery_path = recovery_path
