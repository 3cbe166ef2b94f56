"""Exception hierarchy.

Every error carries a machine-readable ``code`` (``duplicate_id``,
``singular_system``, ...) plus free-form ``details``. The CLI maps the
``exit_code`` class attribute to the process exit status.
"""

from __future__ import annotations


class ChainDocError(Exception):
    exit_code = 2

    def __init__(self, code: str, message: str = "", **details):
        self.code = code
        self.message = message
        self.details = details
        super().__init__(f"{code}: {message}" if message else code)


class ValidationFailure(ChainDocError):
    """Input is rejected before any computation runs."""

    exit_code = 1


class NetlistError(ValidationFailure):
    def __init__(self, code, message="", line=None, column=None, **details):
        self.line = line
        self.column = column
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{where}: {message}" if message else where
        super().__init__(code, message, line=line, column=column, **details)


class ChainError(ValidationFailure):
    pass


class ExprError(ValidationFailure):
    def __init__(self, code, message="", position=None, **details):
        self.position = position
        if position is not None:
            message = f"offset {position}: {message}" if message else f"offset {position}"
        super().__init__(code, message, position=position, **details)


class DataflowError(ValidationFailure):
    pass


class DocgenError(ValidationFailure):
    pass


class ConfigError(ValidationFailure):
    pass


class SolverError(ChainDocError):
    pass


class StoreError(ChainDocError):
    pass


class WorkflowError(ChainDocError):
    """A pipeline step failed; ``step`` names it and ``cause`` is the original error."""

    def __init__(self, step: str, title: str, cause: Exception):
        self.step = step
        self.cause = cause
        code = getattr(cause, "code", type(cause).__name__)
        self.exit_code = getattr(cause, "exit_code", 2)
        message = getattr(cause, "message", None) or str(cause)
        super().__init__(code, f"step {step} ({title}): {message}", step=step)
