"""Exception hierarchy shared across the package.

Every error carries a stable machine-readable ``code`` so the CLI and the
HTTP server can surface failures without string matching.
"""

from __future__ import annotations


class PixelflowError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message


# --- module registry ---------------------------------------------------

class InvalidSpec(PixelflowError):
    code = "invalid_spec"


class DuplicateConflict(PixelflowError):
    code = "duplicate_conflict"


class UnknownModule(PixelflowError):
    code = "unknown_module"


# --- graph / serialization ----------------------------------------------

class InvalidGraph(PixelflowError):
    code = "invalid_graph"


class CycleError(PixelflowError):
    code = "cycle"


class ParseError(PixelflowError):
    code = "parse_error"

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        super().__init__(message)
        self.line = line
        self.column = column


class SchemaError(PixelflowError):
    code = "schema_error"


class UnsupportedVersion(PixelflowError):
    code = "unsupported_version"


# --- builtin modules ----------------------------------------------------

class UnknownClass(PixelflowError):
    code = "unknown_class"


class PlacementOverflow(PixelflowError):
    code = "placement_overflow"


class DimensionMismatch(PixelflowError):
    code = "dimension_mismatch"


class FilterReject(PixelflowError):
    """Raised by gate modules when the boolean input is false.

    The engine turns this into a failed job; batch drivers treat it as a
    rejected sample rather than a hard failure.
    """

    code = "filter_reject"


class DuplicateOutputDir(PixelflowError):
    code = "duplicate_output_dir"


class IoError(PixelflowError):
    code = "io_error"


# --- engine ---------------------------------------------------------------

class MissingExternalInput(PixelflowError):
    code = "missing_external_input"


class TypeMismatchAtRuntime(PixelflowError):
    code = "type_mismatch_at_runtime"


class NodeExecutionError(PixelflowError):
    """Wraps a module error with the node where it happened."""

    code = "node_execution_error"

    def __init__(self, node_id: str, cause: BaseException):
        super().__init__(f"node '{node_id}' failed: {cause}")
        self.node_id = node_id
        self.cause = cause


# --- server / jobs --------------------------------------------------------

class UnknownJob(PixelflowError):
    code = "unknown_job"


class UnknownPipeline(PixelflowError):
    code = "unknown_pipeline"


class UnknownNode(PixelflowError):
    code = "unknown_node"


class UnknownPort(PixelflowError):
    code = "unknown_port"


class NotReady(PixelflowError):
    code = "not_ready"


class NodeFailed(PixelflowError):
    code = "node_failed"


class AlreadyTerminal(PixelflowError):
    code = "already_terminal"


class ValidationFailed(PixelflowError):
    code = "validation_failed"

    def __init__(self, report):
        super().__init__("pipeline failed validation")
        self.report = report


class QueueFull(PixelflowError):
    code = "queue_full"


class PayloadTooLarge(PixelflowError):
    code = "payload_too_large"


# --- batch runs -----------------------------------------------------------

class RetryBudgetExhausted(PixelflowError):
    code = "retry_budget_exhausted"

    def __init__(self, message: str, accepted: int, attempts: int):
        super().__init__(message)
        self.accepted = accepted
        self.attempts = attempts
