"""Domain exceptions.

Every error that can cross the API boundary carries a stable machine-readable
``code`` so the control service can map exceptions onto structured payloads
without a separate lookup table.
"""

from __future__ import annotations


class PlatformError(Exception):
    """Base class for all domain errors."""

    code = "error"

    def payload(self) -> dict:
        """Structured form used by the control service and the CLI."""
        return {"code": self.code, "message": str(self)}


# --- tag grammar ---------------------------------------------------------

class BadTagError(PlatformError):
    code = "bad_tag"


class EmptyTagError(BadTagError):
    code = "empty_tag"


class EmptyDescriptorError(BadTagError):
    code = "empty_descriptor"


class IllegalCharacterError(BadTagError):
    code = "illegal_character"


class UnknownIdError(PlatformError):
    code = "unknown_id"


# --- graph construction --------------------------------------------------

class DuplicateIdError(PlatformError):
    code = "duplicate_id"


class UnknownShellError(PlatformError):
    code = "unknown_shell"


class UnknownPortError(PlatformError):
    code = "unknown_port"


class DirectionMismatchError(PlatformError):
    code = "direction_mismatch"


class TypeMismatchError(PlatformError):
    code = "type_mismatch"


class InputAlreadyBoundError(PlatformError):
    code = "input_already_bound"


class OutputAlreadyBoundError(PlatformError):
    """Second consumer edge or second sink binding on one output port."""

    code = "output_already_bound"


class CycleError(PlatformError):
    code = "cycle_detected"


class BadDefinitionError(PlatformError):
    """Malformed pipeline definition document."""

    code = "bad_pipeline"


# --- processor registry --------------------------------------------------

class BadManifestError(PlatformError):
    code = "bad_manifest"


class DuplicateProcessorError(PlatformError):
    code = "duplicate_processor"


class UnknownBackendError(PlatformError):
    code = "unknown_backend"


class UnknownProcessorError(PlatformError):
    code = "unknown_processor"


class NotDeployableError(PlatformError):
    code = "not_deployable"


class StaleHandleError(PlatformError):
    code = "stale_handle"


class UnknownOperatorError(PlatformError):
    code = "unknown_operator"


class OperatorArityError(PlatformError):
    """Operator cannot serve the shell's input/output port counts."""

    code = "operator_arity"


class OperatorParamError(PlatformError):
    code = "bad_operator_params"


class BadResourceError(PlatformError):
    """Unusable source/sink resource URI."""

    code = "bad_resource"


# --- planning and execution ----------------------------------------------

class InvalidGraphError(PlatformError):
    code = "invalid_graph"

    def __init__(self, message: str, violations=()):
        super().__init__(message)
        self.violations = list(violations)

    def payload(self) -> dict:
        out = super().payload()
        out["violations"] = [v.as_dict() for v in self.violations]
        return out


class PlanInfeasibleError(PlatformError):
    code = "plan_infeasible"

    def __init__(self, message: str, report=None):
        super().__init__(message)
        self.report = report

    def payload(self) -> dict:
        out = super().payload()
        if self.report is not None:
            out["report"] = {"rejections": self.report.as_dicts()}
        return out


class CommitFailedError(PlatformError):
    code = "commit_failed"

    def __init__(self, message: str, report: dict | None = None):
        super().__init__(message)
        self.report = report or {}

    def payload(self) -> dict:
        out = super().payload()
        out["report"] = self.report
        return out


class PutAfterCloseError(PlatformError):
    code = "put_after_close"


class InvalidStateError(PlatformError):
    code = "invalid_state"


class NotFoundError(PlatformError):
    code = "not_found"
