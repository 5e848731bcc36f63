"""
MeanLab Exceptions
Error hierarchy with machine-readable codes and CLI exit statuses
"""
from typing import Any, Dict, Optional


class MeanLabError(Exception):
    """Base class for every error raised by the laboratory"""

    code: str = "meanlab_error"
    exit_code: int = 3

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, **self.details}


class DomainError(MeanLabError, ValueError):
    """A parameter lies outside the operator's domain"""

    code = "domain_error"
    exit_code = 2


class ConfigError(MeanLabError):
    """Experiment configuration could not be parsed or validated"""

    code = "config_error"
    exit_code = 2

    def __init__(self, message: str, field: Optional[str] = None, line: Optional[int] = None):
        details: Dict[str, Any] = {}
        if field is not None:
            details["field"] = field
        if line is not None:
            details["line"] = line
        super().__init__(message, details)
        self.field = field
        self.line = line


class DegenerateKernelError(MeanLabError):
    """A normalizing weight vanished (locally constant field)"""

    code = "degenerate_kernel"


class QuadratureError(MeanLabError):
    code = "quadrature_error"


class TailConvergenceError(QuadratureError):
    """The integrand does not decay as declared beyond the truncation radius"""

    code = "tail_nonconvergent"


class NearOriginError(QuadratureError):
    """The near-origin contribution could not be resolved"""

    code = "near_origin_unbounded"


class SelfConvergenceError(QuadratureError):
    """Two quadrature resolutions disagree"""

    code = "self_convergence_failed"

    def __init__(self, message: str, coarse: float, fine: float):
        super().__init__(message, {"coarse": coarse, "fine": fine})
        self.coarse = coarse
        self.fine = fine


class RootSearchError(MeanLabError):
    """The cap threshold equation has no root in the bracket"""

    code = "cap_root_not_bracketed"


class OptimizerError(MeanLabError):
    code = "optimizer_failed"
