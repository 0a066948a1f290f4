from logging import getLogger
from typing import Optional

from fastapi import HTTPException, Request, status
from fastapi.encoders import jsonable_encoder
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse

from germrenorm.core.response import APIResponse

logger = getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_PRECONDITION = 3
EXIT_RESOURCE = 4
EXIT_NUMERICAL = 5


class GermRenormError(ValueError):
    """Root of the package errors. Subclasses fix the CLI exit code and the HTTP status."""

    exit_code: int = EXIT_PRECONDITION
    status_code: int = status.HTTP_422_UNPROCESSABLE_ENTITY

    def __init__(self, message: str, exit_code: Optional[int] = None):
        super().__init__(message)
        self.message = message
        if exit_code is not None:
            self.exit_code = exit_code


class InputError(GermRenormError):
    """Malformed or inconsistent input documents (exit 2)."""

    exit_code = EXIT_INPUT
    status_code = status.HTTP_400_BAD_REQUEST


class PreconditionError(GermRenormError):
    """A mathematical precondition of an operation does not hold (exit 3)."""

    exit_code = EXIT_PRECONDITION


class ResourceCapError(GermRenormError):
    """Problem size beyond the configured caps (exit 4)."""

    exit_code = EXIT_RESOURCE
    status_code = status.HTTP_413_REQUEST_ENTITY_TOO_LARGE


class NumericalError(GermRenormError):
    """Numerical failure (exit 5); `achieved_error` is the best estimate reached, if any."""

    exit_code = EXIT_NUMERICAL
    status_code = status.HTTP_500_INTERNAL_SERVER_ERROR

    def __init__(self, message: str, achieved_error: Optional[float] = None):
        super().__init__(message)
        self.achieved_error = achieved_error


class GraphError(InputError):
    """Invalid graph data: self-loops, duplicate vertex ids, dangling edge endpoints."""


class UnknownEdgeError(GraphError):
    """An edge index outside 1..E."""


class InvalidPermutationError(GraphError):
    """A sector permutation that is not a permutation of 1..E."""


class DisconnectedGraphError(PreconditionError):
    """A spanning tree was requested for a disconnected graph."""


class TiedLengthsError(PreconditionError):
    """A metric graph whose lengths are not pairwise distinct."""

    def __init__(self, message: str = "strict metric required"):
        super().__init__(message)


class DimensionMismatchError(InputError):
    """Linear forms, jets or germs living in different numbers of variables."""


class InsufficientOrderError(PreconditionError):
    """A jet truncation order too small for the requested output order."""


class DivergentTailError(PreconditionError):
    """The t ≥ 1 tail of the Green function diverges (massless, d ≤ 2)."""


class ConvergenceRegionError(PreconditionError):
    """Parameters outside the region where an integral converges absolutely."""


class QuadratureError(NumericalError):
    """A quadrature rule did not reach the requested tolerance."""


def germrenorm_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """Map a GermRenormError to its HTTP status, with the CLI exit code under ``data``."""
    if not isinstance(exc, GermRenormError):
        return global_exception_handler(request, exc)
    logger.warning("request %s failed: %s", request.url.path, exc.message)
    return APIResponse.error(exc.message, exc.status_code, data={"exit_code": exc.exit_code})


def http_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    if not isinstance(exc, HTTPException):
        return global_exception_handler(request, exc)
    return APIResponse.error(exc.detail, exc.status_code)


def validation_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """Request bodies that fail the schemas: 422 with pydantic's error list under ``data``."""
    if not isinstance(exc, RequestValidationError):
        return global_exception_handler(request, exc)
    details = jsonable_encoder(exc.errors())
    return APIResponse.error("Validation Error", status.HTTP_422_UNPROCESSABLE_ENTITY, data=details)


def global_exception_handler(request: Request, exc: Exception) -> JSONResponse:
    """未预期的异常: 记录堆栈, 返回 500"""
    logger.exception("unhandled error on %s", request.url.path)
    return APIResponse.error(str(exc), status.HTTP_500_INTERNAL_SERVER_ERROR)
