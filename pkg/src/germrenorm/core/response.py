"""The ``{"code", "message", "data"}`` envelope returned by every endpoint of `germrenorm serve`."""

import json
from typing import Any, Dict, Generic, List, Optional, TypeVar, Union

from fastapi import status
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

# Reports leave the engine as plain JSON documents or as pydantic models.
Payload = TypeVar(
    "Payload",
    bound=Union[str, int, float, bool, None, Dict[str, Any], List[Any], BaseModel],
)


def _plain(data: Any) -> Any:
    if isinstance(data, BaseModel):
        return data.model_dump(mode="json")
    if isinstance(data, list):
        return [_plain(item) for item in data]
    return data


class APIResponseModel(BaseModel, Generic[Payload]):
    """Typed form of the envelope, for OpenAPI schemas and for clients."""

    model_config = ConfigDict(extra="allow")

    code: int
    message: str
    data: Optional[Payload] = None


class APIResponse(JSONResponse):
    """
    JSONResponse carrying the envelope.

    ``code`` doubles as the HTTP status unless ``status_code`` is given. Error responses from the
    exception handlers put the matching CLI exit code under ``data``.
    """

    def __init__(
        self,
        data: Any = None,
        code: int = status.HTTP_200_OK,
        message: str = "success",
        status_code: Optional[int] = None,
    ):
        self.code = code
        self.message = message
        self.data = data
        super().__init__(content=self.model_dump(), status_code=status_code or code)

    def model_dump(self) -> Dict[str, Any]:
        return {"code": self.code, "message": self.message, "data": _plain(self.data)}

    def model_dump_json(self) -> str:
        return json.dumps(self.model_dump(), separators=(",", ":"))

    @classmethod
    def success(cls, data: Any = None, status_code: int = status.HTTP_200_OK) -> "APIResponse":
        return cls(data=data, code=status_code)

    @classmethod
    def error(
        cls, message: str, code: int = status.HTTP_400_BAD_REQUEST, data: Any = None
    ) -> "APIResponse":
        return cls(data=data, code=code, message=message)


__all__ = ["APIResponse", "APIResponseModel"]
