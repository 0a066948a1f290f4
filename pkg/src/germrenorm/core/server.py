"""
HTTP surface of germrenorm.

The routes accept the same JSON documents as the CLI and answer with the
``{"code", "message", "data"}`` envelope of `APIResponse`.
"""

from __future__ import annotations

from logging import getLogger
from typing import Any, Dict

from fastapi import APIRouter, FastAPI, HTTPException
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.gzip import GZipMiddleware

from germrenorm.config import Config
from germrenorm.core.app import AppManager
from germrenorm.core.engine import RenormEngine
from germrenorm.core.exceptions import (
    GermRenormError,
    germrenorm_exception_handler,
    global_exception_handler,
    http_exception_handler,
    validation_exception_handler,
)
from germrenorm.core.response import APIResponse
from germrenorm.schemas import GermRequest, PolesRequest, TreeRequest

logger = getLogger(__name__)

_EXCEPTION_HANDLERS = [
    (GermRenormError, germrenorm_exception_handler),
    (HTTPException, http_exception_handler),
    (RequestValidationError, validation_exception_handler),
    (Exception, global_exception_handler),
]


class RenormController:
    """Binds the engine façade to API routes."""

    def __init__(self, engine: RenormEngine):
        self.engine = engine
        self.router = APIRouter()
        self.router.add_api_route("/health", self.health, methods=["GET"])
        self.router.add_api_route("/poles", self.poles, methods=["POST"])
        self.router.add_api_route("/tree", self.tree, methods=["POST"])
        self.router.add_api_route("/germ", self.germ, methods=["POST"])
        self.router.add_api_route("/renormalize", self.renormalize, methods=["POST"])

    def health(self) -> APIResponse:
        return APIResponse.success({"status": "ok", "geometry": self.engine.geometry.to_document()})

    def poles(self, body: PolesRequest) -> APIResponse:
        return APIResponse.success(self.engine.poles(body.graph.model_dump(), body.dim))

    def tree(self, body: TreeRequest) -> APIResponse:
        return APIResponse.success(self.engine.tree(body.graph.model_dump(), body.lengths))

    def germ(self, body: GermRequest) -> APIResponse:
        return APIResponse.success(self.engine.germ(**_germ_arguments(body)))

    def renormalize(self, body: GermRequest) -> APIResponse:
        return APIResponse.success(self.engine.renormalize(**_germ_arguments(body)))


def _germ_arguments(body: GermRequest) -> Dict[str, Any]:
    testfn = body.testfn
    return {
        "graph": body.graph.model_dump(),
        "testfn": testfn if isinstance(testfn, list) else testfn.model_dump(),
        "geometry": body.geometry.model_dump(),
        "order": body.order,
        "heat_order": body.heat_order,
    }


def create_app(manager: AppManager) -> FastAPI:
    """Build the FastAPI application around the manager's engine."""
    config = manager.get_instance(Config)
    app = FastAPI(
        title=config.server.title,
        description=config.server.description,
        version=config.server.version,
    )
    app.add_middleware(GZipMiddleware, minimum_size=500, compresslevel=9)
    for exc_class, handler in _EXCEPTION_HANDLERS:
        app.add_exception_handler(exc_class, handler)
    controller = RenormController(manager.get_engine())
    app.include_router(controller.router)
    logger.info("API routes registered")
    return app


def run(app: FastAPI, config: Config) -> None:
    """Serve the application under uvicorn."""
    import uvicorn

    host, port = config.server.host, config.server.port
    logger.info(f"Running server on {host}:{port}")
    uvicorn.run(app, host=host, port=port, workers=config.server.workers)


__all__ = ["RenormController", "create_app", "run"]
