"""FastAPI application over an immutable cube snapshot."""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from ..backtrack import QueryError
from ..config import ConfigError
from ..engine import CubeEngine
from ..localization import LocalizationError
from ..network import IngestError
from ..olap import EmptyContrastError
from ..patterns import EmbeddingOverflowError, MiningError
from ..proximity import EmbeddingError, InsufficientAnchorsError
from ..taxonomy import CoordinateError, TaxonomyError
from .handlers import EngineHandlers
from .schemas import BacktrackRequest, LocalizeRequest

_ERROR_CODES = [
    (CoordinateError, "bad_coordinate"),
    (QueryError, "bad_query"),
    (TaxonomyError, "bad_taxonomy"),
    (IngestError, "bad_input"),
    (EmptyContrastError, "empty_contrast"),
    (MiningError, "mining_error"),
    (EmbeddingOverflowError, "embedding_overflow"),
    (InsufficientAnchorsError, "insufficient_anchors"),
    (EmbeddingError, "embedding_error"),
    (LocalizationError, "localization_error"),
    (ConfigError, "bad_config"),
]


def error_code(exc: Exception) -> str:
    for klass, code in _ERROR_CODES:
        if isinstance(exc, klass):
            return code
    if isinstance(exc, KeyError):
        return "not_found"
    return "bad_request"


def create_app(engine: CubeEngine, ui_dir: str | Path | None = None) -> FastAPI:
    app = FastAPI(title="netolap", version="0.1.0")
    handlers = EngineHandlers(engine)

    @app.exception_handler(ValueError)
    async def value_error_handler(request: Request, exc: ValueError):
        return JSONResponse(
            status_code=400, content={"code": error_code(exc), "message": str(exc)}
        )

    @app.exception_handler(KeyError)
    async def key_error_handler(request: Request, exc: KeyError):
        return JSONResponse(status_code=400, content={"code": "not_found", "message": str(exc)})

    @app.get("/dimensions")
    def dimensions():
        return handlers.dimensions()

    @app.get("/cells/{coord}/summary")
    def cell_summary(coord: str):
        return handlers.cell_summary(coord)

    @app.get("/cells/{coord}/patterns")
    def cell_patterns(
        coord: str,
        minSupport: int | None = Query(default=None, ge=1),
        maxEdges: int | None = Query(default=None, ge=0),
        weights: str | None = None,
        contrastDim: str | None = None,
    ):
        return handlers.cell_patterns(
            coord,
            min_support=minSupport,
            max_edges=maxEdges,
            weights=weights,
            contrast_dim=contrastDim,
        )

    @app.get("/cells/{coord}/prox")
    def cell_prox(coord: str, node: str, k: int = 10, other: str | None = None):
        return handlers.cell_prox(coord, node, k=k, other=other)

    @app.get("/rollup")
    def rollup_view(
        dim: str,
        level: int,
        coord: str = "",
        members: bool = True,
    ):
        return handlers.rollup(dim, level, coord_text=coord, include_members=members)

    @app.post("/backtrack")
    def backtrack(request: BacktrackRequest):
        return handlers.backtrack(request)

    @app.post("/localize")
    def localize(request: LocalizeRequest):
        return handlers.localize(request)

    @app.get("/contrast")
    def contrast(fixed: str = "", dim: str = Query(...), level: int = Query(...)):
        return handlers.contrast(fixed, dim, level)

    if ui_dir is not None:
        ui_path = Path(ui_dir)
        if ui_path.is_dir():
            app.mount("/ui", StaticFiles(directory=str(ui_path), html=True), name="ui")

    return app
