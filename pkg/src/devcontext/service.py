"""Read-only HTTP API over a loaded snapshot.

The service holds one immutable ContextStore for its whole lifetime;
re-extraction means restarting with a new snapshot file. Entity ids can
contain slashes (resource ids are repository paths), so id segments use
path-style route parameters.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Query, Request
from fastapi.exceptions import RequestValidationError
from fastapi.responses import JSONResponse
from pydantic import BaseModel

from .extract import ExtractionReport
from .query import (
    DEFAULT_SEARCH_LIMIT,
    DEFAULT_SECTION_SIZE,
    EntityNotFoundError,
    QueryConfig,
    context_for_developer,
    context_for_resource,
    context_for_task,
    get_entity,
    search_entities,
)
from .store import ContextStore, load_snapshot


class FocusModel(BaseModel):
    kind: str
    id: str


class EntryModel(BaseModel):
    id: str
    label: str
    score: float
    kinds: list[str]
    evidence: list[str]


class ContextViewModel(BaseModel):
    focus: FocusModel
    generated_at: str
    k: int
    developers: list[EntryModel]
    resources: list[EntryModel]
    tasks: list[EntryModel]


class SearchResultModel(BaseModel):
    id: str
    label: str
    kind: str


class SearchResponseModel(BaseModel):
    query: str
    kind: str
    results: list[SearchResultModel]


class StatsModel(BaseModel):
    entities: dict[str, int]
    relations: dict[str, int]
    extraction: dict[str, int | str]


class ApiErrorModel(BaseModel):
    code: str
    message: str
    detail: str


def _error(status: int, code: str, message: str, detail: str = "") -> JSONResponse:
    body = ApiErrorModel(code=code, message=message, detail=detail)
    return JSONResponse(status_code=status, content=body.model_dump())


def create_app(
    store: ContextStore,
    enable_cors: bool = True,
    ui_dir: str | Path | None = None,
    qcfg: QueryConfig | None = None,
) -> FastAPI:
    app = FastAPI(title="devcontext", docs_url=None, redoc_url=None)
    qcfg = qcfg or QueryConfig()

    if enable_cors:
        from fastapi.middleware.cors import CORSMiddleware

        app.add_middleware(
            CORSMiddleware,
            allow_origins=["*"],
            allow_methods=["GET"],
            allow_headers=["*"],
        )

    @app.exception_handler(EntityNotFoundError)
    async def handle_not_found(request: Request, exc: EntityNotFoundError):
        return _error(404, "not_found", str(exc), f"{exc.kind}/{exc.entity_id}")

    @app.exception_handler(ValueError)
    async def handle_bad_request(request: Request, exc: ValueError):
        return _error(400, "bad_request", str(exc))

    @app.exception_handler(RequestValidationError)
    async def handle_validation(request: Request, exc: RequestValidationError):
        first = exc.errors()[0] if exc.errors() else {}
        where = ".".join(str(part) for part in first.get("loc", ()))
        return _error(
            400, "bad_request", "invalid request parameters", where
        )

    @app.exception_handler(Exception)
    async def handle_internal(request: Request, exc: Exception):
        return _error(500, "internal", "internal server error", type(exc).__name__)

    @app.get("/api/stats", response_model=StatsModel)
    async def stats():
        return StatsModel(
            entities=store.entity_counts(),
            relations=store.relation_counts(),
            extraction=ExtractionReport.from_store(store).to_obj(),
        )

    @app.get("/api/search", response_model=SearchResponseModel)
    async def search(
        q: str = Query(...),
        kind: str = Query("any"),
        limit: int = Query(DEFAULT_SEARCH_LIMIT, ge=0),
    ):
        results = search_entities(store, q, kind, limit)
        return SearchResponseModel(
            query=q,
            kind=kind,
            results=[SearchResultModel(**r.to_obj()) for r in results],
        )

    @app.get("/api/resources/{resource_id:path}/context", response_model=ContextViewModel)
    async def resource_context(
        resource_id: str, k: int = Query(DEFAULT_SECTION_SIZE, ge=0)
    ):
        return ContextViewModel(**context_for_resource(store, resource_id, k, qcfg).to_obj())

    @app.get("/api/tasks/{task_id:path}/context", response_model=ContextViewModel)
    async def task_context(task_id: str, k: int = Query(DEFAULT_SECTION_SIZE, ge=0)):
        return ContextViewModel(**context_for_task(store, task_id, k, qcfg).to_obj())

    @app.get("/api/developers/{developer_id:path}/context", response_model=ContextViewModel)
    async def developer_context(
        developer_id: str, k: int = Query(DEFAULT_SECTION_SIZE, ge=0)
    ):
        return ContextViewModel(**context_for_developer(store, developer_id, k, qcfg).to_obj())

    @app.get("/api/entities/{kind}/{entity_id:path}")
    async def entity(kind: str, entity_id: str):
        return JSONResponse(content=get_entity(store, kind, entity_id))

    if ui_dir is not None:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app


def serve(
    snapshot_path: str | Path,
    bind: str = "127.0.0.1",
    port: int = 7878,
    enable_cors: bool = True,
    ui_dir: str | Path | None = None,
    qcfg: QueryConfig | None = None,
    quiet: bool = False,
) -> None:
    """Load a snapshot and block serving it until interrupted."""
    import socket

    import uvicorn

    store = load_snapshot(snapshot_path)
    app = create_app(store, enable_cors=enable_cors, ui_dir=ui_dir, qcfg=qcfg)
    # Probe the port up front so a busy port fails loudly with an OSError
    # instead of an exit buried in server logs.
    probe = socket.socket(socket.AF_INET, socket.SOCK_STREAM)
    try:
        probe.bind((bind, port))
    finally:
        probe.close()
    uvicorn.run(app, host=bind, port=port, log_level="warning" if quiet else "info")
