"""Read-only HTTP bridge between the toolkit and the browser viewer.

Serves an immutable mesh catalog loaded at startup: listing, JSON mesh
export, geodesic measurement and orthographic projection. Strictly
read-only and stateless, so identical requests always produce identical
responses; geodesic adjacency caches are built lazily, once per mesh.

Endpoints live under /v1 (and at the root for convenience):
    GET  /v1/health            -> {"status": "ok"}
    GET  /v1/meshes            -> catalog listing with stats
    GET  /v1/mesh/{id}         -> toolkit JSON mesh export
    POST /v1/geodesic          -> {id, a, b, refine?} -> GeodesicPath JSON
    POST /v1/projection        -> {id, view} -> TemplateSheet JSON

Domain errors map to 422 with {code, message}; unknown ids to 404;
malformed bodies to 400. No stack traces in responses.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.exceptions import RequestValidationError
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .errors import DomainError
from .geodesics import GeodesicSolver, SurfacePoint, geodesic_distance
from .mesh_io import Mesh, MeshStats, export_mesh_json, load_mesh_file, mesh_stats
from .templating import VIEW_PRESETS, project_orthographic

MESH_SUFFIXES = (".obj", ".stl", ".ply", ".json")


@dataclass(frozen=True)
class CatalogEntry:
    path: str
    mesh: Mesh
    stats: MeshStats


class MeshCatalog:
    """Immutable id -> mesh map with per-mesh lazy geodesic solvers."""

    def __init__(self, entries: dict):
        self.entries = dict(entries)
        self._solvers: dict[str, GeodesicSolver] = {}
        self._lock = threading.Lock()

    def ids(self):
        return sorted(self.entries)

    def get(self, mesh_id: str) -> CatalogEntry | None:
        return self.entries.get(mesh_id)

    def solver(self, mesh_id: str) -> GeodesicSolver:
        with self._lock:
            if mesh_id not in self._solvers:
                self._solvers[mesh_id] = GeodesicSolver(self.entries[mesh_id].mesh)
            return self._solvers[mesh_id]


def build_catalog(directory: str | Path) -> MeshCatalog:
    """Load every parseable mesh under ``directory`` (ids = file stems)."""
    directory = Path(directory)
    entries = {}
    for path in sorted(directory.iterdir()):
        if path.suffix.lower() not in MESH_SUFFIXES or not path.is_file():
            continue
        try:
            mesh = load_mesh_file(path)
        except DomainError:
            continue  # not a mesh we can serve; skip quietly
        mesh_id = path.stem
        if mesh_id in entries:
            raise ValueError(f"duplicate mesh id {mesh_id!r} in catalog")
        entries[mesh_id] = CatalogEntry(path=str(path), mesh=mesh,
                                        stats=mesh_stats(mesh))
    if not entries:
        raise ValueError(f"no parseable meshes in {directory}")
    return MeshCatalog(entries)


class SurfacePointModel(BaseModel):
    face: int = Field(ge=0)
    bary: tuple[float, float, float]


class GeodesicRequest(BaseModel):
    id: str
    a: SurfacePointModel
    b: SurfacePointModel
    refine: bool = True


class ViewVectors(BaseModel):
    direction: tuple[float, float, float]
    up: tuple[float, float, float]


class ProjectionRequest(BaseModel):
    id: str
    view: str | ViewVectors = "front"
    scale: float = 1.0


def create_app(catalog: MeshCatalog, static_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="meshfab service", version="1", docs_url=None,
                  redoc_url=None)
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],   # workshop-LAN viewer; service is read-only
        allow_methods=["GET", "POST"],
        allow_headers=["*"],
    )

    @app.exception_handler(RequestValidationError)
    async def malformed_body(request: Request, exc: RequestValidationError):
        return JSONResponse(status_code=400, content={
            "code": "MalformedBody",
            "message": "; ".join(
                f"{'/'.join(str(p) for p in e['loc'])}: {e['msg']}"
                for e in exc.errors()
            ),
        })

    @app.exception_handler(DomainError)
    async def domain_error(request: Request, exc: DomainError):
        return JSONResponse(status_code=422, content=exc.payload())

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422,
                            content={"code": "InvalidInput", "message": str(exc)})

    def not_found(mesh_id: str) -> JSONResponse:
        return JSONResponse(status_code=404, content={
            "code": "UnknownMesh", "message": f"no mesh with id {mesh_id!r}",
        })

    def register(router):
        @router.get("/health")
        async def health():
            return {"status": "ok"}

        @router.get("/meshes")
        async def meshes():
            return {
                "meshes": [
                    {"id": mesh_id, **catalog.get(mesh_id).stats.as_dict()}
                    for mesh_id in catalog.ids()
                ]
            }

        @router.get("/mesh/{mesh_id}")
        async def mesh(mesh_id: str):
            entry = catalog.get(mesh_id)
            if entry is None:
                return not_found(mesh_id)
            return Response(content=export_mesh_json(entry.mesh),
                            media_type="application/json")

        @router.post("/geodesic")
        async def geodesic(req: GeodesicRequest):
            entry = catalog.get(req.id)
            if entry is None:
                return not_found(req.id)
            a = SurfacePoint(face=req.a.face, bary=req.a.bary)
            b = SurfacePoint(face=req.b.face, bary=req.b.bary)
            path = geodesic_distance(entry.mesh, a, b, refine=req.refine,
                                     solver=catalog.solver(req.id))
            return path.as_dict()

        @router.post("/projection")
        async def projection(req: ProjectionRequest):
            entry = catalog.get(req.id)
            if entry is None:
                return not_found(req.id)
            if isinstance(req.view, str):
                if req.view not in VIEW_PRESETS:
                    return JSONResponse(status_code=422, content={
                        "code": "UnknownView",
                        "message": f"view must be one of {sorted(VIEW_PRESETS)}",
                    })
                direction, up = VIEW_PRESETS[req.view]
            else:
                direction, up = req.view.direction, req.view.up
            sheet = project_orthographic(entry.mesh, np.asarray(direction, float),
                                         np.asarray(up, float), scale=req.scale)
            return sheet.as_dict()

    from fastapi import APIRouter

    v1 = APIRouter()
    register(v1)
    app.include_router(v1, prefix="/v1")
    app.include_router(v1)  # same surface at the root for convenience

    if static_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=static_dir, html=True),
                  name="viewer")
    return app
