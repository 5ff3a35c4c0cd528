"""FastAPI service exposing scenario runs, preset listing and version info."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from .. import __version__
from ..presets import list_presets
from ..scenario import ConfigError, run_scenario
from .schemas import (
    ArtifactModel,
    BoundCheckModel,
    HealthResponse,
    PresetModel,
    RunRequest,
    RunResponse,
    VersionResponse,
)

__all__ = ["create_app"]


def create_app() -> FastAPI:
    app = FastAPI(title="truncpicard", version=__version__,
                  description="Truncated Picard iteration checks on "
                              "Schauder-basis sequence spaces")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.get("/version", response_model=VersionResponse)
    def version() -> VersionResponse:
        return VersionResponse(version=__version__)

    @app.get("/presets", response_model=list[PresetModel])
    def presets() -> list[PresetModel]:
        return [PresetModel(name=p.name, kind=p.kind, description=p.description)
                for p in list_presets()]

    @app.post("/run", response_model=RunResponse)
    def run(request: RunRequest) -> RunResponse:
        try:
            result = run_scenario(request.scenario.to_document())
        except ConfigError as exc:
            raise HTTPException(status_code=400, detail=str(exc)) from None
        return RunResponse(
            name=result.name,
            all_passed=result.all_passed,
            checks=[BoundCheckModel(
                name=c.name, lhs=c.lhs, rhs=c.rhs, slack=c.slack,
                passed=c.passed, hypothesis_met=c.hypothesis_met,
                tolerance=c.tolerance, context=c.context,
                interpretation=c.interpretation) for c in result.checks],
            artifacts=[ArtifactModel(path=p, content=content)
                       for p, content in result.artifacts],
            output_dir=result.output_dir,
        )

    return app
