"""Pydantic request/response models for the verification service."""

from __future__ import annotations

from typing import Any, Optional, Union

from pydantic import BaseModel, ConfigDict, Field


class ScenarioModel(BaseModel):
    """Outer shape of a scenario document; deep validation happens in the engine."""

    model_config = ConfigDict(extra="allow")

    schema_version: int
    name: str
    basis: Union[str, dict, None] = None
    metric: str = "l2"
    operator: Union[str, dict, None] = None
    elements: dict[str, dict] = Field(default_factory=dict)
    delay: Union[str, dict, None] = None
    suite: list[dict]
    output: Optional[dict] = None

    def to_document(self) -> dict:
        doc = self.model_dump(exclude_none=True)
        # an omitted operator/delay must stay omitted, not become null
        for key in ("basis", "operator", "delay", "output"):
            if key in doc and doc[key] is None:
                del doc[key]
        return doc


class RunRequest(BaseModel):
    scenario: ScenarioModel


class BoundCheckModel(BaseModel):
    model_config = ConfigDict(populate_by_name=True)

    name: str
    lhs: float
    rhs: float
    slack: float
    passed: bool = Field(alias="pass", serialization_alias="pass")
    hypothesis_met: bool = True
    tolerance: float
    context: dict[str, Any] = Field(default_factory=dict)
    interpretation: Optional[str] = None


class ArtifactModel(BaseModel):
    path: str
    content: str


class RunResponse(BaseModel):
    name: str
    all_passed: bool
    checks: list[BoundCheckModel]
    artifacts: list[ArtifactModel]
    output_dir: Optional[str] = None


class PresetModel(BaseModel):
    name: str
    kind: str
    description: str


class VersionResponse(BaseModel):
    version: str


class HealthResponse(BaseModel):
    status: str
    version: str
