"""Pydantic request/response models for the experiment service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..config import ConfigError, ExperimentConfig


class ExperimentRequest(BaseModel):
    dim: int = 3
    n_values: list[int] = Field(default=[8, 32, 128])
    alpha: float = 0.75
    scale: float = 1.0
    g_partition: int = 8
    g_coords: list[float] | None = None
    g_seed: int = 999
    g_normalize: str = "l2"
    samples: int = 256
    seed: int = 42
    quad_points: int = 32
    refine_multiple: int = 4
    witness_anchors: int = 8
    angle_eps: list[float] = Field(default=[0.1, 0.15, 0.2])
    lipschitz_pairs: int = 10_000
    verify_paths: int = 1000
    verify_triples: int = 100
    grid_points: int = 101
    jacobian_points: int = 20
    jacobian_h: float = 1e-5
    jacobian_n: int = 4
    jacobian_radius: float = 5.0
    threads: int = 1

    def to_config(self, experiment: str) -> ExperimentConfig:
        data = self.model_dump()
        data["n_values"] = tuple(data["n_values"])
        data["angle_eps"] = tuple(data["angle_eps"])
        if data["g_coords"] is not None:
            data["g_coords"] = tuple(data["g_coords"])
        return ExperimentConfig(experiment=experiment, **data)


class Provenance(BaseModel):
    config_hash: str
    seed: int
    version: str


class CheckResult(BaseModel):
    name: str
    max_deviation: float
    threshold: float
    passed: bool


class VerifyResponse(BaseModel):
    experiment: str
    checks: list[CheckResult]
    passed: bool
    provenance: Provenance


class TableResponse(BaseModel):
    experiment: str
    rows: list[dict]
    summary: dict | None = None
    provenance: Provenance


class HealthResponse(BaseModel):
    status: str
    version: str
