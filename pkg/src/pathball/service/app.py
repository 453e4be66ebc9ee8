"""FastAPI service exposing the experiment runners.

Requests are synchronous: the caller posts an experiment configuration and
receives the full report.  Runs are deterministic functions of the request
body, so the service is safe to scale horizontally.
"""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..config import ConfigError
from ..experiments import (run_concentration, run_invariance, run_jacobian,
                           run_verify, version_string)
from .schemas import (ExperimentRequest, HealthResponse, TableResponse,
                      VerifyResponse)

app = FastAPI(title="pathball", version=version_string())


def _config(request: ExperimentRequest, experiment: str):
    try:
        return request.to_config(experiment)
    except ConfigError as exc:
        raise HTTPException(status_code=422, detail=str(exc))


@app.get("/health", response_model=HealthResponse)
def health():
    return {"status": "ok", "version": version_string()}


@app.post("/experiments/verify", response_model=VerifyResponse)
def verify(request: ExperimentRequest):
    return run_verify(_config(request, "verify"))


@app.post("/experiments/invariance", response_model=TableResponse)
def invariance(request: ExperimentRequest):
    return run_invariance(_config(request, "invariance"))


@app.post("/experiments/concentration", response_model=TableResponse)
def concentration(request: ExperimentRequest):
    return run_concentration(_config(request, "concentration"))


@app.post("/experiments/jacobian", response_model=TableResponse)
def jacobian(request: ExperimentRequest):
    return run_jacobian(_config(request, "jacobian"))
