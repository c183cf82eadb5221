"""HTTP service wrapping the query pipeline.

POST /v1/query   {query_id?, text, budget_fraction?, fusion_mode?} -> EnsembleResponse
GET  /v1/models  registry contents with per-token base costs
GET  /healthz    liveness
"""

from __future__ import annotations

from dataclasses import asdict

from fastapi import FastAPI
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field

from .costing import per_token_cost
from .errors import BlendkitError, InfeasibleBudgetError
from .orchestrator import EnsembleResponse, answer_query
from .predictor import PredictorHead
from .registry import FUSION_MODES, Registry


class QueryRequest(BaseModel):
    query_id: str = "query"
    text: str = Field(min_length=1)
    budget_fraction: float | None = Field(default=None, gt=0.0, le=1.0)
    fusion_mode: str | None = None


def _response_doc(res: EnsembleResponse) -> dict:
    return {
        "query_id": res.query_id,
        "fused_text": res.fused_text,
        "fusion_mode_used": res.fusion_mode_used,
        "responses": [asdict(r) for r in res.responses],
        "selection": asdict(res.selection),
        "predicted_scores": list(res.predicted_scores),
        "budget": {
            "fraction": res.budget_fraction,
            "epsilon": res.epsilon,
            "baseline_cost": res.baseline_cost,
        },
        "warnings": list(res.warnings),
    }


def create_app(registry: Registry, head: PredictorHead, encoder) -> FastAPI:
    app = FastAPI(title="blendkit router")

    @app.get("/healthz")
    def healthz():
        return {"status": "ok", "models": len(registry)}

    @app.get("/v1/models")
    def models():
        return {
            "models": [
                {
                    "index": i,
                    "name": spec.name,
                    "endpoint": spec.endpoint,
                    "n_params": spec.n_params,
                    "n_layer": spec.n_layer,
                    "d_model": spec.d_model,
                    "max_ctx": spec.max_ctx,
                    "chars_per_token": spec.chars_per_token,
                    "base_cost_per_token": per_token_cost(spec, 0),
                }
                for i, spec in enumerate(registry.models)
            ]
        }

    @app.post("/v1/query")
    def query(req: QueryRequest):
        if req.fusion_mode is not None and req.fusion_mode not in FUSION_MODES:
            return JSONResponse(
                status_code=422,
                content={"error": {"type": "validation",
                                   "message": f"unknown fusion_mode {req.fusion_mode!r}"}},
            )
        try:
            res = answer_query(
                registry, head, encoder,
                query_id=req.query_id,
                text=req.text,
                budget_fraction=req.budget_fraction,
                fusion_mode=req.fusion_mode,
            )
        except InfeasibleBudgetError as exc:
            return JSONResponse(
                status_code=409,
                content={"error": {"type": "infeasible_budget", "message": str(exc)}},
            )
        except BlendkitError as exc:
            return JSONResponse(
                status_code=500,
                content={"error": {"type": "pipeline", "message": str(exc)}},
            )
        return _response_doc(res)

    return app


def serve(registry: Registry, head: PredictorHead, encoder,
          host: str = "127.0.0.1", port: int = 8080) -> None:
    """Run the service with uvicorn (blocking)."""
    import uvicorn

    uvicorn.run(create_app(registry, head, encoder), host=host, port=port)
