"""End-to-end query pipeline: embed -> predict -> cost -> select -> dispatch -> fuse.

Model generation wire contract: POST {"prompt": str, "max_tokens": int}
to the model endpoint, expecting {"text": str}. Fuser wire contract:
POST {"query": str, "candidates": [str, ...]}, expecting {"text": str}.
A spec whose endpoint is the literal string "mock" is answered in-process
by a deterministic echo backend (no network).
"""

from __future__ import annotations

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import requests

from .costing import build_query_context
from .embedding import embed
from .errors import FusionError, InfeasibleBudgetError, BlendkitError
from .predictor import PredictorHead, predict
from .registry import ModelSpec, PipelineConfig, Registry
from .selector import SelectionResult, select

MAX_PARALLEL_DISPATCH = 16


@dataclass(frozen=True)
class ModelResponse:
    model_index: int
    text: str | None
    latency: float
    status: str  # "ok", "timeout", or "error"
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.status == "ok"


@dataclass(frozen=True)
class EnsembleResponse:
    query_id: str
    fused_text: str
    responses: tuple[ModelResponse, ...]
    selection: SelectionResult
    predicted_scores: tuple[float, ...]
    budget_fraction: float
    epsilon: float
    baseline_cost: float
    fusion_mode_used: str
    warnings: tuple[str, ...] = ()


def _call_model(spec: ModelSpec, text: str, timeout: float, index: int) -> ModelResponse:
    start = time.monotonic()
    if spec.endpoint == "mock":
        return ModelResponse(
            model_index=index,
            text=f"[{spec.name}] {text}",
            latency=time.monotonic() - start,
            status="ok",
        )
    try:
        resp = requests.post(
            spec.endpoint,
            json={"prompt": text, "max_tokens": spec.max_ctx},
            timeout=timeout,
        )
        latency = time.monotonic() - start
        if resp.status_code != 200:
            return ModelResponse(
                model_index=index, text=None, latency=latency,
                status="error", error=f"HTTP {resp.status_code}",
            )
        body = resp.json()
        text_out = body.get("text")
        if not text_out:
            return ModelResponse(
                model_index=index, text=None, latency=latency,
                status="error", error="empty response body",
            )
        return ModelResponse(
            model_index=index, text=text_out, latency=latency, status="ok",
        )
    except requests.Timeout:
        return ModelResponse(
            model_index=index, text=None, latency=time.monotonic() - start,
            status="timeout", error=f"timeout after {timeout}s",
        )
    except (requests.RequestException, ValueError) as exc:
        return ModelResponse(
            model_index=index, text=None, latency=time.monotonic() - start,
            status="error", error=str(exc),
        )


def dispatch(
    registry: Registry,
    selection: SelectionResult,
    text: str,
    config: PipelineConfig,
) -> list[ModelResponse]:
    """Query every selected model concurrently; failures become statuses."""
    indices = list(selection.selected)
    if not indices:
        return []
    workers = min(len(indices), MAX_PARALLEL_DISPATCH)
    with ThreadPoolExecutor(max_workers=workers) as pool:
        futures = [
            pool.submit(
                _call_model, registry.models[i], text, config.dispatch_timeout, i
            )
            for i in indices
        ]
        return [f.result() for f in futures]


def fuse(
    query: str,
    responses: list[ModelResponse],
    predicted_scores,
    mode: str,
    fuser_endpoint: str | None = None,
    timeout: float = 30.0,
) -> tuple[str, str, list[str]]:
    """Combine ok responses into one text.

    Returns (fused_text, mode_used, warnings). remote mode posts the
    candidates to the fuser endpoint and falls back to best_predicted on
    failure; best_predicted returns the ok response with the highest
    predicted score (ties to the lower model index).
    """
    ok = [r for r in responses if r.ok]
    if not ok:
        raise FusionError("no successful model responses to fuse")
    warnings: list[str] = []

    if mode == "remote":
        if fuser_endpoint:
            try:
                resp = requests.post(
                    fuser_endpoint,
                    json={"query": query, "candidates": [r.text for r in ok]},
                    timeout=timeout,
                )
                resp.raise_for_status()
                text = resp.json().get("text")
                if text:
                    return text, "remote", warnings
                warnings.append("fuser returned empty text; using best_predicted")
            except (requests.RequestException, ValueError) as exc:
                warnings.append(f"fuser call failed ({exc}); using best_predicted")
        else:
            warnings.append("no fuser endpoint configured; using best_predicted")

    best = max(ok, key=lambda r: (predicted_scores[r.model_index], -r.model_index))
    return best.text, "best_predicted", warnings


def answer_query(
    registry: Registry,
    head: PredictorHead,
    encoder,
    query_id: str,
    text: str,
    budget_fraction: float | None = None,
    fusion_mode: str | None = None,
) -> EnsembleResponse:
    """Run the full pipeline for one query."""
    config = registry.defaults
    fraction = budget_fraction if budget_fraction is not None else config.budget_fraction
    if not (0 < fraction <= 1):
        raise BlendkitError(f"budget_fraction {fraction} outside (0, 1]")
    mode = fusion_mode or config.fusion_mode

    emb = embed(text, encoder, query_id=query_id)
    scores = predict(head, emb)
    if scores.shape[0] != len(registry):
        raise BlendkitError("head output size does not match registry size")

    ctx = build_query_context(registry, query_id, text)
    baseline = ctx.total_baseline_cost
    if baseline <= 0:
        raise BlendkitError("query has zero baseline cost (empty text?)")
    epsilon = fraction * baseline

    selection = select(
        list(scores), list(ctx.costs), epsilon, config.grid_resolution
    )
    warnings: list[str] = []
    if not selection.feasible:
        if config.infeasible_policy == "error":
            raise InfeasibleBudgetError(
                f"no model fits budget {epsilon:.3g} FLOPs "
                f"(fraction {fraction}) for query {query_id!r}"
            )
        cheapest = int(np.argmin(ctx.costs))
        selection = SelectionResult(
            selected=(cheapest,),
            total_cost=ctx.costs[cheapest],
            total_cost_units=selection.grid_resolution,
            total_target_score=selection.alpha + float(scores[cheapest]),
            alpha=selection.alpha,
            epsilon=epsilon,
            grid_resolution=selection.grid_resolution,
            feasible=False,
        )
        warnings.append(
            f"budget infeasible; fell back to cheapest model "
            f"{registry.models[cheapest].name!r}"
        )

    responses = dispatch(registry, selection, text, config)
    if config.failure_policy == "fail_fast":
        bad = [r for r in responses if not r.ok]
        if bad:
            names = ", ".join(registry.models[r.model_index].name for r in bad)
            raise BlendkitError(f"dispatch failed for: {names}")
    for r in responses:
        if not r.ok:
            warnings.append(
                f"model {registry.models[r.model_index].name!r} "
                f"{r.status}: {r.error}"
            )

    fused, mode_used, fuse_warnings = fuse(
        text, responses, scores, mode, registry.fuser_endpoint,
        timeout=config.dispatch_timeout,
    )
    warnings.extend(fuse_warnings)

    return EnsembleResponse(
        query_id=query_id,
        fused_text=fused,
        responses=tuple(responses),
        selection=selection,
        predicted_scores=tuple(float(s) for s in scores),
        budget_fraction=fraction,
        epsilon=epsilon,
        baseline_cost=baseline,
        fusion_mode_used=mode_used,
        warnings=tuple(warnings),
    )
