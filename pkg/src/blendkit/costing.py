"""Per-query token counts and inference cost in FLOPs.

The per-token forward cost of a transformer is approximated as
``2 * n_params + 2 * n_layer * n_ctx * d_model``; a query's cost for a
model is that rate times the query's token count under that model's
tokenizer, with the token count clamped to the model's context window.
Only input-context tokens are counted; generated tokens are ignored
(an expected-output-length multiplier could be added later, default 1.0
reproduces the current behavior).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .registry import ModelSpec, Registry


def count_tokens(spec: ModelSpec, text: str, mode: str = "chars_ratio") -> int:
    """Heuristic token count: chars/ratio ceiling, or whitespace runs."""
    if not text:
        return 0
    if mode == "chars_ratio":
        return math.ceil(len(text) / spec.chars_per_token)
    if mode == "whitespace":
        return len(text.split())
    raise ValueError(f"unknown token mode {mode!r}")


def per_token_cost(spec: ModelSpec, n_ctx: int) -> float:
    """FLOPs per token at the given context length.

    Affine in n_ctx: intercept 2*n_params, slope 2*n_layer*d_model.
    """
    if n_ctx < 0:
        raise ValueError("n_ctx must be non-negative")
    return 2.0 * spec.n_params + 2.0 * spec.n_layer * n_ctx * spec.d_model


def query_cost(spec: ModelSpec, text: str, mode: str = "chars_ratio") -> float:
    """Total FLOPs to run the query through one model."""
    t = min(count_tokens(spec, text, mode), spec.max_ctx)
    return per_token_cost(spec, t) * t


@dataclass(frozen=True)
class QueryContext:
    """Per-model token counts and FLOPs costs for one query."""

    query_id: str
    text: str
    token_counts: tuple[int, ...]
    costs: tuple[float, ...]
    clamped: tuple[bool, ...]

    @property
    def total_baseline_cost(self) -> float:
        """Cost of querying every model in the registry (the budget denominator)."""
        return sum(self.costs)


def build_query_context(
    registry: Registry, query_id: str, text: str, mode: str | None = None
) -> QueryContext:
    """Vectorize query_cost over the registry, recording clamps."""
    mode = mode or registry.defaults.token_mode
    counts: list[int] = []
    costs: list[float] = []
    clamped: list[bool] = []
    for spec in registry.models:
        raw = count_tokens(spec, text, mode)
        t = min(raw, spec.max_ctx)
        counts.append(t)
        clamped.append(raw > spec.max_ctx)
        costs.append(per_token_cost(spec, t) * t)
    return QueryContext(
        query_id=query_id,
        text=text,
        token_counts=tuple(counts),
        costs=tuple(costs),
        clamped=tuple(clamped),
    )
