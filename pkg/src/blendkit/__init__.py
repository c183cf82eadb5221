"""Budget-constrained LLM ensemble orchestration toolkit."""

from .costing import build_query_context, count_tokens, per_token_cost, query_cost
from .registry import (
    ModelSpec,
    PipelineConfig,
    Registry,
    load_registry,
    model_index,
)
from .selector import (
    CandidateItem,
    SelectionResult,
    budget_sweep,
    choose_alpha,
    knapsack,
    quantize_costs,
    select,
    transform_scores,
)

__version__ = "0.1.0"

__all__ = [
    "ModelSpec",
    "PipelineConfig",
    "Registry",
    "load_registry",
    "model_index",
    "count_tokens",
    "per_token_cost",
    "query_cost",
    "build_query_context",
    "CandidateItem",
    "SelectionResult",
    "choose_alpha",
    "transform_scores",
    "quantize_costs",
    "knapsack",
    "select",
    "budget_sweep",
]
