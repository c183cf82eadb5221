"""Budgeted subset selection.

Reduces the quality/cost trade-off to a 0/1 knapsack per query: shift the
(typically negative) quality scores into positive profits, quantize real
FLOPs costs onto an integer capacity grid with ceiling rounding (so a
grid-feasible subset is always raw-cost feasible), then run the textbook
DP with a backtrace.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .errors import SelectionError


@dataclass(frozen=True)
class CandidateItem:
    """One model's knapsack item for one query."""

    model_index: int
    quality: float
    cost: float
    target_score: float
    cost_units: int


@dataclass(frozen=True)
class SelectionResult:
    selected: tuple[int, ...]
    total_cost: float
    total_cost_units: int
    total_target_score: float
    alpha: float
    epsilon: float
    grid_resolution: int
    feasible: bool = True


def choose_alpha(qualities: Sequence[float]) -> float:
    """Smallest round shift making every score strictly positive: max|q| + 1."""
    if len(qualities) == 0:
        raise SelectionError("cannot choose alpha for an empty score list")
    return max(abs(q) for q in qualities) + 1.0


def transform_scores(qualities: Sequence[float], alpha: float) -> list[float]:
    """Elementwise alpha + quality; rank-preserving, all outputs > 0."""
    if qualities and alpha <= max(abs(q) for q in qualities):
        raise SelectionError("alpha must exceed max|quality|")
    return [alpha + q for q in qualities]


def quantize_costs(
    costs: Sequence[float], epsilon: float, grid_resolution: int
) -> tuple[list[int], int]:
    """Map real costs to integer units with ceiling rounding.

    capacity = grid_resolution; any subset whose units fit the capacity is
    guaranteed to fit the real budget epsilon.
    """
    if epsilon <= 0:
        raise SelectionError("epsilon must be positive")
    if grid_resolution < 1:
        raise SelectionError("grid_resolution must be >= 1")
    units = [
        0 if c == 0 else math.ceil(c * grid_resolution / epsilon) for c in costs
    ]
    return units, grid_resolution


def knapsack(
    items: Sequence[tuple[int, float]], capacity: int
) -> list[int]:
    """0/1 knapsack DP with backtrace; returns selected indices ascending.

    items are (cost_units, target_score) pairs; profits may be real-valued,
    costs must be non-negative integers.
    """
    if capacity < 0:
        raise SelectionError("capacity must be non-negative")
    n = len(items)
    dp = np.zeros((n + 1, capacity + 1))
    for i in range(1, n + 1):
        cost, score = items[i - 1]
        if cost < 0 or score < 0:
            raise SelectionError("cost_units and target_score must be >= 0")
        dp[i] = dp[i - 1]
        if cost <= capacity:
            take = dp[i - 1, : capacity - cost + 1] + score
            dp[i, cost:] = np.maximum(dp[i - 1, cost:], take)

    # Backtrace from the last item down; take item i-1 when its row changed.
    selected: list[int] = []
    j = capacity
    for i in range(n, 0, -1):
        if dp[i, j] != dp[i - 1, j]:
            selected.append(i - 1)
            j -= items[i - 1][0]
    selected.reverse()
    return selected


def select(
    qualities: Sequence[float],
    costs: Sequence[float],
    epsilon: float,
    grid_resolution: int = 1000,
    model_indices: Sequence[int] | None = None,
) -> SelectionResult:
    """Full selection: alpha shift -> transform -> quantize -> knapsack.

    An empty selection with feasible=False means no single model fits the
    budget; callers decide between erroring and a cheapest-model fallback.
    """
    if len(qualities) == 0:
        raise SelectionError("need at least one candidate")
    if len(qualities) != len(costs):
        raise SelectionError("qualities and costs must have equal length")
    if model_indices is None:
        model_indices = list(range(len(qualities)))

    alpha = choose_alpha(qualities)
    targets = transform_scores(qualities, alpha)
    units, capacity = quantize_costs(costs, epsilon, grid_resolution)

    # All profits are positive, so if the whole set fits the raw budget it is
    # exactly optimal; taking it directly avoids losing a model to the
    # ceiling-rounding slack at epsilon close to the total cost.
    if sum(costs) <= epsilon:
        return SelectionResult(
            selected=tuple(model_indices),
            total_cost=sum(costs),
            total_cost_units=sum(units),
            total_target_score=sum(targets),
            alpha=alpha,
            epsilon=epsilon,
            grid_resolution=grid_resolution,
            feasible=True,
        )

    feasible = any(u <= capacity for u in units)
    if not feasible:
        return SelectionResult(
            selected=(),
            total_cost=0.0,
            total_cost_units=0,
            total_target_score=0.0,
            alpha=alpha,
            epsilon=epsilon,
            grid_resolution=grid_resolution,
            feasible=False,
        )

    picked = knapsack(list(zip(units, targets)), capacity)
    return SelectionResult(
        selected=tuple(model_indices[i] for i in picked),
        total_cost=sum(costs[i] for i in picked),
        total_cost_units=sum(units[i] for i in picked),
        total_target_score=sum(targets[i] for i in picked),
        alpha=alpha,
        epsilon=epsilon,
        grid_resolution=grid_resolution,
        feasible=True,
    )


def budget_sweep(
    qualities: Sequence[float],
    costs: Sequence[float],
    fractions: Sequence[float],
    baseline_cost: float,
    grid_resolution: int = 1000,
) -> list[tuple[float, SelectionResult]]:
    """One selection per budget fraction; epsilon = fraction * baseline_cost."""
    if baseline_cost <= 0:
        raise SelectionError("baseline_cost must be positive")
    out = []
    for frac in fractions:
        if not (0 < frac <= 1):
            raise SelectionError(f"fraction {frac} outside (0, 1]")
        out.append(
            (frac, select(qualities, costs, frac * baseline_cost, grid_resolution))
        )
    return out


def raw_score_optimum(
    qualities: Sequence[float], costs: Sequence[float], epsilon: float
) -> tuple[int, ...]:
    """Diagnostic: budget-feasible subset maximizing the raw (unshifted) score sum.

    The per-item alpha shift rewards larger subsets; this brute-force
    reference (n <= 20) shows what the knapsack would pick without it.
    """
    n = len(qualities)
    if n > 20:
        raise SelectionError("raw_score_optimum is exhaustive; n must be <= 20")
    # restricted to non-empty subsets: with all-negative scores the
    # unconstrained optimum would trivially be the empty set
    best: tuple[int, ...] = ()
    best_score = -math.inf
    for k in range(1, n + 1):
        for combo in combinations(range(n), k):
            if sum(costs[i] for i in combo) <= epsilon:
                s = sum(qualities[i] for i in combo)
                if s > best_score:
                    best, best_score = combo, s
    return best
