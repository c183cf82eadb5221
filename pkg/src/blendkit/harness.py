"""Offline replay harness: dataset ingestion, predictor training data,
budget sweeps, and baseline comparisons — no live LLMs.

Dataset format: JSONL, one record per line:

    {"query_id": "...", "instruction": "...", "input": "...",
     "candidates": [{"model": "...", "text": "...", "oracle_score": -2.8}, ...]}

The realized-quality proxy reported everywhere is the max oracle score
among the selected models; actual fusion cannot run at desk scale and
fused quality empirically exceeds the best single candidate, so the max
is a conservative stand-in. Report metadata says so explicitly.
"""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .costing import build_query_context
from .embedding import Embedding, embed
from .errors import DatasetError
from .predictor import PredictorHead, predict
from .registry import Registry
from .selector import quantize_costs, select

REALIZED_PROXY_NOTE = (
    "realized_quality is the max oracle score over the selected subset, "
    "a proxy for fused-response quality"
)


@dataclass(frozen=True)
class Candidate:
    model: str
    text: str
    oracle_score: float


@dataclass(frozen=True)
class ReplayRecord:
    query_id: str
    instruction: str
    input: str
    candidates: tuple[Candidate, ...]

    @property
    def query_text(self) -> str:
        if self.input:
            return self.instruction + "\n" + self.input
        return self.instruction


@dataclass
class SweepRow:
    fraction: float
    mean_selected_size: float
    mean_realized_quality: float
    mean_total_target_score: float
    mean_cost_ratio: float


@dataclass
class SweepReport:
    rows: list[SweepRow]
    metadata: dict = field(default_factory=dict)


def load_dataset(path: str, registry: Registry | None = None) -> list[ReplayRecord]:
    """Parse and validate a JSONL replay dataset.

    If a registry is given, candidate model names must be registry names.
    """
    known = set(registry.names) if registry is not None else None
    records: list[ReplayRecord] = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                doc = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetError(f"{path}:{lineno}: invalid JSON: {exc}") from exc
            try:
                cands = []
                for c in doc["candidates"]:
                    score = float(c["oracle_score"])
                    if not math.isfinite(score):
                        raise DatasetError(
                            f"{path}:{lineno}: non-finite oracle_score for "
                            f"model {c.get('model')!r}"
                        )
                    cands.append(Candidate(
                        model=str(c["model"]),
                        text=str(c.get("text", "")),
                        oracle_score=score,
                    ))
                rec = ReplayRecord(
                    query_id=str(doc["query_id"]),
                    instruction=str(doc["instruction"]),
                    input=str(doc.get("input", "")),
                    candidates=tuple(cands),
                )
            except (KeyError, TypeError, ValueError) as exc:
                raise DatasetError(f"{path}:{lineno}: bad record: {exc}") from exc
            if known is not None:
                for c in rec.candidates:
                    if c.model not in known:
                        raise DatasetError(
                            f"{path}:{lineno}: unknown model {c.model!r}"
                        )
            records.append(rec)
    return records


def build_training_set(
    records: list[ReplayRecord], registry: Registry, encoder
) -> list[tuple[Embedding, np.ndarray]]:
    """(embedding, per-model oracle score vector) pairs in registry order."""
    pairs = []
    for rec in records:
        by_name = {c.model: c.oracle_score for c in rec.candidates}
        target = np.empty(len(registry))
        for i, name in enumerate(registry.names):
            if name not in by_name:
                raise DatasetError(
                    f"record {rec.query_id!r} has no candidate for model {name!r}"
                )
            target[i] = by_name[name]
        pairs.append((embed(rec.query_text, encoder, query_id=rec.query_id), target))
    return pairs


def _record_arrays(rec: ReplayRecord, registry: Registry):
    """Per-record (oracle scores, costs, baseline) in registry order."""
    by_name = {c.model: c for c in rec.candidates}
    oracle = np.empty(len(registry))
    for i, name in enumerate(registry.names):
        if name not in by_name:
            raise DatasetError(
                f"record {rec.query_id!r} has no candidate for model {name!r}"
            )
        oracle[i] = by_name[name].oracle_score
    ctx = build_query_context(registry, rec.query_id, rec.query_text)
    return oracle, np.asarray(ctx.costs), ctx.total_baseline_cost


def replay_sweep(
    records: list[ReplayRecord],
    registry: Registry,
    fractions: list[float],
    grid_resolution: int = 1000,
    head: PredictorHead | None = None,
    encoder=None,
    dataset_id: str = "dataset",
    seed: int = 0,
) -> SweepReport:
    """Replay selection over budget fractions.

    Scores come from the predictor head when given (with its encoder),
    otherwise from the dataset's oracle scores. The realized-quality proxy
    always uses oracle scores. Infeasible records are skipped per fraction
    (counted in metadata).
    """
    if not records or not fractions:
        raise DatasetError("records and fractions must be non-empty")
    use_predictor = head is not None
    if use_predictor and encoder is None:
        raise DatasetError("predictor scoring needs an encoder")

    per_record = []
    for rec in records:
        oracle, costs, baseline = _record_arrays(rec, registry)
        if use_predictor:
            scores = predict(head, embed(rec.query_text, encoder, query_id=rec.query_id))
        else:
            scores = oracle
        per_record.append((rec, oracle, scores, costs, baseline))

    rows: list[SweepRow] = []
    skipped: dict[float, int] = {}
    for frac in sorted(fractions):
        sizes, realized, targets, ratios = [], [], [], []
        infeasible = 0
        for rec, oracle, scores, costs, baseline in per_record:
            res = select(list(scores), list(costs), frac * baseline, grid_resolution)
            if not res.feasible or not res.selected:
                infeasible += 1
                continue
            sizes.append(len(res.selected))
            realized.append(max(oracle[i] for i in res.selected))
            targets.append(res.total_target_score)
            ratios.append(res.total_cost / baseline)
        skipped[frac] = infeasible
        rows.append(SweepRow(
            fraction=frac,
            mean_selected_size=float(np.mean(sizes)) if sizes else float("nan"),
            mean_realized_quality=float(np.mean(realized)) if realized else float("nan"),
            mean_total_target_score=float(np.mean(targets)) if targets else float("nan"),
            mean_cost_ratio=float(np.mean(ratios)) if ratios else float("nan"),
        ))
    return SweepReport(
        rows=rows,
        metadata={
            "dataset_id": dataset_id,
            "records": len(records),
            "scores_source": "predictor" if use_predictor else "oracle",
            "grid_resolution": grid_resolution,
            "seed": seed,
            "infeasible_skipped": {str(k): v for k, v in skipped.items()},
            "note": REALIZED_PROXY_NOTE,
        },
    )


def _random_feasible_subset(
    units: np.ndarray, capacity: int, rng: np.random.Generator, max_tries: int = 50
) -> list[int]:
    """Random subset feasible on the quantized grid.

    Rejection sampling over uniform subsets, then randomized greedy fill.
    Grid feasibility implies raw-budget feasibility (ceiling quantization).
    """
    n = len(units)
    for _ in range(max_tries):
        mask = rng.random(n) < 0.5
        chosen = np.flatnonzero(mask)
        if len(chosen) and units[chosen].sum() <= capacity:
            return list(chosen)
    # greedy random fill fallback
    order = rng.permutation(n)
    picked: list[int] = []
    used = 0
    for i in order:
        if used + units[i] <= capacity:
            picked.append(int(i))
            used += units[i]
    return sorted(picked)


def baseline_compare(
    records: list[ReplayRecord],
    registry: Registry,
    fraction: float,
    trials: int = 10,
    grid_resolution: int = 1000,
    head: PredictorHead | None = None,
    encoder=None,
    seed: int = 0,
) -> dict:
    """Mean realized proxy for knapsack vs random vs each single model.

    Random subsets are drawn feasible under the same quantized budget, so
    the knapsack's transformed-score total provably dominates each draw.
    """
    if trials < 1:
        raise DatasetError("trials must be >= 1")
    rng = np.random.default_rng(seed)
    strategies: dict[str, list[float]] = {"knapsack_oracle": [], "random": []}
    if head is not None:
        strategies["knapsack_predictor"] = []
    singles: dict[str, list[float]] = {name: [] for name in registry.names}

    for rec in records:
        oracle, costs, baseline = _record_arrays(rec, registry)
        epsilon = fraction * baseline
        units, capacity = quantize_costs(list(costs), epsilon, grid_resolution)
        units = np.asarray(units)

        res = select(list(oracle), list(costs), epsilon, grid_resolution)
        if res.feasible and res.selected:
            strategies["knapsack_oracle"].append(
                max(oracle[i] for i in res.selected)
            )
        if head is not None:
            scores = predict(
                head, embed(rec.query_text, encoder, query_id=rec.query_id)
            )
            pres = select(list(scores), list(costs), epsilon, grid_resolution)
            if pres.feasible and pres.selected:
                strategies["knapsack_predictor"].append(
                    max(oracle[i] for i in pres.selected)
                )
        for _ in range(trials):
            subset = _random_feasible_subset(units, capacity, rng)
            if subset:
                strategies["random"].append(max(oracle[i] for i in subset))
        for i, name in enumerate(registry.names):
            if units[i] <= capacity:
                singles[name].append(oracle[i])

    table = {
        name: (float(np.mean(vals)) if vals else float("nan"))
        for name, vals in strategies.items()
    }
    for name, vals in singles.items():
        table[f"single:{name}"] = float(np.mean(vals)) if vals else float("nan")
    return {
        "fraction": fraction,
        "trials": trials,
        "seed": seed,
        "records": len(records),
        "means": table,
        "note": REALIZED_PROXY_NOTE,
    }


# --- report emission: bit-stable CSV and JSON ---

_CSV_COLUMNS = (
    "fraction",
    "mean_selected_size",
    "mean_realized_quality",
    "mean_total_target_score",
    "mean_cost_ratio",
)


def _fmt(x: float) -> str:
    # 6 significant digits, stable across runs
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    return format(x, ".6g")


def report_to_csv(report: SweepReport) -> str:
    buf = io.StringIO()
    buf.write(",".join(_CSV_COLUMNS) + "\n")
    for row in report.rows:
        buf.write(
            ",".join(_fmt(getattr(row, col)) for col in _CSV_COLUMNS) + "\n"
        )
    return buf.getvalue()


def report_to_json(report: SweepReport) -> str:
    doc = {
        "metadata": report.metadata,
        "rows": [
            {col: float(_fmt(getattr(row, col))) for col in _CSV_COLUMNS}
            for row in report.rows
        ],
    }
    return json.dumps(doc, sort_keys=True, indent=2) + "\n"


def report_load_json(path: str) -> SweepReport:
    with open(path, "r", encoding="utf-8") as fh:
        doc = json.load(fh)
    rows = [SweepRow(**{col: row[col] for col in _CSV_COLUMNS}) for row in doc["rows"]]
    return SweepReport(rows=rows, metadata=doc.get("metadata", {}))


def report_emit(report: SweepReport, path: str, fmt: str = "csv") -> None:
    """Write the report; identical report+format gives byte-identical files."""
    if fmt == "csv":
        text = report_to_csv(report)
    elif fmt == "structured":
        text = report_to_json(report)
    else:
        raise ValueError(f"unknown report format {fmt!r}")
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
