"""Command-line entry point.

Subcommands: ingest, train-predictor, sweep, compare, cost, select,
predict, route. Global flags: --config, --seed, --grid, --format.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys

from . import costing, harness, plots, predictor, selector
from .embedding import FileEncoder, HashedNgramEncoder
from .errors import BlendkitError
from .registry import load_registry, resolve_config_path


def _registry(args):
    return load_registry(resolve_config_path(args.config))


def _encoder(args, seed: int):
    if getattr(args, "embeddings", None):
        return FileEncoder(args.embeddings)
    return HashedNgramEncoder(d=getattr(args, "dim", 256), seed=seed)


def cmd_ingest(args) -> int:
    registry = _registry(args)
    records = harness.load_dataset(args.dataset, registry)
    print(f"ok: {len(records)} records, {len(registry)} registry models")
    return 0


def cmd_train_predictor(args) -> int:
    registry = _registry(args)
    records = harness.load_dataset(args.dataset, registry)
    encoder = _encoder(args, args.seed)
    pairs = harness.build_training_set(records, registry, encoder)
    d = pairs[0][0].d
    head = predictor.init_head(
        d=d, h=args.hidden, g=args.gate, n_models=len(registry),
        dropout_p=args.dropout, seed=args.seed,
    )
    config = predictor.TrainConfig(
        delta=args.delta, learning_rate=args.lr, epochs=args.epochs,
        batch_size=args.batch_size, rng_seed=args.seed,
        weight_decay=args.weight_decay,
    )
    head, trace = predictor.train(head, pairs, config)
    for i, loss in enumerate(trace, start=1):
        print(f"epoch {i}: mean loss {loss:.6g}")
    predictor.save_head(head, args.out)
    print(f"saved checkpoint to {args.out}")
    return 0


def cmd_sweep(args) -> int:
    registry = _registry(args)
    records = harness.load_dataset(args.dataset, registry)
    head = encoder = None
    if args.scores == "predictor":
        head = predictor.load_head(args.head)
        enc_args = args
        encoder = _encoder(enc_args, args.seed)
        if head.d != getattr(encoder, "d", head.d):
            encoder = HashedNgramEncoder(d=head.d, seed=args.seed)
    fractions = [float(f) for f in args.fractions.split(",")]
    report = harness.replay_sweep(
        records, registry, fractions, grid_resolution=args.grid,
        head=head, encoder=encoder, dataset_id=args.dataset, seed=args.seed,
    )
    fmt = "structured" if args.format == "structured" else "csv"
    harness.report_emit(report, args.out, fmt)
    print(f"wrote {args.out}")
    if args.figure:
        plots.render_sweep_figure(report, args.figure)
        print(f"wrote {args.figure}")
    return 0


def cmd_compare(args) -> int:
    registry = _registry(args)
    records = harness.load_dataset(args.dataset, registry)
    head = encoder = None
    if args.head:
        head = predictor.load_head(args.head)
        encoder = HashedNgramEncoder(d=head.d, seed=args.seed)
    table = harness.baseline_compare(
        records, registry, args.fraction, trials=args.trials,
        grid_resolution=args.grid, head=head, encoder=encoder, seed=args.seed,
    )
    if args.format == "structured":
        print(json.dumps(table, sort_keys=True, indent=2))
    else:
        for name, val in table["means"].items():
            print(f"{name},{val:.6g}")
    if args.figure:
        plots.render_compare_figure(table, args.figure)
        print(f"wrote {args.figure}", file=sys.stderr)
    return 0


def cmd_cost(args) -> int:
    registry = _registry(args)
    ctx = costing.build_query_context(registry, "cli", args.text)
    rows = [
        (spec.name, ctx.token_counts[i], ctx.costs[i])
        for i, spec in enumerate(registry.models)
    ]
    if args.format == "csv":
        out = io.StringIO()
        w = csv.writer(out)
        w.writerow(["model", "tokens", "cost_flops"])
        for name, toks, cost in rows:
            w.writerow([name, toks, format(cost, ".6g")])
        print(out.getvalue(), end="")
    else:
        width = max(len(r[0]) for r in rows)
        print(f"{'model':<{width}}  {'tokens':>8}  {'cost (FLOPs)':>14}")
        for name, toks, cost in rows:
            print(f"{name:<{width}}  {toks:>8}  {cost:>14.6g}")
        print(f"total baseline cost: {ctx.total_baseline_cost:.6g} FLOPs")
    return 0


def _load_candidates(path: str) -> tuple[list[str], list[float], list[float]]:
    """Candidate file: CSV with header model,quality,cost."""
    names, qualities, costs = [], [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.DictReader(fh):
            names.append(row["model"])
            qualities.append(float(row["quality"]))
            costs.append(float(row["cost"]))
    return names, qualities, costs


def cmd_select(args) -> int:
    names, qualities, costs = _load_candidates(args.candidates)
    if args.epsilon is not None:
        epsilon = args.epsilon
    elif args.budget_fraction is not None:
        epsilon = args.budget_fraction * sum(costs)
    else:
        print("error: pass --epsilon or --budget-fraction", file=sys.stderr)
        return 2
    res = selector.select(qualities, costs, epsilon, args.grid)
    if args.format == "structured":
        print(json.dumps({
            "selected": [names[i] for i in res.selected],
            "total_cost": res.total_cost,
            "total_target_score": res.total_target_score,
            "alpha": res.alpha,
            "epsilon": res.epsilon,
            "grid_resolution": res.grid_resolution,
            "feasible": res.feasible,
        }, sort_keys=True))
    else:
        if not res.feasible:
            print("infeasible: no model fits the budget")
        for i in res.selected:
            print(f"{names[i]},{qualities[i]:.6g},{costs[i]:.6g}")
        print(f"total_cost,{res.total_cost:.6g}")
        print(f"total_target_score,{res.total_target_score:.6g}")
    return 0


def cmd_predict(args) -> int:
    registry = _registry(args)
    head = predictor.load_head(args.head)
    encoder = _encoder(args, args.seed)
    if not getattr(args, "embeddings", None):
        encoder = HashedNgramEncoder(d=head.d, seed=args.seed)
    emb = encoder.encode(args.query_id, args.text)
    scores = predictor.predict(head, emb)
    for name, score in zip(registry.names, scores):
        print(f"{name},{score:.6g}")
    return 0


def cmd_route(args) -> int:
    from .service import serve

    registry = _registry(args)
    if args.budget_fraction is not None or args.fusion_mode is not None:
        registry = registry.with_defaults(
            budget_fraction=args.budget_fraction, fusion_mode=args.fusion_mode
        )
    head = predictor.load_head(args.head)
    encoder = HashedNgramEncoder(d=head.d, seed=args.seed)
    host, _, port = args.bind.partition(":")
    serve(registry, head, encoder, host=host or "127.0.0.1",
          port=int(port or 8080))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="blendkit",
        description="budget-constrained LLM ensemble orchestration",
    )
    parser.add_argument("--config", help="registry config file (or set BLENDKIT_CONFIG)")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--grid", type=int, default=1000,
                        help="cost quantization grid resolution")
    parser.add_argument("--format", choices=["text", "csv", "structured"],
                        default="text")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate a replay dataset")
    p.add_argument("dataset")
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("train-predictor", help="train the quality regression head")
    p.add_argument("dataset")
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--embeddings", help="precomputed embedding JSONL file")
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--hidden", type=int, default=256)
    p.add_argument("--gate", type=int, default=128)
    p.add_argument("--dropout", type=float, default=0.2)
    p.add_argument("--delta", type=float, default=0.3)
    p.add_argument("--lr", type=float, default=3e-4)
    p.add_argument("--weight-decay", type=float, default=0.01)
    p.add_argument("--epochs", type=int, default=3)
    p.add_argument("--batch-size", type=int, default=16)
    p.set_defaults(func=cmd_train_predictor)

    p = sub.add_parser("sweep", help="replay budget fractions over a dataset")
    p.add_argument("dataset")
    p.add_argument("--fractions", default="0.1,0.2,0.3,0.4,0.5,0.6,0.7,0.8,0.9,1.0")
    p.add_argument("--scores", choices=["oracle", "predictor"], default="oracle")
    p.add_argument("--head", help="predictor checkpoint (scores=predictor)")
    p.add_argument("--embeddings")
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--out", required=True, help="report output path")
    p.add_argument("--figure", help="also render a figure to this path")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("compare", help="knapsack vs random vs single models")
    p.add_argument("dataset")
    p.add_argument("--fraction", type=float, default=0.2)
    p.add_argument("--trials", type=int, default=10)
    p.add_argument("--head")
    p.add_argument("--figure")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("cost", help="per-model cost table for a query")
    p.add_argument("text")
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("select", help="run the selector on a candidate file")
    p.add_argument("candidates", help="CSV with header model,quality,cost")
    p.add_argument("--epsilon", type=float)
    p.add_argument("--budget-fraction", type=float)
    p.set_defaults(func=cmd_select)

    p = sub.add_parser("predict", help="score a query with a trained head")
    p.add_argument("text")
    p.add_argument("--head", required=True)
    p.add_argument("--query-id", default="query")
    p.add_argument("--embeddings")
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("route", help="start the orchestration service")
    p.add_argument("--head", required=True)
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--budget-fraction", type=float)
    p.add_argument("--fusion-mode", choices=["remote", "best_predicted"])
    p.set_defaults(func=cmd_route)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BlendkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
