"""Command-line interface: serve, query, eval, pca, report, synth."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .data import (
    load_features,
    load_labels,
    load_pca,
    pca_fit,
    pca_project,
    save_features,
    save_labels,
    save_pca,
)
from .disambiguation import DisambiguationParams, FeedbackSelection, disambiguate
from .evaluation import EvalConfig, make_test_cases, run_experiment
from .rerank import RerankParams, rerank_from_distances
from .retrieval import Query, all_distances, neighbors_from_distances


def _add_dataset_args(p, labels_required=False):
    p.add_argument("--features", required=True, help="AIDF feature file")
    p.add_argument(
        "--labels", required=labels_required, help="JSON topic labels file"
    )
    p.add_argument("--ids", help="newline-delimited ids file")


def _load_dataset(args, need_labels=False):
    store = load_features(args.features, ids_path=getattr(args, "ids", None))
    labels = None
    if getattr(args, "labels", None):
        labels = load_labels(args.labels, store)
    elif need_labels:
        raise SystemExit("--labels is required for this command")
    return store, labels


def _cmd_serve(args):
    import uvicorn

    from .service import create_app

    store, labels = _load_dataset(args)
    app = create_app(
        store,
        labels=labels,
        images_dir=args.images_dir,
        seed=args.seed,
        m=args.m,
        eta=args.eta,
        cap=args.cap,
        r=args.r,
        ui_dir=args.ui_dir,
    )
    uvicorn.run(app, host=args.host, port=args.port)


def _cmd_query(args):
    store, _ = _load_dataset(args)
    if (args.item_index is None) == (args.vector_file is None):
        raise SystemExit("provide exactly one of --item-index / --vector-file")
    if args.item_index is not None:
        if not 0 <= args.item_index < store.n:
            raise SystemExit(f"item index {args.item_index} out of range")
        query = Query(store.doubles()[args.item_index], exclude_index=args.item_index)
    else:
        vec = np.asarray(json.loads(Path(args.vector_file).read_text()), dtype=np.float64)
        query = Query(vec)
    dist = all_distances(store, query)
    neighbors = neighbors_from_distances(store.doubles(), query.vector, dist, args.m)
    clusters, diagnostics = disambiguate(
        neighbors,
        DisambiguationParams(eta=args.eta, cap=args.cap, r=args.r, seed=args.seed),
    )
    if args.dump_diagnostics:
        Path(args.dump_diagnostics).write_text(json.dumps(diagnostics.to_dict(), indent=2))
    out = {
        "k": clusters.k,
        "clusters": [
            {
                "id": c,
                "size": int(clusters.members[c].size),
                "previews": [
                    {"index": int(i), "distance": float(d)}
                    for i, d in zip(clusters.previews[c], clusters.preview_distances[c])
                ],
            }
            for c in range(clusters.k)
        ],
        "eigengap": [float(v) for v in diagnostics.eigenvalues],
    }
    if args.select is not None:
        ranked = rerank_from_distances(
            store.doubles(),
            query.vector,
            dist,
            clusters,
            FeedbackSelection(args.select),
            RerankParams(gamma=args.gamma),
        )
        out["results"] = [
            {
                "index": int(i),
                "delta": float(d),
                "sigma": float(s),
                "delta_tilde": float(dt),
            }
            for i, d, s, dt in zip(
                ranked.order[: args.top],
                ranked.delta[: args.top],
                ranked.sigma[: args.top],
                ranked.delta_tilde[: args.top],
            )
        ]
    text = json.dumps(out, indent=2)
    if args.out:
        Path(args.out).write_text(text)
    else:
        print(text)


def _cmd_eval(args):
    store, labels = _load_dataset(args, need_labels=True)
    config = EvalConfig(
        m=args.m,
        eta=args.eta,
        cap=args.cap,
        r=args.r,
        gamma=args.gamma,
        repetitions=args.reps,
        feedback_mode=args.feedback,
        seed=args.seed,
        exclude_query=not args.include_query,
    )
    cases = make_test_cases(labels)
    if args.max_cases is not None:
        cases = cases[: args.max_cases]
    print(f"evaluating {len(cases)} test cases x {args.reps} repetitions", file=sys.stderr)
    report = run_experiment(store, labels, config, cases=cases)
    report.write_json(args.out)
    print(f"wrote {args.out}", file=sys.stderr)
    if args.csv:
        report.write_csv(args.csv)
        print(f"wrote {args.csv}", file=sys.stderr)
    for name, res in report.methods.items():
        print(f"{name}: mAP={res.map_mean:.4f} (std {res.map_std:.2e})")


def _cmd_pca(args):
    store, _ = _load_dataset(args)
    if args.load_model:
        model = load_pca(args.load_model)
    else:
        model = pca_fit(store, args.dims)
    projected = pca_project(model, store)
    save_features(projected, args.out)
    print(f"wrote {args.out} ({projected.n} x {projected.d})", file=sys.stderr)
    if args.model:
        save_pca(model, args.model)
        print(f"wrote {args.model}", file=sys.stderr)


def _cmd_report(args):
    from .report import render_report

    outputs = render_report(args.report, args.out_dir)
    for path in outputs:
        print(f"wrote {path}", file=sys.stderr)


def _cmd_synth(args):
    from .synthetic import topic_mixture

    store, labels, _ = topic_mixture(
        n_topics=args.topics,
        per_topic=args.per_topic,
        dim=args.dim,
        spread=args.spread,
        seed=args.seed,
    )
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    save_features(store, out_dir / "features.aidf")
    save_labels(labels, out_dir / "labels.json")
    print(
        f"wrote {out_dir}/features.aidf ({store.n} x {store.d}) and labels.json",
        file=sys.stderr,
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="aid",
        description="Neighborhood-direction query disambiguation and re-ranking",
    )
    parser.add_argument("--version", action="version", version=f"aid {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_dataset_args(p)
    p.add_argument("--images-dir", help="directory of image files keyed by id")
    p.add_argument("--ui-dir", help="static frontend build to serve at /")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--eta", type=float, default=None, help="default sqrt(d)")
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--r", type=int, default=10)
    p.set_defaults(func=_cmd_serve)

    p = sub.add_parser("query", help="one-shot query with cluster previews")
    _add_dataset_args(p)
    p.add_argument("--item-index", type=int)
    p.add_argument("--vector-file", help="JSON array of d floats")
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--r", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--select", type=int, nargs="*", default=None,
                   help="cluster ids to mark relevant; triggers re-ranking")
    p.add_argument("--top", type=int, default=20, help="results to print after --select")
    p.add_argument("--dump-diagnostics", help="write eigengap diagnostics JSON here")
    p.add_argument("--out", help="write the response JSON here instead of stdout")
    p.set_defaults(func=_cmd_query)

    p = sub.add_parser("eval", help="run the simulated-feedback evaluation")
    _add_dataset_args(p, labels_required=True)
    p.add_argument("--m", type=int, default=200)
    p.add_argument("--eta", type=float, default=None)
    p.add_argument("--cap", type=int, default=10)
    p.add_argument("--r", type=int, default=10)
    p.add_argument("--gamma", type=float, default=1.0)
    p.add_argument("--reps", type=int, default=5)
    p.add_argument("--feedback", choices=["single", "multi"], default="single")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--include-query", action="store_true",
                   help="keep the query item in rankings and relevant sets")
    p.add_argument("--max-cases", type=int, default=None,
                   help="truncate the test-case list (smoke runs)")
    p.add_argument("--out", required=True, help="report JSON path")
    p.add_argument("--csv", help="also write the delimited report here")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("pca", help="fit/apply PCA and write a reduced AIDF file")
    _add_dataset_args(p)
    p.add_argument("--dims", type=int, default=512)
    p.add_argument("--out", required=True, help="output AIDF path")
    p.add_argument("--model", help="save the fitted model (npz) here")
    p.add_argument("--load-model", help="apply an existing model instead of fitting")
    p.set_defaults(func=_cmd_pca)

    p = sub.add_parser("report", help="render figures + CSV from a report JSON")
    p.add_argument("report", help="report JSON produced by `aid eval`")
    p.add_argument("--out-dir", default="reports", help="output directory")
    p.set_defaults(func=_cmd_report)

    p = sub.add_parser("synth", help="generate a synthetic demo dataset")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--topics", type=int, default=5)
    p.add_argument("--per-topic", type=int, default=400)
    p.add_argument("--dim", type=int, default=32)
    p.add_argument("--spread", type=float, default=0.15)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_synth)

    return parser


def main(argv=None) -> None:
    args = build_parser().parse_args(argv)
    args.func(args)


if __name__ == "__main__":
    main()
