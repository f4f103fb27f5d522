"""Operator command line: serve, model lifecycle, offline analysis, fixtures, stats.

Exit codes: 0 success, 1 domain error, 2 usage error. Every verb is a thin
shell over the library operations.
"""
from __future__ import annotations

import argparse
import logging
import sys

from . import analytics, neuralnet, seeds, vegindex
from .config import load_config
from .errors import PlatformError
from .images import decode_rgb
from .runtime import Platform


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="agroplat",
                                     description="farm advisory and trading platform")
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("serve", help="run the gateway server")
    p.add_argument("--config", default=None, help="path to a JSON config file")

    p = sub.add_parser("train", help="train a classifier on a directory of class folders")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True, help="where to write the model container")
    p.add_argument("--epochs", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--size", type=int, default=224, help="square input size")
    p.add_argument("--batch-size", type=int, default=16)
    p.add_argument("--learning-rate", type=float, default=1e-3)
    p.add_argument("--holdout", type=float, default=0.0,
                   help="held-out fraction; 0 trains on everything")
    p.add_argument("--no-augment", action="store_true")

    p = sub.add_parser("evaluate", help="confusion-matrix metrics on a dataset")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)

    p = sub.add_parser("predict", help="classify one photo")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)

    p = sub.add_parser("index", help="vegetation index summary and heatmap")
    p.add_argument("--image", required=True)
    p.add_argument("--kind", choices=list(vegindex.INDEX_KINDS), default="tgi")
    p.add_argument("--out", default=None, help="heatmap PNG path")

    p = sub.add_parser("harvest-retrain",
                       help="fold confirmed diagnosis labels into a new model")
    p.add_argument("--model-in", required=True)
    p.add_argument("--model-out", required=True)
    p.add_argument("--config", default=None)
    p.add_argument("--epochs", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("seed", help="load a named fixture into the store")
    p.add_argument("--fixture", required=True,
                   choices=["usage", "demo", "downloads"])
    p.add_argument("--config", default=None)

    p = sub.add_parser("stats", help="usage metrics CSV and download-trend figure")
    p.add_argument("--config", default=None)
    p.add_argument("--out", action="append", default=[],
                   help="output file; .csv gets the metric rows, .png the "
                        "trend figure (repeatable)")
    return parser


def _cmd_serve(args) -> int:
    from .gateway import GatewayServer
    config = load_config(args.config)
    platform = Platform(config)
    server = GatewayServer(platform)
    host, port = server.address
    print(f"listening on http://{host}:{port}/api/v1")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.stop()
    return 0


def _load_model(path: str):
    with open(path, "rb") as fh:
        return neuralnet.load_model(fh.read())


def _cmd_train(args) -> int:
    dataset = neuralnet.LabeledDataset.from_directory(args.data, image_size=args.size)
    cfg = neuralnet.TrainConfig(epochs=args.epochs, seed=args.seed,
                                batch_size=args.batch_size,
                                learning_rate=args.learning_rate,
                                augment=not args.no_augment)
    if args.holdout > 0:
        train_set, held = neuralnet.stratified_split(dataset, 1.0 - args.holdout,
                                                     seed=args.seed)
    else:
        train_set, held = dataset, None
    model = neuralnet.build_network(
        neuralnet.disease_classifier_spec(args.size), seed=args.seed)
    losses = neuralnet.train(model, train_set, cfg)
    for epoch, loss in enumerate(losses, 1):
        print(f"epoch {epoch}: loss {loss:.6f}")
    with open(args.out, "wb") as fh:
        fh.write(neuralnet.save_model(model))
    print(f"saved model {model.version_id} to {args.out}")
    if held is not None and len(held):
        print(neuralnet.evaluate(model, held).to_csv(), end="")
    return 0


def _cmd_evaluate(args) -> int:
    model = _load_model(args.model)
    size = model.spec.input_shape[0]
    dataset = neuralnet.LabeledDataset.from_directory(args.data, image_size=size)
    print(neuralnet.evaluate(model, dataset).to_csv(), end="")
    return 0


def _cmd_predict(args) -> int:
    model = _load_model(args.model)
    with open(args.image, "rb") as fh:
        img = decode_rgb(fh.read())
    pred = neuralnet.predict(model, neuralnet.image_to_input(
        img, model.spec.input_shape))
    for label, prob in zip(neuralnet.CLASS_LABELS, pred.probabilities):
        print(f"{label},{prob:.6f}")
    print(f"predicted {pred.label} (model {pred.model_version})")
    return 0


def _cmd_index(args) -> int:
    with open(args.image, "rb") as fh:
        img = decode_rgb(fh.read())
    index_map = vegindex.compute_index(vegindex.to_reflectance(img), args.kind)
    summary = vegindex.summarize_index(index_map)
    for key, value in summary.to_document().items():
        print(f"{key},{value}")
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(vegindex.render_heatmap(index_map))
        print(f"wrote heatmap to {args.out}")
    return 0


def _cmd_harvest_retrain(args) -> int:
    platform = Platform(load_config(args.config))
    try:
        increment = platform.diagnosis.harvest_training_labels()
        if not len(increment):
            print("no unharvested confirmed labels; model unchanged")
            return 0
        model = _load_model(args.model_in)
        size = model.spec.input_shape[0]
        cfg = neuralnet.TrainConfig(epochs=args.epochs, seed=args.seed,
                                    batch_size=min(16, len(increment)))
        losses = neuralnet.train(model, increment, cfg)
        print(f"retrained on {len(increment)} labeled photos "
              f"({size}x{size} input), final loss {losses[-1]:.6f}")
        with open(args.model_out, "wb") as fh:
            fh.write(neuralnet.save_model(model))
        print(f"saved model {model.version_id} to {args.model_out}")
        return 0
    finally:
        platform.stop()


def _cmd_seed(args) -> int:
    platform = Platform(load_config(args.config))
    try:
        if args.fixture == "usage":
            out = seeds.seed_usage(platform.store, platform.blobs, platform.clock)
            print(f"seeded usage fixture: {out}")
        elif args.fixture == "demo":
            out = seeds.seed_demo(platform)
            print(f"seeded demo fixture; login secret {out['secret']!r}, "
                  f"users {sorted(out['users'])}")
        else:
            total = seeds.seed_downloads(platform.store)
            print(f"seeded {total} downloads over 90 days")
        return 0
    finally:
        platform.stop()


def _cmd_stats(args) -> int:
    config = load_config(args.config)
    platform = Platform(config)
    try:
        stats = platform.usage_stats()
        csv_text = analytics.usage_csv(stats)
        if not args.out:
            print(csv_text, end="")
            return 0
        for path in args.out:
            if path.endswith(".csv"):
                with open(path, "w", encoding="utf-8") as fh:
                    fh.write(csv_text)
                print(f"wrote {path}")
            elif path.endswith(".png"):
                series = platform.downloads()
                fit = None
                if len(series) >= config.loess_degree + 2:
                    fit = analytics.loess_fit(series, span=config.loess_span,
                                              degree=config.loess_degree)
                with open(path, "wb") as fh:
                    fh.write(analytics.trend_png(series, fit))
                print(f"wrote {path}")
            else:
                print(f"cannot infer format for {path!r}: use .csv or .png",
                      file=sys.stderr)
                return 2
        return 0
    finally:
        platform.stop()


_COMMANDS = {
    "serve": _cmd_serve,
    "train": _cmd_train,
    "evaluate": _cmd_evaluate,
    "predict": _cmd_predict,
    "index": _cmd_index,
    "harvest-retrain": _cmd_harvest_retrain,
    "seed": _cmd_seed,
    "stats": _cmd_stats,
}


def run(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.verb](args)
    except PlatformError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    logging.basicConfig(level=logging.INFO,
                        format="%(asctime)s %(name)s %(levelname)s %(message)s")
    sys.exit(run())
