"""Command-line interface: each pipeline stage individually plus the full
orchestrated run, synthetic data generation, serving, and one-shot queries.

Exit codes: 0 success, 1 config parse error, 2 missing input, 3 stage
failure.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_MISSING_INPUT = 2
EXIT_STAGE_FAILURE = 3


def _add_gen_synthetic(sub: argparse._SubParsersAction) -> None:
    p = sub.add_parser("gen-synthetic", help="generate a synthetic corpus with planted labels")
    p.add_argument("--out-dir", required=True, help="directory for generated artifacts")
    p.add_argument("--n-posts", type=int, default=1000)
    p.add_argument("--vocab", help="vocabulary file (default: shipped reference vocabulary)")
    p.add_argument("--weak-fraction", type=float, default=0.0)
    p.add_argument("--noise-off-diagonal", type=float, default=0.3)
    p.add_argument("--ad-fraction", type=float, default=0.0)
    p.add_argument("--violation-fraction", type=float, default=0.0)
    p.add_argument("--unmapped-fraction", type=float, default=0.0)
    p.add_argument("--duplicate-fraction", type=float, default=0.0,
                   help="fraction of archive lines repeated to exercise ingest dedup")
    p.add_argument("--feature-sigma", type=float, default=None)
    p.add_argument("--d-img", type=int, default=None, help="image feature dimension")
    p.add_argument("--d-reg", type=int, default=None, help="garment feature dimension")
    p.add_argument("--post-seed", type=int, default=None)


def _add_ingest(sub) -> None:
    p = sub.add_parser("ingest", help="select archive posts by hashtag and deduplicate")
    p.add_argument("--archive", required=True)
    p.add_argument("--hashtags", required=True)
    p.add_argument("--out", required=True)


def _add_filter(sub) -> None:
    p = sub.add_parser("filter", help="run the face-body / ratio / ad filter cascade")
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--report", required=True)
    p.add_argument("--max-face-body", type=float, default=0.2)
    p.add_argument("--min-body-image", type=float, default=0.5)
    p.add_argument("--ad-threshold", type=float, default=0.5)


def _add_train(sub) -> None:
    p = sub.add_parser("train", help="train the concept model with noise-aware weak labels")
    p.add_argument("--clean", required=True)
    p.add_argument("--weak")
    p.add_argument("--config", help="JSON file with training hyperparameters")
    p.add_argument("--vocab", help="vocabulary file (default: shipped reference vocabulary)")
    p.add_argument("--out", required=True, help="checkpoint output path")


def _add_predict(sub) -> None:
    p = sub.add_parser("predict", help="decode concept predictions for a corpus")
    p.add_argument("--ckpt", required=True)
    p.add_argument("--in", dest="in_path", required=True)
    p.add_argument("--out", required=True)


def _add_extract(sub) -> None:
    p = sub.add_parser("extract", help="build triplets (and optionally a kb) from predictions")
    p.add_argument("--in", dest="in_path", required=True, help="filtered corpus")
    p.add_argument("--ckpt", help="model checkpoint (predicts internally)")
    p.add_argument("--predictions", help="predictions file from the predict stage")
    p.add_argument("--triplets", help="triplet artifact output path")
    p.add_argument("--kb", help="knowledge base snapshot output path")
    p.add_argument("--vocab", help="vocabulary file (default: from checkpoint or reference)")


def _add_serve(sub) -> None:
    p = sub.add_parser("serve", help="serve the faceted search API and explorer UI")
    p.add_argument("--kb", required=True)
    p.add_argument("--corpus")
    p.add_argument("--addr", default="127.0.0.1:8080")
    p.add_argument("--static", help="directory of built frontend assets")


def _add_query(sub) -> None:
    p = sub.add_parser("query", help="one-shot query printing JSON to standard output")
    p.add_argument("--kb", required=True)
    p.add_argument("--corpus")
    p.add_argument("--mode", choices=["triplets", "posts"], default="triplets")
    p.add_argument("--occasion", action="append", default=[])
    p.add_argument("--gender", action="append", default=[])
    p.add_argument("--category", action="append", default=[])
    p.add_argument("--attr", action="append", default=[], metavar="TYPE:VALUE")
    p.add_argument("--hashtag", action="append", default=[])
    p.add_argument("--location", action="append", default=[])
    p.add_argument("--time-from", type=int)
    p.add_argument("--time-to", type=int)
    p.add_argument("--min-likes", type=int)
    p.add_argument("--min-comments", type=int)
    p.add_argument("--offset", type=int, default=0)
    p.add_argument("--limit", type=int, default=24)


def _add_pipeline(sub) -> None:
    sub.add_parser("pipeline", help="run every enabled stage end to end (--config required)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fashionkb",
        description="Fashion knowledge extraction: ingest, filter, learn, index, search.",
    )
    parser.add_argument("--config", help="pipeline config file (used by `pipeline`)")
    parser.add_argument("--seed", type=int, help="override the seed used by the subcommand")
    parser.add_argument("--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)
    _add_gen_synthetic(sub)
    _add_ingest(sub)
    _add_filter(sub)
    _add_train(sub)
    _add_predict(sub)
    _add_extract(sub)
    _add_serve(sub)
    _add_query(sub)
    _add_pipeline(sub)
    # the global flags are also accepted after the subcommand; SUPPRESS keeps
    # a pre-subcommand value from being clobbered by the subparser default
    for action in sub.choices.values():
        taken = action._option_string_actions
        if "--config" not in taken:
            action.add_argument("--config", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        if "--seed" not in taken:
            action.add_argument(
                "--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS
            )
        action.add_argument(
            "--verbose", action="store_true", default=argparse.SUPPRESS, help=argparse.SUPPRESS
        )
    return parser


def _load_vocab(path: str | None):
    from .vocab import load_vocabulary, reference_vocabulary

    if path:
        return load_vocabulary(path)
    return reference_vocabulary()


def _cmd_gen_synthetic(args) -> int:
    import numpy as np

    from .corpus import write_corpus
    from .synthetic import SyntheticConfig, generate_synthetic
    from .vocab import default_hashtag_data, save_vocabulary

    vocab = _load_vocab(args.vocab)
    seed = args.seed if args.seed is not None else 0
    overrides = {}
    if args.feature_sigma is not None:
        overrides["feature_sigma"] = args.feature_sigma
    if args.d_img is not None:
        overrides["d_img"] = args.d_img
    if args.d_reg is not None:
        overrides["d_reg"] = args.d_reg
    if args.post_seed is not None:
        overrides["post_seed"] = args.post_seed
    config = SyntheticConfig.default(
        vocab,
        n_posts=args.n_posts,
        seed=seed,
        weak_fraction=args.weak_fraction,
        noise_off_diagonal=args.noise_off_diagonal,
        ad_fraction=args.ad_fraction,
        filter_violation_fraction=args.violation_fraction,
        unmapped_hashtag_fraction=args.unmapped_fraction,
        **overrides,
    )
    posts, truth = generate_synthetic(config)

    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    save_vocabulary(vocab, out / "vocab.json")
    tags = {occ: [occ] for occ in vocab.occasions}
    if not args.vocab:
        tags = default_hashtag_data()
    (out / "hashtags.json").write_text(json.dumps(tags, indent=2) + "\n", encoding="utf-8")

    clean = [p for p in posts if p.label_source == "clean"]
    weak = [p for p in posts if p.label_source == "weak"]
    write_corpus(clean, out / "clean.jsonl")
    write_corpus(weak, out / "weak.jsonl")

    archive_lines = posts[:]
    if args.duplicate_fraction > 0 and posts:
        dup_rng = np.random.default_rng(seed + 424243)
        n_dupes = int(round(args.duplicate_fraction * len(posts)))
        for idx in sorted(dup_rng.integers(0, len(posts), size=n_dupes).tolist()):
            archive_lines.append(posts[idx])
    write_corpus(archive_lines, out / "archive.jsonl")
    truth.save(out / "truth.json")
    print(
        json.dumps(
            {
                "out_dir": str(out),
                "n_posts": len(posts),
                "n_clean": len(clean),
                "n_weak": len(weak),
                "archive_lines": len(archive_lines),
            },
            sort_keys=True,
        )
    )
    return EXIT_OK


def _cmd_ingest(args) -> int:
    from .pipeline import stage_ingest

    report = stage_ingest(args.archive, args.hashtags, args.out)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_filter(args) -> int:
    from .filters import FilterThresholds
    from .pipeline import stage_filter

    thresholds = FilterThresholds(
        max_face_body_ratio=args.max_face_body,
        min_body_image_ratio=args.min_body_image,
        ad_threshold=args.ad_threshold,
    )
    report = stage_filter(args.in_path, args.out, thresholds)
    Path(args.report).write_text(json.dumps(report, sort_keys=True, indent=2) + "\n")
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_train(args) -> int:
    from .model.network import ModelDims
    from .model.train import TrainConfig
    from .pipeline import stage_train

    raw = {}
    if args.config:
        path = Path(args.config)
        if not path.exists():
            raise FileNotFoundError(f"training config not found: {path}")
        try:
            raw = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ValueError(f"cannot parse training config {path}: {exc}") from exc
    dims = ModelDims(**raw.pop("dims", {}))
    contextual = bool(raw.pop("contextual", True))
    model_seed = int(raw.pop("model_seed", 0))
    config = TrainConfig(**raw)
    if args.seed is not None:
        config.seed = args.seed
    vocab = _load_vocab(args.vocab)
    report = stage_train(
        args.clean, args.weak, vocab, config, dims, contextual, model_seed, args.out
    )
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_predict(args) -> int:
    from .pipeline import stage_predict

    report = stage_predict(args.ckpt, args.in_path, args.out)
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_extract(args) -> int:
    import tempfile

    from .model.checkpoint import load_checkpoint
    from .pipeline import stage_extract, stage_index, stage_predict

    if not args.ckpt and not args.predictions:
        raise ValueError("extract needs --ckpt or --predictions")
    if not args.triplets and not args.kb:
        raise ValueError("extract needs --triplets and/or --kb output")

    with tempfile.TemporaryDirectory(prefix="fashionkb-extract-") as tmp:
        predictions = args.predictions
        if predictions is None:
            predictions = str(Path(tmp) / "predictions.jsonl")
            stage_predict(args.ckpt, args.in_path, predictions)
        if args.ckpt:
            _, _, vocab = load_checkpoint(args.ckpt)
        else:
            vocab = _load_vocab(args.vocab)
        triplets_path = args.triplets or str(Path(tmp) / "triplets.jsonl")
        report = stage_extract(args.in_path, predictions, triplets_path, vocab)
        if args.kb:
            report.update(stage_index(triplets_path, args.in_path, vocab, args.kb))
    print(json.dumps(report, sort_keys=True))
    return EXIT_OK


def _cmd_serve(args) -> int:
    from .corpus import read_corpus, strip_labels
    from .kb import KnowledgeBase
    from .server import serve

    kb_path = Path(args.kb)
    if not kb_path.exists():
        raise FileNotFoundError(f"knowledge base snapshot not found: {kb_path}")
    kb = KnowledgeBase.load(kb_path)
    corpus = None
    if args.corpus:
        corpus = {p.post_id: p for p in strip_labels(read_corpus(args.corpus))}
    serve(kb, corpus, addr=args.addr, static_dir=args.static)
    return EXIT_OK


def _cmd_query(args) -> int:
    from .corpus import read_corpus, strip_labels
    from .kb import KnowledgeBase
    from .search import Query, query_posts, query_triplets

    kb_path = Path(args.kb)
    if not kb_path.exists():
        raise FileNotFoundError(f"knowledge base snapshot not found: {kb_path}")
    kb = KnowledgeBase.load(kb_path)
    attribute_values = []
    for raw in args.attr:
        attr_name, sep, value = raw.partition(":")
        if not sep:
            raise ValueError(f"--attr must be TYPE:VALUE, got {raw!r}")
        attribute_values.append((attr_name, value))
    q = Query(
        mode=args.mode,
        occasions=tuple(args.occasion),
        genders=tuple(args.gender),
        categories=tuple(args.category),
        attribute_values=tuple(attribute_values),
        hashtags=tuple(t.lstrip("#").lower() for t in args.hashtag),
        locations=tuple(args.location),
        time_from=args.time_from,
        time_to=args.time_to,
        min_likes=args.min_likes,
        min_comments=args.min_comments,
        offset=args.offset,
        limit=args.limit,
    )
    if args.mode == "triplets":
        page = query_triplets(kb, q)
    else:
        corpus = None
        if args.corpus:
            corpus = {p.post_id: p for p in strip_labels(read_corpus(args.corpus))}
        page = query_posts(kb, corpus, q)
    print(json.dumps(page.to_json(), sort_keys=True, indent=2))
    return EXIT_OK


def _cmd_pipeline(args) -> int:
    from .pipeline import PipelineConfig, run_pipeline

    config_path = args.config
    if not config_path:
        raise ValueError("pipeline requires --config")
    if not Path(config_path).exists():
        raise FileNotFoundError(f"pipeline config not found: {config_path}")
    config = PipelineConfig.from_file(config_path)
    if args.seed is not None:
        config.seed = args.seed
        config.train_config.seed = args.seed
    result = run_pipeline(config)
    print(json.dumps({"exit_code": result.exit_code, "failed_stage": result.failed_stage,
                      "reports": result.reports}, sort_keys=True, indent=2))
    return result.exit_code


HANDLERS = {
    "gen-synthetic": _cmd_gen_synthetic,
    "ingest": _cmd_ingest,
    "filter": _cmd_filter,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "extract": _cmd_extract,
    "serve": _cmd_serve,
    "query": _cmd_query,
    "pipeline": _cmd_pipeline,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    from .pipeline import MissingInputError

    try:
        return HANDLERS[args.command](args)
    except FileNotFoundError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except MissingInputError as exc:
        print(f"error: missing input: {exc}", file=sys.stderr)
        return EXIT_MISSING_INPUT
    except (ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except KeyboardInterrupt:
        return 130
    except Exception as exc:  # stage failures
        print(f"error: stage failure: {exc}", file=sys.stderr)
        return EXIT_STAGE_FAILURE


if __name__ == "__main__":
    sys.exit(main())
