"""Staged pipeline: ingest -> filter -> predict -> extract -> index.

Every stage reads and writes plain files, so each intermediate artifact is
inspectable and diffable, and running the stages by hand matches running
the pipeline end to end bit for bit. All randomness flows through config
seeds.
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .corpus import LabeledPost, Post, read_corpus, strip_labels, write_corpus
from .filters import (
    AdClassifier,
    FilterThresholds,
    filter_corpus,
    hint_gender_predictor,
    pair_faces_bodies,
    ratio_check,
)
from .ingest import HashtagMap, ingest_archive
from .kb import FashionTriplet, KnowledgeBase, PostMeta, build_triplets
from .model.checkpoint import load_checkpoint, save_checkpoint
from .model.network import ConceptModel, DecodedGarment, DecodedPost, ModelDims, decode
from .model.noise import NoiseModel
from .model.train import TrainConfig, train
from .vocab import ConceptVocabulary, load_vocabulary

log = logging.getLogger(__name__)


class PipelineError(RuntimeError):
    pass


class MissingInputError(PipelineError):
    """An enabled stage's input file does not exist."""


STAGES = ("ingest", "filter", "train", "predict", "extract", "index")


@dataclass
class PipelineConfig:
    vocabulary: str
    hashtags: str
    archive: str
    checkpoint: str
    kb: str
    workdir: str
    seed: int = 0
    thresholds: FilterThresholds = field(default_factory=FilterThresholds)
    train_config: TrainConfig = field(default_factory=TrainConfig)
    dims: ModelDims = field(default_factory=ModelDims)
    contextual: bool = True
    model_seed: int = 0
    clean_corpus: str | None = None
    weak_corpus: str | None = None
    stages: dict[str, bool] = field(
        default_factory=lambda: {s: s != "train" for s in STAGES}
    )

    @staticmethod
    def from_file(path: str | Path) -> "PipelineConfig":
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ValueError(f"cannot parse pipeline config {path}: {exc}") from exc
        return PipelineConfig.from_dict(raw, base=Path(path).parent)

    @staticmethod
    def from_dict(raw: dict, base: Path | None = None) -> "PipelineConfig":
        def resolve(p):
            if p is None:
                return None
            p = Path(p)
            return str(p if p.is_absolute() or base is None else base / p)

        try:
            stages = {s: s != "train" for s in STAGES}
            stages.update(raw.get("stages", {}))
            unknown = set(stages) - set(STAGES)
            if unknown:
                raise ValueError(f"unknown stage toggle(s): {sorted(unknown)}")
            return PipelineConfig(
                vocabulary=resolve(raw["vocabulary"]),
                hashtags=resolve(raw["hashtags"]),
                archive=resolve(raw["archive"]),
                checkpoint=resolve(raw["checkpoint"]),
                kb=resolve(raw["kb"]),
                workdir=resolve(raw.get("workdir", "pipeline_work")),
                seed=int(raw.get("seed", 0)),
                thresholds=FilterThresholds(**raw.get("thresholds", {})),
                train_config=TrainConfig(**raw.get("train", {})),
                dims=ModelDims(**raw.get("dims", {})),
                contextual=bool(raw.get("contextual", True)),
                model_seed=int(raw.get("model_seed", 0)),
                clean_corpus=resolve(raw.get("clean_corpus")),
                weak_corpus=resolve(raw.get("weak_corpus")),
                stages=stages,
            )
        except (KeyError, TypeError) as exc:
            raise ValueError(f"invalid pipeline config: {exc}") from exc


def _require(path: str | Path, what: str) -> Path:
    p = Path(path)
    if not p.exists():
        raise MissingInputError(f"{what} not found: {p}")
    return p


def _write_report(report: dict, path: Path) -> None:
    path.write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")


# -- stages -------------------------------------------------------------------


def stage_ingest(archive: str | Path, hashtags: str | Path, out: str | Path) -> dict:
    _require(archive, "archive")
    hashtag_map = HashtagMap.load(_require(hashtags, "hashtag map"))
    stream, report = ingest_archive(archive, hashtag_map)
    n = write_corpus(stream, out)
    report.check_arithmetic()
    out_report = report.to_dict()
    out_report["written"] = n
    return out_report


def stage_filter(
    in_path: str | Path,
    out: str | Path,
    thresholds: FilterThresholds | None = None,
    clf: AdClassifier | None = None,
) -> dict:
    items = read_corpus(_require(in_path, "filter input corpus"))
    posts = strip_labels(items)
    kept_pairs, report = filter_corpus(posts, thresholds, clf)
    kept_ids = {post.post_id for post, _ in kept_pairs}
    write_corpus([item for item, post in zip(items, posts) if post.post_id in kept_ids], out)
    return report.to_dict()


def stage_train(
    clean_path: str | Path,
    weak_path: str | Path | None,
    vocab: ConceptVocabulary,
    config: TrainConfig,
    dims: ModelDims,
    contextual: bool,
    model_seed: int,
    ckpt_out: str | Path,
) -> dict:
    clean = [p for p in read_corpus(_require(clean_path, "clean corpus")) if isinstance(p, LabeledPost)]
    weak: list[LabeledPost] = []
    if weak_path is not None and Path(weak_path).exists():
        weak = [p for p in read_corpus(weak_path) if isinstance(p, LabeledPost)]
    model = ConceptModel(vocab, dims=dims, contextual=contextual, seed=model_seed)
    noise = NoiseModel(vocab)
    result = train(model, noise, clean, weak, config)
    save_checkpoint(model, noise, ckpt_out)
    return {
        "n_clean": len(clean),
        "n_weak": len(weak),
        "epochs": config.epochs,
        "final_loss": result.history[-1]["train_loss"],
    }


def _decoded_to_record(decoded: DecodedPost, prediction) -> dict:
    garments = []
    for dg, pg in zip(decoded.garments, prediction.garments):
        garments.append(
            {
                "region_id": dg.region_id,
                "category": {"label": dg.category, "prob": float(np.max(pg.category_probs))},
                "values": {
                    name: {"label": dg.values[name], "prob": float(np.max(pg.value_probs[name]))}
                    for name in dg.values
                },
            }
        )
    return {
        "post_id": decoded.post_id,
        "occasion": {
            "label": decoded.occasion,
            "prob": float(np.max(prediction.occasion_probs)),
        },
        "garments": garments,
    }


def stage_predict(ckpt: str | Path, in_path: str | Path, out: str | Path) -> dict:
    model, _, vocab = load_checkpoint(_require(ckpt, "model checkpoint"))
    items = read_corpus(_require(in_path, "predict input corpus"))
    posts = strip_labels(items)
    with_garments = [p for p in posts if p.garments]
    skipped = len(posts) - len(with_garments)
    predictions = model.forward_batch(with_garments)
    with open(out, "w", encoding="utf-8") as fh:
        for post, pred in zip(with_garments, predictions):
            decoded = decode(pred, vocab)
            fh.write(json.dumps(_decoded_to_record(decoded, pred), sort_keys=True))
            fh.write("\n")
    return {"n_posts": len(with_garments), "skipped_zero_garment": skipped}


def read_predictions(path: str | Path) -> dict[str, DecodedPost]:
    out: dict[str, DecodedPost] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out[rec["post_id"]] = DecodedPost(
                post_id=rec["post_id"],
                occasion=rec["occasion"]["label"],
                garments=[
                    DecodedGarment(
                        region_id=g["region_id"],
                        category=g["category"]["label"],
                        values={name: v["label"] for name, v in g["values"].items()},
                    )
                    for g in rec["garments"]
                ],
            )
    return out


def surviving_pairs(post: Post, thresholds: FilterThresholds):
    """Re-derive the ratio-passing person pairs for a post that already
    passed filtering (pairing is deterministic, so this is cheap and exact)."""
    pairs = pair_faces_bodies(post.faces, post.bodies)
    kept = [p for p in pairs if ratio_check(p, post.image_height, thresholds)]
    return tuple(replace(p, gender=hint_gender_predictor(post, p)) for p in kept)


def stage_extract(
    in_path: str | Path,
    predictions_path: str | Path,
    out: str | Path,
    vocab: ConceptVocabulary,
    thresholds: FilterThresholds | None = None,
) -> dict:
    thresholds = thresholds or FilterThresholds()
    items = read_corpus(_require(in_path, "extract input corpus"))
    posts = strip_labels(items)
    decoded = read_predictions(_require(predictions_path, "predictions file"))
    n_triplets = 0
    with open(out, "w", encoding="utf-8") as fh:
        for post in posts:
            dec = decoded.get(post.post_id)
            if dec is None:
                continue
            pairs = surviving_pairs(post, thresholds)
            for t in build_triplets(post, dec, pairs, vocab):
                fh.write(
                    json.dumps(
                        {
                            "occasion": t.occasion,
                            "gender": t.gender,
                            "category": t.category,
                            "attribute_values": dict(sorted(t.attribute_values.items())),
                            "post_id": t.provenance[0],
                            "region_id": t.provenance[1],
                        },
                        sort_keys=True,
                    )
                )
                fh.write("\n")
                n_triplets += 1
    return {"n_posts": len(posts), "n_triplets": n_triplets}


def read_triplets(path: str | Path) -> list[FashionTriplet]:
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if not line:
                continue
            rec = json.loads(line)
            out.append(
                FashionTriplet(
                    occasion=rec["occasion"],
                    gender=rec["gender"],
                    category=rec["category"],
                    attribute_values=dict(rec["attribute_values"]),
                    provenance=(rec["post_id"], rec["region_id"]),
                )
            )
    return out


def stage_index(
    triplets_path: str | Path,
    corpus_path: str | Path,
    vocab: ConceptVocabulary,
    kb_out: str | Path,
) -> dict:
    triplets = read_triplets(_require(triplets_path, "triplets file"))
    posts = strip_labels(read_corpus(_require(corpus_path, "corpus for indexing")))
    meta = {p.post_id: PostMeta.from_post(p) for p in posts}
    kb = KnowledgeBase(vocab)
    by_post: dict[str, list[FashionTriplet]] = {}
    for t in triplets:
        by_post.setdefault(t.provenance[0], []).append(t)
    for post_id in sorted(by_post):
        kb.insert(by_post[post_id], meta.get(post_id))
    kb.save(kb_out)
    return {"instances": len(kb), "distinct_keys": len(kb.counts)}


# -- orchestration --------------------------------------------------------------


@dataclass
class PipelineResult:
    exit_code: int
    failed_stage: str | None
    reports: dict[str, dict]


def run_pipeline(config: PipelineConfig) -> PipelineResult:
    """Run the enabled stages in order, halting on the first failure.

    Exit codes: 0 success, 2 missing input, 3 stage failure.
    """
    workdir = Path(config.workdir)
    workdir.mkdir(parents=True, exist_ok=True)
    reports: dict[str, dict] = {}

    try:
        vocab = load_vocabulary(_require(config.vocabulary, "vocabulary"))
    except MissingInputError as exc:
        return PipelineResult(exit_code=2, failed_stage="config", reports={"config": {"error": str(exc)}})
    if config.stages.get("train") and config.clean_corpus is None:
        return PipelineResult(
            exit_code=2,
            failed_stage="train",
            reports={"train": {"error": "train stage enabled but clean_corpus not configured"}},
        )

    ingested = workdir / "ingested.jsonl"
    filtered = workdir / "filtered.jsonl"
    predictions = workdir / "predictions.jsonl"
    triplets = workdir / "triplets.jsonl"

    plan = [
        (
            "ingest",
            lambda: stage_ingest(config.archive, config.hashtags, ingested),
        ),
        (
            "filter",
            lambda: stage_filter(ingested, filtered, config.thresholds),
        ),
        (
            "train",
            lambda: stage_train(
                config.clean_corpus,
                config.weak_corpus,
                vocab,
                config.train_config,
                config.dims,
                config.contextual,
                config.model_seed,
                config.checkpoint,
            ),
        ),
        (
            "predict",
            lambda: stage_predict(config.checkpoint, filtered, predictions),
        ),
        (
            "extract",
            lambda: stage_extract(filtered, predictions, triplets, vocab, config.thresholds),
        ),
        (
            "index",
            lambda: stage_index(triplets, filtered, vocab, config.kb),
        ),
    ]

    for name, fn in plan:
        if not config.stages.get(name, False):
            continue
        log.info("pipeline stage: %s", name)
        try:
            report = fn()
        except MissingInputError as exc:
            log.error("stage %s missing input: %s", name, exc)
            reports[name] = {"error": str(exc)}
            _write_report(reports, workdir / "pipeline_report.json")
            return PipelineResult(exit_code=2, failed_stage=name, reports=reports)
        except Exception as exc:
            log.error("stage %s failed: %s", name, exc)
            reports[name] = {"error": str(exc)}
            _write_report(reports, workdir / "pipeline_report.json")
            return PipelineResult(exit_code=3, failed_stage=name, reports=reports)
        reports[name] = report
        _write_report(report, workdir / f"{name}_report.json")

    _write_report(reports, workdir / "pipeline_report.json")
    return PipelineResult(exit_code=0, failed_stage=None, reports=reports)
