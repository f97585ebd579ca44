"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line with its measured numbers.

Run with `pytest tests/test_acceptance.py -v -s`. The training-based
criteria take several minutes each; everything is seeded and deterministic.
"""

import json
import time
from pathlib import Path

import numpy as np
import pytest

from fashionkb.corpus import BoundingBox, write_corpus
from fashionkb.filters import (
    AdClassifier,
    FilterThresholds,
    PersonPair,
    ad_score,
    filter_corpus,
    pair_faces_bodies,
    ratio_check,
    run_filters,
)
from fashionkb.kb import KnowledgeBase, FashionTriplet, build_triplets
from fashionkb.model import (
    ConceptModel,
    ModelDims,
    NoiseModel,
    TrainConfig,
    evaluate,
    train,
)
from fashionkb.model.gradcheck import check_model_gradients
from fashionkb.model.network import DecodedGarment, DecodedPost
from fashionkb.pipeline import PipelineConfig, run_pipeline, surviving_pairs
from fashionkb.search import Query, query_posts, query_triplets
from fashionkb.synthetic import SyntheticConfig, generate_synthetic, task_names
from fashionkb.vocab import reference_vocabulary, save_vocabulary

from test_filters import _oracle_outcome
from test_search import oracle_posts, oracle_triplets, random_query


def _report(name: str, ok: bool, detail: str) -> None:
    print(f"\nACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")


# ---------------------------------------------------------------------------
# 1. Context gain


class TestContextGain:
    def test_contextual_model_beats_ablated_baseline(self, vocab):
        """2,000-post corpora with planted occasion/category/attribute
        correlations, 5 seeds: median occasion-accuracy gain >= 3 points and
        no task more than 0.5 points below the baseline; <= 10 minutes."""
        t0 = time.monotonic()
        gaps = []
        task_deltas: dict[str, list[float]] = {}
        for s in range(5):
            cfg = SyntheticConfig.cooccurrence(
                vocab, n_posts=2600, seed=100 + s, feature_sigma=0.25
            )
            posts, _ = generate_synthetic(cfg)
            train_set, eval_set = posts[:2000], posts[2000:]
            tc = TrainConfig(epochs=22, batch_size=32, learning_rate=0.22, seed=s)
            accuracies = {}
            for contextual in (True, False):
                model = ConceptModel(vocab, contextual=contextual, seed=s)
                train(model, NoiseModel.identity(vocab), train_set, [], tc)
                accuracies[contextual] = evaluate(model, eval_set)
            gaps.append(accuracies[True]["occasion"] - accuracies[False]["occasion"])
            for task in task_names(vocab):
                task_deltas.setdefault(task, []).append(
                    accuracies[True][task] - accuracies[False][task]
                )
        elapsed = time.monotonic() - t0
        median_gap = float(np.median(gaps)) * 100
        floor = min(float(np.median(v)) for v in task_deltas.values()) * 100
        ok = median_gap >= 3.0 and floor >= -0.5 and elapsed <= 600
        _report(
            "context-gain",
            ok,
            f"median occasion gap {median_gap:+.1f} pts, worst median task delta "
            f"{floor:+.2f} pts, {elapsed:.0f}s",
        )
        assert median_gap >= 3.0, f"median occasion gap {median_gap:.2f} pts < 3"
        assert floor >= -0.5, f"a task fell {floor:.2f} pts below the baseline"
        assert elapsed <= 600, f"ran {elapsed:.0f}s > 10 min budget"


# ---------------------------------------------------------------------------
# 2. Noise recovery


class TestNoiseRecovery:
    def test_transition_matrices_and_accuracy_gain(self, vocab):
        """Weak set through a 0.30 off-diagonal planted channel, 300 clean
        posts, 5 seeds: every learned transition matrix within 0.15 median
        row-wise L1 of its planted matrix, and the noise-aware model at
        least 2 points (median) above treating weak labels as clean."""
        t0 = time.monotonic()
        dims = ModelDims(d_img=64, d_reg=96)
        deltas = []
        per_task_l1: dict[str, list[float]] = {}
        for s in range(5):
            def gen(n, weak_fraction, post_seed):
                cfg = SyntheticConfig.default(
                    vocab, n_posts=n, seed=200 + s, weak_fraction=weak_fraction,
                    noise_off_diagonal=0.3, feature_sigma=0.5,
                    category_scale=1.2, value_scale=0.9, image_scale=0.9,
                    d_reg=96, orthogonal_prototypes=True, post_seed=post_seed,
                )
                return generate_synthetic(cfg)

            clean, truth = gen(300, 0.0, 711 + s)
            weak, _ = gen(2500, 1.0, 722 + s)
            eval_posts, _ = gen(500, 0.0, 733 + s)
            tc = TrainConfig(
                epochs=16, batch_size=32, learning_rate=0.18, seed=s,
                clean_warmup_epochs=5, noise_estimation="epoch", noise_lr_scale=0.0,
            )
            noise = NoiseModel(vocab)
            aware = ConceptModel(vocab, dims=dims, contextual=True, seed=s)
            train(aware, noise, clean, weak, tc)
            aware_acc = evaluate(aware, eval_posts)
            learned = noise.realized()
            for task in task_names(vocab):
                l1 = np.abs(learned[task] - truth.transition_matrices[task]).sum(axis=1)
                per_task_l1.setdefault(task, []).append(float(l1.mean()))
            baseline = ConceptModel(vocab, dims=dims, contextual=True, seed=s)
            train(baseline, NoiseModel.identity(vocab), clean, weak, tc)
            deltas.append(aware_acc["mean"] - evaluate(baseline, eval_posts)["mean"])
        elapsed = time.monotonic() - t0
        medians = {task: float(np.median(v)) for task, v in per_task_l1.items()}
        worst_task = max(medians, key=medians.get)
        median_delta = float(np.median(deltas)) * 100
        ok = medians[worst_task] <= 0.15 and median_delta >= 2.0
        _report(
            "noise-recovery",
            ok,
            f"worst median row-L1 {medians[worst_task]:.3f} ({worst_task}), "
            f"median accuracy gain {median_delta:+.1f} pts, {elapsed:.0f}s",
        )
        for task, value in medians.items():
            assert value <= 0.15, f"T[{task}] median row-L1 {value:.3f} > 0.15"
        assert median_delta >= 2.0, f"median accuracy gain {median_delta:.2f} pts < 2"


# ---------------------------------------------------------------------------
# 3. Gradient correctness


class TestGradientCorrectness:
    def test_every_parameter_matches_finite_differences(self, tiny_vocab):
        """dims <= 8 model, 3 random batches, step 1e-4, rel err <= 1e-4,
        within 30 seconds."""
        t0 = time.monotonic()
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=12, seed=3, weak_fraction=0.5, d_img=8, d_reg=8
        )
        posts, _ = generate_synthetic(cfg)
        dims = ModelDims(d_img=8, d_reg=8, h_garment=4, h_slot=4, slot_emb=4)
        model = ConceptModel(tiny_vocab, dims=dims, contextual=True, seed=1)
        noise = NoiseModel(tiny_vocab)
        report = check_model_gradients(
            model, noise, posts, n_batches=3, batch_size=4, step=1e-4
        )
        elapsed = time.monotonic() - t0
        ok = report.max_rel_err <= 1e-4 and elapsed <= 30
        _report(
            "gradient-correctness",
            ok,
            f"max rel err {report.max_rel_err:.2e} over {report.n_parameters} "
            f"parameters ({report.worst[0]}), {elapsed:.1f}s",
        )
        assert report.max_rel_err <= 1e-4, report.worst
        assert elapsed <= 30, f"ran {elapsed:.1f}s > 30s budget"


# ---------------------------------------------------------------------------
# 4. Filter exactness


def _ratio_pair(face_h, body_h):
    return PersonPair(
        face=BoundingBox(10, 10, max(face_h * 0.8, 1e-6), face_h),
        body=BoundingBox(0, 0, body_h * 0.4, body_h),
        pair_score=1.0,
    )


class TestFilterExactness:
    def test_boundary_table_and_keep_set(self, tiny_vocab):
        """A 200+-case height table (including exact threshold hits at 0.2
        and 0.5) against the literal strict inequalities, 0 mismatches; and
        keep-set equality with a brute-force re-check on 1,000 mixed posts."""
        thresholds = FilterThresholds()
        mismatches = 0
        cases = 0
        face_heights = (10.0, 25.0, 30.0, 39.9, 40.0, 40.1, 50.0, 64.0)
        body_heights = (140.0, 149.9, 150.0, 150.1, 160.0, 200.0)
        image_heights = (290.0, 299.9, 300.0, 300.4, 320.0)
        exact_hits = 0
        for face_h in face_heights:
            for body_h in body_heights:
                for image_h in image_heights:
                    if face_h > body_h:
                        continue
                    expected = (face_h / body_h < 0.2) and (body_h / image_h > 0.5)
                    got = ratio_check(_ratio_pair(face_h, body_h), image_h, thresholds)
                    cases += 1
                    if face_h / body_h == 0.2 or body_h / image_h == 0.5:
                        exact_hits += 1
                    if got != expected:
                        mismatches += 1
        assert cases >= 200, f"only {cases} boundary cases"
        assert exact_hits > 0, "table never hit a threshold exactly"

        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=1000, seed=99, filter_violation_fraction=0.45,
            ad_fraction=0.15, d_img=4, d_reg=4,
        )
        labeled, _ = generate_synthetic(cfg)
        posts = [lp.post for lp in labeled]
        clf = AdClassifier.default()
        kept, _ = filter_corpus(posts, thresholds, clf)
        kept_ids = {p.post_id for p, _ in kept}
        oracle_ids = {
            p.post_id for p in posts if _oracle_outcome(p, thresholds, clf) == "keep"
        }
        ok = mismatches == 0 and kept_ids == oracle_ids
        _report(
            "filter-exactness",
            ok,
            f"{cases} boundary cases ({exact_hits} exact threshold hits), "
            f"0 mismatches expected got {mismatches}; keep-set "
            f"{len(kept_ids)}/{len(posts)} equals brute force: {kept_ids == oracle_ids}",
        )
        assert mismatches == 0
        assert kept_ids == oracle_ids


# ---------------------------------------------------------------------------
# 5. KB / search oracle equivalence


class TestKbSearchOracle:
    def test_counts_and_queries_match_linear_scan(self, vocab):
        """1,000-post extraction: every aggregate count equals a linear-scan
        recount, and 100 random faceted queries (both modes) return results
        identical in content and order; <= 1 minute."""
        t0 = time.monotonic()
        cfg = SyntheticConfig.default(vocab, n_posts=1000, seed=55, d_img=8, d_reg=8)
        labeled, _ = generate_synthetic(cfg)
        thresholds = FilterThresholds()
        kb = KnowledgeBase(vocab)
        n_inserted = 0
        for lp in labeled:
            post = lp.post
            decoded = DecodedPost(
                post_id=post.post_id,
                occasion=lp.occasion_label,
                garments=[
                    DecodedGarment(
                        region_id=rid,
                        category=gl.category,
                        values=dict(gl.values),
                    )
                    for rid, gl in lp.garment_labels.items()
                ],
            )
            pairs = surviving_pairs(post, thresholds)
            triplets = build_triplets(post, decoded, pairs, vocab)
            kb.insert(triplets, post)
            n_inserted += len(triplets)

        recount: dict = {}
        for t in kb.instances:
            recount[t.key] = recount.get(t.key, 0) + 1
        counts_ok = recount == kb.counts

        rng = np.random.default_rng(2024)
        query_failures = 0
        for i in range(100):
            mode = "triplets" if i % 2 == 0 else "posts"
            q = random_query(vocab, rng, mode)
            if mode == "triplets":
                page = query_triplets(kb, q)
                got = [(r.key, r.count, r.samples) for r in page.results]
                expected = oracle_triplets(kb, q)[: q.limit]
            else:
                page = query_posts(kb, None, q)
                got = [r.meta.post_id for r in page.results]
                expected = oracle_posts(kb, q)[: q.limit]
            if got != expected:
                query_failures += 1
        elapsed = time.monotonic() - t0
        ok = counts_ok and query_failures == 0 and elapsed <= 60
        _report(
            "kb-search-oracle",
            ok,
            f"{n_inserted} instances, counts equal recount: {counts_ok}; "
            f"100 random queries, {query_failures} mismatches; {elapsed:.1f}s",
        )
        assert counts_ok
        assert query_failures == 0
        assert elapsed <= 60, f"ran {elapsed:.1f}s > 1 min budget"


# ---------------------------------------------------------------------------
# 6. Pipeline determinism


class TestPipelineDeterminism:
    def test_two_runs_bit_identical_kb(self, tiny_vocab, tmp_path):
        """Two full pipeline executions with one config produce bit-identical
        knowledge base snapshots."""
        root = tmp_path
        vocab_path = root / "vocab.json"
        save_vocabulary(tiny_vocab, vocab_path)
        tags = {occ: [occ] for occ in tiny_vocab.occasions}
        (root / "hashtags.json").write_text(json.dumps(tags))
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=220, seed=7, weak_fraction=0.3,
            filter_violation_fraction=0.2, d_img=8, d_reg=8,
        )
        posts, _ = generate_synthetic(cfg)
        write_corpus(posts, root / "archive.jsonl")
        write_corpus([p for p in posts if p.label_source == "clean"], root / "clean.jsonl")
        write_corpus([p for p in posts if p.label_source == "weak"], root / "weak.jsonl")

        snapshots = []
        for run in ("a", "b"):
            config = PipelineConfig.from_dict(
                {
                    "vocabulary": str(vocab_path),
                    "hashtags": str(root / "hashtags.json"),
                    "archive": str(root / "archive.jsonl"),
                    "checkpoint": str(root / f"model_{run}.ckpt"),
                    "kb": str(root / f"kb_{run}.snapshot"),
                    "workdir": str(root / f"work_{run}"),
                    "clean_corpus": str(root / "clean.jsonl"),
                    "weak_corpus": str(root / "weak.jsonl"),
                    "train": {"epochs": 3, "batch_size": 8, "learning_rate": 0.2, "seed": 1},
                    "dims": {"d_img": 8, "d_reg": 8, "h_garment": 4, "h_slot": 4, "slot_emb": 4},
                    "stages": {"train": True},
                }
            )
            result = run_pipeline(config)
            assert result.exit_code == 0, result.reports
            snapshots.append((root / f"kb_{run}.snapshot").read_bytes())
        identical = snapshots[0] == snapshots[1]
        _report(
            "pipeline-determinism",
            identical,
            f"two runs, kb snapshots identical: {identical} "
            f"({len(snapshots[0])} bytes)",
        )
        assert identical
