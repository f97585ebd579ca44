import json

import numpy as np
import pytest

from fashionkb.corpus import post_to_record, validate_labels
from fashionkb.filters import FilterThresholds, pair_faces_bodies, ratio_check
from fashionkb.synthetic import (
    SyntheticConfig,
    SyntheticConfigError,
    generate_synthetic,
    pairflip_matrix,
)
from fashionkb.vocab import AttributeType, ConceptVocabulary


def _corpus_fingerprint(posts):
    return "\n".join(json.dumps(post_to_record(p), sort_keys=True) for p in posts)


class TestDeterminism:
    def test_same_config_same_corpus(self, tiny_vocab):
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=40, seed=9, weak_fraction=0.3,
                                      d_img=8, d_reg=8)
        a, truth_a = generate_synthetic(cfg)
        b, truth_b = generate_synthetic(cfg)
        assert _corpus_fingerprint(a) == _corpus_fingerprint(b)
        assert truth_a.posts == truth_b.posts

    def test_post_seed_varies_posts_not_prototypes(self, tiny_vocab):
        base = dict(n_posts=10, seed=9, d_img=8, d_reg=8)
        _, t1 = generate_synthetic(SyntheticConfig.default(tiny_vocab, post_seed=1, **base))
        _, t2 = generate_synthetic(SyntheticConfig.default(tiny_vocab, post_seed=2, **base))
        assert np.array_equal(t1.category_prototypes, t2.category_prototypes)
        assert t1.posts != t2.posts


class TestEdgeCases:
    def test_zero_posts(self, tiny_vocab):
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=0, seed=1)
        posts, truth = generate_synthetic(cfg)
        assert posts == []
        assert truth.posts == {}

    def test_invalid_probability_table_rejected(self, tiny_vocab):
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=1, seed=1)
        bad = cfg.category_given_occasion.copy()
        bad[0, 0] += 0.5
        with pytest.raises(SyntheticConfigError, match="sum to 1"):
            SyntheticConfig.default(tiny_vocab, n_posts=1, seed=1, category_given_occasion=bad)

    def test_labels_are_vocabulary_members(self, vocab):
        cfg = SyntheticConfig.default(vocab, n_posts=60, seed=4, weak_fraction=0.5)
        posts, _ = generate_synthetic(cfg)
        for p in posts:
            validate_labels(p, vocab)


class TestPlantedDistributions:
    def test_occasion_marginal_recovered(self, vocab):
        """Planting a 0.3 marginal on prom yields an empirical frequency
        within +-0.02 at 10,000 posts (expected value derived by counting)."""
        marginals = np.full(10, 0.7 / 9)
        marginals[vocab.occasion_index("prom")] = 0.3
        cfg = SyntheticConfig.default(
            vocab, n_posts=10_000, seed=21, occasion_marginals=marginals,
            d_img=4, d_reg=4,
        )
        posts, _ = generate_synthetic(cfg)
        freq = sum(p.occasion_label == "prom" for p in posts) / len(posts)
        assert abs(freq - 0.3) <= 0.02

    def test_noise_channel_matches_planted_matrix(self):
        """Empirical clean->emitted confusion over weak posts converges to the
        planted transition matrix: max-abs deviation <= 0.03 at ~10,000
        samples per true class."""
        vocab = ConceptVocabulary(
            occasions=("occ_a", "occ_b"),
            categories=("cat_a", "cat_b"),
            attributes=(AttributeType("attr", ("x", "y")),),
        )
        cfg = SyntheticConfig.default(
            vocab,
            n_posts=20_000,
            seed=13,
            weak_fraction=1.0,
            noise_off_diagonal=0.3,
            garment_count_probs=np.array([1.0]),
            d_img=2,
            d_reg=2,
        )
        posts, truth = generate_synthetic(cfg)
        n = len(vocab.occasions)
        counts = np.zeros((n, n))
        for p in posts:
            clean = truth.posts[p.post.post_id]["occasion"]
            counts[vocab.occasion_index(clean), vocab.occasion_index(p.occasion_label)] += 1
        assert counts.sum(axis=1).min() >= 9_000  # ~10k samples per true class
        empirical = counts / counts.sum(axis=1, keepdims=True)
        planted = truth.transition_matrices["occasion"]
        assert np.abs(empirical - planted).max() <= 0.03

    def test_pairflip_matrix_shape(self):
        t = pairflip_matrix(4, 0.3)
        assert np.allclose(t.sum(axis=1), 1.0)
        assert np.allclose(np.diag(t), 0.7)


class TestGeometryContract:
    def test_clean_geometry_passes_filters(self, tiny_vocab):
        """Without requested violations every post passes pairing + ratios."""
        cfg = SyntheticConfig.default(tiny_vocab, n_posts=80, seed=6, d_img=4, d_reg=4)
        posts, _ = generate_synthetic(cfg)
        thresholds = FilterThresholds()
        for lp in posts:
            post = lp.post
            pairs = pair_faces_bodies(post.faces, post.bodies)
            assert pairs, post.post_id
            assert any(ratio_check(p, post.image_height, thresholds) for p in pairs)

    def test_violations_fail_their_stage(self, tiny_vocab):
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=120, seed=6, filter_violation_fraction=1.0,
            d_img=4, d_reg=4,
        )
        posts, truth = generate_synthetic(cfg)
        thresholds = FilterThresholds()
        kinds = set()
        for lp in posts:
            post = lp.post
            kind = truth.posts[post.post_id]["violation"]
            kinds.add(kind)
            pairs = pair_faces_bodies(post.faces, post.bodies)
            if kind == "no_pair":
                assert pairs == []
            else:
                assert pairs
                assert not any(ratio_check(p, post.image_height, thresholds) for p in pairs)
        assert kinds == {"no_pair", "face_ratio", "body_ratio"}


class TestCooccurrenceConfig:
    def test_pattern_posts_use_exact_patterns(self, vocab):
        cfg = SyntheticConfig.cooccurrence(vocab, n_posts=120, seed=3)
        posts, truth = generate_synthetic(cfg)
        for lp in posts:
            occ = vocab.occasion_index(lp.occasion_label)
            pair, member = divmod(occ, 2)
            expected = {4 * pair, 4 * pair + 1} if member == 0 else {4 * pair + 2, 4 * pair + 3}
            cats = {vocab.category_index(g.category) for g in lp.garment_labels.values()}
            assert cats == expected

    def test_prototype_sums_tied(self, vocab):
        cfg = SyntheticConfig.cooccurrence(vocab, n_posts=1, seed=3)
        _, truth = generate_synthetic(cfg)
        p = truth.category_prototypes
        for k in range(5):
            a, b, c, d = 4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3
            assert np.allclose(p[a] + p[b], p[c] + p[d], atol=1e-12)
