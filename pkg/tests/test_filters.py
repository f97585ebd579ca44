import itertools
import math

import numpy as np
import pytest

from fashionkb.corpus import BoundingBox
from fashionkb.filters import (
    AdClassifier,
    FilterConfigError,
    FilterThresholds,
    PersonPair,
    ad_features,
    ad_score,
    filter_corpus,
    pair_faces_bodies,
    ratio_check,
    run_filters,
    train_ad_classifier,
)
from fashionkb.synthetic import SyntheticConfig, generate_synthetic

from conftest import make_post


def _pair(face_h, body_h, face=None, body=None):
    face = face or BoundingBox(10, 10, face_h * 0.8, face_h)
    body = body or BoundingBox(0, 0, body_h * 0.4, body_h)
    return PersonPair(face=face, body=body, pair_score=1.0)


# ---------------------------------------------------------------------------
# pairing


def _brute_force_assignment(faces, bodies, score_fn):
    """Exhaustive max-total-score one-to-one assignment (oracle)."""
    n, m = len(faces), len(bodies)
    best, best_total = [], -1.0
    indices = list(range(m))
    for k in range(min(n, m), 0, -1):
        for face_subset in itertools.combinations(range(n), k):
            for body_perm in itertools.permutations(indices, k):
                pairs = [
                    (fi, bi)
                    for fi, bi in zip(face_subset, body_perm)
                    if score_fn(faces[fi][0], bodies[bi][0]) > 0
                ]
                total = sum(score_fn(faces[fi][0], bodies[bi][0]) for fi, bi in pairs)
                if total > best_total:
                    best_total, best = total, pairs
    return set(best), best_total


class TestPairing:
    def test_full_containment_scores_one(self):
        body = BoundingBox(0, 0, 100, 300)
        face = BoundingBox(30, 20, 40, 50)  # inside top third
        pairs = pair_faces_bodies([(face, 0.9)], [(body, 0.9)])
        assert len(pairs) == 1
        assert pairs[0].pair_score == 1.0

    def test_no_faces_empty(self):
        bodies = [(BoundingBox(0, 0, 100, 300), 0.9)] * 3
        assert pair_faces_bodies([], bodies) == []
        assert pair_faces_bodies(bodies, []) == []

    def test_face_below_head_zone_not_paired(self):
        body = BoundingBox(0, 0, 100, 300)
        face = BoundingBox(30, 200, 40, 50)  # center at y=225, zone ends at 120
        assert pair_faces_bodies([(face, 0.9)], [(body, 0.9)]) == []

    def test_face_taller_than_body_not_paired(self):
        body = BoundingBox(0, 0, 100, 50)
        face = BoundingBox(10, 0, 40, 60)
        assert pair_faces_bodies([(face, 0.9)], [(body, 0.9)]) == []

    def test_one_to_one(self):
        body = BoundingBox(0, 0, 100, 300)
        face_a = BoundingBox(20, 10, 40, 50)
        face_b = BoundingBox(40, 20, 40, 50)
        pairs = pair_faces_bodies([(face_a, 0.9), (face_b, 0.9)], [(body, 0.9)])
        assert len(pairs) == 1

    def test_crosswise_overlap_matches_brute_force(self):
        """Two faces, two bodies, crosswise overlaps: the greedy matching
        equals the exhaustive max-total-score assignment."""
        from fashionkb.filters import _pair_score

        body_l = BoundingBox(0, 0, 120, 320)
        body_r = BoundingBox(100, 10, 120, 320)
        face_l = BoundingBox(60, 30, 50, 55)  # overlaps both, mostly left
        face_r = BoundingBox(130, 40, 50, 55)  # overlaps both, mostly right
        faces = [(face_l, 0.9), (face_r, 0.9)]
        bodies = [(body_l, 0.9), (body_r, 0.9)]

        expected, _ = _brute_force_assignment(faces, bodies, _pair_score)
        pairs = pair_faces_bodies(faces, bodies)
        got = set()
        for p in pairs:
            fi = next(i for i, (f, _) in enumerate(faces) if f is p.face)
            bi = next(i for i, (b, _) in enumerate(bodies) if b is p.body)
            got.add((fi, bi))
        assert got == expected

    def test_three_by_three_instances_match_brute_force(self):
        """Random stacked-person layouts up to 3x3 against the exhaustive
        assignment oracle (instances built so greedy is provably optimal:
        each face overlaps its own body far more than any other)."""
        from fashionkb.filters import _pair_score

        rng = np.random.default_rng(7)
        for _ in range(25):
            n = int(rng.integers(1, 4))
            faces, bodies = [], []
            for i in range(n):
                bx = 160.0 * i
                body = BoundingBox(bx, 0, 140, 320)
                jitter = rng.uniform(-12, 12)
                face = BoundingBox(bx + 45 + jitter, rng.uniform(5, 40), 50, 55)
                bodies.append((body, 0.9))
                faces.append((face, 0.9))
            expected, expected_total = _brute_force_assignment(faces, bodies, _pair_score)
            pairs = pair_faces_bodies(faces, bodies)
            total = sum(p.pair_score for p in pairs)
            assert math.isclose(total, expected_total, rel_tol=1e-12)
            assert len(pairs) == len(expected)


# ---------------------------------------------------------------------------
# ratios


class TestRatioCheck:
    def test_passing_ratios(self):
        # 30/200 = 0.15 < 0.2 and 200/300 ~ 0.667 > 0.5
        assert ratio_check(_pair(30, 200), 300, FilterThresholds()) is True

    def test_face_boundary_excluded(self):
        # 40/200 = 0.2 is not < 0.2
        assert ratio_check(_pair(40, 200), 300, FilterThresholds()) is False

    def test_body_boundary_excluded(self):
        # 20/150 passes the face test but 150/300 = 0.5 is not > 0.5
        assert ratio_check(_pair(20, 150), 300, FilterThresholds()) is False

    def test_bad_image_height(self):
        with pytest.raises(ValueError):
            ratio_check(_pair(30, 200), 0, FilterThresholds())

    def test_threshold_validation(self):
        with pytest.raises(FilterConfigError):
            FilterThresholds(max_face_body_ratio=0.0)
        with pytest.raises(FilterConfigError):
            FilterThresholds(min_body_image_ratio=1.0)
        with pytest.raises(FilterConfigError):
            FilterThresholds(ad_threshold=1.5)

    def test_boundary_table_strict_inequalities(self):
        """Grid of face/body/image heights, including exact threshold hits,
        against a literal re-statement of the two strict inequalities."""
        cases = 0
        thresholds = FilterThresholds()
        for face_h in (10.0, 20.0, 30.0, 39.0, 40.0, 41.0, 60.0):
            for body_h in (140.0, 150.0, 160.0, 200.0):
                for image_h in (290.0, 300.0, 310.0):
                    if face_h > body_h:
                        continue
                    expected = (face_h / body_h < 0.2) and (body_h / image_h > 0.5)
                    got = ratio_check(_pair(face_h, body_h), image_h, thresholds)
                    assert got == expected, (face_h, body_h, image_h)
                    cases += 1
        assert cases >= 80


# ---------------------------------------------------------------------------
# ad classifier


class TestAdScore:
    def test_zero_weights_give_half(self):
        clf = AdClassifier(weights=np.zeros(len(ad_features(make_post()))), bias=0.0)
        assert ad_score(make_post(), clf) == 0.5

    def test_margin_four(self):
        """Weights/bias with margin +4 score 1/(1+e^-4) = 0.98201379..."""
        post = make_post()
        f = ad_features(post)
        weights = np.zeros_like(f)
        weights[0] = 4.0 / f[0]  # w.f(post) = 4
        clf = AdClassifier(weights=weights, bias=0.0)
        expected = 1.0 / (1.0 + math.exp(-4.0))  # independent evaluation
        assert math.isclose(expected, 0.9820137900379085, rel_tol=1e-12)
        assert math.isclose(ad_score(post, clf), expected, rel_tol=1e-9)

    def test_monotone_in_positive_feature(self):
        """Increasing a positively-weighted feature never decreases the score."""
        clf = AdClassifier.default()
        # hashtag_load has positive weight; add hashtags
        scores = [
            ad_score(make_post(hashtags=tuple(f"t{i}" for i in range(n))), clf)
            for n in (0, 3, 6, 9, 12)
        ]
        assert all(b >= a for a, b in zip(scores, scores[1:]))

    def test_scores_in_open_interval(self):
        clf = AdClassifier.default()
        rng = np.random.default_rng(0)
        for i in range(20):
            post = make_post(
                post_id=f"p{i}",
                likes=int(rng.integers(0, 100000)),
                comments=int(rng.integers(0, 1000)),
                caption="x" * int(rng.integers(0, 600)),
                hashtags=tuple(f"t{j}" for j in range(int(rng.integers(0, 30)))),
            )
            assert 0.0 < ad_score(post, clf) < 1.0


def _toy_ad_dataset(n=60, separable=True, seed=0):
    """Ads: hashtag spam + long caption + weak likes. Margin is wide."""
    rng = np.random.default_rng(seed)
    out = []
    for i in range(n):
        is_ad = i % 2 == 0
        if is_ad:
            post = make_post(
                post_id=f"ad{i}",
                hashtags=tuple(f"s{j}" for j in range(14)),
                caption="buy now " * 40,
                likes=int(rng.integers(0, 10)),
            )
        else:
            post = make_post(
                post_id=f"ok{i}",
                hashtags=("prom",),
                caption="lovely evening",
                likes=int(rng.integers(200, 2000)),
            )
        out.append((post, is_ad))
    return out


class TestAdTraining:
    def test_separable_set_perfect_holdout(self):
        clf, report = train_ad_classifier(_toy_ad_dataset(), seed=3)
        assert report.held_out_accuracy == 1.0

    def test_single_class_rejected(self):
        data = [(p, True) for p, _ in _toy_ad_dataset(20)]
        with pytest.raises(ValueError, match="each class"):
            train_ad_classifier(data)

    def test_duplicated_dataset_same_weights(self):
        """Full-batch gradient descent: duplicating every example leaves the
        mean gradient, hence the trajectory, unchanged."""
        data = _toy_ad_dataset(40)
        clf1, _ = train_ad_classifier(data, holdout_fraction=0.0, seed=5)
        clf2, _ = train_ad_classifier(data + data, holdout_fraction=0.0, seed=5)
        assert np.allclose(clf1.weights, clf2.weights, atol=1e-12)
        assert math.isclose(clf1.bias, clf2.bias, abs_tol=1e-12)

    def test_deterministic(self):
        data = _toy_ad_dataset(40)
        clf1, r1 = train_ad_classifier(data, seed=5)
        clf2, r2 = train_ad_classifier(data, seed=5)
        assert np.array_equal(clf1.weights, clf2.weights)
        assert r1 == r2


# ---------------------------------------------------------------------------
# the cascade


def _oracle_outcome(post, thresholds, clf):
    """Independent linear re-statement of the three rules."""
    from fashionkb.filters import _pair_score

    scored = []
    for fi, (face, _) in enumerate(post.faces):
        for bi, (body, _) in enumerate(post.bodies):
            s = _pair_score(face, body)
            if s > 0:
                scored.append((s, fi, bi))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_f, used_b, pairs = set(), set(), []
    for s, fi, bi in scored:
        if fi in used_f or bi in used_b:
            continue
        used_f.add(fi)
        used_b.add(bi)
        pairs.append((post.faces[fi][0], post.bodies[bi][0]))
    if not pairs:
        return "no_face_body_pair"
    ok = [
        (f, b)
        for f, b in pairs
        if f.height / b.height < thresholds.max_face_body_ratio
        and b.height / post.image_height > thresholds.min_body_image_ratio
    ]
    if not ok:
        return "ratio_violation"
    if ad_score(post, clf) >= thresholds.ad_threshold:
        return "ad_like"
    return "keep"


class TestRunFilters:
    def test_no_faces_drops_with_reason(self):
        post = make_post(faces=())
        outcome = run_filters(post)
        assert outcome.decision == "drop"
        assert outcome.reason == "no_face_body_pair"
        assert outcome.pairs == ()

    def test_valid_post_kept_with_pair(self):
        post = make_post()
        outcome = run_filters(post)
        assert outcome.kept
        assert outcome.reason == "none"
        assert len(outcome.pairs) == 1
        assert outcome.ad_score < 0.5
        assert outcome.pairs[0].gender == "female"

    def test_ad_like_dropped_at_threshold(self):
        post = make_post()
        clf = AdClassifier(weights=np.zeros(6), bias=0.0)  # score exactly 0.5
        outcome = run_filters(post, FilterThresholds(ad_threshold=0.5), clf)
        assert outcome.reason == "ad_like"

    def test_mixed_corpus_equals_brute_force(self, tiny_vocab):
        """Kept set over a mixed synthetic corpus equals an independent
        linear-scan implementation of the three rules."""
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=300, seed=17,
            filter_violation_fraction=0.5, ad_fraction=0.2,
            d_img=4, d_reg=4,
        )
        labeled, _ = generate_synthetic(cfg)
        posts = [lp.post for lp in labeled]
        thresholds = FilterThresholds()
        clf = AdClassifier.default()
        kept, report = filter_corpus(posts, thresholds, clf)
        kept_ids = {p.post_id for p, _ in kept}
        expected_ids = {
            p.post_id for p in posts if _oracle_outcome(p, thresholds, clf) == "keep"
        }
        assert kept_ids == expected_ids
        assert report.read_count == len(posts)
        assert report.kept_count + sum(report.dropped.values()) == len(posts)
        # reason exclusivity + per-post agreement with the oracle
        for p in posts:
            outcome = run_filters(p, thresholds, clf)
            expected = _oracle_outcome(p, thresholds, clf)
            assert (outcome.reason if not outcome.kept else "keep") == expected
            if outcome.kept:
                assert outcome.pairs
                for pair in outcome.pairs:
                    assert ratio_check(pair, p.image_height, thresholds)

    def test_keep_set_monotone_in_thresholds(self, tiny_vocab):
        """Relaxing any threshold never shrinks the keep-set."""
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=150, seed=23, filter_violation_fraction=0.5,
            ad_fraction=0.2, d_img=4, d_reg=4,
        )
        labeled, _ = generate_synthetic(cfg)
        posts = [lp.post for lp in labeled]
        clf = AdClassifier.default()
        base = FilterThresholds(
            max_face_body_ratio=0.2, min_body_image_ratio=0.5, ad_threshold=0.4
        )
        kept_base = {p.post_id for p, _ in filter_corpus(posts, base, clf)[0]}
        for relaxed in (
            FilterThresholds(max_face_body_ratio=0.35, min_body_image_ratio=0.5, ad_threshold=0.4),
            FilterThresholds(max_face_body_ratio=0.2, min_body_image_ratio=0.3, ad_threshold=0.4),
            FilterThresholds(max_face_body_ratio=0.2, min_body_image_ratio=0.5, ad_threshold=0.9),
        ):
            kept_relaxed = {p.post_id for p, _ in filter_corpus(posts, relaxed, clf)[0]}
            assert kept_base <= kept_relaxed

    def test_order_independence(self, tiny_vocab):
        cfg = SyntheticConfig.default(
            tiny_vocab, n_posts=60, seed=29, filter_violation_fraction=0.4,
            d_img=4, d_reg=4,
        )
        labeled, _ = generate_synthetic(cfg)
        posts = [lp.post for lp in labeled]
        kept_a = {p.post_id for p, _ in filter_corpus(posts)[0]}
        kept_b = {p.post_id for p, _ in filter_corpus(list(reversed(posts)))[0]}
        assert kept_a == kept_b
