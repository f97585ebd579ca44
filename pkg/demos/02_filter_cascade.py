#!/usr/bin/env python3
"""The three-stage filter cascade: face-body pairing, height ratios, and the
logistic ad scorer.

The ratio rules are strict inequalities: face/body < 0.2 and
body/image > 0.5. Posts sitting exactly on a threshold are dropped.
"""

from fashionkb import (
    AdClassifier,
    FilterThresholds,
    SyntheticConfig,
    ad_score,
    generate_synthetic,
    pair_faces_bodies,
    ratio_check,
    reference_vocabulary,
    run_filters,
)
from fashionkb.corpus import BoundingBox
from fashionkb.filters import PersonPair, filter_corpus

thresholds = FilterThresholds()
print(f"thresholds: face/body < {thresholds.max_face_body_ratio}, "
      f"body/image > {thresholds.min_body_image_ratio}, "
      f"ad >= {thresholds.ad_threshold} drops")

print("\n--- pairing ---")
body = BoundingBox(x=300, y=100, width=340, height=900)
face_ok = BoundingBox(x=420, y=150, width=100, height=120)   # in the head zone
face_low = BoundingBox(x=420, y=700, width=100, height=120)  # too far down
pairs = pair_faces_bodies([(face_ok, 0.99), (face_low, 0.97)], [(body, 0.95)])
print(f"2 faces, 1 body -> {len(pairs)} pair, score {pairs[0].pair_score:.2f} "
      "(the low face never pairs: its center is below the head zone)")

print("\n--- ratio boundaries (strict) ---")
for face_h, body_h, image_h in ((30, 200, 300), (40, 200, 300), (20, 150, 300)):
    pair = PersonPair(
        face=BoundingBox(0, 0, face_h, face_h),
        body=BoundingBox(0, 0, 80, body_h),
        pair_score=1.0,
    )
    verdict = ratio_check(pair, image_h, thresholds)
    print(f"face {face_h}, body {body_h}, image {image_h}: "
          f"face/body={face_h/body_h:.3f}, body/image={body_h/image_h:.3f} -> {verdict}")

print("\n--- full cascade on a mixed corpus ---")
vocab = reference_vocabulary()
config = SyntheticConfig.default(
    vocab, n_posts=600, seed=3, filter_violation_fraction=0.4, ad_fraction=0.15,
)
labeled, truth = generate_synthetic(config)
posts = [lp.post for lp in labeled]
kept, report = filter_corpus(posts, thresholds, AdClassifier.default())
print(f"read {report.read_count}, kept {report.kept_count}, dropped {report.dropped}")

ads = [p for p in posts if truth.posts[p.post_id]["is_ad"]]
scores = [ad_score(p, AdClassifier.default()) for p in ads]
print(f"ad posts in corpus: {len(ads)}, mean ad score {sum(scores)/len(scores):.2f}")

outcome = run_filters(posts[0], thresholds)
print(f"\nfirst post: decision={outcome.decision}, reason={outcome.reason}, "
      f"pairs={len(outcome.pairs)}, ad_score={outcome.ad_score:.2f}")
