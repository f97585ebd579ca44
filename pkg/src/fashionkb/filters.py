"""Second pipeline layer: drop posts unsuitable for fashion extraction.

Three stages, in order: face-body pairing, height-ratio checks, and a
logistic ad/poster classifier over metadata and geometry features. The
ratio thresholds use strict inequalities: face/body < 0.2 and
body/image > 0.5.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Sequence

import numpy as np

from .corpus import BoundingBox, Post

# Fraction of the body box height (from its top) where a face center must sit
# for a face-body pair to score at all.
HEAD_ZONE_FRACTION = 0.4

REASON_NONE = "none"
REASON_NO_PAIR = "no_face_body_pair"
REASON_RATIO = "ratio_violation"
REASON_AD = "ad_like"
DROP_REASONS = (REASON_NO_PAIR, REASON_RATIO, REASON_AD)


class FilterConfigError(ValueError):
    pass


@dataclass(frozen=True)
class FilterThresholds:
    max_face_body_ratio: float = 0.2
    min_body_image_ratio: float = 0.5
    ad_threshold: float = 0.5

    def __post_init__(self):
        if not (0.0 < self.max_face_body_ratio < 1.0):
            raise FilterConfigError("max_face_body_ratio must lie in (0, 1)")
        if not (0.0 < self.min_body_image_ratio < 1.0):
            raise FilterConfigError("min_body_image_ratio must lie in (0, 1)")
        if not (0.0 <= self.ad_threshold <= 1.0):
            raise FilterConfigError("ad_threshold must lie in [0, 1]")


@dataclass(frozen=True)
class PersonPair:
    face: BoundingBox
    body: BoundingBox
    pair_score: float
    gender: str | None = None


@dataclass(frozen=True)
class FilterOutcome:
    decision: str  # "keep" | "drop"
    reason: str
    pairs: tuple[PersonPair, ...]
    ad_score: float

    @property
    def kept(self) -> bool:
        return self.decision == "keep"


def _pair_score(face: BoundingBox, body: BoundingBox) -> float:
    """Fraction of face area inside the body box; 0 unless the face center
    lies inside the vertical top 40% of the body box."""
    if face.height > body.height:
        return 0.0
    cx, cy = face.center
    if not (body.x <= cx <= body.x2):
        return 0.0
    if not (body.y <= cy <= body.y + HEAD_ZONE_FRACTION * body.height):
        return 0.0
    return face.intersection_area(body) / face.area


def pair_faces_bodies(
    faces: Sequence[tuple[BoundingBox, float]],
    bodies: Sequence[tuple[BoundingBox, float]],
) -> list[PersonPair]:
    """Greedy one-to-one face-body matching by descending pair score.

    Ties break on (face index, body index) so the result is deterministic.
    Zero-score candidates are never emitted.
    """
    scored = []
    for fi, (face, _) in enumerate(faces):
        for bi, (body, _) in enumerate(bodies):
            s = _pair_score(face, body)
            if s > 0.0:
                scored.append((s, fi, bi))
    scored.sort(key=lambda t: (-t[0], t[1], t[2]))
    used_faces: set[int] = set()
    used_bodies: set[int] = set()
    pairs: list[PersonPair] = []
    for s, fi, bi in scored:
        if fi in used_faces or bi in used_bodies:
            continue
        used_faces.add(fi)
        used_bodies.add(bi)
        pairs.append(PersonPair(face=faces[fi][0], body=bodies[bi][0], pair_score=s))
    return pairs


def ratio_check(pair: PersonPair, image_height: float, t: FilterThresholds) -> bool:
    """True iff face/body < max_face_body_ratio AND body/image > min_body_image_ratio.

    Both inequalities are strict; equality at either threshold fails.
    """
    if image_height <= 0:
        raise ValueError("image_height must be > 0")
    return (
        pair.face.height / pair.body.height < t.max_face_body_ratio
        and pair.body.height / image_height > t.min_body_image_ratio
    )


# ---------------------------------------------------------------------------
# ad / poster classifier

AD_FEATURE_NAMES = (
    "caption_density",
    "hashtag_load",
    "log_likes",
    "face_area_fraction",
    "body_coverage",
    "garment_load",
)


def ad_features(post: Post) -> np.ndarray:
    """Hand-specified metadata/geometry features, each roughly in [0, 1]."""
    image_area = float(post.image_width * post.image_height)
    face_area = sum(b.area for b, _ in post.faces)
    body_cover = max((b.height for b, _ in post.bodies), default=0.0) / post.image_height
    return np.array(
        [
            min(len(post.caption) / 300.0, 1.0),
            min(len(post.hashtags) / 15.0, 1.0),
            min(math.log10(1.0 + post.likes) / 5.0, 1.0),
            min(face_area / image_area, 1.0),
            min(body_cover, 1.0),
            min(len(post.garments) / 5.0, 1.0),
        ],
        dtype=np.float64,
    )


def _logistic(z: float) -> float:
    if z >= 0:
        return 1.0 / (1.0 + math.exp(-z))
    e = math.exp(z)
    return e / (1.0 + e)


@dataclass(frozen=True)
class AdClassifier:
    """Logistic scorer over hand-specified post features.

    The feature hook is pluggable so deployments with richer signals can
    swap their own extractor without touching the cascade.
    """

    weights: np.ndarray
    bias: float
    feature_fn: Callable[[Post], np.ndarray] = ad_features

    def __post_init__(self):
        object.__setattr__(self, "weights", np.asarray(self.weights, dtype=np.float64))

    @staticmethod
    def default() -> "AdClassifier":
        # Hand-tuned against the synthetic ad signature: hashtag spam, long
        # boilerplate captions, weak engagement.
        return AdClassifier(
            weights=np.array([2.0, 4.0, -3.0, -0.5, 0.0, 0.0]),
            bias=-1.8,
        )


def ad_score(post: Post, clf: AdClassifier) -> float:
    """Probability in (0, 1) that the post is an ad/poster/news image."""
    f = clf.feature_fn(post)
    if f.shape != clf.weights.shape:
        raise ValueError(f"feature dim {f.shape} != weight dim {clf.weights.shape}")
    return _logistic(float(clf.weights @ f) + clf.bias)


@dataclass(frozen=True)
class AdTrainReport:
    n_train: int
    n_held_out: int
    held_out_accuracy: float
    final_loss: float


def train_ad_classifier(
    labeled: Sequence[tuple[Post, bool]],
    epochs: int = 400,
    learning_rate: float = 0.5,
    holdout_fraction: float = 0.25,
    seed: int = 0,
    feature_fn: Callable[[Post], np.ndarray] = ad_features,
) -> tuple[AdClassifier, AdTrainReport]:
    """Full-batch gradient descent on the logistic loss.

    Deterministic given the seed (it only drives the held-out split).
    Raises ValueError when only one class is present.
    """
    ys = np.array([1.0 if is_ad else 0.0 for _, is_ad in labeled])
    if len(set(ys.tolist())) < 2:
        raise ValueError("need at least one example of each class")
    feats = np.stack([feature_fn(p) for p, _ in labeled])

    rng = np.random.default_rng(seed)
    order = rng.permutation(len(labeled))
    n_hold = int(round(holdout_fraction * len(labeled)))
    hold_idx, train_idx = order[:n_hold], order[n_hold:]
    if len(train_idx) == 0 or len(set(ys[train_idx].tolist())) < 2:
        raise ValueError("train split lost a class; lower holdout_fraction")

    x_tr, y_tr = feats[train_idx], ys[train_idx]
    w = np.zeros(feats.shape[1])
    b = 0.0
    loss = math.inf
    for _ in range(epochs):
        z = x_tr @ w + b
        p = 1.0 / (1.0 + np.exp(-z))
        err = p - y_tr
        w -= learning_rate * (x_tr.T @ err) / len(y_tr)
        b -= learning_rate * float(err.mean())
        loss = float(np.mean(-y_tr * np.log(p + 1e-12) - (1 - y_tr) * np.log(1 - p + 1e-12)))

    clf = AdClassifier(weights=w, bias=b, feature_fn=feature_fn)
    if n_hold:
        scores = 1.0 / (1.0 + np.exp(-(feats[hold_idx] @ w + b)))
        acc = float(np.mean((scores >= 0.5) == (ys[hold_idx] == 1.0)))
    else:
        acc = float("nan")
    return clf, AdTrainReport(
        n_train=len(train_idx), n_held_out=n_hold, held_out_accuracy=acc, final_loss=loss
    )


# ---------------------------------------------------------------------------
# the cascade

GenderPredictor = Callable[[Post, PersonPair], "str | None"]


def hint_gender_predictor(post: Post, pair: PersonPair) -> str | None:
    """Default gender hook: trust the per-post hint supplied upstream."""
    return post.gender_hint


def run_filters(
    post: Post,
    thresholds: FilterThresholds | None = None,
    clf: AdClassifier | None = None,
    gender_predictor: GenderPredictor = hint_gender_predictor,
) -> FilterOutcome:
    """Apply pairing, ratio and ad stages in order; first failing stage wins.

    Kept outcomes carry every pair that passed the ratio check, annotated
    with the gender predictor's output. ad_score is only computed for posts
    that reach the ad stage (earlier drops record 0.0).
    """
    thresholds = thresholds or FilterThresholds()
    clf = clf or AdClassifier.default()

    pairs = pair_faces_bodies(post.faces, post.bodies)
    if not pairs:
        return FilterOutcome(decision="drop", reason=REASON_NO_PAIR, pairs=(), ad_score=0.0)

    surviving = [p for p in pairs if ratio_check(p, post.image_height, thresholds)]
    if not surviving:
        return FilterOutcome(decision="drop", reason=REASON_RATIO, pairs=(), ad_score=0.0)

    score = ad_score(post, clf)
    if score >= thresholds.ad_threshold:
        return FilterOutcome(decision="drop", reason=REASON_AD, pairs=(), ad_score=score)

    annotated = tuple(replace(p, gender=gender_predictor(post, p)) for p in surviving)
    return FilterOutcome(decision="keep", reason=REASON_NONE, pairs=annotated, ad_score=score)


@dataclass
class FilterReport:
    read_count: int = 0
    kept_count: int = 0
    dropped: dict[str, int] = field(default_factory=lambda: {r: 0 for r in DROP_REASONS})

    def to_dict(self) -> dict:
        return {
            "read_count": self.read_count,
            "kept_count": self.kept_count,
            "dropped": dict(self.dropped),
        }


def filter_corpus(
    posts: Iterable[Post],
    thresholds: FilterThresholds | None = None,
    clf: AdClassifier | None = None,
    gender_predictor: GenderPredictor = hint_gender_predictor,
) -> tuple[list[tuple[Post, FilterOutcome]], FilterReport]:
    """Run the cascade over a corpus; returns kept (post, outcome) pairs."""
    report = FilterReport()
    kept: list[tuple[Post, FilterOutcome]] = []
    for post in posts:
        report.read_count += 1
        outcome = run_filters(post, thresholds, clf, gender_predictor)
        if outcome.kept:
            report.kept_count += 1
            kept.append((post, outcome))
        else:
            report.dropped[outcome.reason] += 1
    return kept, report
