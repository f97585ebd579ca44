"""Synthetic corpus generation with planted correlations and label noise.

The generator plants a known joint distribution (occasion -> categories ->
attribute values), emits features as label prototypes plus Gaussian noise,
and optionally corrupts a fraction of labels through per-task transition
matrices. The planted record it returns is the ground truth against which
learned models and noise matrices are scored.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import BoundingBox, GarmentLabels, GarmentRegion, LabeledPost, Post
from .vocab import GENDERS, ConceptVocabulary

TASK_OCCASION = "occasion"
TASK_CATEGORY = "category"

IMAGE_WIDTH = 1080
IMAGE_HEIGHT = 1350
BASE_TIMESTAMP = 1546300800  # 2019-01-01T00:00:00Z

GENERIC_TAGS = ("ootd", "fashion", "style", "instafashion", "lookbook")
AD_TAGS = (
    "sale", "discount", "shopnow", "linkinbio", "promo", "deal", "sponsored",
    "buynow", "freeshipping", "outlet", "coupon", "flashsale", "megasale",
    "newarrivals", "shoponline", "bestprice",
)
LOCATIONS = ("singapore", "paris", "new_york", "tokyo", "milan", "london", "seoul", None)

VIOLATION_KINDS = ("no_pair", "face_ratio", "body_ratio")


class SyntheticConfigError(ValueError):
    pass


def _check_rows_normalized(name: str, table: np.ndarray) -> None:
    sums = table.sum(axis=-1)
    if np.any(table < 0) or np.any(np.abs(sums - 1.0) > 1e-9):
        raise SyntheticConfigError(f"probability table {name!r} rows must sum to 1 (+-1e-9)")


def task_names(vocab: ConceptVocabulary) -> list[str]:
    """Classification task order: occasion, category, then attribute types."""
    return [TASK_OCCASION, TASK_CATEGORY, *vocab.attribute_names]


def task_labels(vocab: ConceptVocabulary, task: str) -> tuple[str, ...]:
    if task == TASK_OCCASION:
        return vocab.occasions
    if task == TASK_CATEGORY:
        return vocab.categories
    return vocab.attribute(task).values


def pairflip_matrix(n: int, off_diagonal: float) -> np.ndarray:
    """Row-stochastic matrix keeping 1-off_diagonal mass on the diagonal and
    moving the rest to the next class (cyclic)."""
    t = np.eye(n) * (1.0 - off_diagonal)
    for i in range(n):
        t[i, (i + 1) % n] += off_diagonal
    return t


def identity_matrices(vocab: ConceptVocabulary) -> dict[str, np.ndarray]:
    return {t: np.eye(len(task_labels(vocab, t))) for t in task_names(vocab)}


def pairflip_matrices(vocab: ConceptVocabulary, off_diagonal: float) -> dict[str, np.ndarray]:
    return {
        t: pairflip_matrix(len(task_labels(vocab, t)), off_diagonal) for t in task_names(vocab)
    }


@dataclass
class SyntheticConfig:
    vocabulary: ConceptVocabulary
    n_posts: int
    seed: int
    occasion_marginals: np.ndarray
    garment_count_probs: np.ndarray  # index i -> probability of i+1 garments
    category_given_occasion: np.ndarray  # (n_occ, n_cat)
    value_given_category: dict[str, np.ndarray]  # attr -> (n_cat, n_values)
    transition_matrices: dict[str, np.ndarray]  # task -> (C, C), row-stochastic
    weak_fraction: float = 0.0
    feature_sigma: float = 0.55
    image_sigma: float = 0.9
    d_img: int = 64
    d_reg: int = 64
    category_scale: float = 1.0
    value_scale: float = 0.4
    image_scale: float = 0.5
    ad_fraction: float = 0.0
    filter_violation_fraction: float = 0.0
    unmapped_hashtag_fraction: float = 0.0
    post_seed: int | None = None  # prototype draw stays keyed by `seed`
    # orthonormal within-task prototypes (uniform class margins, no
    # accidentally confusable pairs); ties are applied afterwards
    orthogonal_prototypes: bool = False
    # Optional per-post category co-occurrence: for each occasion, a list of
    # (weight, category distribution) modes. One mode is drawn per post and
    # all its garments sample categories from that mode, which plants
    # correlations that per-garment marginals alone cannot express.
    occasion_category_modes: list[list[tuple[float, np.ndarray]]] | None = None
    # Optional exact category patterns: for each occasion, weighted base
    # multisets of category indices. A post repeats its base pattern to reach
    # the sampled garment count (which must be a multiple of the base length)
    # and shuffles the order. Takes precedence over modes and the marginal
    # table when present.
    occasion_category_patterns: list[list[tuple[float, tuple[int, ...]]]] | None = None
    # Optional prototype ties (a, b, c, d): after drawing category prototypes,
    # set proto[d] = proto[a] + proto[b] - proto[c], so the multisets {a, b}
    # and {c, d} have identical prototype sums.
    prototype_sum_ties: list[tuple[int, int, int, int]] | None = None

    def __post_init__(self):
        self.occasion_marginals = np.asarray(self.occasion_marginals, dtype=np.float64)
        self.garment_count_probs = np.asarray(self.garment_count_probs, dtype=np.float64)
        self.category_given_occasion = np.asarray(self.category_given_occasion, dtype=np.float64)
        self.value_given_category = {
            k: np.asarray(v, dtype=np.float64) for k, v in self.value_given_category.items()
        }
        self.transition_matrices = {
            k: np.asarray(v, dtype=np.float64) for k, v in self.transition_matrices.items()
        }
        if self.n_posts < 0:
            raise SyntheticConfigError("n_posts must be >= 0")
        vocab = self.vocabulary
        _check_rows_normalized("occasion_marginals", self.occasion_marginals[None, :])
        _check_rows_normalized("garment_count_probs", self.garment_count_probs[None, :])
        _check_rows_normalized("category_given_occasion", self.category_given_occasion)
        if self.category_given_occasion.shape != (len(vocab.occasions), len(vocab.categories)):
            raise SyntheticConfigError("category_given_occasion has wrong shape")
        for attr in vocab.attributes:
            table = self.value_given_category.get(attr.name)
            if table is None or table.shape != (len(vocab.categories), len(attr.values)):
                raise SyntheticConfigError(f"value table for {attr.name!r} missing or misshaped")
            _check_rows_normalized(f"value_given_category[{attr.name}]", table)
        for t in task_names(vocab):
            m = self.transition_matrices.get(t)
            c = len(task_labels(vocab, t))
            if m is None or m.shape != (c, c):
                raise SyntheticConfigError(f"transition matrix for {t!r} missing or misshaped")
            _check_rows_normalized(f"transition[{t}]", m)
        if not (0.0 <= self.weak_fraction <= 1.0):
            raise SyntheticConfigError("weak_fraction must lie in [0, 1]")
        if self.occasion_category_patterns is not None:
            if len(self.occasion_category_patterns) != len(vocab.occasions):
                raise SyntheticConfigError("occasion_category_patterns must cover every occasion")
            supported_counts = [i + 1 for i, p in enumerate(self.garment_count_probs) if p > 0]
            for o, patterns in enumerate(self.occasion_category_patterns):
                weights = np.array([w for w, _ in patterns], dtype=np.float64)
                _check_rows_normalized(f"pattern weights[{o}]", weights[None, :])
                for _, base in patterns:
                    if not base:
                        raise SyntheticConfigError("empty category pattern")
                    if any(c < 0 or c >= len(vocab.categories) for c in base):
                        raise SyntheticConfigError("pattern category index out of range")
                    for g in supported_counts:
                        if g % len(base) != 0:
                            raise SyntheticConfigError(
                                f"garment count {g} not a multiple of pattern length {len(base)}"
                            )
        if self.prototype_sum_ties is not None:
            for tie in self.prototype_sum_ties:
                if len(tie) != 4 or any(c < 0 or c >= len(vocab.categories) for c in tie):
                    raise SyntheticConfigError(f"bad prototype tie {tie!r}")
        if self.occasion_category_modes is not None:
            if len(self.occasion_category_modes) != len(vocab.occasions):
                raise SyntheticConfigError("occasion_category_modes must cover every occasion")
            normalized = []
            for o, modes in enumerate(self.occasion_category_modes):
                weights = np.array([w for w, _ in modes], dtype=np.float64)
                _check_rows_normalized(f"mode weights[{o}]", weights[None, :])
                dists = []
                for w, dist in modes:
                    dist = np.asarray(dist, dtype=np.float64)
                    if dist.shape != (len(vocab.categories),):
                        raise SyntheticConfigError(f"mode distribution for occasion {o} misshaped")
                    _check_rows_normalized(f"mode dist[{o}]", dist[None, :])
                    dists.append((float(w), dist))
                normalized.append(dists)
            self.occasion_category_modes = normalized

    @staticmethod
    def default(
        vocabulary: ConceptVocabulary,
        n_posts: int,
        seed: int,
        weak_fraction: float = 0.0,
        noise_off_diagonal: float = 0.3,
        **overrides,
    ) -> "SyntheticConfig":
        """Planted-correlation defaults.

        Each occasion prefers three cyclically adjacent categories (adjacent
        occasions share some of them, so single garments stay ambiguous while
        garment sets disambiguate), and each (category, attribute) pair has
        one dominant value.
        """
        n_occ = len(vocabulary.occasions)
        n_cat = len(vocabulary.categories)

        cat_table = np.full((n_occ, n_cat), 0.10 / max(n_cat - 3, 1))
        for o in range(n_occ):
            prefs = [(2 * o) % n_cat, (2 * o + 1) % n_cat, (2 * o + 2) % n_cat]
            for p, mass in zip(prefs, (0.35, 0.30, 0.25)):
                cat_table[o, p] += mass
        cat_table /= cat_table.sum(axis=1, keepdims=True)

        value_tables = {}
        for ai, attr in enumerate(vocabulary.attributes):
            n_val = len(attr.values)
            table = np.full((n_cat, n_val), 0.25 / max(n_val - 1, 1))
            for c in range(n_cat):
                # stride 1 is coprime with any value count, so every value is
                # dominant for roughly the same number of categories
                dominant = (c + ai) % n_val
                table[c, dominant] = 0.75
                row = table[c]
                table[c] = row / row.sum()
            value_tables[attr.name] = table

        cfg = dict(
            vocabulary=vocabulary,
            n_posts=n_posts,
            seed=seed,
            occasion_marginals=np.full(n_occ, 1.0 / n_occ),
            garment_count_probs=np.array([0.0, 0.45, 0.35, 0.20]),
            category_given_occasion=cat_table,
            value_given_category=value_tables,
            transition_matrices=pairflip_matrices(vocabulary, noise_off_diagonal),
            weak_fraction=weak_fraction,
        )
        cfg.update(overrides)
        return SyntheticConfig(**cfg)

    @staticmethod
    def cooccurrence(
        vocabulary: ConceptVocabulary,
        n_posts: int,
        seed: int,
        **overrides,
    ) -> "SyntheticConfig":
        """Planted co-occurrence structure: occasions come in pairs that share
        identical per-garment category marginals but differ in how categories
        co-occur within a post.

        Each occasion pair owns four categories (a, b, c, d) whose prototypes
        are tied so that proto(a) + proto(b) = proto(c) + proto(d). The even
        occasion dresses posts in the pattern {a, b} (repeated to the garment
        count, order shuffled); the odd occasion uses {c, d}. Value tables are
        shared across a pair's categories. Mean-pooled per-garment features
        are therefore identically distributed within a pair, so nothing read
        off a pooled raw-feature average can separate the two occasions, while
        any nonlinear per-garment encoding exposes the category multiset.
        """
        n_occ = len(vocabulary.occasions)
        n_cat = len(vocabulary.categories)
        if n_occ % 2 != 0:
            raise SyntheticConfigError("co-occurrence structure needs an even occasion count")
        n_pairs = n_occ // 2
        if n_cat < 4 * n_pairs:
            raise SyntheticConfigError("co-occurrence structure needs 4 categories per pair")

        base = SyntheticConfig.default(vocabulary, n_posts=n_posts, seed=seed)
        patterns: list[list[tuple[float, tuple[int, ...]]]] = []
        ties: list[tuple[int, int, int, int]] = []
        marginals = np.zeros((n_occ, n_cat))
        value_tables = {k: v.copy() for k, v in base.value_given_category.items()}
        for k in range(n_pairs):
            a, b, c, d = 4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3
            ties.append((a, b, c, d))
            patterns.append([(1.0, (a, b))])
            patterns.append([(1.0, (c, d))])
            marginals[2 * k, [a, b]] = 0.5
            marginals[2 * k + 1, [c, d]] = 0.5
            # a pair's categories share value tables so attribute-value
            # prototypes cannot leak the occasion through the pooled mean
            for table in value_tables.values():
                table[b] = table[a]
                table[c] = table[a]
                table[d] = table[a]

        cfg = dict(
            vocabulary=vocabulary,
            n_posts=n_posts,
            seed=seed,
            occasion_marginals=np.full(n_occ, 1.0 / n_occ),
            garment_count_probs=np.array([0.0, 0.6, 0.0, 0.4]),
            category_given_occasion=marginals,
            value_given_category=value_tables,
            transition_matrices=base.transition_matrices,
            occasion_category_patterns=patterns,
            prototype_sum_ties=ties,
            feature_sigma=0.3,
            value_scale=0.3,
            image_scale=0.1,
            image_sigma=1.0,
        )
        cfg.update(overrides)
        return SyntheticConfig(**cfg)


@dataclass
class PlantedTruth:
    """Everything the generator knew: planted tables, prototypes, transition
    matrices, and the clean (pre-corruption) labels of every post."""

    vocabulary: ConceptVocabulary
    occasion_marginals: np.ndarray
    category_given_occasion: np.ndarray
    value_given_category: dict[str, np.ndarray]
    transition_matrices: dict[str, np.ndarray]
    category_prototypes: np.ndarray
    value_prototypes: dict[str, np.ndarray]
    occasion_prototypes: np.ndarray
    posts: dict[str, dict]  # post_id -> clean labels / flags

    def to_json_dict(self) -> dict:
        return {
            "vocabulary": self.vocabulary.to_dict(),
            "occasion_marginals": self.occasion_marginals.tolist(),
            "category_given_occasion": self.category_given_occasion.tolist(),
            "value_given_category": {k: v.tolist() for k, v in self.value_given_category.items()},
            "transition_matrices": {k: v.tolist() for k, v in self.transition_matrices.items()},
            "category_prototypes": self.category_prototypes.tolist(),
            "value_prototypes": {k: v.tolist() for k, v in self.value_prototypes.items()},
            "occasion_prototypes": self.occasion_prototypes.tolist(),
            "posts": self.posts,
        }

    def save(self, path: str | Path) -> None:
        Path(path).write_text(json.dumps(self.to_json_dict(), sort_keys=True), encoding="utf-8")


def _sample(rng: np.random.Generator, probs: np.ndarray) -> int:
    return int(rng.choice(len(probs), p=probs))


def _make_geometry(rng: np.random.Generator, violation: str | None):
    """Face/body boxes either passing the filter rules or violating one of
    them, plus garment boxes tucked inside the body."""
    h, w = IMAGE_HEIGHT, IMAGE_WIDTH
    if violation == "body_ratio":
        body_h = rng.uniform(0.20, 0.48) * h
    else:
        body_h = rng.uniform(0.55, 0.92) * h
    if violation == "face_ratio":
        face_h = rng.uniform(0.24, 0.45) * body_h
    else:
        face_h = rng.uniform(0.06, 0.19) * body_h

    body_w = body_h * rng.uniform(0.30, 0.45)
    body_x = rng.uniform(0.05, 0.95) * (w - body_w)
    body_y = rng.uniform(0.0, 1.0) * (h - body_h)
    body = BoundingBox(x=body_x, y=body_y, width=body_w, height=body_h)

    face_w = face_h * rng.uniform(0.7, 0.9)
    if violation == "no_pair":
        # face center well below the head zone, so pairing scores zero
        face_cy = body_y + rng.uniform(0.55, 0.9) * body_h
    else:
        face_cy = body_y + rng.uniform(0.08, 0.32) * body_h
    face_cx = body_x + rng.uniform(0.3, 0.7) * body_w
    face = BoundingBox(
        x=min(max(face_cx - face_w / 2, 0.0), w - face_w),
        y=min(max(face_cy - face_h / 2, 0.0), h - face_h),
        width=face_w,
        height=face_h,
    )
    return face, body


def _garment_box(rng: np.random.Generator, body: BoundingBox, slot: int, total: int) -> BoundingBox:
    seg = body.height / total
    y = body.y + slot * seg
    x = body.x + rng.uniform(0.0, 0.2) * body.width
    return BoundingBox(
        x=x,
        y=y,
        width=min(body.width * rng.uniform(0.6, 0.95), IMAGE_WIDTH - x),
        height=seg * rng.uniform(0.7, 0.98),
    )


def generate_synthetic(config: SyntheticConfig) -> tuple[list[LabeledPost], PlantedTruth]:
    """Sample a labeled corpus from the planted generative process.

    Deterministic: the same config (including seed) yields a bit-identical
    corpus. Prototypes depend only on `seed`, so corpora generated with the
    same seed but different `post_seed` share a feature space.
    """
    vocab = config.vocabulary
    n_occ, n_cat = len(vocab.occasions), len(vocab.categories)

    proto_rng = np.random.default_rng(config.seed)

    def draw_protos(n_rows: int, dim: int) -> np.ndarray:
        if config.orthogonal_prototypes:
            gauss = proto_rng.normal(0.0, 1.0, (dim, n_rows))
            q, _ = np.linalg.qr(gauss)
            return q[:, :n_rows].T
        return proto_rng.normal(0.0, 1.0, (n_rows, dim)) / np.sqrt(dim)

    n_region_protos = n_cat + vocab.n_attribute_values
    if config.orthogonal_prototypes and config.d_reg >= n_region_protos:
        # one joint basis: categories and every attribute value mutually
        # orthogonal, so tasks do not interfere in feature space
        basis = draw_protos(n_region_protos, config.d_reg)
        cat_protos = basis[:n_cat].copy()
        val_protos = {}
        offset = n_cat
        for attr in vocab.attributes:
            val_protos[attr.name] = basis[offset : offset + len(attr.values)].copy()
            offset += len(attr.values)
    else:
        cat_protos = draw_protos(n_cat, config.d_reg)
        val_protos = {
            attr.name: draw_protos(len(attr.values), config.d_reg)
            for attr in vocab.attributes
        }
    if config.prototype_sum_ties:
        for a, b, c, d in config.prototype_sum_ties:
            cat_protos[d] = cat_protos[a] + cat_protos[b] - cat_protos[c]
    occ_protos = draw_protos(n_occ, config.d_img)

    post_seed = config.post_seed if config.post_seed is not None else config.seed + 1_000_003
    rng = np.random.default_rng(post_seed)

    reg_noise_scale = config.feature_sigma / np.sqrt(config.d_reg)
    img_noise_scale = config.image_sigma / np.sqrt(config.d_img)

    posts: list[LabeledPost] = []
    truth_posts: dict[str, dict] = {}
    for i in range(config.n_posts):
        post_id = f"p{i:06d}"
        occ_idx = _sample(rng, config.occasion_marginals)
        gender = GENDERS[int(rng.integers(0, len(GENDERS)))]
        n_garments = _sample(rng, config.garment_count_probs) + 1

        is_ad = bool(rng.random() < config.ad_fraction)
        violation: str | None = None
        if rng.random() < config.filter_violation_fraction:
            violation = VIOLATION_KINDS[int(rng.integers(0, len(VIOLATION_KINDS)))]
        unmapped = bool(rng.random() < config.unmapped_hashtag_fraction)
        is_weak = bool(rng.random() < config.weak_fraction)

        face, body = _make_geometry(rng, violation)

        fixed_categories: list[int] | None = None
        if config.occasion_category_patterns is not None:
            patterns = config.occasion_category_patterns[occ_idx]
            weights = np.array([w for w, _ in patterns])
            base = patterns[_sample(rng, weights)][1]
            fixed_categories = list(base) * (n_garments // len(base))
            rng.shuffle(fixed_categories)
            category_dist = None
        elif config.occasion_category_modes is not None:
            modes = config.occasion_category_modes[occ_idx]
            weights = np.array([w for w, _ in modes])
            category_dist = modes[_sample(rng, weights)][1]
        else:
            category_dist = config.category_given_occasion[occ_idx]

        garments = []
        clean_garments: dict[str, dict] = {}
        for gi in range(n_garments):
            if fixed_categories is not None:
                cat_idx = fixed_categories[gi]
            else:
                cat_idx = _sample(rng, category_dist)
            value_idx = {
                attr.name: _sample(rng, config.value_given_category[attr.name][cat_idx])
                for attr in vocab.attributes
            }
            feature = config.category_scale * cat_protos[cat_idx]
            for attr in vocab.attributes:
                feature = feature + config.value_scale * val_protos[attr.name][value_idx[attr.name]]
            feature = feature + rng.normal(0.0, reg_noise_scale, config.d_reg)
            region_id = f"r{gi}"
            garments.append(
                GarmentRegion(
                    region_id=region_id,
                    box=_garment_box(rng, body, gi, n_garments),
                    rough_category=vocab.categories[cat_idx],
                    feature=feature,
                )
            )
            clean_garments[region_id] = {
                "category": vocab.categories[cat_idx],
                "values": {
                    a.name: a.values[value_idx[a.name]] for a in vocab.attributes
                },
            }

        image_feature = config.image_scale * occ_protos[occ_idx] + rng.normal(
            0.0, img_noise_scale, config.d_img
        )

        occasion_name = vocab.occasions[occ_idx]
        if unmapped:
            hashtags = [GENERIC_TAGS[int(rng.integers(0, len(GENERIC_TAGS)))]]
        else:
            hashtags = [occasion_name, GENERIC_TAGS[int(rng.integers(0, len(GENERIC_TAGS)))]]
        if is_ad:
            n_spam = int(rng.integers(10, 16))
            spam = rng.choice(len(AD_TAGS), size=n_spam, replace=False)
            hashtags.extend(AD_TAGS[int(s)] for s in sorted(spam))
            caption = (
                "limited offer on our new collection, shop the look now, free shipping "
                "worldwide, use the code in bio for an extra discount on all items, "
                "stocks running out fast, tap the link to order today"
            )
            likes = int(rng.gamma(1.0, 8.0))
            comments = int(rng.gamma(1.0, 1.0))
        else:
            caption = f"getting ready for {occasion_name}, feeling great in this look"
            likes = int(rng.gamma(2.0, 60.0))
            comments = int(rng.gamma(1.5, 4.0))

        post = Post(
            post_id=post_id,
            image_width=IMAGE_WIDTH,
            image_height=IMAGE_HEIGHT,
            caption=caption,
            hashtags=tuple(hashtags),
            timestamp=BASE_TIMESTAMP + i * 3600 + int(rng.integers(0, 3600)),
            location=LOCATIONS[int(rng.integers(0, len(LOCATIONS)))],
            likes=likes,
            comments=comments,
            faces=((face, float(rng.uniform(0.85, 0.999))),),
            bodies=((body, float(rng.uniform(0.85, 0.999))),),
            garments=tuple(garments),
            gender_hint=gender,
            image_feature=image_feature,
        )

        occasion_label = occasion_name
        garment_labels = {
            rid: GarmentLabels(category=g["category"], values=dict(g["values"]))
            for rid, g in clean_garments.items()
        }
        if is_weak:
            occ_t = config.transition_matrices[TASK_OCCASION]
            occasion_label = vocab.occasions[_sample(rng, occ_t[occ_idx])]
            cat_t = config.transition_matrices[TASK_CATEGORY]
            noisy_labels = {}
            for rid, g in clean_garments.items():
                cat_idx_clean = vocab.category_index(g["category"])
                noisy_cat = vocab.categories[_sample(rng, cat_t[cat_idx_clean])]
                noisy_values = {}
                for attr in vocab.attributes:
                    t = config.transition_matrices[attr.name]
                    clean_vi = attr.values.index(g["values"][attr.name])
                    noisy_values[attr.name] = attr.values[_sample(rng, t[clean_vi])]
                noisy_labels[rid] = GarmentLabels(category=noisy_cat, values=noisy_values)
            garment_labels = noisy_labels

        posts.append(
            LabeledPost(
                post=post,
                occasion_label=occasion_label,
                garment_labels=garment_labels,
                label_source="weak" if is_weak else "clean",
            )
        )
        truth_posts[post_id] = {
            "occasion": occasion_name,
            "gender": gender,
            "is_ad": is_ad,
            "violation": violation,
            "unmapped": unmapped,
            "garments": clean_garments,
        }

    truth = PlantedTruth(
        vocabulary=vocab,
        occasion_marginals=config.occasion_marginals.copy(),
        category_given_occasion=config.category_given_occasion.copy(),
        value_given_category={k: v.copy() for k, v in config.value_given_category.items()},
        transition_matrices={k: v.copy() for k, v in config.transition_matrices.items()},
        category_prototypes=cat_protos,
        value_prototypes=val_protos,
        occasion_prototypes=occ_protos,
        posts=truth_posts,
    )
    return posts, truth
