"""Fashion knowledge base: triplet instances, aggregate counts, and inverted
indexes over concepts and post metadata.

One triplet per garment region. The aggregation identity is (occasion,
gender, category); attribute values stay on instances and surface as search
facets. Persistence is a single versioned snapshot with a checksum.
"""

from __future__ import annotations

import bisect
import hashlib
import json
from dataclasses import dataclass
from pathlib import Path

from .corpus import Post
from .filters import PersonPair
from .model.network import ConceptPrediction, DecodedPost
from .vocab import GENDER_UNKNOWN, GENDERS, ConceptVocabulary

KB_FORMAT = "fashionkb-snapshot"
KB_VERSION = 1

Provenance = tuple[str, str]  # (post_id, region_id)


class KbError(ValueError):
    pass


class KbIntegrityError(KbError):
    """Snapshot corruption or version mismatch."""


@dataclass(frozen=True, order=True)
class TripletKey:
    occasion: str
    gender: str
    category: str

    def as_tuple(self) -> tuple[str, str, str]:
        return (self.occasion, self.gender, self.category)


@dataclass(frozen=True)
class FashionTriplet:
    occasion: str
    gender: str
    category: str
    attribute_values: dict[str, str]
    provenance: Provenance

    @property
    def key(self) -> TripletKey:
        return TripletKey(self.occasion, self.gender, self.category)


@dataclass(frozen=True)
class PostMeta:
    """The metadata slice of a post that the kb indexes for search."""

    post_id: str
    hashtags: tuple[str, ...]
    timestamp: int
    location: str | None
    likes: int
    comments: int
    caption: str = ""
    image_width: int = 0
    image_height: int = 0

    @staticmethod
    def from_post(post: Post) -> "PostMeta":
        return PostMeta(
            post_id=post.post_id,
            hashtags=post.hashtags,
            timestamp=post.timestamp,
            location=post.location,
            likes=post.likes,
            comments=post.comments,
            caption=post.caption,
            image_width=post.image_width,
            image_height=post.image_height,
        )


def majority_gender(pairs) -> str:
    """Majority gender across person pairs; unknown on tie or absence."""
    votes = {g: 0 for g in GENDERS}
    for pair in pairs:
        if pair.gender in votes:
            votes[pair.gender] += 1
    best = max(votes.values())
    if best == 0:
        return GENDER_UNKNOWN
    winners = [g for g, v in votes.items() if v == best]
    return winners[0] if len(winners) == 1 else GENDER_UNKNOWN


def build_triplets(
    post: Post,
    prediction: ConceptPrediction | DecodedPost,
    pairs: tuple[PersonPair, ...] | list[PersonPair],
    vocab: ConceptVocabulary,
) -> list[FashionTriplet]:
    """One triplet per garment region; occasion and gender are shared."""
    from .model.network import decode

    decoded = prediction if isinstance(prediction, DecodedPost) else decode(prediction, vocab)
    gender = majority_gender(pairs)
    triplets = []
    for garment in decoded.garments:
        triplets.append(
            FashionTriplet(
                occasion=decoded.occasion,
                gender=gender,
                category=garment.category,
                attribute_values=dict(garment.values),
                provenance=(post.post_id, garment.region_id),
            )
        )
    return triplets


class KnowledgeBase:
    def __init__(self, vocab: ConceptVocabulary):
        self.vocab = vocab
        self.instances: list[FashionTriplet] = []
        self.counts: dict[TripletKey, int] = {}
        self.post_meta: dict[str, PostMeta] = {}
        self._provenance_seen: set[Provenance] = set()
        # value -> sorted posting list of provenances
        self.occasion_index: dict[str, list[Provenance]] = {}
        self.gender_index: dict[str, list[Provenance]] = {}
        self.category_index: dict[str, list[Provenance]] = {}
        self.attribute_index: dict[tuple[str, str], list[Provenance]] = {}
        self.hashtag_index: dict[str, list[Provenance]] = {}
        self.location_index: dict[str, list[Provenance]] = {}
        # ordered metadata maps: sorted (value, post_id) pairs for range scans
        self.timestamp_order: list[tuple[int, str]] = []
        self.likes_order: list[tuple[int, str]] = []
        self.comments_order: list[tuple[int, str]] = []

    def __len__(self) -> int:
        return len(self.instances)

    def _validate(self, triplet: FashionTriplet) -> None:
        vocab = self.vocab
        if triplet.occasion not in vocab.occasions:
            raise KbError(f"unknown occasion {triplet.occasion!r}")
        if triplet.gender not in (*GENDERS, GENDER_UNKNOWN):
            raise KbError(f"unknown gender {triplet.gender!r}")
        if triplet.category not in vocab.categories:
            raise KbError(f"unknown category {triplet.category!r}")
        for attr in vocab.attributes:
            value = triplet.attribute_values.get(attr.name)
            if value is not None and value not in attr.values:
                raise KbError(f"unknown value {value!r} for attribute {attr.name!r}")
        if triplet.provenance in self._provenance_seen:
            raise KbError(f"duplicate provenance {triplet.provenance!r}")

    @staticmethod
    def _posting_insert(index: dict, key, provenance: Provenance) -> None:
        postings = index.setdefault(key, [])
        bisect.insort(postings, provenance)

    def insert(self, triplets: list[FashionTriplet], post: Post | PostMeta | None = None) -> None:
        """Insert triplet instances (and the backing post's metadata).

        Atomic: validation runs over the whole argument before any mutation,
        so a rejected call leaves the kb unchanged.
        """
        fresh: set[Provenance] = set()
        for t in triplets:
            self._validate(t)
            if t.provenance in fresh:
                raise KbError(f"duplicate provenance {t.provenance!r} within insert")
            fresh.add(t.provenance)

        meta: PostMeta | None = None
        if post is not None:
            meta = post if isinstance(post, PostMeta) else PostMeta.from_post(post)
            if meta.post_id not in self.post_meta:
                self.post_meta[meta.post_id] = meta
                bisect.insort(self.timestamp_order, (meta.timestamp, meta.post_id))
                bisect.insort(self.likes_order, (meta.likes, meta.post_id))
                bisect.insort(self.comments_order, (meta.comments, meta.post_id))

        for t in triplets:
            self.instances.append(t)
            self._provenance_seen.add(t.provenance)
            self.counts[t.key] = self.counts.get(t.key, 0) + 1
            self._posting_insert(self.occasion_index, t.occasion, t.provenance)
            self._posting_insert(self.gender_index, t.gender, t.provenance)
            self._posting_insert(self.category_index, t.category, t.provenance)
            for attr_name, value in t.attribute_values.items():
                self._posting_insert(self.attribute_index, (attr_name, value), t.provenance)
            if meta is not None:
                for tag in meta.hashtags:
                    self._posting_insert(self.hashtag_index, tag.lstrip("#").lower(), t.provenance)
                if meta.location:
                    self._posting_insert(self.location_index, meta.location, t.provenance)

    # -- persistence ----------------------------------------------------------

    def _payload(self) -> dict:
        return {
            "vocabulary": self.vocab.to_dict(),
            "instances": [
                {
                    "occasion": t.occasion,
                    "gender": t.gender,
                    "category": t.category,
                    "attribute_values": dict(sorted(t.attribute_values.items())),
                    "post_id": t.provenance[0],
                    "region_id": t.provenance[1],
                }
                for t in sorted(self.instances, key=lambda t: t.provenance)
            ],
            "counts": [
                {"key": k.as_tuple(), "count": v} for k, v in sorted(self.counts.items())
            ],
            "posts": [
                {
                    "post_id": m.post_id,
                    "hashtags": list(m.hashtags),
                    "timestamp": m.timestamp,
                    "location": m.location,
                    "likes": m.likes,
                    "comments": m.comments,
                    "caption": m.caption,
                    "image_width": m.image_width,
                    "image_height": m.image_height,
                }
                for _, m in sorted(self.post_meta.items())
            ],
        }

    def save(self, path: str | Path) -> None:
        body = json.dumps(self._payload(), sort_keys=True, ensure_ascii=False)
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        header = json.dumps(
            {"format": KB_FORMAT, "version": KB_VERSION, "sha256": digest}, sort_keys=True
        )
        Path(path).write_text(header + "\n" + body + "\n", encoding="utf-8")

    @staticmethod
    def load(path: str | Path) -> "KnowledgeBase":
        from .vocab import vocabulary_from_dict

        text = Path(path).read_text(encoding="utf-8")
        newline = text.find("\n")
        if newline < 0:
            raise KbIntegrityError(f"{path}: truncated snapshot (no header line)")
        try:
            header = json.loads(text[:newline])
        except json.JSONDecodeError as exc:
            raise KbIntegrityError(f"{path}: unreadable header: {exc}") from exc
        if header.get("format") != KB_FORMAT:
            raise KbIntegrityError(f"{path}: not a knowledge base snapshot")
        if header.get("version") != KB_VERSION:
            raise KbIntegrityError(
                f"{path}: snapshot version {header.get('version')} unsupported"
            )
        body = text[newline + 1 :].rstrip("\n")
        digest = hashlib.sha256(body.encode("utf-8")).hexdigest()
        if digest != header.get("sha256"):
            raise KbIntegrityError(f"{path}: checksum mismatch, snapshot corrupted")
        payload = json.loads(body)

        kb = KnowledgeBase(vocabulary_from_dict(payload["vocabulary"]))
        for m in payload.get("posts", []):
            meta = PostMeta(
                post_id=m["post_id"],
                hashtags=tuple(m["hashtags"]),
                timestamp=m["timestamp"],
                location=m.get("location"),
                likes=m["likes"],
                comments=m["comments"],
                caption=m.get("caption", ""),
                image_width=m.get("image_width", 0),
                image_height=m.get("image_height", 0),
            )
            kb.post_meta[meta.post_id] = meta
            bisect.insort(kb.timestamp_order, (meta.timestamp, meta.post_id))
            bisect.insort(kb.likes_order, (meta.likes, meta.post_id))
            bisect.insort(kb.comments_order, (meta.comments, meta.post_id))
        by_post: dict[str, list[FashionTriplet]] = {}
        for rec in payload["instances"]:
            t = FashionTriplet(
                occasion=rec["occasion"],
                gender=rec["gender"],
                category=rec["category"],
                attribute_values=dict(rec["attribute_values"]),
                provenance=(rec["post_id"], rec["region_id"]),
            )
            by_post.setdefault(rec["post_id"], []).append(t)
        for post_id in sorted(by_post):
            kb.insert(by_post[post_id], kb.post_meta.get(post_id))
        saved_counts = {
            TripletKey(*rec["key"]): rec["count"] for rec in payload.get("counts", [])
        }
        if saved_counts != kb.counts:
            raise KbIntegrityError(f"{path}: stored counts disagree with instances")
        return kb


def kb_insert(kb: KnowledgeBase, triplets: list[FashionTriplet], post=None) -> KnowledgeBase:
    kb.insert(triplets, post)
    return kb


def kb_save(kb: KnowledgeBase, path: str | Path) -> None:
    kb.save(path)


def kb_load(path: str | Path) -> KnowledgeBase:
    return KnowledgeBase.load(path)
