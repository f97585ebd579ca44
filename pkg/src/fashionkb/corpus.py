"""Post and corpus data model plus line-delimited (JSONL) corpus I/O.

One post per line, UTF-8. Feature vectors are serialized as plain decimal
numbers; Python's float repr is shortest-round-trip, so write followed by
read is bit-exact on 64-bit floats.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator

import numpy as np

from .vocab import GENDERS, ConceptVocabulary


class CorpusError(ValueError):
    """Raised for malformed corpus records or cross-post inconsistencies."""


@dataclass(frozen=True)
class BoundingBox:
    """Pixel box, top-left origin."""

    x: float
    y: float
    width: float
    height: float

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise CorpusError(f"degenerate box {self!r}: width/height must be > 0")

    @property
    def x2(self) -> float:
        return self.x + self.width

    @property
    def y2(self) -> float:
        return self.y + self.height

    @property
    def area(self) -> float:
        return self.width * self.height

    @property
    def center(self) -> tuple[float, float]:
        return (self.x + self.width / 2.0, self.y + self.height / 2.0)

    def intersection_area(self, other: "BoundingBox") -> float:
        w = min(self.x2, other.x2) - max(self.x, other.x)
        h = min(self.y2, other.y2) - max(self.y, other.y)
        return w * h if w > 0 and h > 0 else 0.0

    def to_dict(self) -> dict:
        return {"x": self.x, "y": self.y, "w": self.width, "h": self.height}

    @staticmethod
    def from_dict(d: dict) -> "BoundingBox":
        return BoundingBox(x=d["x"], y=d["y"], width=d["w"], height=d["h"])


@dataclass(frozen=True)
class GarmentRegion:
    region_id: str
    box: BoundingBox
    feature: np.ndarray
    rough_category: str | None = None

    def __post_init__(self):
        object.__setattr__(self, "feature", np.asarray(self.feature, dtype=np.float64))


@dataclass(frozen=True)
class Post:
    post_id: str
    image_width: int
    image_height: int
    caption: str
    hashtags: tuple[str, ...]
    timestamp: int
    likes: int
    comments: int
    faces: tuple[tuple[BoundingBox, float], ...]
    bodies: tuple[tuple[BoundingBox, float], ...]
    garments: tuple[GarmentRegion, ...]
    image_feature: np.ndarray
    location: str | None = None
    gender_hint: str | None = None

    def __post_init__(self):
        if not self.post_id:
            raise CorpusError("post_id must be non-empty")
        if self.likes < 0 or self.comments < 0:
            raise CorpusError(f"post {self.post_id}: negative engagement counts")
        if self.gender_hint is not None and self.gender_hint not in GENDERS:
            raise CorpusError(f"post {self.post_id}: bad gender_hint {self.gender_hint!r}")
        ids = [g.region_id for g in self.garments]
        if len(set(ids)) != len(ids):
            raise CorpusError(f"post {self.post_id}: duplicate region_id")
        boxes = [b for b, _ in self.faces] + [b for b, _ in self.bodies]
        boxes += [g.box for g in self.garments]
        for box in boxes:
            if box.x < 0 or box.y < 0 or box.x2 > self.image_width or box.y2 > self.image_height:
                raise CorpusError(f"post {self.post_id}: box {box} outside image bounds")
        object.__setattr__(self, "image_feature", np.asarray(self.image_feature, dtype=np.float64))


@dataclass(frozen=True)
class GarmentLabels:
    category: str
    values: dict[str, str]  # attribute type -> value


@dataclass(frozen=True)
class LabeledPost:
    post: Post
    occasion_label: str
    garment_labels: dict[str, GarmentLabels]  # region_id -> labels
    label_source: str  # "clean" | "weak"

    def __post_init__(self):
        if self.label_source not in ("clean", "weak"):
            raise CorpusError(f"label_source must be clean|weak, got {self.label_source!r}")
        missing = {g.region_id for g in self.post.garments} - set(self.garment_labels)
        if missing:
            raise CorpusError(f"post {self.post.post_id}: unlabeled regions {sorted(missing)}")


def validate_labels(item: LabeledPost, vocab: ConceptVocabulary) -> None:
    """Check that every label is a vocabulary member."""
    if item.occasion_label not in vocab.occasions:
        raise CorpusError(f"unknown occasion label {item.occasion_label!r}")
    for rid, labels in item.garment_labels.items():
        if labels.category not in vocab.categories:
            raise CorpusError(f"region {rid}: unknown category {labels.category!r}")
        for attr in vocab.attributes:
            value = labels.values.get(attr.name)
            if value not in attr.values:
                raise CorpusError(f"region {rid}: bad value {value!r} for {attr.name}")


# ---------------------------------------------------------------------------
# serialization


def _boxes_to_json(pairs) -> list:
    return [{"box": b.to_dict(), "confidence": c} for b, c in pairs]


def _boxes_from_json(raw) -> tuple:
    return tuple((BoundingBox.from_dict(d["box"]), float(d["confidence"])) for d in raw)


def post_to_record(item: Post | LabeledPost) -> dict:
    post = item.post if isinstance(item, LabeledPost) else item
    record = {
        "post_id": post.post_id,
        "image_width": post.image_width,
        "image_height": post.image_height,
        "caption": post.caption,
        "hashtags": list(post.hashtags),
        "timestamp": post.timestamp,
        "location": post.location,
        "likes": post.likes,
        "comments": post.comments,
        "faces": _boxes_to_json(post.faces),
        "bodies": _boxes_to_json(post.bodies),
        "garments": [
            {
                "region_id": g.region_id,
                "box": g.box.to_dict(),
                "rough_category": g.rough_category,
                "feature": g.feature.tolist(),
            }
            for g in post.garments
        ],
        "gender_hint": post.gender_hint,
        "image_feature": post.image_feature.tolist(),
    }
    if isinstance(item, LabeledPost):
        record["labels"] = {
            "occasion": item.occasion_label,
            "source": item.label_source,
            "garments": {
                rid: {"category": gl.category, "values": dict(gl.values)}
                for rid, gl in item.garment_labels.items()
            },
        }
    return record


def post_from_record(record: dict) -> Post | LabeledPost:
    try:
        post = Post(
            post_id=record["post_id"],
            image_width=int(record["image_width"]),
            image_height=int(record["image_height"]),
            caption=record.get("caption", ""),
            hashtags=tuple(record.get("hashtags", [])),
            timestamp=int(record["timestamp"]),
            location=record.get("location"),
            likes=int(record["likes"]),
            comments=int(record["comments"]),
            faces=_boxes_from_json(record.get("faces", [])),
            bodies=_boxes_from_json(record.get("bodies", [])),
            garments=tuple(
                GarmentRegion(
                    region_id=g["region_id"],
                    box=BoundingBox.from_dict(g["box"]),
                    rough_category=g.get("rough_category"),
                    feature=np.asarray(g["feature"], dtype=np.float64),
                )
                for g in record.get("garments", [])
            ),
            gender_hint=record.get("gender_hint"),
            image_feature=np.asarray(record["image_feature"], dtype=np.float64),
        )
    except KeyError as exc:
        raise CorpusError(f"record missing field {exc.args[0]!r}") from exc
    labels = record.get("labels")
    if labels is None:
        return post
    try:
        return LabeledPost(
            post=post,
            occasion_label=labels["occasion"],
            label_source=labels["source"],
            garment_labels={
                rid: GarmentLabels(category=gl["category"], values=dict(gl["values"]))
                for rid, gl in labels["garments"].items()
            },
        )
    except KeyError as exc:
        raise CorpusError(f"labels block missing field {exc.args[0]!r}") from exc


def parse_corpus_line(line: str, line_no: int) -> Post | LabeledPost:
    try:
        record = json.loads(line)
    except json.JSONDecodeError as exc:
        raise CorpusError(f"line {line_no}: invalid JSON ({exc})") from exc
    try:
        return post_from_record(record)
    except CorpusError as exc:
        raise CorpusError(f"line {line_no}: {exc}") from exc


def iter_corpus(path: str | Path) -> Iterator[Post | LabeledPost]:
    """Stream a corpus file. Duplicate post_ids are NOT rejected here; raw
    archives may legitimately contain duplicates (the ingest stage dedups)."""
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            yield parse_corpus_line(line, line_no)


def read_corpus(path: str | Path) -> list[Post | LabeledPost]:
    """Read a full corpus, enforcing unique post_ids and uniform feature dims."""
    posts: list[Post | LabeledPost] = []
    seen: set[str] = set()
    dims: tuple[int, int] | None = None
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            item = parse_corpus_line(line, line_no)
            post = item.post if isinstance(item, LabeledPost) else item
            if post.post_id in seen:
                raise CorpusError(f"line {line_no}: duplicate post_id {post.post_id!r}")
            seen.add(post.post_id)
            d_img = post.image_feature.shape[0]
            d_reg = post.garments[0].feature.shape[0] if post.garments else -1
            for g in post.garments:
                if g.feature.shape[0] != d_reg:
                    raise CorpusError(
                        f"line {line_no}: garment feature dims differ within post"
                    )
            if dims is None:
                dims = (d_img, d_reg)
            else:
                if d_img != dims[0] or (d_reg != -1 and dims[1] != -1 and d_reg != dims[1]):
                    raise CorpusError(
                        f"line {line_no}: feature dimension mismatch "
                        f"(expected image={dims[0]}, region={dims[1]}, got {d_img}, {d_reg})"
                    )
                if dims[1] == -1 and d_reg != -1:
                    dims = (dims[0], d_reg)
            posts.append(item)
    return posts


def write_corpus(posts: Iterable[Post | LabeledPost], path: str | Path) -> int:
    """Write posts one JSON record per line; returns the number written."""
    n = 0
    with open(path, "w", encoding="utf-8") as fh:
        for item in posts:
            fh.write(json.dumps(post_to_record(item), ensure_ascii=False))
            fh.write("\n")
            n += 1
    return n


def strip_labels(items: Iterable[Post | LabeledPost]) -> list[Post]:
    return [i.post if isinstance(i, LabeledPost) else i for i in items]
