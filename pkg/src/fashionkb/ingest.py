"""Archive ingestion: the stand-in for a live social media crawler.

Streams posts from a local line-delimited archive, keeps those carrying at
least one mapped hashtag (case-insensitive exact token match), and drops
duplicate post_ids. A rate-limit hook is kept in the interface so a real
crawler client can be substituted later.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Iterator

from .corpus import CorpusError, LabeledPost, Post, parse_corpus_line
from .vocab import ConceptVocabulary

log = logging.getLogger(__name__)


class HashtagMapError(ValueError):
    pass


@dataclass(frozen=True)
class HashtagMap:
    """Per-occasion hashtag lists; lowercase, no leading '#'."""

    by_occasion: dict[str, tuple[str, ...]]

    def __post_init__(self):
        seen: dict[str, str] = {}
        for occasion, tags in self.by_occasion.items():
            if not tags:
                raise HashtagMapError(f"occasion {occasion!r} has no hashtags")
            for tag in tags:
                if tag != tag.lower() or tag.startswith("#"):
                    raise HashtagMapError(f"hashtag {tag!r} must be lowercase without '#'")
                if tag in seen:
                    raise HashtagMapError(
                        f"hashtag {tag!r} mapped to both {seen[tag]!r} and {occasion!r}"
                    )
                seen[tag] = occasion

    @property
    def all_tags(self) -> frozenset[str]:
        return frozenset(t for tags in self.by_occasion.values() for t in tags)

    def validate_against(self, vocab: ConceptVocabulary) -> None:
        missing = set(vocab.occasions) - set(self.by_occasion)
        if missing:
            raise HashtagMapError(f"occasions without hashtags: {sorted(missing)}")

    @staticmethod
    def from_dict(raw: dict) -> "HashtagMap":
        return HashtagMap({occ: tuple(tags) for occ, tags in raw.items()})

    @staticmethod
    def load(path: str | Path) -> "HashtagMap":
        import json

        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise HashtagMapError(f"cannot parse hashtag map {path}: {exc}") from exc
        return HashtagMap.from_dict(raw)


@dataclass
class IngestReport:
    read_count: int = 0
    kept_count: int = 0
    dropped_no_hashtag: int = 0
    dropped_duplicate: int = 0
    malformed_count: int = 0  # unparseable lines; not included in read_count

    def check_arithmetic(self) -> None:
        assert self.read_count == (
            self.kept_count + self.dropped_no_hashtag + self.dropped_duplicate
        ), "ingest report arithmetic violated"

    def to_dict(self) -> dict:
        return {
            "read_count": self.read_count,
            "kept_count": self.kept_count,
            "dropped_no_hashtag": self.dropped_no_hashtag,
            "dropped_duplicate": self.dropped_duplicate,
            "malformed_count": self.malformed_count,
        }


def _normalize(tag: str) -> str:
    return tag.lstrip("#").lower()


def post_matches(post: Post, hashtag_map: HashtagMap) -> bool:
    tags = hashtag_map.all_tags
    return any(_normalize(t) in tags for t in post.hashtags)


def ingest_archive(
    path: str | Path,
    hashtag_map: HashtagMap,
    max_posts_per_second: float | None = None,
) -> tuple[Iterator[Post | LabeledPost], IngestReport]:
    """Stream kept posts in input order; the report fills as the stream is
    consumed and is final once the iterator is exhausted.

    A post is kept iff it carries at least one mapped hashtag and its
    post_id has not been seen before. Malformed lines are skipped, counted
    and logged.
    """
    report = IngestReport()

    def stream() -> Iterator[Post | LabeledPost]:
        seen: set[str] = set()
        min_interval = 1.0 / max_posts_per_second if max_posts_per_second else 0.0
        last_emit = 0.0
        with open(path, "r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    item = parse_corpus_line(line, line_no)
                except CorpusError as exc:
                    report.malformed_count += 1
                    log.warning("skipping malformed archive record: %s", exc)
                    continue
                post = item.post if isinstance(item, LabeledPost) else item
                report.read_count += 1
                if not post_matches(post, hashtag_map):
                    report.dropped_no_hashtag += 1
                    continue
                if post.post_id in seen:
                    report.dropped_duplicate += 1
                    continue
                seen.add(post.post_id)
                report.kept_count += 1
                if min_interval:
                    wait = min_interval - (time.monotonic() - last_emit)
                    if wait > 0:
                        time.sleep(wait)
                    last_emit = time.monotonic()
                yield item

    return stream(), report
