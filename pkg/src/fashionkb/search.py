"""Faceted queries over the knowledge base.

Two modes: `triplets` ranks aggregation keys by matching-instance count;
`posts` returns the posts behind the matching instances. Facets of different
types combine with AND; multiple values within one facet type are OR.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass
from typing import Iterable

from .kb import FashionTriplet, KnowledgeBase, PostMeta, Provenance, TripletKey
from .vocab import GENDER_UNKNOWN, GENDERS

DEFAULT_LIMIT = 24
MAX_LIMIT = 200

MODE_TRIPLETS = "triplets"
MODE_POSTS = "posts"


class QueryError(ValueError):
    code = "bad_request"


class UnknownFacetValueError(QueryError):
    code = "unknown_facet_value"

    def __init__(self, facet: str, value: str, valid: Iterable[str]):
        self.facet = facet
        self.value = value
        self.valid = sorted(valid)
        super().__init__(
            f"unknown {facet} value {value!r}; valid values: {', '.join(self.valid)}"
        )


class MalformedRangeError(QueryError):
    code = "malformed_range"


@dataclass(frozen=True)
class Query:
    mode: str = MODE_TRIPLETS
    occasions: tuple[str, ...] = ()
    genders: tuple[str, ...] = ()
    categories: tuple[str, ...] = ()
    attribute_values: tuple[tuple[str, str], ...] = ()  # (attribute type, value)
    hashtags: tuple[str, ...] = ()
    locations: tuple[str, ...] = ()
    time_from: int | None = None
    time_to: int | None = None
    min_likes: int | None = None
    min_comments: int | None = None
    offset: int = 0
    limit: int = DEFAULT_LIMIT

    def __post_init__(self):
        if self.mode not in (MODE_TRIPLETS, MODE_POSTS):
            raise QueryError(f"unknown mode {self.mode!r}")
        if self.offset < 0:
            raise QueryError("offset must be >= 0")
        if self.limit <= 0:
            raise QueryError("limit must be > 0")
        if self.limit > MAX_LIMIT:
            object.__setattr__(self, "limit", MAX_LIMIT)
        if (
            self.time_from is not None
            and self.time_to is not None
            and self.time_from > self.time_to
        ):
            raise MalformedRangeError(f"empty time range [{self.time_from}, {self.time_to}]")


@dataclass(frozen=True)
class TripletResult:
    key: TripletKey
    count: int
    samples: tuple[Provenance, ...]  # at most 8, sorted

    def to_json(self) -> dict:
        return {
            "occasion": self.key.occasion,
            "gender": self.key.gender,
            "category": self.key.category,
            "count": self.count,
            "samples": [{"post_id": p, "region_id": r} for p, r in self.samples],
        }


@dataclass(frozen=True)
class PostResult:
    meta: PostMeta
    triplets: tuple[FashionTriplet, ...]

    def to_json(self) -> dict:
        return {
            "post_id": self.meta.post_id,
            "caption": self.meta.caption,
            "hashtags": list(self.meta.hashtags),
            "timestamp": self.meta.timestamp,
            "location": self.meta.location,
            "likes": self.meta.likes,
            "comments": self.meta.comments,
            "image_width": self.meta.image_width,
            "image_height": self.meta.image_height,
            "triplets": [
                {
                    "occasion": t.occasion,
                    "gender": t.gender,
                    "category": t.category,
                    "attribute_values": dict(sorted(t.attribute_values.items())),
                    "region_id": t.provenance[1],
                }
                for t in self.triplets
            ],
        }


@dataclass(frozen=True)
class SearchPage:
    results: tuple
    total: int
    offset: int
    limit: int

    def to_json(self) -> dict:
        return {
            "results": [r.to_json() for r in self.results],
            "total": self.total,
            "offset": self.offset,
            "limit": self.limit,
        }


def validate_query(kb: KnowledgeBase, q: Query) -> None:
    """Reject facet values outside the vocabulary / index."""
    vocab = kb.vocab
    for occ in q.occasions:
        if occ not in vocab.occasions:
            raise UnknownFacetValueError("occasion", occ, vocab.occasions)
    all_genders = (*GENDERS, GENDER_UNKNOWN)
    for g in q.genders:
        if g not in all_genders:
            raise UnknownFacetValueError("gender", g, all_genders)
    for cat in q.categories:
        if cat not in vocab.categories:
            raise UnknownFacetValueError("category", cat, vocab.categories)
    attr_names = set(vocab.attribute_names)
    for attr_name, value in q.attribute_values:
        if attr_name not in attr_names:
            raise UnknownFacetValueError("attribute", attr_name, sorted(attr_names))
        values = vocab.attribute(attr_name).values
        if value not in values:
            raise UnknownFacetValueError(attr_name, value, values)


def _meta_matches(meta: PostMeta | None, q: Query) -> bool:
    if meta is None:
        # metadata facets cannot match a post we have no metadata for
        return not (
            q.hashtags
            or q.locations
            or q.time_from is not None
            or q.time_to is not None
            or q.min_likes is not None
            or q.min_comments is not None
        )
    if q.hashtags:
        tags = {t.lstrip("#").lower() for t in meta.hashtags}
        if not tags.intersection(q.hashtags):
            return False
    if q.locations and meta.location not in q.locations:
        return False
    if q.time_from is not None and meta.timestamp < q.time_from:
        return False
    if q.time_to is not None and meta.timestamp > q.time_to:
        return False
    if q.min_likes is not None and meta.likes < q.min_likes:
        return False
    if q.min_comments is not None and meta.comments < q.min_comments:
        return False
    return True


def _instance_matches_concepts(t: FashionTriplet, q: Query) -> bool:
    if q.occasions and t.occasion not in q.occasions:
        return False
    if q.genders and t.gender not in q.genders:
        return False
    if q.categories and t.category not in q.categories:
        return False
    if q.attribute_values:
        by_type: dict[str, set[str]] = {}
        for attr_name, value in q.attribute_values:
            by_type.setdefault(attr_name, set()).add(value)
        for attr_name, values in by_type.items():
            if t.attribute_values.get(attr_name) not in values:
                return False
    return True


def _candidate_provenances(kb: KnowledgeBase, q: Query) -> list[Provenance] | None:
    """Intersect inverted-index posting lists for the given facets.

    Returns None when no indexed facet was given (meaning: all instances).
    """
    sets: list[set[Provenance]] = []

    def union_of(index: dict, keys: Iterable) -> set[Provenance]:
        out: set[Provenance] = set()
        for k in keys:
            out.update(index.get(k, ()))
        return out

    if q.occasions:
        sets.append(union_of(kb.occasion_index, q.occasions))
    if q.genders:
        sets.append(union_of(kb.gender_index, q.genders))
    if q.categories:
        sets.append(union_of(kb.category_index, q.categories))
    if q.attribute_values:
        by_type: dict[str, set[str]] = {}
        for attr_name, value in q.attribute_values:
            by_type.setdefault(attr_name, set()).add(value)
        for attr_name, values in by_type.items():
            sets.append(union_of(kb.attribute_index, ((attr_name, v) for v in values)))
    if q.hashtags:
        sets.append(union_of(kb.hashtag_index, q.hashtags))
    if q.locations:
        sets.append(union_of(kb.location_index, q.locations))
    if not sets:
        return None
    candidates = set.intersection(*sets) if len(sets) > 1 else sets[0]
    return sorted(candidates)


def _matching_instances(kb: KnowledgeBase, q: Query) -> list[FashionTriplet]:
    candidates = _candidate_provenances(kb, q)
    if candidates is None:
        pool = kb.instances
    else:
        by_provenance = {t.provenance: t for t in kb.instances}
        pool = [by_provenance[p] for p in candidates]
    out = []
    for t in pool:
        if not _instance_matches_concepts(t, q):
            continue
        if not _meta_matches(kb.post_meta.get(t.provenance[0]), q):
            continue
        out.append(t)
    return out


def query_triplets(kb: KnowledgeBase, q: Query) -> SearchPage:
    """Keys whose instances match all facets, ranked by matching-instance
    count descending, ties by key ascending."""
    if q.mode != MODE_TRIPLETS:
        raise QueryError(f"query_triplets requires mode={MODE_TRIPLETS!r}")
    validate_query(kb, q)
    groups: dict[TripletKey, list[Provenance]] = {}
    for t in _matching_instances(kb, q):
        groups.setdefault(t.key, []).append(t.provenance)
    ranked = sorted(groups.items(), key=lambda kv: (-len(kv[1]), kv[0]))
    page = ranked[q.offset : q.offset + q.limit]
    results = tuple(
        TripletResult(key=key, count=len(provs), samples=tuple(sorted(provs)[:8]))
        for key, provs in page
    )
    return SearchPage(results=results, total=len(ranked), offset=q.offset, limit=q.limit)


def query_posts(kb: KnowledgeBase, corpus: dict | None, q: Query) -> SearchPage:
    """Posts with at least one instance matching all concept facets and
    metadata satisfying all metadata predicates; likes descending, ties by
    post_id ascending."""
    if q.mode != MODE_POSTS:
        raise QueryError(f"query_posts requires mode={MODE_POSTS!r}")
    validate_query(kb, q)

    by_post: dict[str, list[FashionTriplet]] = {}
    for t in kb.instances:
        by_post.setdefault(t.provenance[0], []).append(t)

    in_time_range: set[str] | None = None
    if q.time_from is not None or q.time_to is not None:
        # the ordered timestamp map narrows the candidate set with two bisects
        lo = 0 if q.time_from is None else bisect.bisect_left(kb.timestamp_order, (q.time_from, ""))
        hi = (
            len(kb.timestamp_order)
            if q.time_to is None
            else bisect.bisect_right(kb.timestamp_order, (q.time_to, "\U0010ffff"))
        )
        in_time_range = {post_id for _, post_id in kb.timestamp_order[lo:hi]}

    matches: list[tuple[PostMeta, list[FashionTriplet]]] = []
    for post_id in by_post:
        if in_time_range is not None and post_id not in in_time_range:
            continue
        meta = kb.post_meta.get(post_id)
        if not _meta_matches(meta, q):
            continue
        if not any(_instance_matches_concepts(t, q) for t in by_post[post_id]):
            continue
        if meta is None:
            meta = PostMeta(
                post_id=post_id, hashtags=(), timestamp=0, location=None, likes=0, comments=0
            )
        matches.append((meta, sorted(by_post[post_id], key=lambda t: t.provenance)))

    matches.sort(key=lambda mt: (-mt[0].likes, mt[0].post_id))
    page = matches[q.offset : q.offset + q.limit]
    results = tuple(PostResult(meta=m, triplets=tuple(ts)) for m, ts in page)
    return SearchPage(results=results, total=len(matches), offset=q.offset, limit=q.limit)
