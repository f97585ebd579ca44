#!/usr/bin/env python3
"""Aggregate triplets into the knowledge base and explore it with faceted
queries, the same way the HTTP API and the explorer UI do."""

from fashionkb import (
    FilterThresholds,
    KnowledgeBase,
    Query,
    SyntheticConfig,
    build_triplets,
    generate_synthetic,
    query_posts,
    query_triplets,
    reference_vocabulary,
)
from fashionkb.model.network import DecodedGarment, DecodedPost
from fashionkb.pipeline import surviving_pairs

vocab = reference_vocabulary()
config = SyntheticConfig.default(vocab, n_posts=800, seed=21)
labeled, _ = generate_synthetic(config)

kb = KnowledgeBase(vocab)
for lp in labeled:
    decoded = DecodedPost(
        post_id=lp.post.post_id,
        occasion=lp.occasion_label,
        garments=[
            DecodedGarment(region_id=rid, category=gl.category, values=dict(gl.values))
            for rid, gl in lp.garment_labels.items()
        ],
    )
    pairs = surviving_pairs(lp.post, FilterThresholds())
    kb.insert(build_triplets(lp.post, decoded, pairs, vocab), lp.post)

print(f"knowledge base: {len(kb)} triplet instances, {len(kb.counts)} distinct keys, "
      f"{len(kb.post_meta)} posts")

print("\n--- triplets mode: everything, count-ranked ---")
page = query_triplets(kb, Query(limit=5))
for r in page.results:
    print(f"  <{r.key.occasion}, {r.key.gender}, {r.key.category}>  x{r.count}")

print("\n--- drill down: occasion=prom, gender=female ---")
page = query_triplets(kb, Query(occasions=("prom",), genders=("female",), limit=5))
print(f"{page.total} keys match")
for r in page.results:
    print(f"  <{r.key.occasion}, {r.key.gender}, {r.key.category}>  x{r.count}  "
          f"e.g. {r.samples[0][0]}")

print("\n--- posts mode: dresses with at least 100 likes ---")
page = query_posts(kb, None, Query(mode="posts", categories=("dress",), min_likes=100, limit=5))
print(f"{page.total} posts match")
for r in page.results:
    cats = ", ".join(t.category for t in r.triplets)
    print(f"  {r.meta.post_id}: {r.meta.likes} likes, {r.meta.location}, garments: {cats}")

print("\n--- attribute facet: red items at any occasion ---")
page = query_triplets(kb, Query(attribute_values=(("color", "red"),), limit=5))
for r in page.results:
    print(f"  <{r.key.occasion}, {r.key.gender}, {r.key.category}>  x{r.count}")

print("\n--- snapshot round trip ---")
kb.save("/tmp/fashionkb_demo.snapshot")
reloaded = KnowledgeBase.load("/tmp/fashionkb_demo.snapshot")
print(f"reloaded: {len(reloaded)} instances, counts equal: {reloaded.counts == kb.counts}")
