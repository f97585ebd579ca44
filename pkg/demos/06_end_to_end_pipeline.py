#!/usr/bin/env python3
"""Run the full staged pipeline on a generated archive, then query the
resulting knowledge base.

Equivalent CLI session:

    fashionkb gen-synthetic --out-dir work/data --n-posts 600 \
        --weak-fraction 0.4 --violation-fraction 0.2 --unmapped-fraction 0.1 \
        --duplicate-fraction 0.05 --seed 11
    fashionkb pipeline --config work/pipeline.json
    fashionkb query --kb work/kb.snapshot --occasion prom --limit 5
    fashionkb serve --kb work/kb.snapshot --static frontend/dist
"""

import json
import tempfile
from pathlib import Path

from fashionkb.cli import main
from fashionkb.kb import KnowledgeBase
from fashionkb.search import Query, query_triplets

work = Path(tempfile.mkdtemp(prefix="fashionkb-demo-"))
print(f"working directory: {work}")

code = main([
    "gen-synthetic", "--out-dir", str(work / "data"), "--n-posts", "600",
    "--weak-fraction", "0.4", "--violation-fraction", "0.2",
    "--unmapped-fraction", "0.1", "--duplicate-fraction", "0.05",
    "--seed", "11",
])
assert code == 0

pipeline_config = {
    "vocabulary": str(work / "data" / "vocab.json"),
    "hashtags": str(work / "data" / "hashtags.json"),
    "archive": str(work / "data" / "archive.jsonl"),
    "clean_corpus": str(work / "data" / "clean.jsonl"),
    "weak_corpus": str(work / "data" / "weak.jsonl"),
    "checkpoint": str(work / "model.ckpt"),
    "kb": str(work / "kb.snapshot"),
    "workdir": str(work / "stages"),
    "train": {
        "epochs": 6, "batch_size": 32, "learning_rate": 0.2, "seed": 0,
        "clean_warmup_epochs": 2, "noise_estimation": "epoch", "noise_lr_scale": 0.0,
    },
    "stages": {"train": True},
}
(work / "pipeline.json").write_text(json.dumps(pipeline_config, indent=2))

print("\n--- pipeline: ingest -> filter -> train -> predict -> extract -> index ---")
code = main(["pipeline", "--config", str(work / "pipeline.json")])
assert code == 0, "pipeline failed"

print("\n--- querying the freshly built knowledge base ---")
kb = KnowledgeBase.load(work / "kb.snapshot")
page = query_triplets(kb, Query(occasions=("prom",), limit=5))
print(f"{page.total} prom keys; top entries:")
for r in page.results:
    print(f"  <{r.key.occasion}, {r.key.gender}, {r.key.category}>  x{r.count}")

print(f"\nExplore interactively:\n  fashionkb serve --kb {work / 'kb.snapshot'} "
      "--addr 127.0.0.1:8080 --static frontend/dist")
