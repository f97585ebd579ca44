#!/usr/bin/env python3
"""Context matters: the same heads learn occasion far better when two
bi-directional recurrent encoders feed them than when each item is read in
isolation.

The corpus plants occasion pairs with identical per-garment category
marginals that differ only in which categories co-occur within a post, and
ties the prototype sums so a mean-pooled raw-feature readout carries no
signal about the pair member. Scaled down from the acceptance experiment to
finish in about a minute.
"""

import time

from fashionkb import SyntheticConfig, generate_synthetic, reference_vocabulary
from fashionkb.model import ConceptModel, NoiseModel, TrainConfig, evaluate, train

vocab = reference_vocabulary()
config = SyntheticConfig.cooccurrence(vocab, n_posts=1700, seed=5, feature_sigma=0.25)
posts, _ = generate_synthetic(config)
train_set, eval_set = posts[:1300], posts[1300:]
print(f"corpus: {len(train_set)} train / {len(eval_set)} held out")

train_config = TrainConfig(epochs=18, batch_size=32, learning_rate=0.22, seed=0)
results = {}
for contextual in (True, False):
    label = "contextual" if contextual else "ablated"
    model = ConceptModel(vocab, contextual=contextual, seed=1)
    started = time.monotonic()
    train(model, NoiseModel.identity(vocab), train_set, [], train_config)
    accuracy = evaluate(model, eval_set)
    results[label] = accuracy
    print(f"{label:>10}: occasion {accuracy['occasion']:.3f}, "
          f"category {accuracy['category']:.3f}, mean {accuracy['mean']:.3f} "
          f"({time.monotonic() - started:.0f}s)")

gap = (results["contextual"]["occasion"] - results["ablated"]["occasion"]) * 100
print(f"\noccasion gain from context: {gap:+.1f} points")
print("per-task deltas (contextual - ablated), in points:")
for task in results["contextual"]:
    if task == "mean":
        continue
    delta = (results["contextual"][task] - results["ablated"][task]) * 100
    print(f"  {task:>14}: {delta:+.1f}")
