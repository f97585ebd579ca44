"""Whole-model gradient verification against central finite differences."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import LabeledPost
from .autodiff import gradcheck
from .network import ConceptModel
from .noise import NoiseModel
from .train import TrainConfig, loss


@dataclass
class GradCheckReport:
    max_rel_err: float
    worst: tuple[str, float]
    per_batch: list[dict[str, float]]
    n_parameters: int


def check_model_gradients(
    model: ConceptModel,
    noise: NoiseModel,
    posts: list[LabeledPost],
    n_batches: int = 3,
    batch_size: int = 4,
    step: float = 1e-4,
    config: TrainConfig | None = None,
    seed: int = 0,
) -> GradCheckReport:
    """Reverse-mode gradients of every parameter tensor versus central
    finite differences, over several random batches."""
    config = config or TrainConfig()
    params = {**model.params(), **noise.params()}
    rng = np.random.default_rng(seed)
    per_batch: list[dict[str, float]] = []
    for _ in range(n_batches):
        idx = rng.choice(len(posts), size=min(batch_size, len(posts)), replace=False)
        batch = [posts[int(i)] for i in idx]
        errors = gradcheck(lambda: loss(model, noise, batch, config), params, step=step)
        per_batch.append(errors)
    worst_name, worst_err = "", -1.0
    for errors in per_batch:
        for name, err in errors.items():
            if err > worst_err:
                worst_name, worst_err = name, err
    return GradCheckReport(
        max_rel_err=worst_err,
        worst=(worst_name, worst_err),
        per_batch=per_batch,
        n_parameters=sum(p.data.size for p in params.values()),
    )
