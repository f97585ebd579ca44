"""Training loop: noise-aware multi-task cross-entropy with SGD + momentum.

Clean examples supervise the model's own distributions; weak (machine-
labeled) examples supervise those distributions pushed through the per-task
transition matrices. Weak terms carry a separate weight, and a trace
regularizer keeps the transition matrices anchored near the identity early
in training.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from ..corpus import LabeledPost
from ..synthetic import TASK_CATEGORY, TASK_OCCASION
from ..vocab import ConceptVocabulary
from . import autodiff as ad
from .autodiff import Tensor, log_softmax, pick, softmax, take_rows, tsum
from .network import ConceptModel, decode
from .noise import NoiseModel, apply_noise


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 32
    learning_rate: float = 0.15
    momentum: float = 0.9
    weak_weight: float = 1.0  # scales weak-label loss terms
    trace_weight: float = 0.01  # transition-matrix trace regularizer
    clean_warmup_epochs: int = 0  # epochs that skip weak batches, anchoring heads
    noise_estimation: str = "warmup"  # none | warmup (once) | epoch (re-estimate)
    noise_lr_scale: float = 1.0  # learning-rate multiplier for transition scores
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0 or self.learning_rate < 0:
            raise ValueError("epochs and batch_size must be positive, learning_rate >= 0")
        if self.weak_weight < 0:
            raise ValueError("weak_weight must be >= 0")
        if self.clean_warmup_epochs < 0 or self.noise_lr_scale < 0:
            raise ValueError("clean_warmup_epochs and noise_lr_scale must be >= 0")
        if self.noise_estimation not in ("none", "warmup", "epoch"):
            raise ValueError("noise_estimation must be none|warmup|epoch")


def _label_indices(vocab: ConceptVocabulary, batch: list[LabeledPost], graphs):
    """Per-bucket label index arrays aligned with the graph's row layout."""
    occ_idx = {v: i for i, v in enumerate(vocab.occasions)}
    cat_idx = {v: i for i, v in enumerate(vocab.categories)}
    val_idx = {a.name: {v: i for i, v in enumerate(a.values)} for a in vocab.attributes}
    out = []
    for g in graphs:
        batch_size = len(g.post_indices)
        occ = np.empty(batch_size, dtype=np.intp)
        weak_mask = np.zeros(batch_size, dtype=bool)
        for j, i in enumerate(g.post_indices):
            lp = batch[i]
            occ[j] = occ_idx[lp.occasion_label]
            weak_mask[j] = lp.label_source == "weak"
        rows = batch_size * g.n_garments
        cat = np.empty(rows, dtype=np.intp)
        attrs = {a.name: np.empty(rows, dtype=np.intp) for a in vocab.attributes}
        for t in range(g.n_garments):
            for j, i in enumerate(g.post_indices):
                lp = batch[i]
                region = lp.post.garments[t]
                labels = lp.garment_labels[region.region_id]
                row = t * batch_size + j
                cat[row] = cat_idx[labels.category]
                for a in vocab.attributes:
                    attrs[a.name][row] = val_idx[a.name][labels.values[a.name]]
        garment_weak = np.tile(weak_mask, g.n_garments)
        out.append((occ, weak_mask, cat, attrs, garment_weak))
    return out


def _task_terms(logits, labels, weak_mask, noise, task, weak_weight) -> Tensor:
    """Summed cross-entropy for one head, weak rows noise-adapted and weighted."""
    clean_rows = np.flatnonzero(~weak_mask)
    weak_rows = np.flatnonzero(weak_mask)
    total = Tensor(0.0)
    if clean_rows.size:
        logp = log_softmax(logits, axis=-1)
        nll = -pick(take_rows(logp, clean_rows), labels[clean_rows])
        total = total + tsum(nll)
    if weak_rows.size:
        p = softmax(logits, axis=-1)
        p_noisy = apply_noise(take_rows(p, weak_rows), noise.matrix(task))
        nll = -ad.log(pick(p_noisy, labels[weak_rows]))
        total = total + tsum(nll) * weak_weight
    return total


def _trace_regularizer(noise: NoiseModel, weight: float) -> Tensor:
    reg = Tensor(0.0)
    if weight == 0.0 or not noise.trainable:
        return reg
    for task in noise.tasks:
        t = noise.matrix(task)
        c = t.data.shape[0]
        reg = reg + tsum(t * Tensor(np.eye(c))) * (-weight / c)
    return reg


def loss(
    model: ConceptModel,
    noise: NoiseModel,
    batch: list[LabeledPost],
    config: TrainConfig | None = None,
) -> Tensor:
    """Mean over posts and slots of cross-entropy, noise-adapted for weak
    labels and scaled by the weak weight, plus the trace regularizer."""
    if not batch:
        raise ValueError("empty batch")
    config = config or TrainConfig()
    vocab = model.vocab
    graphs = model.forward_graph([lp.post for lp in batch])
    label_sets = _label_indices(vocab, batch, graphs)

    total = Tensor(0.0)
    n_terms = 0
    for g, (occ, weak_mask, cat, attrs, garment_weak) in zip(graphs, label_sets):
        total = total + _task_terms(
            g.occasion_logits, occ, weak_mask, noise, TASK_OCCASION, config.weak_weight
        )
        n_terms += occ.size
        total = total + _task_terms(
            g.category_logits, cat, garment_weak, noise, TASK_CATEGORY, config.weak_weight
        )
        n_terms += cat.size
        for attr in vocab.attributes:
            total = total + _task_terms(
                g.attr_logits[attr.name],
                attrs[attr.name],
                garment_weak,
                noise,
                attr.name,
                config.weak_weight,
            )
            n_terms += attrs[attr.name].size

    return total * (1.0 / n_terms) + _trace_regularizer(noise, config.trace_weight)


class Sgd:
    """Gradient descent with momentum; velocity keyed by parameter name.

    Parameter names in `lr_scales` use a scaled learning rate (the noise
    scores are shallow and benefit from a larger step than the network).
    """

    def __init__(
        self,
        params: dict[str, Tensor],
        learning_rate: float,
        momentum: float,
        lr_scales: dict[str, float] | None = None,
    ):
        self.params = params
        self.learning_rate = learning_rate
        self.momentum = momentum
        self.lr_scales = lr_scales or {}
        self.velocity = {name: np.zeros_like(p.data) for name, p in params.items()}

    def zero_grad(self) -> None:
        for p in self.params.values():
            p.zero_grad()

    def step(self) -> None:
        for name, p in self.params.items():
            if p.grad is None:
                continue
            v = self.velocity[name]
            v *= self.momentum
            v += p.grad
            p.data -= self.learning_rate * self.lr_scales.get(name, 1.0) * v


def backward_and_step(
    model: ConceptModel,
    noise: NoiseModel,
    batch: list[LabeledPost],
    config: TrainConfig,
    optimizer: Sgd | None = None,
) -> float:
    """One gradient step over a batch; returns the batch loss.

    Aborts with a diagnostic if the loss goes non-finite.
    """
    optimizer = optimizer or Sgd(
        {**model.params(), **noise.params()}, config.learning_rate, config.momentum
    )
    optimizer.zero_grad()
    value = loss(model, noise, batch, config)
    if not math.isfinite(value.item()):
        raise FloatingPointError(
            f"non-finite loss {value.item()!r} on batch of {len(batch)} posts "
            f"(first post {batch[0].post.post_id})"
        )
    value.backward()
    optimizer.step()
    return value.item()


@dataclass
class TrainResult:
    model: ConceptModel
    noise: NoiseModel
    history: list[dict] = field(default_factory=list)


def estimate_confusion(
    model: ConceptModel, labeled: list[LabeledPost], smoothing: float = 1.0
) -> dict[str, np.ndarray]:
    """Row-stochastic confusion between the model's decoded labels and the
    given (noisy) labels, per task, with Laplace smoothing.

    Hard argmax assignments on purpose: they stay robust when the model has
    partially fit the label noise (soft probability mass smeared toward a
    noisy label would inflate the diagonal).
    """
    vocab = model.vocab
    counts: dict[str, np.ndarray] = {}
    for task in [TASK_OCCASION, TASK_CATEGORY, *vocab.attribute_names]:
        c = len(
            vocab.occasions
            if task == TASK_OCCASION
            else vocab.categories
            if task == TASK_CATEGORY
            else vocab.attribute(task).values
        )
        counts[task] = np.full((c, c), smoothing)
    occ_idx = {v: i for i, v in enumerate(vocab.occasions)}
    cat_idx = {v: i for i, v in enumerate(vocab.categories)}
    val_idx = {a.name: {v: i for i, v in enumerate(a.values)} for a in vocab.attributes}
    predictions = model.forward_batch([lp.post for lp in labeled])
    for lp, pred in zip(labeled, predictions):
        counts[TASK_OCCASION][
            int(np.argmax(pred.occasion_probs)), occ_idx[lp.occasion_label]
        ] += 1
        for garment in pred.garments:
            labels = lp.garment_labels[garment.region_id]
            counts[TASK_CATEGORY][
                int(np.argmax(garment.category_probs)), cat_idx[labels.category]
            ] += 1
            for a in vocab.attributes:
                counts[a.name][
                    int(np.argmax(garment.value_probs[a.name])),
                    val_idx[a.name][labels.values[a.name]],
                ] += 1
    return {task: m / m.sum(axis=1, keepdims=True) for task, m in counts.items()}


def _batches(indices: np.ndarray, batch_size: int):
    for start in range(0, len(indices), batch_size):
        yield indices[start : start + batch_size]


def train(
    model: ConceptModel,
    noise: NoiseModel,
    clean_posts: list[LabeledPost],
    weak_posts: list[LabeledPost],
    config: TrainConfig,
    eval_posts: list[LabeledPost] | None = None,
) -> TrainResult:
    """Epoch loop with deterministic shuffling by seed.

    Each epoch processes shuffled clean batches, then shuffled weak batches.
    Weak batches are skipped entirely when weak_weight is 0, so that run's
    parameter trajectory matches training on the clean subset alone. Clean
    and weak shuffles draw from independent seeded streams for the same
    reason.
    """
    if not clean_posts:
        raise ValueError("clean training set must be non-empty")
    params = {**model.params(), **noise.params()}
    lr_scales = {name: config.noise_lr_scale for name in noise.params()}
    optimizer = Sgd(params, config.learning_rate, config.momentum, lr_scales)
    rng_clean = np.random.default_rng(config.seed)
    rng_weak = np.random.default_rng(config.seed + 9973)
    use_weak = bool(weak_posts) and config.weak_weight > 0

    history: list[dict] = []
    for epoch in range(config.epochs):
        estimate_now = (
            use_weak
            and noise.trainable
            and config.clean_warmup_epochs > 0
            and config.noise_estimation != "none"
            and (
                epoch == config.clean_warmup_epochs
                if config.noise_estimation == "warmup"
                else epoch >= config.clean_warmup_epochs
            )
        )
        if estimate_now:
            # seed the transition scores with the log-confusion of the
            # current model against the weak labels (the closed-form
            # channel estimate given the model), so the channel, not the
            # heads, explains the label noise; the warmed-up model's errors
            # are independent of the noise, keeping the estimate unbiased
            confusion = estimate_confusion(model, weak_posts)
            for task, score in noise.scores.items():
                score.data = np.log(confusion[task])
                optimizer.velocity[f"noise.{task}"][:] = 0.0
        losses = []
        for idx in _batches(rng_clean.permutation(len(clean_posts)), config.batch_size):
            losses.append(
                backward_and_step(model, noise, [clean_posts[i] for i in idx], config, optimizer)
            )
        if use_weak and epoch >= config.clean_warmup_epochs:
            for idx in _batches(rng_weak.permutation(len(weak_posts)), config.batch_size):
                losses.append(
                    backward_and_step(
                        model, noise, [weak_posts[i] for i in idx], config, optimizer
                    )
                )
        entry = {"epoch": epoch, "train_loss": float(np.mean(losses))}
        if eval_posts:
            entry["eval_accuracy"] = evaluate(model, eval_posts)
        history.append(entry)
    return TrainResult(model=model, noise=noise, history=history)


def evaluate(model: ConceptModel, labeled: list[LabeledPost]) -> dict[str, float]:
    """Per-task accuracy of decoded predictions against the given labels."""
    vocab = model.vocab
    predictions = model.forward_batch([lp.post for lp in labeled])
    occ_hits = 0
    cat_hits = 0
    n_garments = 0
    attr_hits = {a.name: 0 for a in vocab.attributes}
    for lp, pred in zip(labeled, predictions):
        decoded = decode(pred, vocab)
        if decoded.occasion == lp.occasion_label:
            occ_hits += 1
        for garment in decoded.garments:
            labels = lp.garment_labels[garment.region_id]
            n_garments += 1
            if garment.category == labels.category:
                cat_hits += 1
            for a in vocab.attributes:
                if garment.values[a.name] == labels.values[a.name]:
                    attr_hits[a.name] += 1
    out = {TASK_OCCASION: occ_hits / len(labeled), TASK_CATEGORY: cat_hits / n_garments}
    for a in vocab.attributes:
        out[a.name] = attr_hits[a.name] / n_garments
    out["mean"] = float(np.mean([v for k, v in out.items() if k != "mean"]))
    return out
