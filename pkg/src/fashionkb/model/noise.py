"""Label-noise modeling: per-task transition matrices.

Each classification task (occasion, category, each attribute type) gets its
own row-stochastic matrix T mapping clean-label probability mass to
noisy-label mass. Learned matrices are stored as unconstrained scores and
realized through a row-wise softmax, so rows stay normalized and strictly
positive after every update.
"""

from __future__ import annotations

import math

import numpy as np

from ..synthetic import task_labels, task_names
from ..vocab import ConceptVocabulary
from .autodiff import Tensor, matmul, reshape, softmax


def apply_noise(p_clean: Tensor, transition: Tensor) -> Tensor:
    """p_noisy[j] = sum_i p_clean[i] * T[i][j].

    Accepts a (C,) distribution or a (B, C) batch; transition must be (C, C).
    """
    c = transition.data.shape[0]
    if transition.data.shape != (c, c):
        raise ValueError("transition matrix must be square")
    if p_clean.data.shape[-1] != c:
        raise ValueError(
            f"distribution width {p_clean.data.shape[-1]} != transition size {c}"
        )
    if p_clean.data.ndim == 1:
        return reshape(matmul(reshape(p_clean, (1, c)), transition), (c,))
    return matmul(p_clean, transition)


class NoiseModel:
    """One transition matrix per task, learnable via softmax-parameterized scores."""

    def __init__(
        self,
        vocab: ConceptVocabulary,
        init_self_mass: float = 0.9,
        _fixed: dict[str, np.ndarray] | None = None,
    ):
        self.vocab = vocab
        self.tasks = task_names(vocab)
        self._fixed = _fixed
        self.scores: dict[str, Tensor] = {}
        if _fixed is None:
            for task in self.tasks:
                c = len(task_labels(vocab, task))
                # score gap putting init_self_mass on the diagonal after softmax
                gap = math.log(init_self_mass * (c - 1) / (1.0 - init_self_mass))
                self.scores[task] = Tensor(np.eye(c) * gap, requires_grad=True)
        else:
            for task in self.tasks:
                m = np.asarray(_fixed[task], dtype=np.float64)
                c = len(task_labels(vocab, task))
                if m.shape != (c, c):
                    raise ValueError(f"fixed matrix for {task!r} has wrong shape")
                if np.any(np.abs(m.sum(axis=1) - 1.0) > 1e-9):
                    raise ValueError(f"fixed matrix for {task!r} is not row-stochastic")

    @staticmethod
    def fixed(vocab: ConceptVocabulary, matrices: dict[str, np.ndarray]) -> "NoiseModel":
        """Constant (non-trainable) transition matrices, e.g. exact identity."""
        return NoiseModel(vocab, _fixed={k: np.asarray(v) for k, v in matrices.items()})

    @staticmethod
    def identity(vocab: ConceptVocabulary) -> "NoiseModel":
        from ..synthetic import identity_matrices

        return NoiseModel.fixed(vocab, identity_matrices(vocab))

    @property
    def trainable(self) -> bool:
        return self._fixed is None

    def matrix(self, task: str) -> Tensor:
        if self._fixed is not None:
            return Tensor(self._fixed[task])
        return softmax(self.scores[task], axis=-1)

    def realized(self) -> dict[str, np.ndarray]:
        """Current transition matrices as plain arrays."""
        return {task: self.matrix(task).data.copy() for task in self.tasks}

    def params(self) -> dict[str, Tensor]:
        if self._fixed is not None:
            return {}
        return {f"noise.{task}": s for task, s in self.scores.items()}
