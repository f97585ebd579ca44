"""Contextualized multi-task concept classifier.

Two bi-directional recurrent encoders provide the context: one runs over a
post's garment feature sequence (so garments inform each other), the other
over each garment's concept-slot sequence [category, attr_1, ..., attr_n]
(so category and attribute predictions inform each other). The occasion
head reads the image feature concatenated with mean-pooled garment states.

Setting contextual=False ablates both encoders to per-item identity while
keeping the same affine+softmax heads; that is the no-context baseline used
in the evaluation suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..corpus import Post
from ..vocab import ConceptVocabulary
from . import autodiff as ad
from .autodiff import Tensor, concat, matmul, parameter, take_rows, zeros_parameter
from .recurrent import GruCell, birnn_encode


@dataclass(frozen=True)
class ModelDims:
    d_img: int = 64
    d_reg: int = 64
    h_garment: int = 32
    h_slot: int = 32
    slot_emb: int = 16


@dataclass
class GarmentPrediction:
    region_id: str
    category_probs: np.ndarray
    value_probs: dict[str, np.ndarray]


@dataclass
class ConceptPrediction:
    post_id: str
    occasion_probs: np.ndarray
    garments: list[GarmentPrediction]


@dataclass
class DecodedGarment:
    region_id: str
    category: str
    values: dict[str, str]


@dataclass
class DecodedPost:
    post_id: str
    occasion: str
    garments: list[DecodedGarment]


@dataclass
class BucketGraph:
    """Forward-pass tensors for posts sharing one garment count.

    Garment-level rows are time-major: row t*batch + j is garment t of the
    bucket's j-th post.
    """

    post_indices: list[int]
    n_garments: int
    occasion_logits: Tensor
    category_logits: Tensor
    attr_logits: dict[str, Tensor]


class ConceptModel:
    def __init__(
        self,
        vocab: ConceptVocabulary,
        dims: ModelDims = ModelDims(),
        contextual: bool = True,
        seed: int = 0,
    ):
        self.vocab = vocab
        self.dims = dims
        self.contextual = contextual
        self.seed = seed
        rng = np.random.default_rng(seed)

        n_slots = 1 + len(vocab.attributes)
        self.slot_embeddings = parameter((n_slots, dims.slot_emb), rng, scale=0.5)

        if contextual:
            self.garment_fwd = GruCell(dims.d_reg, dims.h_garment, rng)
            self.garment_bwd = GruCell(dims.d_reg, dims.h_garment, rng)
            # residual skip: a garment's representation is its bi-directional
            # state plus its own raw feature, so context never has to relearn
            # what the feature already says
            garment_state_dim = 2 * dims.h_garment + dims.d_reg
            slot_input_dim = dims.slot_emb + garment_state_dim
            self.slot_fwd = GruCell(slot_input_dim, dims.h_slot, rng)
            self.slot_bwd = GruCell(slot_input_dim, dims.h_slot, rng)
            slot_state_dim = 2 * dims.h_slot + slot_input_dim
        else:
            self.garment_fwd = self.garment_bwd = None
            self.slot_fwd = self.slot_bwd = None
            garment_state_dim = dims.d_reg
            slot_state_dim = dims.slot_emb + dims.d_reg
        self.garment_state_dim = garment_state_dim
        self.slot_state_dim = slot_state_dim

        self.w_occasion = parameter((dims.d_img + garment_state_dim, len(vocab.occasions)), rng)
        self.b_occasion = zeros_parameter((len(vocab.occasions),))
        self.w_category = parameter((slot_state_dim, len(vocab.categories)), rng)
        self.b_category = zeros_parameter((len(vocab.categories),))
        self.attr_heads: dict[str, tuple[Tensor, Tensor]] = {}
        for attr in vocab.attributes:
            self.attr_heads[attr.name] = (
                parameter((slot_state_dim, len(attr.values)), rng),
                zeros_parameter((len(attr.values),)),
            )

    def params(self) -> dict[str, Tensor]:
        out: dict[str, Tensor] = {"slot_embeddings": self.slot_embeddings}
        if self.contextual:
            out.update(self.garment_fwd.params("garment_fwd"))
            out.update(self.garment_bwd.params("garment_bwd"))
            out.update(self.slot_fwd.params("slot_fwd"))
            out.update(self.slot_bwd.params("slot_bwd"))
        out["w_occasion"] = self.w_occasion
        out["b_occasion"] = self.b_occasion
        out["w_category"] = self.w_category
        out["b_category"] = self.b_category
        for name, (w, b) in self.attr_heads.items():
            out[f"attr.{name}.w"] = w
            out[f"attr.{name}.b"] = b
        return out

    # -- forward -------------------------------------------------------------

    def _check_post(self, post: Post) -> None:
        if len(post.garments) == 0:
            raise ValueError(f"post {post.post_id}: zero garment regions (caller must skip)")
        if post.image_feature.shape[0] != self.dims.d_img:
            raise ValueError(
                f"post {post.post_id}: image feature dim {post.image_feature.shape[0]} "
                f"!= model d_img {self.dims.d_img}"
            )
        for g in post.garments:
            if g.feature.shape[0] != self.dims.d_reg:
                raise ValueError(
                    f"post {post.post_id}: region feature dim {g.feature.shape[0]} "
                    f"!= model d_reg {self.dims.d_reg}"
                )

    def forward_graph(self, posts: list[Post]) -> list[BucketGraph]:
        """Build the differentiable forward pass, bucketed by garment count."""
        for post in posts:
            self._check_post(post)
        buckets: dict[int, list[int]] = {}
        for i, post in enumerate(posts):
            buckets.setdefault(len(post.garments), []).append(i)

        graphs: list[BucketGraph] = []
        for n_garments in sorted(buckets):
            indices = buckets[n_garments]
            batch = len(indices)
            reg = np.stack(
                [[posts[i].garments[t].feature for t in range(n_garments)] for i in indices]
            )  # (batch, G, d_reg)
            img = Tensor(np.stack([posts[i].image_feature for i in indices]))

            garment_inputs = [Tensor(reg[:, t, :]) for t in range(n_garments)]
            if self.contextual:
                encoded = birnn_encode(self.garment_fwd, self.garment_bwd, garment_inputs)
                garment_states = [
                    concat([s, x], axis=1) for s, x in zip(encoded, garment_inputs)
                ]
            else:
                garment_states = garment_inputs

            pooled = garment_states[0]
            for s in garment_states[1:]:
                pooled = pooled + s
            pooled = pooled * (1.0 / n_garments)

            occ_logits = matmul(concat([img, pooled], axis=1), self.w_occasion) + self.b_occasion

            # garment-level rows, time-major: row t*batch + j
            context = concat(garment_states, axis=0) if n_garments > 1 else garment_states[0]
            rows = batch * n_garments
            slot_inputs = []
            for s in range(1 + len(self.vocab.attributes)):
                emb = take_rows(self.slot_embeddings, np.full(rows, s, dtype=np.intp))
                slot_inputs.append(concat([emb, context], axis=1))
            if self.contextual:
                slot_encoded = birnn_encode(self.slot_fwd, self.slot_bwd, slot_inputs)
                slot_states = [
                    concat([s, x], axis=1) for s, x in zip(slot_encoded, slot_inputs)
                ]
            else:
                slot_states = slot_inputs

            cat_logits = matmul(slot_states[0], self.w_category) + self.b_category
            attr_logits = {}
            for a, attr in enumerate(self.vocab.attributes):
                w, b = self.attr_heads[attr.name]
                attr_logits[attr.name] = matmul(slot_states[1 + a], w) + b

            graphs.append(
                BucketGraph(
                    post_indices=indices,
                    n_garments=n_garments,
                    occasion_logits=occ_logits,
                    category_logits=cat_logits,
                    attr_logits=attr_logits,
                )
            )
        return graphs

    def forward_batch(self, posts: list[Post]) -> list[ConceptPrediction]:
        """Normalized probability distributions for every task, per post."""
        with ad.no_grad():
            graphs = self.forward_graph(posts)
            out: list[ConceptPrediction | None] = [None] * len(posts)
            for g in graphs:
                batch = len(g.post_indices)
                occ = ad.softmax(g.occasion_logits, axis=-1).data
                cat = ad.softmax(g.category_logits, axis=-1).data
                attrs = {
                    name: ad.softmax(t, axis=-1).data for name, t in g.attr_logits.items()
                }
                for j, idx in enumerate(g.post_indices):
                    post = posts[idx]
                    garments = []
                    for t in range(g.n_garments):
                        row = t * batch + j
                        garments.append(
                            GarmentPrediction(
                                region_id=post.garments[t].region_id,
                                category_probs=cat[row].copy(),
                                value_probs={name: a[row].copy() for name, a in attrs.items()},
                            )
                        )
                    out[idx] = ConceptPrediction(
                        post_id=post.post_id,
                        occasion_probs=occ[j].copy(),
                        garments=garments,
                    )
        return out  # type: ignore[return-value]


def forward(model: ConceptModel, post: Post) -> ConceptPrediction:
    return model.forward_batch([post])[0]


def decode(prediction: ConceptPrediction, vocab: ConceptVocabulary) -> DecodedPost:
    """Hard labels per slot: argmax, ties broken by lowest vocabulary index."""
    garments = []
    for g in prediction.garments:
        garments.append(
            DecodedGarment(
                region_id=g.region_id,
                category=vocab.categories[int(np.argmax(g.category_probs))],
                values={
                    attr.name: attr.values[int(np.argmax(g.value_probs[attr.name]))]
                    for attr in vocab.attributes
                },
            )
        )
    return DecodedPost(
        post_id=prediction.post_id,
        occasion=vocab.occasions[int(np.argmax(prediction.occasion_probs))],
        garments=garments,
    )
