"""Model checkpointing: versioned npz dump of every tensor with shapes.

Arrays are stored as float64, so load after save is bit-exact.
"""

from __future__ import annotations

import io
import json
from pathlib import Path

import numpy as np

from ..vocab import ConceptVocabulary, vocabulary_from_dict
from .network import ConceptModel, ModelDims
from .noise import NoiseModel

CHECKPOINT_FORMAT = "fashionkb-checkpoint"
CHECKPOINT_VERSION = 1


class CheckpointError(ValueError):
    pass


def save_checkpoint(model: ConceptModel, noise: NoiseModel | None, path: str | Path) -> None:
    meta = {
        "format": CHECKPOINT_FORMAT,
        "version": CHECKPOINT_VERSION,
        "vocabulary": model.vocab.to_dict(),
        "dims": {
            "d_img": model.dims.d_img,
            "d_reg": model.dims.d_reg,
            "h_garment": model.dims.h_garment,
            "h_slot": model.dims.h_slot,
            "slot_emb": model.dims.slot_emb,
        },
        "contextual": model.contextual,
        "seed": model.seed,
        "has_noise": noise is not None and noise.trainable,
    }
    arrays = {f"model.{k}": v.data for k, v in model.params().items()}
    if noise is not None and noise.trainable:
        arrays.update({k: v.data for k, v in noise.params().items()})
    buf = io.BytesIO()
    np.savez(buf, __meta__=np.frombuffer(json.dumps(meta, sort_keys=True).encode(), dtype=np.uint8), **arrays)
    Path(path).write_bytes(buf.getvalue())


def load_checkpoint(path: str | Path) -> tuple[ConceptModel, NoiseModel | None, ConceptVocabulary]:
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    try:
        with np.load(path) as data:
            meta = json.loads(bytes(data["__meta__"]).decode())
            arrays = {k: data[k] for k in data.files if k != "__meta__"}
    except (OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    if meta.get("format") != CHECKPOINT_FORMAT:
        raise CheckpointError(f"{path} is not a model checkpoint")
    if meta.get("version") != CHECKPOINT_VERSION:
        raise CheckpointError(
            f"checkpoint version {meta.get('version')} unsupported (want {CHECKPOINT_VERSION})"
        )
    vocab = vocabulary_from_dict(meta["vocabulary"])
    model = ConceptModel(
        vocab,
        dims=ModelDims(**meta["dims"]),
        contextual=meta["contextual"],
        seed=meta["seed"],
    )
    for name, tensor in model.params().items():
        stored = arrays.get(f"model.{name}")
        if stored is None or stored.shape != tensor.data.shape:
            raise CheckpointError(f"checkpoint missing or misshaped tensor {name!r}")
        tensor.data = stored.astype(np.float64)
    noise = None
    if meta["has_noise"]:
        noise = NoiseModel(vocab)
        for name, tensor in noise.params().items():
            stored = arrays.get(name)
            if stored is None or stored.shape != tensor.data.shape:
                raise CheckpointError(f"checkpoint missing or misshaped tensor {name!r}")
            tensor.data = stored.astype(np.float64)
    return model, noise, vocab
