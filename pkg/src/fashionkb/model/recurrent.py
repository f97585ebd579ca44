"""Gated recurrent cells and bi-directional sequence encoding."""

from __future__ import annotations

import numpy as np

from .autodiff import (
    Tensor,
    cols,
    concat,
    matmul,
    parameter,
    reshape,
    sigmoid,
    tanh,
    zeros_parameter,
)


class GruCell:
    """Gated recurrent cell with update/reset gates and a candidate transform.

    The two gates share one fused matmul over [x | h]; the candidate
    transform acts on [x | r*h].
    """

    def __init__(self, input_dim: int, hidden_dim: int, rng: np.random.Generator):
        self.input_dim = input_dim
        self.hidden_dim = hidden_dim
        self.w_gates = parameter((input_dim + hidden_dim, 2 * hidden_dim), rng)
        self.b_gates = zeros_parameter((2 * hidden_dim,))
        self.w_cand = parameter((input_dim + hidden_dim, hidden_dim), rng)
        self.b_cand = zeros_parameter((hidden_dim,))

    def params(self, prefix: str) -> dict[str, Tensor]:
        return {
            f"{prefix}.w_gates": self.w_gates,
            f"{prefix}.b_gates": self.b_gates,
            f"{prefix}.w_cand": self.w_cand,
            f"{prefix}.b_cand": self.b_cand,
        }

    def step(self, x: Tensor, h: Tensor) -> Tensor:
        xh = concat([x, h], axis=1)
        gates = sigmoid(matmul(xh, self.w_gates) + self.b_gates)
        z = cols(gates, 0, self.hidden_dim)
        r = cols(gates, self.hidden_dim, 2 * self.hidden_dim)
        xrh = concat([x, r * h], axis=1)
        n = tanh(matmul(xrh, self.w_cand) + self.b_cand)
        return h + z * (n - h)


def birnn_encode(cell_fwd: GruCell, cell_bwd: GruCell, sequence: list[Tensor]) -> list[Tensor]:
    """Encode a sequence with one forward and one backward cell.

    Output t is [forward state over prefix <= t | backward state over
    suffix >= t], so its dimension is the two hidden sizes combined.
    Accepts 1-D vectors or 2-D (batch, dim) tensors; 1-D in, 1-D out.
    """
    if len(sequence) == 0:
        raise ValueError("cannot encode an empty sequence")
    one_d = sequence[0].data.ndim == 1
    xs = []
    for x in sequence:
        if x.data.ndim == 1:
            x = reshape(x, (1, x.data.shape[0]))
        if x.data.shape[1] != cell_fwd.input_dim or x.data.shape[1] != cell_bwd.input_dim:
            raise ValueError(
                f"element dim {x.data.shape[1]} does not match cell input dims "
                f"({cell_fwd.input_dim}, {cell_bwd.input_dim})"
            )
        xs.append(x)
    batch = xs[0].data.shape[0]

    h = Tensor(np.zeros((batch, cell_fwd.hidden_dim)))
    forward_states = []
    for x in xs:
        h = cell_fwd.step(x, h)
        forward_states.append(h)

    h = Tensor(np.zeros((batch, cell_bwd.hidden_dim)))
    backward_states: list[Tensor] = []
    for x in reversed(xs):
        h = cell_bwd.step(x, h)
        backward_states.append(h)
    backward_states.reverse()

    out = [concat([f, b], axis=1) for f, b in zip(forward_states, backward_states)]
    if one_d:
        out = [reshape(o, (o.data.shape[1],)) for o in out]
    return out
