"""Embedding lookup, LSTM cell, bidirectional encoding, dropout."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError, ShapeError
from . import tensor as ag
from .store import ParamStore, Vocab
from .tensor import Tensor


@dataclass
class LstmParams:
    """Gate parameters for one direction.

    Each weight matrix is shaped (n, n + d) and multiplies the
    concatenation [h_prev, x]; biases have length n.
    """

    w_input: Tensor
    b_input: Tensor
    w_forget: Tensor
    b_forget: Tensor
    w_output: Tensor
    b_output: Tensor
    w_cand: Tensor
    b_cand: Tensor

    @property
    def hidden_size(self) -> int:
        return self.w_input.data.shape[0]

    @property
    def input_size(self) -> int:
        return self.w_input.data.shape[1] - self.w_input.data.shape[0]

    @classmethod
    def create(cls, store: ParamStore, prefix: str, n: int, d: int,
               trainable: bool = True) -> "LstmParams":
        def gate(name):
            w = store.add(f"{prefix}.w_{name}", np.zeros((n, n + d)), trainable)
            b = store.add(f"{prefix}.b_{name}", np.zeros(n), trainable)
            return w, b

        wi, bi = gate("input")
        wf, bf = gate("forget")
        wo, bo = gate("output")
        wc, bc = gate("cand")
        return cls(wi, bi, wf, bf, wo, bo, wc, bc)


def embed(tokens, vocab: Vocab, pretrained: Tensor | None, learned: Tensor) -> Tensor:
    """Look up embeddings for a token sequence, wrapped with start/end symbols.

    Unknown tokens map to the unknown-symbol row.  Row t of the result is
    the embedding of the t-th (wrapped) token.
    """
    indices = vocab.wrap_indices(tokens)
    split = vocab.pretrained_count
    rows = []
    for idx in indices:
        if idx < split:
            rows.append(ag.take_row(pretrained, idx))
        else:
            rows.append(ag.take_row(learned, idx - split))
    return ag.vstack(rows)


def lstm_step(h_prev: Tensor, c_prev: Tensor, x: Tensor, p: LstmParams):
    """One gated update: sigmoid input/forget/output gates, tanh candidate."""
    n = p.hidden_size
    if h_prev.data.shape != (n,) or c_prev.data.shape != (n,):
        raise ShapeError(f"state size mismatch: expected ({n},)")
    if x.data.shape != (p.input_size,):
        raise ShapeError(
            f"input size mismatch: expected ({p.input_size},), got {x.data.shape}"
        )
    z = ag.concat([h_prev, x])
    i = ag.sigmoid(ag.add(ag.matmul(p.w_input, z), p.b_input))
    f = ag.sigmoid(ag.add(ag.matmul(p.w_forget, z), p.b_forget))
    o = ag.sigmoid(ag.add(ag.matmul(p.w_output, z), p.b_output))
    g = ag.tanh(ag.add(ag.matmul(p.w_cand, z), p.b_cand))
    c = ag.add(ag.mul(f, c_prev), ag.mul(i, g))
    h = ag.mul(o, ag.tanh(c))
    return h, c


def bilstm_encode(x: Tensor, fwd: LstmParams, bwd: LstmParams) -> Tensor:
    """Encode a (T, d) input; returns [h_fwd_T, h_bwd_1] of length 2n."""
    T = x.data.shape[0]
    if T < 1:
        raise ShapeError("empty input sequence")
    n = fwd.hidden_size
    zero = Tensor(np.zeros(n))
    h = c = zero
    for t in range(T):
        h, c = lstm_step(h, c, ag.take_row(x, t), fwd)
    h_fwd = h
    zero_b = Tensor(np.zeros(bwd.hidden_size))
    h = c = zero_b
    for t in range(T - 1, -1, -1):
        h, c = lstm_step(h, c, ag.take_row(x, t), bwd)
    return ag.concat([h_fwd, h])


def _fast_direction(p: LstmParams, rows) -> np.ndarray:
    """Pure-numpy LSTM sweep; same arithmetic as the taped path.

    The four gate matrices are stacked so each step is one matvec; row
    dot products are unchanged, so results stay bitwise identical."""
    n = p.hidden_size
    h = np.zeros(n)
    c = np.zeros(n)
    w_all = np.concatenate([p.w_input.data, p.w_forget.data,
                            p.w_output.data, p.w_cand.data])
    b_all = np.concatenate([p.b_input.data, p.b_forget.data,
                            p.b_output.data, p.b_cand.data])
    for x in rows:
        z = np.concatenate([h, x])
        pre = w_all @ z + b_all
        gates = 1.0 / (1.0 + np.exp(-pre[:3 * n]))
        g = np.tanh(pre[3 * n:])
        c = gates[n:2 * n] * c + gates[:n] * g
        h = gates[2 * n:] * np.tanh(c)
    return h


def fast_encode(tokens, vocab: Vocab, pretrained: Tensor | None,
                learned: Tensor, fwd: LstmParams, bwd: LstmParams) -> Tensor:
    """Gradient-free embed + BiLSTM pass, used for evaluation and for
    finite-difference loss probes; numerically identical to the taped
    pipeline (same operations in the same order)."""
    idx = np.array(vocab.wrap_indices(tokens))
    split = vocab.pretrained_count
    d = learned.data.shape[1]
    rows = np.empty((len(idx), d))
    pre_mask = idx < split
    if pre_mask.any():
        rows[pre_mask] = pretrained.data[idx[pre_mask]]
    if (~pre_mask).any():
        rows[~pre_mask] = learned.data[idx[~pre_mask] - split]
    out = np.concatenate([_fast_direction(fwd, rows),
                          _fast_direction(bwd, rows[::-1])])
    return Tensor(out)


def dropout(x: Tensor, rate: float, training: bool,
            rng: np.random.Generator | None = None) -> Tensor:
    """Inverted dropout: scale survivors by 1/(1-rate); identity at eval."""
    if not 0.0 <= rate < 1.0:
        raise InvalidArgumentError(f"dropout rate must be in [0, 1): {rate}")
    if not training or rate == 0.0:
        return x
    if rng is None:
        raise InvalidArgumentError("training-mode dropout needs an rng stream")
    mask = (rng.random(x.data.shape) >= rate) / (1.0 - rate)
    return ag.mul(x, Tensor(mask))
