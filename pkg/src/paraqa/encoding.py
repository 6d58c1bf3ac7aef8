"""Reusable sequence encoder: embed -> dropout -> BiLSTM -> dropout.

The embedding banks are shared store entries ("embed.pretrained",
"embed.learned"); each encoder owns its LSTM parameters under its own
prefix, so the paraphrase scorer and the sentence-selection encoders can
coexist in one store without sharing recurrent weights.
"""

from __future__ import annotations

import numpy as np

from .errors import ShapeError
from .tensornet import LstmParams, ParamStore, Tensor, Vocab
from .tensornet import tensor as ag
from .tensornet.layers import bilstm_encode, dropout, embed, fast_encode
from .textkit import TokenSeq


def add_embedding_banks(store: ParamStore, vocab: Vocab, d: int,
                        pretrained_matrix=None):
    """Create the shared embedding banks once per store."""
    if vocab.pretrained_count:
        if pretrained_matrix is None or pretrained_matrix.shape != (
                vocab.pretrained_count, d):
            raise ShapeError("pretrained matrix must be (|pretrained|, d)")
        store.add("embed.pretrained", pretrained_matrix, trainable=False)
    store.add("embed.learned", np.zeros((len(vocab.learned), d)))


class SeqEncoder:
    def __init__(self, store: ParamStore, vocab: Vocab, n: int, d: int,
                 dropout_rate: float, prefix: str):
        self.store = store
        self.vocab = vocab
        self.n = n
        self.dropout_rate = dropout_rate
        self.fwd = LstmParams.create(store, f"{prefix}.fwd", n, d)
        self.bwd = LstmParams.create(store, f"{prefix}.bwd", n, d)

    def encode(self, seq: TokenSeq, training: bool = False, rng=None) -> Tensor:
        pre = (self.store["embed.pretrained"]
               if "embed.pretrained" in self.store else None)
        if not ag._grad_enabled and not training:
            return fast_encode(seq.tokens, self.vocab, pre,
                               self.store["embed.learned"], self.fwd, self.bwd)
        x = embed(seq.tokens, self.vocab, pre, self.store["embed.learned"])
        x = dropout(x, self.dropout_rate, training, rng)
        v = bilstm_encode(x, self.fwd, self.bwd)
        return dropout(v, self.dropout_rate, training, rng)
