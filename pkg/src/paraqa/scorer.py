"""The paraphrase scoring model.

A shared bidirectional LSTM encodes the question and each candidate
paraphrase into 2n-dimensional vectors; a trilinear form over
[q, q', q (.) q'] produces a real score, and the scores are softmax
normalized over the candidate set (original question included), yielding
a proper distribution that never hard-prunes any paraphrase.
"""

from __future__ import annotations

import numpy as np

from .encoding import SeqEncoder, add_embedding_banks
from .errors import ShapeError
from .tensornet import ParamStore, Tensor, Vocab, ag
from .textkit import TokenSeq


def normalize_scores(scores) -> list[float]:
    """Softmax with max subtraction; input is a non-empty list of reals."""
    arr = np.asarray(list(scores), dtype=np.float64)
    if arr.size == 0:
        raise ShapeError("cannot normalize an empty score list")
    shifted = arr - arr.max()
    e = np.exp(shifted)
    return list(e / e.sum())


class ScorerModel:
    """Shared encoder plus trilinear scorer over a ParamStore.

    The scoring vector has length 6n: the concatenation [q, q', q (.) q']
    of two 2n encodings and their elementwise product.
    """

    # kept as a staticmethod alias so callers can set up a store through
    # the scorer alone
    add_embedding_banks = staticmethod(add_embedding_banks)

    def __init__(self, store: ParamStore, vocab: Vocab, n: int, d: int,
                 dropout_rate: float = 0.0, prefix: str = "scorer"):
        self.store = store
        self.vocab = vocab
        self.n = n
        self.d = d
        self.encoder = SeqEncoder(store, vocab, n, d, dropout_rate, prefix)
        self.w_s = store.add(f"{prefix}.w_s", np.zeros(6 * n))
        self.b_s = store.add(f"{prefix}.b_s", np.zeros(1))

    @property
    def fwd(self):
        return self.encoder.fwd

    @property
    def bwd(self):
        return self.encoder.bwd

    def encode(self, seq: TokenSeq, training: bool = False, rng=None) -> Tensor:
        """embed -> dropout -> BiLSTM -> dropout; returns a 2n vector."""
        return self.encoder.encode(seq, training, rng)

    def score(self, q_vec: Tensor, p_vec: Tensor) -> Tensor:
        """Trilinear score w_s . [q, q', q (.) q'] + b_s (length-1 tensor)."""
        if q_vec.data.shape != (2 * self.n,) or p_vec.data.shape != (2 * self.n,):
            raise ShapeError(f"score expects two vectors of length {2 * self.n}")
        feats = ag.concat([q_vec, p_vec, ag.mul(q_vec, p_vec)])
        return ag.add(ag.matmul(self.w_s, feats), self.b_s)

    def weights(self, question: TokenSeq, candidates, training: bool = False,
                rng=None) -> Tensor:
        """Normalized paraphrase weights over ``candidates`` (length-m tensor)."""
        q_vec = self.encode(question, training, rng)
        cache = {question.tokens: q_vec} if not training else None
        scores = []
        for c in candidates:
            if cache is not None and c.tokens in cache:
                c_vec = cache[c.tokens]
            else:
                c_vec = self.encode(c, training, rng)
                if cache is not None:
                    cache[c.tokens] = c_vec
            scores.append(self.score(q_vec, c_vec))
        return ag.softmax(ag.concat(scores))

    def score_value(self, question: TokenSeq, paraphrase: TokenSeq) -> float:
        """Frozen-parameter convenience used by the pair-classification baseline."""
        with ag.no_grad():
            q = self.encode(question)
            p = self.encode(paraphrase)
            return float(self.score(q, p).data[0])
