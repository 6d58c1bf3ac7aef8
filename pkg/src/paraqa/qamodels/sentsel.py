"""Answer sentence selection: two separate BiLSTM encoders (questions and
sentences), a trilinear similarity squashed through a sigmoid, and the
optional word-matching count features combined through a small logistic
layer."""

from __future__ import annotations

import math

import numpy as np

from ..encoding import SeqEncoder
from ..tensornet import ParamStore, Tensor, Vocab, ag
from ..textkit import TokenSeq


class IdfTable:
    """Inverse document frequencies over a training sentence collection.

    idf(w) = log((N + 1) / (df(w) + 1)), where df counts sentences
    containing the token; unseen words get the maximal value log(N + 1).
    """

    def __init__(self, sentences):
        self.n_sentences = 0
        self.df: dict[str, int] = {}
        for sent in sentences:
            self.n_sentences += 1
            for tok in set(sent.tokens):
                self.df[tok] = self.df.get(tok, 0) + 1

    def idf(self, token: str) -> float:
        return math.log((self.n_sentences + 1) / (self.df.get(token, 0) + 1))

    def save(self, path):
        with open(path, "w", encoding="utf-8") as f:
            f.write(f"{self.n_sentences}\n")
            for tok in sorted(self.df):
                f.write(f"{tok}\t{self.df[tok]}\n")

    @classmethod
    def load(cls, path) -> "IdfTable":
        table = cls([])
        with open(path, encoding="utf-8") as f:
            lines = f.read().splitlines()
        table.n_sentences = int(lines[0])
        for line in lines[1:]:
            tok, df = line.split("\t")
            table.df[tok] = int(df)
        return table


def word_match_features(q: TokenSeq, sentence: TokenSeq,
                        idf: IdfTable | None = None) -> tuple[float, float]:
    """(count, idf-weighted count) of distinct question content words that
    occur in the sentence."""
    shared = {t for t in q.content_tokens() if t in set(sentence.tokens)}
    count = float(len(shared))
    if idf is None:
        return count, 0.0
    return count, float(sum(idf.idf(t) for t in shared))


class SentSelModel:
    """p(correct | q', sentence) via two task-specific encoders.

    With ``use_counts`` the pre-sigmoid model score is combined with the
    two word-matching features through a 3-weight logistic layer.
    """

    def __init__(self, store: ParamStore, vocab: Vocab, n: int, d: int,
                 dropout_rate: float = 0.0, use_counts: bool = False,
                 prefix: str = "sentsel"):
        self.store = store
        self.n = n
        self.use_counts = use_counts
        self.q_encoder = SeqEncoder(store, vocab, n, d, dropout_rate,
                                    f"{prefix}.q")
        self.s_encoder = SeqEncoder(store, vocab, n, d, dropout_rate,
                                    f"{prefix}.s")
        self.w = store.add(f"{prefix}.w", np.zeros(6 * n))
        self.b = store.add(f"{prefix}.b", np.zeros(1))
        if use_counts:
            self.cnt_w = store.add(f"{prefix}.cnt_w", np.zeros(3))
            self.cnt_b = store.add(f"{prefix}.cnt_b", np.zeros(1))

    def encode_question(self, q: TokenSeq, training=False, rng=None) -> Tensor:
        return self.q_encoder.encode(q, training, rng)

    def encode_sentence(self, s: TokenSeq, training=False, rng=None) -> Tensor:
        return self.s_encoder.encode(s, training, rng)

    def _raw_score(self, q_vec: Tensor, s_vec: Tensor) -> Tensor:
        feats = ag.concat([q_vec, s_vec, ag.mul(q_vec, s_vec)])
        return ag.add(ag.matmul(self.w, feats), self.b)

    def prob_from_vecs(self, q_vec: Tensor, s_vec: Tensor,
                       counts: tuple[float, float] | None = None) -> Tensor:
        score = self._raw_score(q_vec, s_vec)
        if self.use_counts:
            if counts is None:
                counts = (0.0, 0.0)
            z = ag.add(
                ag.matmul(
                    self.cnt_w,
                    ag.concat([score, Tensor(np.array(list(counts)))])),
                self.cnt_b)
            return ag.sigmoid(z)
        return ag.sigmoid(score)

    def prob(self, q: TokenSeq, sentence: TokenSeq, training: bool = False,
             rng=None, counts=None) -> Tensor:
        q_vec = self.encode_question(q, training, rng)
        s_vec = self.encode_sentence(sentence, training, rng)
        return self.prob_from_vecs(q_vec, s_vec, counts)
