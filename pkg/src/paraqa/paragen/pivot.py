"""Round-trip paraphrasing through pivot sequences, with fused decoding.

The real translation systems are replaced by :class:`SeqModelInterface`:
anything exposing a source-conditioned next-token distribution and k-best
full translations.  The fusion decoder runs beam search where each step's
token probability is the pivot-probability-weighted sum of the per-pivot
conditional distributions, so hypotheses are scored jointly against all
pivots instead of trusting a single translation.

Two implementations ship with the package: a table-driven toy model and
a tiny trainable recurrent model built on the tensornet substrate.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod

import numpy as np

from ..errors import InvalidArgumentError
from ..tensornet import LstmParams, ParamStore, Tensor, ag
from ..tensornet.layers import bilstm_encode, lstm_step
from ..tensornet.optim import clip_grad_norm, init_uniform, rmsprop_update
from ..textkit import token_seq
from .types import ORIGIN_PIVOT, ParaphraseCandidate, PivotSet

EOS_TOKEN = "</s>"
BOS_TOKEN = "<s>"

_SUM_TOL = 1e-9


class SeqModelInterface(ABC):
    """A conditional sequence model over a fixed vocabulary plus EOS."""

    @abstractmethod
    def next_dist(self, source, prefix) -> dict[str, float]:
        """Distribution over vocabulary plus EOS, given source and prefix."""

    @abstractmethod
    def kbest(self, source, k: int) -> list[tuple[tuple[str, ...], float]]:
        """The k most probable full output sequences with probabilities."""


class TableSeqModel(SeqModelInterface):
    """Lookup-table model: explicit k-best lists and conditional rows."""

    def __init__(self, translations=None, cond=None):
        self.translations = {
            tuple(src): [(tuple(seq), float(p)) for seq, p in outs]
            for src, outs in (translations or {}).items()
        }
        self.cond = {}
        for (src, prefix), dist in (cond or {}).items():
            total = sum(dist.values())
            if abs(total - 1.0) > _SUM_TOL:
                raise InvalidArgumentError(
                    f"conditional for {src!r}|{prefix!r} sums to {total}")
            self.cond[(tuple(src), tuple(prefix))] = dict(dist)

    def next_dist(self, source, prefix):
        key = (tuple(source), tuple(prefix))
        if key not in self.cond:
            # unknown context: emit EOS with certainty
            return {EOS_TOKEN: 1.0}
        return self.cond[key]

    def kbest(self, source, k):
        outs = self.translations.get(tuple(source), [])
        return outs[:k]


def fused_step_dist(pivots: PivotSet, back_model: SeqModelInterface,
                    prefix) -> dict[str, float]:
    """Convex combination of per-pivot next-token distributions."""
    fused: dict[str, float] = {}
    for seq, weight in pivots.pivots:
        for token, p in back_model.next_dist(seq, prefix).items():
            fused[token] = fused.get(token, 0.0) + weight * p
    return fused


def fuse_decode(pivots: PivotSet, back_model: SeqModelInterface,
                beam_width: int, max_len: int,
                top: int = 15) -> list[ParaphraseCandidate]:
    """Beam search under the fused distribution.

    A hypothesis completes at the end-of-sequence symbol (its probability
    included, and at least one real token required first) or by reaching
    ``max_len`` tokens.  Completed hypotheses are ranked by total log
    probability; ties break on token order for determinism.
    """
    if beam_width < 1:
        raise InvalidArgumentError(f"beam_width must be >= 1: {beam_width}")
    if max_len < 1:
        raise InvalidArgumentError(f"max_len must be >= 1: {max_len}")
    if len(pivots) == 0:
        raise InvalidArgumentError("empty pivot set")

    live: list[tuple[tuple[str, ...], float]] = [((), 0.0)]
    completed: list[tuple[tuple[str, ...], float]] = []
    for _ in range(max_len):
        grown: list[tuple[tuple[str, ...], float]] = []
        for prefix, logp in live:
            fused = fused_step_dist(pivots, back_model, prefix)
            for token in sorted(fused):
                p = fused[token]
                if p <= 0.0:
                    continue
                if token == EOS_TOKEN:
                    if prefix:
                        completed.append((prefix, logp + math.log(p)))
                else:
                    grown.append((prefix + (token,), logp + math.log(p)))
        grown.sort(key=lambda h: (-h[1], h[0]))
        live = grown[:beam_width]
    completed.extend(live)
    completed.sort(key=lambda h: (-h[1], h[0]))
    return [
        ParaphraseCandidate(tokens=token_seq(seq), origin=ORIGIN_PIVOT,
                            gen_score=logp)
        for seq, logp in completed[:top]
    ]


def load_table_model(path) -> TableSeqModel:
    """Table-model file: ``pair<TAB>src<TAB>out<TAB>prob`` rows for k-best
    translations and ``cond<TAB>src<TAB>prefix|-<TAB>token<TAB>prob`` rows
    for conditional distributions; token sequences are space-joined."""
    translations: dict = {}
    cond_rows: dict = {}
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            kind = parts[0]
            if kind == "pair" and len(parts) == 4:
                src = tuple(parts[1].split(" "))
                out = tuple(parts[2].split(" "))
                translations.setdefault(src, []).append((out, float(parts[3])))
            elif kind == "cond" and len(parts) == 5:
                src = tuple(parts[1].split(" "))
                prefix = () if parts[2] == "-" else tuple(parts[2].split(" "))
                cond_rows.setdefault((src, prefix), {})[parts[3]] = float(parts[4])
            else:
                raise ValueError(f"{path}:{lineno}: malformed table-model row")
    return TableSeqModel(translations=translations, cond=cond_rows)


class PivotParaphraser:
    """Forward model to k-best pivots, fused back-decoding to candidates."""

    def __init__(self, forward_model: SeqModelInterface,
                 back_model: SeqModelInterface, k: int = 3,
                 beam_width: int = 8, max_len: int = 20, top: int = 15):
        self.forward_model = forward_model
        self.back_model = back_model
        self.k = k
        self.beam_width = beam_width
        self.max_len = max_len
        self.top = top

    def generate(self, tokens) -> list[ParaphraseCandidate]:
        weighted = self.forward_model.kbest(tuple(tokens), self.k)
        weighted = [(seq, p) for seq, p in weighted if p > 0]
        if not weighted:
            return []
        pivots = PivotSet.from_weighted(weighted)
        return fuse_decode(pivots, self.back_model, self.beam_width,
                           self.max_len, self.top)


class TinyRecurrentSeqModel(SeqModelInterface):
    """Trainable conditional sequence model: BiLSTM source encoder and an
    LSTM decoder over a small token vocabulary."""

    def __init__(self, vocab_tokens, n: int = 8, d: int = 8, seed: int = 0):
        self.tokens = sorted(set(vocab_tokens))
        self.out_symbols = self.tokens + [EOS_TOKEN]
        self.in_symbols = [BOS_TOKEN] + self.tokens
        self._tok_idx = {t: i for i, t in enumerate(self.tokens)}
        self._in_idx = {t: i for i, t in enumerate(self.in_symbols)}
        self.n = n
        self.store = ParamStore()
        self.store.add("emb", np.zeros((len(self.in_symbols), d)))
        self.enc_fwd = LstmParams.create(self.store, "enc_fwd", n, d)
        self.enc_bwd = LstmParams.create(self.store, "enc_bwd", n, d)
        self.store.add("w_init", np.zeros((n, 2 * n)))
        self.store.add("b_init", np.zeros(n))
        self.dec = LstmParams.create(self.store, "dec", n, d)
        self.store.add("w_out", np.zeros((len(self.out_symbols), n)))
        self.store.add("b_out", np.zeros(len(self.out_symbols)))
        init_uniform(self.store, seed=seed)

    def _embed_rows(self, symbols):
        emb = self.store["emb"]
        return [ag.take_row(emb, self._in_idx[s]) for s in symbols]

    def _decode_states(self, source, prefix):
        rows = self._embed_rows(s for s in source if s in self._in_idx)
        if not rows:
            rows = self._embed_rows([BOS_TOKEN])
        ctx = bilstm_encode(ag.vstack(rows), self.enc_fwd, self.enc_bwd)
        h = ag.tanh(ag.add(ag.matmul(self.store["w_init"], ctx),
                           self.store["b_init"]))
        c = Tensor(np.zeros(self.n))
        steps = [BOS_TOKEN] + [t for t in prefix]
        dists = []
        for sym in steps:
            x = self._embed_rows([sym])[0]
            h, c = lstm_step(h, c, x, self.dec)
            logits = ag.add(ag.matmul(self.store["w_out"], h),
                            self.store["b_out"])
            dists.append(ag.softmax(logits))
        return dists

    def next_dist(self, source, prefix):
        with ag.no_grad():
            dist = self._decode_states(source, prefix)[-1]
        return {s: float(p) for s, p in zip(self.out_symbols, dist.data)}

    def kbest(self, source, k):
        pivots = PivotSet.from_weighted([(tuple(source), 1.0)])
        cands = fuse_decode(pivots, self, beam_width=max(k, 4),
                            max_len=12, top=k)
        return [(c.tokens.tokens, math.exp(c.gen_score)) for c in cands]

    def fit(self, pairs, epochs: int = 50, lr: float = 0.05,
            clip_norm: float = 5.0):
        """Teacher-forced cross-entropy over (source, target) token pairs."""
        losses = []
        for _ in range(epochs):
            total = 0.0
            for source, target in pairs:
                self.store.zero_grad()
                dists = self._decode_states(tuple(source), tuple(target))
                nll = []
                symbols = list(target) + [EOS_TOKEN]
                for dist, sym in zip(dists, symbols):
                    p = ag.take_row(dist, self.out_symbols.index(sym))
                    nll.append(ag.neg(ag.log(ag.clip(p, 1e-12, 1.0))))
                loss = ag.scale(ag.tsum(ag.concat(nll)), 1.0 / len(nll))
                ag.backward(loss)
                grads = clip_grad_norm(self.store.grads(), clip_norm)
                rmsprop_update(self.store, grads, lr=lr)
                total += loss.item()
            losses.append(total / len(pairs))
        return losses
