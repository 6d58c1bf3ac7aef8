"""Toy knowledge-base QA: exact-match entity linking, subgraph candidate
generation by traversal, a documented feature set, and a logistic
regression scorer that predicts how likely a subgraph yields the answer.

This stands in for a full KB stack: the store is a TSV triple file plus
an alias table, linking is longest-match string lookup, and features are
a small named set (token overlap with relation words, per-relation
indicators, path length, constraint presence, denotation-size bucket)
chosen to make small experiments discriminative.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from ..errors import InvalidArgumentError
from ..tensornet import ParamStore, Tensor, ag
from ..textkit import TokenSeq, normalize, stem
from ..textkit import is_stopword

log = logging.getLogger(__name__)


class ToyKB:
    """Triples plus an alias table mapping surface strings to entity ids."""

    def __init__(self, triples, aliases):
        self.triples = set(tuple(t) for t in triples)
        self.aliases = {}
        for surface, entity in aliases:
            key = surface if isinstance(surface, tuple) else normalize(surface).tokens
            self.aliases[key] = entity
        self.relations = sorted({r for _, r, _ in self.triples})
        self._by_subject: dict[str, list] = {}
        for s, r, o in sorted(self.triples):
            self._by_subject.setdefault(s, []).append((r, o))

    def outgoing(self, entity):
        return self._by_subject.get(entity, [])

    @classmethod
    def load(cls, triples_path, aliases_path):
        triples = []
        with open(triples_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 3:
                    raise ValueError(f"{triples_path}:{lineno}: expected 3 columns")
                triples.append(tuple(parts))
        aliases = []
        with open(aliases_path, encoding="utf-8") as f:
            for lineno, line in enumerate(f, start=1):
                line = line.rstrip("\n")
                if not line or line.startswith("#"):
                    continue
                parts = line.split("\t")
                if len(parts) != 2:
                    raise ValueError(f"{aliases_path}:{lineno}: expected 2 columns")
                aliases.append((parts[0], parts[1]))
        return cls(triples, aliases)


@dataclass(frozen=True)
class SubgraphCandidate:
    """Topic entity, 1-2 relation path, optional intermediate-node
    constraint, and the answer set the query denotes."""

    topic: str
    path: tuple[str, ...]
    constraint: tuple[str, str] | None
    denotation: frozenset[str]
    f1_vs_gold: float = 0.0


def link_entities(q: TokenSeq, kb: ToyKB) -> list[str]:
    """Longest-match alias lookup; returns non-overlapping matches, longest
    first.  No match yields an empty list (the caller skips the instance)."""
    matches = []
    for alias_tokens, entity in kb.aliases.items():
        k = len(alias_tokens)
        for i in range(len(q.tokens) - k + 1):
            if q.tokens[i:i + k] == alias_tokens:
                matches.append((i, k, entity))
    matches.sort(key=lambda m: (-m[1], m[0], m[2]))
    taken: list[tuple[int, int]] = []
    out = []
    for i, k, entity in matches:
        if any(i < t_i + t_k and t_i < i + k for t_i, t_k in taken):
            continue
        taken.append((i, k))
        out.append(entity)
    if not out:
        log.warning("no entity link for question: %s", q.text())
    return out


def generate_subgraphs(entities, kb: ToyKB, max_hops: int = 2,
                       gold: frozenset | None = None) -> list[SubgraphCandidate]:
    """All 1-relation paths and (optionally constrained) 2-relation paths
    from each topic entity, with denotations computed by exact traversal.
    Candidates with empty denotations are dropped."""
    if not entities:
        raise InvalidArgumentError("entity list is empty")
    found: dict[tuple, set] = {}
    for e in entities:
        for r1, m in kb.outgoing(e):
            found.setdefault((e, (r1,), None), set()).add(m)
        if max_hops < 2:
            continue
        # group intermediates per first relation
        firsts: dict[str, set] = {}
        for r1, m in kb.outgoing(e):
            firsts.setdefault(r1, set()).add(m)
        for r1, mids in firsts.items():
            seconds: dict[str, set] = {}
            constraints: dict[tuple, set] = {}
            for m in mids:
                for r2, o in kb.outgoing(m):
                    seconds.setdefault(r2, set()).add(o)
            for r2 in seconds:
                key = (e, (r1, r2), None)
                found.setdefault(key, set()).update(seconds[r2])
                # one constraint triple restricting the intermediate node
                for rc, v in {(rc, v) for m in mids for rc, v in kb.outgoing(m)}:
                    if rc == r2:
                        continue
                    allowed = {m for m in mids if (m, rc, v) in kb.triples}
                    deno = {o for m in allowed for r, o in kb.outgoing(m)
                            if r == r2}
                    if deno:
                        found.setdefault((e, (r1, r2), (rc, v)), set()).update(deno)
    out = []
    for (topic, path, constraint), deno in found.items():
        if not deno:
            continue
        f1 = f1_vs_gold(deno, gold) if gold else 0.0
        out.append(SubgraphCandidate(topic, path, constraint,
                                     frozenset(deno), f1))
    out.sort(key=lambda c: (c.path, c.constraint or ("", ""), c.topic))
    return out


def f1_vs_gold(denotation, gold) -> float:
    """Set F1 = 2PR/(P+R); 0 when the intersection is empty."""
    if not gold:
        raise InvalidArgumentError("gold answer set is empty")
    denotation = set(denotation)
    gold = set(gold)
    inter = len(denotation & gold)
    if inter == 0:
        return 0.0
    p = inter / len(denotation)
    r = inter / len(gold)
    return 2 * p * r / (p + r)


class KBFeatureSpace:
    """Fixed-length named features over (paraphrase, subgraph) pairs."""

    _CARD_BUCKETS = 3

    def __init__(self, kb: ToyKB):
        self.relations = list(kb.relations)
        self.names = (
            ["overlap", "path_len", "has_constraint",
             "card_1", "card_2_3", "card_4up"]
            + [f"rel::{r}" for r in self.relations]
        )
        self._rel_index = {r: i for i, r in enumerate(self.relations)}
        self._rel_words = {
            r: {stem(w) for w in _relation_words(r)} for r in self.relations
        }

    @property
    def dim(self) -> int:
        return len(self.names)

    def features(self, q: TokenSeq, cand: SubgraphCandidate) -> np.ndarray:
        vec = np.zeros(self.dim)
        rel_words = set()
        for r in cand.path:
            rel_words |= self._rel_words.get(r, set())
        overlap = len({t for t in q.content_tokens() if t in rel_words})
        vec[0] = overlap
        vec[1] = len(cand.path)
        vec[2] = 1.0 if cand.constraint else 0.0
        card = len(cand.denotation)
        vec[3] = 1.0 if card == 1 else 0.0
        vec[4] = 1.0 if 2 <= card <= 3 else 0.0
        vec[5] = 1.0 if card >= 4 else 0.0
        for r in cand.path:
            idx = self._rel_index.get(r)
            if idx is not None:
                vec[6 + idx] = 1.0
        return vec


def _relation_words(relation: str) -> list[str]:
    out = []
    for piece in relation.replace(".", "_").split("_"):
        piece = piece.strip().lower()
        if piece and not is_stopword(piece):
            out.append(piece)
    return out


class KbModel:
    """Logistic regression over subgraph features; zero-initialized so an
    untrained model is indifferent (probability one half) between
    candidates, including relations never seen in training."""

    def __init__(self, store: ParamStore, feature_space: KBFeatureSpace,
                 prefix: str = "kb"):
        self.store = store
        self.space = feature_space
        self.w = store.add(f"{prefix}.w", np.zeros(feature_space.dim))
        self.b = store.add(f"{prefix}.b", np.zeros(1))

    def prob(self, features: np.ndarray) -> Tensor:
        """sigmoid(w . f + b) for one feature vector (length-1 tensor)."""
        return ag.sigmoid(ag.add(ag.matmul(self.w, Tensor(features)), self.b))

    def probs(self, feature_matrix: np.ndarray) -> Tensor:
        """Candidate probabilities for a (C, F) feature matrix."""
        logits = ag.add(ag.matmul(Tensor(feature_matrix), self.w),
                        ag.mul(self.b, Tensor(np.ones(feature_matrix.shape[0]))))
        return ag.sigmoid(logits)
