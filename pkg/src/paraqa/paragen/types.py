"""Shared candidate/rule types for the paraphrase generators."""

from __future__ import annotations

from dataclasses import dataclass

from ..errors import InvalidArgumentError
from ..textkit import TokenSeq

WILDCARD = "__"

ORIGIN_IDENTITY = "identity"
ORIGIN_LEXICAL = "lexical"
ORIGIN_TEMPLATE = "template"
ORIGIN_PIVOT = "pivot"


@dataclass(frozen=True)
class RewriteRule:
    """A lexical (single word) or phrasal (multiword) substitution rule."""

    source: tuple[str, ...]
    target: tuple[str, ...]
    weight: float = 1.0

    def __post_init__(self):
        if not (1 <= len(self.source) <= 5 and 1 <= len(self.target) <= 5):
            raise InvalidArgumentError("rule phrases must have 1..5 tokens")
        if self.source == self.target:
            raise InvalidArgumentError("rule source equals target")


@dataclass(frozen=True)
class QuestionTemplate:
    """A token sequence with at most one wildcard slot."""

    tokens: tuple[str, ...]

    def __post_init__(self):
        if self.tokens.count(WILDCARD) > 1:
            raise InvalidArgumentError("template may contain at most one wildcard")

    @property
    def wildcards(self) -> int:
        return self.tokens.count(WILDCARD)

    def text(self) -> str:
        return " ".join(self.tokens)


@dataclass(frozen=True)
class TemplateRulePair:
    """A mined (source template, target template) rewrite with PMI weight."""

    source: QuestionTemplate
    target: QuestionTemplate
    pmi: float
    cooccur_count: int

    def __post_init__(self):
        if self.source.wildcards != self.target.wildcards:
            raise InvalidArgumentError("templates must have equal wildcard counts")
        if self.cooccur_count <= 5:
            raise InvalidArgumentError("pair co-occurrence must exceed 5 clusters")


@dataclass(frozen=True)
class ParaphraseCandidate:
    tokens: TokenSeq
    origin: str
    gen_score: float

    def text(self) -> str:
        return self.tokens.text()


@dataclass(frozen=True)
class PivotSet:
    """K pivot sequences with renormalized probabilities."""

    pivots: tuple[tuple[tuple[str, ...], float], ...]

    @classmethod
    def from_weighted(cls, weighted) -> "PivotSet":
        items = [(tuple(seq), float(p)) for seq, p in weighted]
        if not items:
            raise InvalidArgumentError("pivot set must be non-empty")
        if any(p <= 0 for _, p in items):
            raise InvalidArgumentError("pivot probabilities must be positive")
        total = sum(p for _, p in items)
        return cls(tuple((seq, p / total) for seq, p in items))

    def __len__(self):
        return len(self.pivots)
