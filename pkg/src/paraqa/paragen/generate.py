"""Candidate-set assembly across the three generators.

Generators run in a fixed order (lexical, template, pivot), their outputs
are deduplicated on normalized tokens, candidates that only rewrite
stopwords or punctuation are dropped, and the identity candidate is
appended exactly once, so the returned list always represents the
candidate set including the original question.  Any subset of generators
may be disabled, which is how the per-generator ablations run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from ..textkit import TokenSeq
from .lexical import apply_lexical_rules
from .pivot import PivotParaphraser
from .templates import apply_template_rules
from .types import ORIGIN_IDENTITY, ParaphraseCandidate


@dataclass
class GeneratorConfig:
    """Enabled generators and their resources; None disables a generator."""

    lexical_rules: list | None = None
    template_rules: list | None = None
    pivot: PivotParaphraser | None = None
    lexical_cap: int = 10
    template_cap: int = 10
    pivot_top: int = 15
    extra_generators: list = field(default_factory=list)


def is_trivial_rewrite(candidate: TokenSeq, question: TokenSeq) -> bool:
    """True when the candidate differs from the question only in
    stopword/punctuation tokens (or not at all)."""
    return candidate.content_tokens() == question.content_tokens()


def generate_all(q: TokenSeq, config: GeneratorConfig) -> list[ParaphraseCandidate]:
    raw: list[ParaphraseCandidate] = []
    if config.lexical_rules is not None:
        raw.extend(apply_lexical_rules(q, config.lexical_rules, config.lexical_cap))
    if config.template_rules is not None:
        raw.extend(apply_template_rules(q, config.template_rules, config.template_cap))
    if config.pivot is not None:
        config.pivot.top = config.pivot_top
        raw.extend(config.pivot.generate(q.tokens))
    for gen in config.extra_generators:
        raw.extend(gen(q))

    out: list[ParaphraseCandidate] = []
    seen = set()
    for cand in raw:
        key = cand.tokens.tokens
        if key in seen or is_trivial_rewrite(cand.tokens, q):
            continue
        seen.add(key)
        out.append(cand)
    out.append(ParaphraseCandidate(tokens=q, origin=ORIGIN_IDENTITY, gen_score=0.0))
    return out
