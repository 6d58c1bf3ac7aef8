"""Paraphrasing by replacing words and phrases with dictionary rules.

Each candidate applies exactly one substitution at one match position;
multi-edit candidates would explode combinatorially for no benefit at
this scale.  The rule dictionary file is UTF-8 TSV with columns
source-phrase, target-phrase, weight; phrases are normalized on load.
"""

from __future__ import annotations

from ..textkit import TokenSeq, normalize, token_seq
from .types import ORIGIN_LEXICAL, ParaphraseCandidate, RewriteRule


def load_rule_file(path) -> list[RewriteRule]:
    rules = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) not in (2, 3):
                raise ValueError(f"{path}:{lineno}: expected 2 or 3 columns")
            src = normalize(parts[0]).tokens
            tgt = normalize(parts[1]).tokens
            weight = float(parts[2]) if len(parts) == 3 else 1.0
            if src == tgt:
                continue
            rules.append(RewriteRule(src, tgt, weight))
    return rules


def apply_lexical_rules(q: TokenSeq, rules, cap: int = 10) -> list[ParaphraseCandidate]:
    """One candidate per (rule, match position), ranked by rule weight."""
    out = []
    for rule in rules:
        k = len(rule.source)
        for i in range(len(q.tokens) - k + 1):
            if q.tokens[i:i + k] == rule.source:
                rewritten = q.tokens[:i] + rule.target + q.tokens[i + k:]
                out.append(ParaphraseCandidate(
                    tokens=token_seq(rewritten),
                    origin=ORIGIN_LEXICAL,
                    gen_score=rule.weight,
                ))
    out.sort(key=lambda c: (-c.gen_score, c.tokens.tokens))
    return out[:cap]
