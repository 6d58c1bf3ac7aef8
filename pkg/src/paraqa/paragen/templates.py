"""Template rules mined from clusters of related questions.

A template is a question with at most one wildcard slot.  Mining
abstracts every contiguous substring of up to six tokens (plus the empty
abstraction, i.e. the question itself as a zero-wildcard template), keeps
templates seen in enough distinct clusters, and pairs templates that
co-occur in the same cluster instantiated with identical arguments.
Pairs are ranked by pointwise mutual information over cluster counts.
"""

from __future__ import annotations

import math

from ..textkit import TokenSeq, is_stopword, normalize, token_seq
from .types import (
    ORIGIN_TEMPLATE,
    WILDCARD,
    ParaphraseCandidate,
    QuestionTemplate,
    TemplateRulePair,
)

MAX_ARG_TOKENS = 6


def template_abstractions(tokens: tuple[str, ...]):
    """All (template, argument) abstractions of a question.

    Yields the zero-wildcard template (argument ()) and one template per
    contiguous span of 1..6 tokens replaced by the wildcard.
    """
    L = len(tokens)
    yield tokens, ()
    for i in range(L):
        for j in range(i + 1, min(i + MAX_ARG_TOKENS, L) + 1):
            yield tokens[:i] + (WILDCARD,) + tokens[j:], tokens[i:j]


def _cluster_items(cluster) -> set[tuple[tuple[str, ...], tuple[str, ...]]]:
    items = set()
    for question in cluster:
        for tpl, arg in template_abstractions(tuple(question)):
            items.add((tpl, arg))
    return items


def mine_template_rules(clusters, min_cluster_support: int = 10,
                        min_cooccur: int = 5) -> list[TemplateRulePair]:
    """Mine directed template pairs from question clusters.

    ``clusters`` is a list of clusters, each an iterable of normalized
    token sequences.  A pair is emitted when both templates occur in at
    least ``min_cluster_support`` distinct clusters and co-occur with the
    same argument in more than ``min_cooccur`` clusters.
    """
    per_cluster = [_cluster_items(c) for c in clusters]

    support: dict[tuple, int] = {}
    for items in per_cluster:
        for tpl in {tpl for tpl, _ in items}:
            support[tpl] = support.get(tpl, 0) + 1
    kept = {tpl for tpl, n in support.items() if n >= min_cluster_support}

    pair_count: dict[tuple, int] = {}
    for items in per_cluster:
        by_arg: dict[tuple, set] = {}
        for tpl, arg in items:
            if tpl in kept:
                by_arg.setdefault(arg, set()).add(tpl)
        cluster_pairs = set()
        for group in by_arg.values():
            for s in group:
                for t in group:
                    if s != t:
                        cluster_pairs.add((s, t))
        for p in cluster_pairs:
            pair_count[p] = pair_count.get(p, 0) + 1

    pairs = [
        TemplateRulePair(
            source=QuestionTemplate(s),
            target=QuestionTemplate(t),
            pmi=0.0,
            cooccur_count=n,
        )
        for (s, t), n in pair_count.items()
        if n > min_cooccur
    ]
    pairs.sort(key=lambda p: (p.source.tokens, p.target.tokens))
    return pairs


def rank_rules_pmi(pairs, clusters) -> list[TemplateRulePair]:
    """PMI = log(N * c(s,t) / (c(s) * c(t))) over cluster counts.

    Output sorted by PMI descending, ties broken by co-occurrence count
    then lexicographic template order.
    """
    per_cluster = [{tpl for tpl, _ in _cluster_items(c)} for c in clusters]
    N = len(per_cluster)

    def occurrences(tpl):
        return sum(1 for items in per_cluster if tpl in items)

    ranked = []
    for p in pairs:
        cs = occurrences(p.source.tokens)
        ct = occurrences(p.target.tokens)
        pmi = math.log(N * p.cooccur_count / (cs * ct))
        ranked.append(TemplateRulePair(p.source, p.target, pmi, p.cooccur_count))
    ranked.sort(key=lambda p: (
        -p.pmi, -p.cooccur_count, p.source.tokens, p.target.tokens))
    return ranked


# ---------------------------------------------------------------------------
# application
# ---------------------------------------------------------------------------


def _instantiate(template: QuestionTemplate, arg: tuple[str, ...] | None):
    if template.wildcards == 0:
        return template.tokens
    k = template.tokens.index(WILDCARD)
    return template.tokens[:k] + tuple(arg) + template.tokens[k + 1:]


def _exact_binding(q: tuple[str, ...], source: QuestionTemplate):
    if source.wildcards == 0:
        return () if q == source.tokens else None
    k = source.tokens.index(WILDCARD)
    prefix, suffix = source.tokens[:k], source.tokens[k + 1:]
    arg_len = len(q) - len(prefix) - len(suffix)
    if arg_len < 1:
        return None
    if q[:len(prefix)] != prefix:
        return None
    if suffix and q[-len(suffix):] != suffix:
        return None
    return q[len(prefix):len(prefix) + arg_len]


def _fuzzy_binding(q: TokenSeq, source: QuestionTemplate):
    """Match stopword-stripped token sequences, binding one contiguous gap.

    The bound argument is the original-question span from the first to
    the last content token of the gap, interior stopwords included.  The
    anchored prefix/suffix comparison makes the binding unique, which
    resolves the leftmost-binding convention trivially.
    """
    q_content = [(i, t) for i, (t, s) in
                 enumerate(zip(q.tokens, q.stop_flags)) if not s]
    s_content = [t for t in source.tokens
                 if t == WILDCARD or not is_stopword(t)]
    if source.wildcards == 0:
        if [t for _, t in q_content] == s_content:
            return ()
        return None
    k = s_content.index(WILDCARD)
    prefix, suffix = s_content[:k], s_content[k + 1:]
    gap_len = len(q_content) - len(prefix) - len(suffix)
    if gap_len < 1:
        return None
    if [t for _, t in q_content[:len(prefix)]] != prefix:
        return None
    if suffix and [t for _, t in q_content[-len(suffix):]] != suffix:
        return None
    gap = q_content[len(prefix):len(prefix) + gap_len]
    lo, hi = gap[0][0], gap[-1][0]
    return q.tokens[lo:hi + 1]


def apply_template_rules(q: TokenSeq, rules, cap: int = 10) -> list[ParaphraseCandidate]:
    """Rewrite ``q`` with mined template pairs; exact matching first, and
    fuzzy (stopword-ignoring) matching only when nothing matches exactly."""
    def collect(binder):
        found = []
        for rule in rules:
            arg = binder(rule.source)
            if arg is None:
                continue
            tokens = _instantiate(rule.target, arg)
            if not tokens:
                continue
            found.append(ParaphraseCandidate(
                tokens=token_seq(tokens),
                origin=ORIGIN_TEMPLATE,
                gen_score=rule.pmi,
            ))
        return found

    out = collect(lambda src: _exact_binding(q.tokens, src))
    if not out:
        out = collect(lambda src: _fuzzy_binding(q, src))
    out.sort(key=lambda c: (-c.gen_score, c.tokens.tokens))
    return out[:cap]


# ---------------------------------------------------------------------------
# file formats
# ---------------------------------------------------------------------------


def load_cluster_file(path) -> list[list[tuple[str, ...]]]:
    """One cluster per line, questions separated by tab; text is normalized."""
    clusters = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            questions = []
            for part in line.split("\t"):
                if part.strip():
                    questions.append(normalize(part).tokens)
            if not questions:
                raise ValueError(f"{path}:{lineno}: empty cluster line")
            clusters.append(questions)
    return clusters


def save_template_rules(pairs, path):
    with open(path, "w", encoding="utf-8") as f:
        for p in pairs:
            f.write(f"{p.source.text()}\t{p.target.text()}\t"
                    f"{p.pmi:.17g}\t{p.cooccur_count}\n")


def load_template_rules(path) -> list[TemplateRulePair]:
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ValueError(f"{path}:{lineno}: expected 4 columns")
            pairs.append(TemplateRulePair(
                source=QuestionTemplate(tuple(parts[0].split(" "))),
                target=QuestionTemplate(tuple(parts[1].split(" "))),
                pmi=float(parts[2]),
                cooccur_count=int(parts[3]),
            ))
    return pairs
