"""Evaluation and corpus statistics: average F1, MAP/MRR, sentence-level
BLEU and TER, and the per-generator paraphrase statistics report."""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgumentError
from .paragen import GeneratorConfig, generate_all
from .qamodels.kb import f1_vs_gold
from .textkit import TokenSeq


def average_f1(predictions, golds) -> float:
    """Mean per-instance set F1 between predicted and gold answer sets."""
    predictions = list(predictions)
    golds = list(golds)
    if len(predictions) != len(golds):
        raise InvalidArgumentError(
            f"length mismatch: {len(predictions)} predictions, {len(golds)} golds")
    if not golds:
        raise InvalidArgumentError("empty evaluation set")
    return float(np.mean([f1_vs_gold(p, g) for p, g in zip(predictions, golds)]))


def map_mrr(ranked_lists) -> tuple[float, float]:
    """Mean average precision and mean reciprocal rank.

    Each element is (scores, binary labels); ranking is by score
    descending with stable tie order.  Instances without any positive
    label are excluded, matching the usual selection protocol; if none
    remain the input is invalid.
    """
    aps = []
    rrs = []
    for scores, labels in ranked_lists:
        scores = list(scores)
        labels = list(labels)
        if len(scores) != len(labels):
            raise InvalidArgumentError("scores/labels length mismatch")
        if not any(labels):
            continue
        order = sorted(range(len(scores)), key=lambda i: (-scores[i], i))
        correct = 0
        precisions = []
        first_rank = None
        for rank, idx in enumerate(order, start=1):
            if labels[idx]:
                correct += 1
                precisions.append(correct / rank)
                if first_rank is None:
                    first_rank = rank
        aps.append(sum(precisions) / correct)
        rrs.append(1.0 / first_rank)
    if not aps:
        raise InvalidArgumentError("no instance has a positive label")
    return float(np.mean(aps)), float(np.mean(rrs))


# ---------------------------------------------------------------------------
# BLEU / TER
# ---------------------------------------------------------------------------


def _ngram_counts(tokens, n):
    counts: dict[tuple, int] = {}
    for i in range(len(tokens) - n + 1):
        g = tokens[i:i + n]
        counts[g] = counts.get(g, 0) + 1
    return counts


def bleu(candidate: TokenSeq, reference: TokenSeq, max_n: int = 4) -> float:
    """Sentence-level BLEU: geometric mean of clipped n-gram precisions
    (add-one smoothed for n >= 2) times the brevity penalty."""
    cand = tuple(candidate.tokens)
    ref = tuple(reference.tokens)
    if not cand or not ref:
        raise InvalidArgumentError("BLEU needs non-empty sequences")
    log_sum = 0.0
    for n in range(1, max_n + 1):
        c_counts = _ngram_counts(cand, n)
        r_counts = _ngram_counts(ref, n)
        clipped = sum(min(c, r_counts.get(g, 0)) for g, c in c_counts.items())
        total = sum(c_counts.values())
        if n == 1:
            if clipped == 0:
                return 0.0
            p = clipped / total
        else:
            p = (clipped + 1) / (total + 1)
        log_sum += np.log(p)
    geo = float(np.exp(log_sum / max_n))
    bp = 1.0 if len(cand) >= len(ref) else float(np.exp(1 - len(ref) / len(cand)))
    return geo * bp


def _levenshtein(a, b) -> int:
    prev = list(range(len(b) + 1))
    for i, x in enumerate(a, start=1):
        cur = [i]
        for j, y in enumerate(b, start=1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (x != y)))
        prev = cur
    return prev[-1]


def _best_shift(current, ref, base):
    """The single block move (any contiguous block to any position) that
    most reduces the edit distance; deterministic tie-breaking."""
    best = None
    n = len(current)
    for i in range(n):
        for length in range(1, n - i + 1):
            block = current[i:i + length]
            rest = current[:i] + current[i + length:]
            for j in range(len(rest) + 1):
                if j == i:
                    continue
                moved = rest[:j] + block + rest[j:]
                lev = _levenshtein(moved, ref)
                key = (lev, i, length, j)
                if lev < base and (best is None or key < best[0]):
                    best = (key, moved)
    return best


def ter_edits(candidate, reference) -> int:
    """Insertions + deletions + substitutions + block shifts, shifts found
    by greedy search over edit-distance improvement."""
    current = tuple(candidate)
    ref = tuple(reference)
    shifts = 0
    lev = _levenshtein(current, ref)
    while lev > 0:
        found = _best_shift(current, ref, lev)
        if found is None:
            break
        (new_lev, *_), current = found
        shifts += 1
        lev = new_lev
    return shifts + lev


def ter(candidate: TokenSeq, reference: TokenSeq) -> float:
    """Translation edit rate: edits per reference token."""
    ref = tuple(reference.tokens)
    if not ref:
        raise InvalidArgumentError("TER needs a non-empty reference")
    return ter_edits(tuple(candidate.tokens), ref) / len(ref)


# ---------------------------------------------------------------------------
# paraphrase statistics
# ---------------------------------------------------------------------------

GENERATOR_COLUMNS = ("lexical", "template", "pivot")
STATS_ROWS = ("avg_q_len", "avg_para_len", "avg_para_count",
              "coverage_pct", "bleu_pct", "ter_pct")


@dataclass
class StatsReport:
    """Per-generator paraphrase statistics over a question set."""

    n_questions: int
    avg_q_len: float
    cells: dict[str, dict[str, float | None]]

    def to_tsv(self) -> str:
        lines = ["metric\t" + "\t".join(GENERATOR_COLUMNS)]
        for row in STATS_ROWS:
            vals = []
            for gen in GENERATOR_COLUMNS:
                v = self.cells[row][gen]
                vals.append("" if v is None else f"{v:.4f}")
            lines.append(row + "\t" + "\t".join(vals))
        return "\n".join(lines) + "\n"

    def to_text(self) -> str:
        width = max(len(r) for r in STATS_ROWS) + 2
        colw = 12
        header = "metric".ljust(width) + "".join(
            g.rjust(colw) for g in GENERATOR_COLUMNS)
        lines = [header, "-" * len(header)]
        for row in STATS_ROWS:
            cells = []
            for gen in GENERATOR_COLUMNS:
                v = self.cells[row][gen]
                cells.append(("-" if v is None else f"{v:.2f}").rjust(colw))
            lines.append(row.ljust(width) + "".join(cells))
        return "\n".join(lines) + "\n"


def _single_generator_config(config: GeneratorConfig, name: str) -> GeneratorConfig:
    only = {
        "lexical": replace(config, template_rules=None, pivot=None,
                           extra_generators=[]),
        "template": replace(config, lexical_rules=None, pivot=None,
                            extra_generators=[]),
        "pivot": replace(config, lexical_rules=None, template_rules=None,
                         extra_generators=[]),
    }
    return only[name]


def paraphrase_stats(questions, config: GeneratorConfig) -> StatsReport:
    """Per-generator mean question length, paraphrase length and count,
    coverage, and BLEU/TER between each paraphrase and its source."""
    questions = list(questions)
    if not questions:
        raise InvalidArgumentError("empty question set")
    avg_q_len = float(np.mean([len(q) for q in questions]))
    enabled = {
        "lexical": config.lexical_rules is not None,
        "template": config.template_rules is not None,
        "pivot": config.pivot is not None,
    }
    cells: dict[str, dict[str, float | None]] = {r: {} for r in STATS_ROWS}
    for gen in GENERATOR_COLUMNS:
        if not enabled[gen]:
            cells["avg_q_len"][gen] = avg_q_len
            cells["avg_para_count"][gen] = 0.0
            cells["coverage_pct"][gen] = 0.0
            for row in ("avg_para_len", "bleu_pct", "ter_pct"):
                cells[row][gen] = None
            continue
        sub = _single_generator_config(config, gen)
        para_lens = []
        counts = []
        covered = 0
        bleus = []
        ters = []
        for q in questions:
            cands = [c for c in generate_all(q, sub) if c.origin != "identity"]
            counts.append(len(cands))
            if cands:
                covered += 1
            for c in cands:
                para_lens.append(len(c.tokens))
                bleus.append(bleu(c.tokens, q))
                ters.append(ter(c.tokens, q))
        cells["avg_q_len"][gen] = avg_q_len
        cells["avg_para_count"][gen] = float(np.mean(counts))
        cells["coverage_pct"][gen] = 100.0 * covered / len(questions)
        cells["avg_para_len"][gen] = float(np.mean(para_lens)) if para_lens else None
        cells["bleu_pct"][gen] = 100.0 * float(np.mean(bleus)) if bleus else None
        cells["ter_pct"][gen] = 100.0 * float(np.mean(ters)) if ters else None
    return StatsReport(n_questions=len(questions), avg_q_len=avg_q_len,
                       cells=cells)
