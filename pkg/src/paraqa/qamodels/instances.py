"""Question-answer instances and the dataset file format.

One instance per line, tab-separated: question text, task tag, then
either the gold entity ids (pipe-separated, task ``kb``) or one
``label|sentence text`` field per candidate sentence (task ``sentsel``).
Preparation normalizes text, runs entity linking on the original question
(never on paraphrases), generates subgraph candidates, attaches the
precomputed paraphrase set, and caches the KB feature matrices so epochs
are cheap and reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np

from ..paragen import GeneratorConfig, generate_all
from ..textkit import TokenSeq, normalize
from .kb import KBFeatureSpace, SubgraphCandidate, ToyKB, f1_vs_gold, generate_subgraphs, link_entities
from .sentsel import IdfTable, word_match_features

log = logging.getLogger(__name__)

TASK_KB = "kb"
TASK_SENTSEL = "sentsel"


@dataclass
class QAInstance:
    question: TokenSeq
    task: str
    gold_entities: frozenset[str] | None = None
    subgraphs: list[SubgraphCandidate] = field(default_factory=list)
    sentences: list[TokenSeq] = field(default_factory=list)
    labels: tuple[int, ...] = ()
    paraphrases: list = field(default_factory=list)
    # per-paraphrase (C, F) feature matrices for the kb task
    kb_features: list[np.ndarray] = field(default_factory=list)
    # per-paraphrase list of (count, idf count) per sentence
    count_features: list[list[tuple[float, float]]] = field(default_factory=list)

    @property
    def n_candidates(self) -> int:
        return len(self.subgraphs) if self.task == TASK_KB else len(self.sentences)

    def targets(self) -> np.ndarray:
        if self.task == TASK_KB:
            return np.array([c.f1_vs_gold for c in self.subgraphs])
        return np.array(self.labels, dtype=np.float64)


@dataclass
class RawRecord:
    question: str
    task: str
    gold: list[str]
    sentences: list[tuple[int, str]]


def parse_dataset_file(path) -> list[RawRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) < 3:
                raise ValueError(f"{path}:{lineno}: expected >= 3 columns")
            question, task = parts[0], parts[1]
            if task == TASK_KB:
                gold = [g for g in parts[2].split("|") if g]
                if not gold:
                    raise ValueError(f"{path}:{lineno}: empty gold answer set")
                records.append(RawRecord(question, task, gold, []))
            elif task == TASK_SENTSEL:
                sentences = []
                for fieldno, part in enumerate(parts[2:], start=3):
                    label, _, text = part.partition("|")
                    if label not in ("0", "1") or not text:
                        raise ValueError(
                            f"{path}:{lineno}: field {fieldno} must be 'label|sentence'")
                    sentences.append((int(label), text))
                records.append(RawRecord(question, task, [], sentences))
            else:
                raise ValueError(f"{path}:{lineno}: unknown task tag {task!r}")
    return records


def prepare_instances(records, gen_config: GeneratorConfig,
                      kb: ToyKB | None = None,
                      feature_space: KBFeatureSpace | None = None,
                      idf: IdfTable | None = None,
                      use_counts: bool = False) -> list[QAInstance]:
    """Build trainable instances; paraphrase generation runs once here.

    KB instances that link no entity or yield no candidate subgraph are
    skipped with a warning, matching the no-match error contract.
    """
    instances = []
    for rec in records:
        q = normalize(rec.question)
        paraphrases = generate_all(q, gen_config)
        if rec.task == TASK_KB:
            assert kb is not None and feature_space is not None
            entities = link_entities(q, kb)
            if not entities:
                continue
            gold = frozenset(rec.gold)
            subgraphs = generate_subgraphs(entities, kb, gold=gold)
            if not subgraphs:
                log.warning("no candidate subgraphs for: %s", q.text())
                continue
            inst = QAInstance(question=q, task=TASK_KB, gold_entities=gold,
                              subgraphs=subgraphs, paraphrases=paraphrases)
            inst.kb_features = [
                np.stack([feature_space.features(p.tokens, c) for c in subgraphs])
                for p in paraphrases
            ]
        else:
            sentences = [normalize(text) for _, text in rec.sentences]
            labels = tuple(lab for lab, _ in rec.sentences)
            inst = QAInstance(question=q, task=TASK_SENTSEL,
                              sentences=sentences, labels=labels,
                              paraphrases=paraphrases)
            if use_counts:
                inst.count_features = [
                    [word_match_features(p.tokens, s, idf) for s in sentences]
                    for p in paraphrases
                ]
        instances.append(inst)
    return instances


def build_idf(records) -> IdfTable:
    sentences = []
    for rec in records:
        for _, text in rec.sentences:
            sentences.append(normalize(text))
    return IdfTable(sentences)
