"""The jointly trained system: answer distributions marginalized over
scored paraphrases.

The answer probability is a convex combination: per-paraphrase QA
probabilities weighted by the softmax-normalized scorer output over the
candidate set (original question included).  Training maximizes answer
likelihood through binary cross-entropy per candidate (against F1 targets
on the KB task, binary labels on sentence selection), with minibatch
RMSProp, per-batch gradient-norm clipping, and early stopping on the dev
metric.  The comparison systems (uniform averaging, separately trained
scorer, data augmentation, and the bare QA model) run through the same
machinery via mode flags.
"""

from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field, replace

import numpy as np

from .encoding import add_embedding_banks
from .errors import InvalidArgumentError, NoCandidatesError
from .metrics import map_mrr
from .qamodels import (
    KBFeatureSpace,
    KbModel,
    QAInstance,
    SentSelModel,
    TASK_KB,
    TASK_SENTSEL,
)
from .scorer import ScorerModel
from .tensornet import ParamStore, RngHub, Tensor, Vocab, ag
from .tensornet.optim import clip_grad_norm, init_uniform, rmsprop_update
from .textkit import TokenSeq

log = logging.getLogger(__name__)

MODES = ("para4qa", "avgpara", "seppara", "dataaugment", "base")
DROPOUT_CHOICES = (0.2, 0.3, 0.4)

_CLAMP_LO = 1e-12
_CLAMP_HI = 1.0 - 1e-12


@dataclass
class JointModels:
    store: ParamStore
    vocab: Vocab
    scorer: ScorerModel
    qa_kb: KbModel | None = None
    qa_sentsel: SentSelModel | None = None
    hub: RngHub = field(default_factory=lambda: RngHub(0))

    def qa_for(self, task: str):
        model = self.qa_kb if task == TASK_KB else self.qa_sentsel
        if model is None:
            raise InvalidArgumentError(f"no QA model configured for task {task!r}")
        return model


def build_models(task: str, vocab: Vocab, n: int, d: int,
                 dropout_rate: float = 0.2, seed: int = 13,
                 feature_space: KBFeatureSpace | None = None,
                 use_counts: bool = False,
                 pretrained_matrix=None) -> JointModels:
    """Create the scorer and the task back-end over one shared store.

    All neural parameters are drawn uniform from [-0.08, 0.08]; the KB
    logistic regression is then re-zeroed so an untrained model stays
    exactly indifferent between candidate subgraphs.
    """
    hub = RngHub(seed)
    store = ParamStore()
    add_embedding_banks(store, vocab, d, pretrained_matrix)
    scorer = ScorerModel(store, vocab, n, d, dropout_rate)
    models = JointModels(store=store, vocab=vocab, scorer=scorer, hub=hub)
    if task == TASK_KB:
        if feature_space is None:
            raise InvalidArgumentError("kb task needs a feature space")
        models.qa_kb = KbModel(store, feature_space)
    elif task == TASK_SENTSEL:
        models.qa_sentsel = SentSelModel(store, vocab, n, d, dropout_rate,
                                         use_counts=use_counts)
    else:
        raise InvalidArgumentError(f"unknown task {task!r}")
    init_uniform(store, seed=hub.stream("init"))
    if models.qa_kb is not None:
        models.qa_kb.w.data[:] = 0.0
        models.qa_kb.b.data[:] = 0.0
    return models


@dataclass
class MixtureOutput:
    answer_probs: np.ndarray
    paraphrase_weights: np.ndarray
    qa_probs: np.ndarray  # (m paraphrases, C candidates)
    paraphrases: list


def _check_instance(instance: QAInstance):
    if instance.n_candidates == 0:
        raise NoCandidatesError(
            f"instance has no candidate answers: {instance.question.text()}")
    identities = sum(1 for p in instance.paraphrases if p.origin == "identity")
    if identities != 1:
        raise InvalidArgumentError(
            f"paraphrase set must contain the identity exactly once, got {identities}")


def _qa_prob_rows(instance: QAInstance, models: JointModels, training: bool,
                  rng, identity_only: bool):
    """Per-paraphrase candidate-probability tensors, plus the paraphrases."""
    paraphrases = instance.paraphrases
    indices = range(len(paraphrases))
    if identity_only:
        indices = [i for i, p in enumerate(paraphrases)
                   if p.origin == "identity"]
    qa = models.qa_for(instance.task)
    rows = []
    if instance.task == TASK_KB:
        for i in indices:
            rows.append(qa.probs(instance.kb_features[i]))
    else:
        sent_vecs = [qa.encode_sentence(s, training, rng)
                     for s in instance.sentences]
        for i in indices:
            q_vec = qa.encode_question(paraphrases[i].tokens, training, rng)
            per_sent = []
            for j, sv in enumerate(sent_vecs):
                counts = (instance.count_features[i][j]
                          if instance.count_features else None)
                per_sent.append(qa.prob_from_vecs(q_vec, sv, counts))
            rows.append(ag.concat(per_sent))
    return [paraphrases[i] for i in indices], rows


def _mixture_tensors(instance: QAInstance, models: JointModels,
                     training: bool = False, uniform_weights: bool = False,
                     identity_only: bool = False, rng=None):
    _check_instance(instance)
    used, rows = _qa_prob_rows(instance, models, training, rng, identity_only)
    qa_matrix = ag.vstack(rows)
    m = len(used)
    if uniform_weights or identity_only or m == 1:
        weights = Tensor(np.full(m, 1.0 / m))
    else:
        weights = models.scorer.weights(
            instance.question, [p.tokens for p in used], training, rng)
    mix = ag.matmul(weights, qa_matrix)
    return mix, weights, qa_matrix, used


def mixture_predict(instance: QAInstance, models: JointModels,
                    uniform_weights: bool = False,
                    identity_only: bool = False) -> MixtureOutput:
    """Frozen-parameter mixture over the candidate answers."""
    with ag.no_grad():
        mix, weights, qa_matrix, used = _mixture_tensors(
            instance, models, uniform_weights=uniform_weights,
            identity_only=identity_only)
    return MixtureOutput(
        answer_probs=mix.data.copy(),
        paraphrase_weights=weights.data.copy(),
        qa_probs=qa_matrix.data.copy(),
        paraphrases=used,
    )


def loss(instance: QAInstance, models: JointModels, training: bool = False,
         uniform_weights: bool = False, identity_only: bool = False,
         rng=None) -> Tensor:
    """Mean binary cross-entropy between the mixture probability of each
    candidate and its target (F1 on kb, the 0/1 label on sentsel)."""
    mix, _, _, _ = _mixture_tensors(instance, models, training,
                                    uniform_weights, identity_only, rng)
    t = instance.targets()
    p = ag.clip(mix, _CLAMP_LO, _CLAMP_HI)
    one_minus = ag.sub(Tensor(np.ones_like(t)), p)
    terms = ag.add(ag.mul(Tensor(t), ag.log(p)),
                   ag.mul(Tensor(1.0 - t), ag.log(one_minus)))
    return ag.neg(ag.tmean(terms))


def loss_value(instance: QAInstance, models: JointModels,
               uniform_weights: bool = False,
               identity_only: bool = False) -> float:
    """Gradient-free twin of :func:`loss` in plain numpy.

    Used for finite-difference probes and fast evaluation; it mirrors the
    taped arithmetic operation for operation, so results are bitwise
    identical (asserted by the test harness).
    """
    _check_instance(instance)
    paraphrases = instance.paraphrases
    indices = list(range(len(paraphrases)))
    if identity_only:
        indices = [i for i, p in enumerate(paraphrases)
                   if p.origin == "identity"]
    qa = models.qa_for(instance.task)
    with ag.no_grad():
        if instance.task == TASK_KB:
            w = qa.w.data
            b = qa.b.data
            rows = [
                1.0 / (1.0 + np.exp(-(instance.kb_features[i] @ w
                                      + b * np.ones(instance.n_candidates))))
                for i in indices
            ]
        else:
            sent_vecs = [qa.encode_sentence(s).data for s in instance.sentences]
            rows = []
            for i in indices:
                q_vec = qa.encode_question(paraphrases[i].tokens).data
                per_sent = []
                for j, sv in enumerate(sent_vecs):
                    feats = np.concatenate([q_vec, sv, q_vec * sv])
                    score = qa.w.data @ feats + qa.b.data
                    if qa.use_counts:
                        counts = (instance.count_features[i][j]
                                  if instance.count_features else (0.0, 0.0))
                        z = qa.cnt_w.data @ np.concatenate(
                            [score, np.array(list(counts))]) + qa.cnt_b.data
                        per_sent.append(1.0 / (1.0 + np.exp(-z)))
                    else:
                        per_sent.append(1.0 / (1.0 + np.exp(-score)))
                rows.append(np.concatenate(per_sent))
        qa_matrix = np.stack(rows)
        m = len(indices)
        if uniform_weights or identity_only or m == 1:
            weights = np.full(m, 1.0 / m)
        else:
            scorer = models.scorer
            q_vec = scorer.encode(instance.question).data
            cache = {instance.question.tokens: q_vec}
            scores = []
            for i in indices:
                toks = paraphrases[i].tokens
                if toks.tokens in cache:
                    c_vec = cache[toks.tokens]
                else:
                    c_vec = scorer.encode(toks).data
                    cache[toks.tokens] = c_vec
                feats = np.concatenate([q_vec, c_vec, q_vec * c_vec])
                scores.append(scorer.w_s.data @ feats + scorer.b_s.data)
            s = np.concatenate(scores)
            shifted = s - np.max(s)
            e = np.exp(shifted)
            weights = e / e.sum()
        mix = weights @ qa_matrix
        t = instance.targets()
        p = np.clip(mix, _CLAMP_LO, _CLAMP_HI)
        terms = t * np.log(p) + (1.0 - t) * np.log(np.ones_like(t) - p)
        return float(-terms.mean())


def infer(instance: QAInstance, models: JointModels,
          uniform_weights: bool = False, identity_only: bool = False):
    """Argmax answer; exact ties resolve to the first candidate."""
    out = mixture_predict(instance, models, uniform_weights, identity_only)
    return int(np.argmax(out.answer_probs)), out


def baseline_avgpara(instance: QAInstance, models: JointModels) -> MixtureOutput:
    """QA results averaged uniformly over the paraphrase set."""
    return mixture_predict(instance, models, uniform_weights=True)


def baseline_dataaugment(instances: list[QAInstance]) -> list[QAInstance]:
    """One extra instance per generated paraphrase, same gold answers."""
    out = []
    for inst in instances:
        out.append(inst)
        for i, para in enumerate(inst.paraphrases):
            if para.origin == "identity":
                continue
            clone = replace(
                inst,
                question=para.tokens,
                paraphrases=[replace(para, origin="identity")],
                kb_features=[inst.kb_features[i]] if inst.kb_features else [],
                count_features=([inst.count_features[i]]
                                if inst.count_features else []),
            )
            out.append(clone)
    return out


def baseline_seppara_train(pairs, models: JointModels, epochs: int = 10,
                           lr: float = 0.01, decay: float = 0.95,
                           clip_norm: float = 5.0, batch_size: int = 32,
                           max_tokens: int = 25):
    """Train the scorer on paraphrase pair classification only.

    ``pairs`` holds (question, candidate, 0/1 label); the trilinear score
    is squashed by a sigmoid and fit with binary cross-entropy.  Pairs
    longer than ``max_tokens`` are dropped.  Afterwards the scorer's own
    parameters are frozen (shared embedding banks stay trainable, since
    the QA models also own them).
    """
    scorer = models.scorer
    usable = [(q, c, y) for q, c, y in pairs
              if len(q) <= max_tokens and len(c) <= max_tokens]
    if not usable:
        raise InvalidArgumentError("no usable training pairs")
    shuffle = models.hub.stream("shuffle")
    scorer_names = [n for n in models.store.trainable_names()
                    if n.startswith(("scorer.", "embed."))]
    for _ in range(epochs):
        order = shuffle.permutation(len(usable))
        for start in range(0, len(order), batch_size):
            batch = order[start:start + batch_size]
            models.store.zero_grad()
            terms = []
            for idx in batch:
                q, cand, label = usable[idx]
                q_vec = scorer.encode(q)
                c_vec = scorer.encode(cand)
                p = ag.clip(ag.sigmoid(scorer.score(q_vec, c_vec)),
                            _CLAMP_LO, _CLAMP_HI)
                if label:
                    terms.append(ag.neg(ag.log(p)))
                else:
                    terms.append(ag.neg(ag.log(ag.sub(Tensor(np.ones(1)), p))))
            batch_loss = ag.scale(ag.tsum(ag.concat(terms)), 1.0 / len(batch))
            ag.backward(batch_loss)
            grads = {n: g for n, g in models.store.grads().items()
                     if n in scorer_names}
            rmsprop_update(models.store, clip_grad_norm(grads, clip_norm),
                           lr=lr, decay=decay)
    for name in models.store.names():
        if name.startswith("scorer."):
            models.store[name].requires_grad = False
    return models


def pair_accuracy(pairs, models: JointModels) -> float:
    correct = 0
    for q, cand, label in pairs:
        s = models.scorer.score_value(q, cand)
        correct += int((s > 0) == bool(label))
    return correct / len(pairs)


# ---------------------------------------------------------------------------
# training loop
# ---------------------------------------------------------------------------


@dataclass
class TrainConfig:
    task: str
    mode: str = "para4qa"
    batch_size: int = 150
    lr: float = 0.01
    decay: float = 0.95
    clip_norm: float = 5.0
    dropout: float = 0.2
    max_epochs: int = 50
    patience: int = 5
    seed: int = 13

    def validate(self):
        if self.task not in (TASK_KB, TASK_SENTSEL):
            raise InvalidArgumentError(f"unknown task {self.task!r}")
        if self.mode not in MODES:
            raise InvalidArgumentError(f"unknown mode {self.mode!r}")
        if self.dropout not in DROPOUT_CHOICES:
            raise InvalidArgumentError(
                f"dropout must be one of {DROPOUT_CHOICES}: {self.dropout}")
        if self.batch_size < 1 or self.max_epochs < 1 or self.patience < 0:
            raise InvalidArgumentError("batch_size/max_epochs/patience out of range")


@dataclass
class EpochRecord:
    epoch: int
    train_loss: float
    dev_metric: float


@dataclass
class TrainResult:
    models: JointModels
    log: list[EpochRecord]
    best_epoch: int
    best_dev: float
    wall_time_s: float


def _mode_flags(mode: str) -> tuple[bool, bool]:
    """(uniform_weights, identity_only) for a comparison mode."""
    if mode == "para4qa" or mode == "seppara":
        return False, False
    if mode == "avgpara":
        return True, False
    # base and dataaugment train the bare QA model
    return True, True


def evaluate(instances, models: JointModels, task: str,
             uniform_weights: bool = False, identity_only: bool = False):
    """Dev/test metric: average F1 for kb, MAP for sentence selection.

    Returns (metric, per-instance detail list).
    """
    if task == TASK_KB:
        f1s = []
        for inst in instances:
            idx, _ = infer(inst, models, uniform_weights, identity_only)
            f1s.append(inst.subgraphs[idx].f1_vs_gold)
        return float(np.mean(f1s)) if f1s else 0.0, f1s
    ranked = []
    for inst in instances:
        out = mixture_predict(inst, models, uniform_weights, identity_only)
        ranked.append((list(out.answer_probs), list(inst.labels)))
    metric, _ = map_mrr(ranked)
    return metric, ranked


def train(train_instances, dev_instances, models: JointModels,
          config: TrainConfig, pair_data=None) -> TrainResult:
    """Minibatch RMSProp with per-batch gradient clipping and early
    stopping on the dev metric; returns the best-dev checkpoint."""
    config.validate()
    if not train_instances:
        raise InvalidArgumentError("empty training dataset")
    t0 = time.monotonic()
    if config.mode == "seppara":
        if pair_data is None:
            raise InvalidArgumentError("seppara mode needs pair_data")
        baseline_seppara_train(pair_data, models, lr=config.lr,
                               decay=config.decay, clip_norm=config.clip_norm)
    if config.mode == "dataaugment":
        train_instances = baseline_dataaugment(train_instances)
    uniform, identity_only = _mode_flags(config.mode)

    shuffle = models.hub.stream("shuffle")
    drop_rng = models.hub.stream("dropout")
    records: list[EpochRecord] = []
    best_dev = -np.inf
    best_epoch = -1
    best_snapshot = None
    stale = 0
    for epoch in range(1, config.max_epochs + 1):
        order = shuffle.permutation(len(train_instances))
        total = 0.0
        for start in range(0, len(order), config.batch_size):
            batch = order[start:start + config.batch_size]
            models.store.zero_grad()
            losses = [
                loss(train_instances[i], models, training=True,
                     uniform_weights=uniform, identity_only=identity_only,
                     rng=drop_rng)
                for i in batch
            ]
            batch_loss = ag.scale(ag.tsum(ag.concat(losses)), 1.0 / len(batch))
            ag.backward(batch_loss)
            grads = clip_grad_norm(models.store.grads(), config.clip_norm)
            rmsprop_update(models.store, grads, lr=config.lr, decay=config.decay)
            total += batch_loss.item() * len(batch)
        train_loss = total / len(order)
        dev_metric, _ = evaluate(dev_instances, models, config.task,
                                 uniform, identity_only)
        records.append(EpochRecord(epoch, train_loss, dev_metric))
        log.info("epoch %d: train loss %.6f, dev metric %.4f",
                 epoch, train_loss, dev_metric)
        if dev_metric > best_dev:
            best_dev = dev_metric
            best_epoch = epoch
            best_snapshot = models.store.snapshot()
            stale = 0
        else:
            stale += 1
            if stale >= config.patience:
                break
    if best_snapshot is not None:
        models.store.restore(best_snapshot)
    return TrainResult(models=models, log=records, best_epoch=best_epoch,
                       best_dev=best_dev, wall_time_s=time.monotonic() - t0)
