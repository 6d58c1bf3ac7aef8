"""Command-line interface: mine-rules, generate, train, evaluate, stats.

Every command is deterministic given its inputs, the config file, and the
seed.  Commands that write a delimited report also render a figure next
to it.  On failure a single machine-parsable line is printed to stderr
(``ERROR: <Type>: <message>``) and the exit code is nonzero.
"""

from __future__ import annotations

import functools
import logging
from pathlib import Path

import click
import numpy as np

from . import joint
from .config import ExperimentConfig, load_config
from .errors import CheckpointError, ParaQAError
from .metrics import average_f1, map_mrr, paraphrase_stats
from .paragen import (
    GeneratorConfig,
    PivotParaphraser,
    generate_all,
    load_cluster_file,
    load_rule_file,
    load_template_rules,
    mine_template_rules,
    rank_rules_pmi,
    save_template_rules,
)
from .paragen.pivot import load_table_model
from .qamodels import (
    IdfTable,
    KBFeatureSpace,
    ToyKB,
    build_idf,
    parse_dataset_file,
    prepare_instances,
)
from .tensornet import ParamStore, Vocab, load_embedding_file
from .textkit import normalize

log = logging.getLogger(__name__)


def _guard(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except (ParaQAError, OSError, ValueError) as e:
            click.echo(f"ERROR: {type(e).__name__}: {e}", err=True)
            raise SystemExit(1)
    return wrapper


@click.group()
def cli():
    """Paraphrase-weighted question answering."""
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")


# ---------------------------------------------------------------------------
# shared setup
# ---------------------------------------------------------------------------


def _generator_config(cfg: ExperimentConfig) -> GeneratorConfig:
    lexical = load_rule_file(cfg.lexical_rules) if cfg.lexical_rules else None
    template = (load_template_rules(cfg.template_rules)
                if cfg.template_rules else None)
    pivot = None
    if cfg.pivot_fwd and cfg.pivot_back:
        pivot = PivotParaphraser(
            load_table_model(cfg.pivot_fwd), load_table_model(cfg.pivot_back),
            k=cfg.pivot_k, beam_width=cfg.pivot_beam, max_len=cfg.pivot_maxlen,
            top=cfg.pivot_top)
    return GeneratorConfig(
        lexical_rules=lexical, template_rules=template, pivot=pivot,
        lexical_cap=cfg.lexical_cap, template_cap=cfg.template_cap,
        pivot_top=cfg.pivot_top)


def _load_kb(cfg: ExperimentConfig):
    kb = ToyKB.load(cfg.kb_triples, cfg.kb_aliases)
    return kb, KBFeatureSpace(kb)


def _prepare(cfg, dataset_path, gen_cfg, kb=None, space=None, idf=None):
    records = parse_dataset_file(dataset_path)
    return prepare_instances(records, gen_cfg, kb=kb, feature_space=space,
                             idf=idf, use_counts=cfg.use_counts)


def _vocab_for(instances, pretrained_words=None):
    token_sets = []
    for inst in instances:
        token_sets.append(inst.question.tokens)
        for p in inst.paraphrases:
            token_sets.append(p.tokens.tokens)
        for s in inst.sentences:
            token_sets.append(s.tokens)
    if pretrained_words is None:
        return Vocab.build(token_sets)
    seen = set()
    for toks in token_sets:
        seen.update(toks)
    return Vocab(pretrained_words=pretrained_words,
                 learned_words=sorted(seen - set(pretrained_words)))


def _build_models(cfg: ExperimentConfig, vocab, space=None):
    pretrained = None
    if cfg.embedding_file:
        _, pretrained = load_embedding_file(cfg.embedding_file)
    return joint.build_models(
        task=cfg.task, vocab=vocab, n=cfg.hidden_dim, d=cfg.embed_dim,
        dropout_rate=cfg.dropout, seed=cfg.seed, feature_space=space,
        use_counts=cfg.use_counts, pretrained_matrix=pretrained)


def _load_checkpoint_into(store: ParamStore, path):
    loaded = ParamStore.load(path)
    if loaded.names() != store.names():
        missing = set(store.names()) - set(loaded.names())
        extra = set(loaded.names()) - set(store.names())
        raise CheckpointError(
            f"{path}: parameter names do not match the config "
            f"(missing {sorted(missing)}, unexpected {sorted(extra)})")
    for name in store.names():
        if loaded[name].data.shape != store[name].data.shape:
            raise CheckpointError(
                f"{path}: {name} has shape {loaded[name].data.shape}, "
                f"config expects {store[name].data.shape}")
        store[name].data = loaded[name].data
        store[name].requires_grad = loaded[name].requires_grad


def _mode_flags(mode: str):
    return joint._mode_flags(mode)


def _load_pairs(path):
    pairs = []
    with open(path, encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 3 or parts[2] not in ("0", "1"):
                raise ValueError(f"{path}:{lineno}: expected q<TAB>q'<TAB>0/1")
            pairs.append((normalize(parts[0]), normalize(parts[1]),
                          int(parts[2])))
    return pairs


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


@cli.command("mine-rules")
@click.argument("corpus", type=click.Path(exists=True))
@click.argument("out", type=click.Path())
@click.option("--min-cluster-support", default=10, show_default=True)
@click.option("--min-cooccur", default=5, show_default=True)
@_guard
def cmd_mine_rules(corpus, out, min_cluster_support, min_cooccur):
    """Mine ranked template rewrite rules from a question-cluster corpus."""
    clusters = load_cluster_file(corpus)
    if not clusters:
        log.warning("empty corpus: %s", corpus)
    pairs = rank_rules_pmi(
        mine_template_rules(clusters, min_cluster_support, min_cooccur),
        clusters)
    save_template_rules(pairs, out)
    click.echo(f"mined {len(pairs)} template rule pairs from "
               f"{len(clusters)} clusters -> {out}")


@cli.command("generate")
@click.argument("questions", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--out", "out_path", required=True, type=click.Path())
@_guard
def cmd_generate(questions, config_path, out_path):
    """Write candidate paraphrases for each question (one per line)."""
    cfg = load_config(config_path)
    gen_cfg = _generator_config(cfg)
    n_candidates = 0
    with open(questions, encoding="utf-8") as fin, \
            open(out_path, "w", encoding="utf-8") as fout:
        for qid, line in enumerate(fin, start=1):
            line = line.strip()
            if not line:
                continue
            q = normalize(line)
            for cand in generate_all(q, gen_cfg):
                fout.write(f"{qid}\t{cand.origin}\t{cand.gen_score:.17g}\t"
                           f"{cand.tokens.text()}\n")
                n_candidates += 1
    click.echo(f"wrote {n_candidates} candidates -> {out_path}")


@cli.command("train")
@click.argument("dataset", type=click.Path(exists=True))
@click.argument("dev", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@_guard
def cmd_train(dataset, dev, config_path):
    """Train a system and write checkpoint, log, and config snapshot."""
    cfg = load_config(config_path)
    out_dir = Path(cfg.resolved_out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    gen_cfg = (GeneratorConfig() if cfg.mode == "base"
               else _generator_config(cfg))
    kb = space = idf = None
    if cfg.task == "kb":
        kb, space = _load_kb(cfg)
    train_records = parse_dataset_file(dataset)
    if cfg.task == "sentsel" and cfg.use_counts:
        idf = build_idf(train_records)
        idf.save(out_dir / "idf.tsv")
    train_insts = prepare_instances(train_records, gen_cfg, kb=kb,
                                    feature_space=space, idf=idf,
                                    use_counts=cfg.use_counts)
    dev_insts = _prepare(cfg, dev, gen_cfg, kb, space, idf)
    pretrained_words = None
    if cfg.embedding_file:
        pretrained_words, _ = load_embedding_file(cfg.embedding_file)
    vocab = _vocab_for(train_insts, pretrained_words)
    models = _build_models(cfg, vocab, space)
    pair_data = _load_pairs(cfg.pairs_file) if cfg.mode == "seppara" else None

    tc = joint.TrainConfig(
        task=cfg.task, mode=cfg.mode, batch_size=cfg.batch_size, lr=cfg.lr,
        decay=cfg.decay, clip_norm=cfg.clip_norm, dropout=cfg.dropout,
        max_epochs=cfg.max_epochs, patience=cfg.patience, seed=cfg.seed)
    result = joint.train(train_insts, dev_insts, models, tc, pair_data)

    models.store.save(out_dir / "checkpoint.txt")
    vocab.save(out_dir / "vocab.txt")
    with open(out_dir / "train_log.tsv", "w", encoding="utf-8") as f:
        f.write("epoch\ttrain_loss\tdev_metric\n")
        for r in result.log:
            f.write(f"{r.epoch}\t{r.train_loss:.17g}\t{r.dev_metric:.17g}\n")
    with open(out_dir / "resolved_config.txt", "w", encoding="utf-8") as f:
        f.write(cfg.snapshot())
    from .plotting import save_training_curves

    save_training_curves(result.log, out_dir / "train_curves.png")
    click.echo(f"best dev metric {result.best_dev:.4f} at epoch "
               f"{result.best_epoch} ({result.wall_time_s:.1f}s wall) -> {out_dir}")


@cli.command("evaluate")
@click.argument("checkpoint", type=click.Path(exists=True))
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@click.option("--weights-out", type=click.Path(), default=None,
              help="Per-question dump of the top-five paraphrase weights.")
@_guard
def cmd_evaluate(checkpoint, dataset, config_path, weights_out):
    """Evaluate a checkpoint; writes report.tsv, report.txt, report.png."""
    cfg = load_config(config_path)
    out_dir = Path(cfg.resolved_out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gen_cfg = (GeneratorConfig() if cfg.mode == "base"
               else _generator_config(cfg))
    kb = space = idf = None
    if cfg.task == "kb":
        kb, space = _load_kb(cfg)
    idf_path = Path(checkpoint).parent / "idf.tsv"
    if cfg.task == "sentsel" and cfg.use_counts:
        if not idf_path.exists():
            raise CheckpointError(f"{idf_path}: idf table required for +cnt")
        idf = IdfTable.load(idf_path)
    instances = _prepare(cfg, dataset, gen_cfg, kb, space, idf)
    vocab = Vocab.load(Path(checkpoint).parent / "vocab.txt")
    models = _build_models(cfg, vocab, space)
    _load_checkpoint_into(models.store, checkpoint)

    uniform, identity_only = _mode_flags(cfg.mode)
    rows = []
    if cfg.task == "kb":
        metric, f1s = joint.evaluate(instances, models, "kb",
                                     uniform, identity_only)
        rows.append(("average_f1", metric))
        per_question = f1s
        metric_name = "per-question F1"
    else:
        _, ranked = joint.evaluate(instances, models, "sentsel",
                                   uniform, identity_only)
        m, r = map_mrr(ranked)
        rows.append(("MAP", m))
        rows.append(("MRR", r))
        if cfg.use_counts:
            stripped = []
            for inst in instances:
                saved = inst.count_features
                inst.count_features = []
                out = joint.mixture_predict(inst, models, uniform, identity_only)
                stripped.append((list(out.answer_probs), list(inst.labels)))
                inst.count_features = saved
            m0, r0 = map_mrr(stripped)
            rows.append(("MAP_nocnt", m0))
            rows.append(("MRR_nocnt", r0))
        per_question = [map_mrr([rl])[0] if any(rl[1]) else 0.0
                        for rl in ranked]
        metric_name = "per-question AP"

    with open(out_dir / "report.tsv", "w", encoding="utf-8") as f:
        f.write("metric\tvalue\n")
        for name, value in rows:
            f.write(f"{name}\t{value:.17g}\n")
    width = max(len(n) for n, _ in rows) + 2
    with open(out_dir / "report.txt", "w", encoding="utf-8") as f:
        for name, value in rows:
            f.write(f"{name.ljust(width)}{value:10.4f}\n")
    from .plotting import save_metric_histogram

    save_metric_histogram(per_question, metric_name, out_dir / "report.png")

    if weights_out:
        with open(weights_out, "w", encoding="utf-8") as f:
            f.write("qid\trank\tweight\torigin\tparaphrase\n")
            for qid, inst in enumerate(instances, start=1):
                out = joint.mixture_predict(inst, models, uniform, identity_only)
                order = np.argsort(-out.paraphrase_weights, kind="stable")[:5]
                for rank, idx in enumerate(order, start=1):
                    p = out.paraphrases[idx]
                    f.write(f"{qid}\t{rank}\t{out.paraphrase_weights[idx]:.17g}"
                            f"\t{p.origin}\t{p.tokens.text()}\n")
    for name, value in rows:
        click.echo(f"{name}\t{value:.6f}")


@cli.command("stats")
@click.argument("dataset", type=click.Path(exists=True))
@click.option("--config", "config_path", required=True,
              type=click.Path(exists=True))
@_guard
def cmd_stats(dataset, config_path):
    """Per-generator paraphrase statistics over a dataset's questions."""
    cfg = load_config(config_path)
    out_dir = Path(cfg.resolved_out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    gen_cfg = _generator_config(cfg)
    questions = [normalize(rec.question) for rec in parse_dataset_file(dataset)]
    report = paraphrase_stats(questions, gen_cfg)
    (out_dir / "stats.tsv").write_text(report.to_tsv(), encoding="utf-8")
    (out_dir / "stats.txt").write_text(report.to_text(), encoding="utf-8")
    from .plotting import save_stats_chart

    save_stats_chart(report, out_dir / "stats.png")
    click.echo(report.to_text())


def main():
    cli()


if __name__ == "__main__":
    main()
