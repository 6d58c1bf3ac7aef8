import math

import numpy as np
import pytest

from paraqa.errors import InvalidArgumentError
from paraqa.qamodels import (
    IdfTable,
    KBFeatureSpace,
    KbModel,
    SentSelModel,
    ToyKB,
    f1_vs_gold,
    generate_subgraphs,
    link_entities,
    parse_dataset_file,
    word_match_features,
)
from paraqa.tensornet import ParamStore, Vocab, ag, init_uniform
from paraqa.textkit import normalize

from conftest import finite_diff_check


def small_kb():
    triples = [
        ("E1", "founded_by", "P1"),
        ("E1", "employment", "M1"),
        ("M1", "person", "P2"),
        ("M1", "year", "2008"),
        ("M2", "person", "P3"),
        ("E1", "employment", "M2"),
        ("M2", "year", "2010"),
    ]
    aliases = [("microsoft", "E1"), ("new york", "E2"), ("york", "E3")]
    return ToyKB(triples, aliases)


class TestLinking:
    def test_alias_match(self):
        kb = small_kb()
        assert link_entities(normalize("who started microsoft"), kb) == ["E1"]

    def test_no_match(self):
        kb = small_kb()
        assert link_entities(normalize("who started apple"), kb) == []

    def test_longest_match_wins(self):
        kb = small_kb()
        out = link_entities(normalize("students in new york today"), kb)
        assert out == ["E2"]


class TestSubgraphs:
    def test_single_edge_kb(self):
        kb = ToyKB([("E1", "founder", "P1")], [("e one", "E1")])
        cands = generate_subgraphs(["E1"], kb)
        assert len(cands) == 1
        assert cands[0].path == ("founder",)
        assert cands[0].denotation == frozenset({"P1"})

    def test_two_hop_chain(self):
        kb = ToyKB([("E1", "r1", "M"), ("M", "r2", "P2")], [])
        cands = generate_subgraphs(["E1"], kb)
        paths = {(c.path, c.denotation) for c in cands}
        assert (("r1", "r2"), frozenset({"P2"})) in paths

    def test_constraint_narrows_denotation(self):
        kb = small_kb()
        cands = generate_subgraphs(["E1"], kb)
        unconstrained = [c for c in cands if c.path == ("employment", "person")
                         and c.constraint is None]
        constrained = [c for c in cands if c.path == ("employment", "person")
                       and c.constraint == ("year", "2008")]
        assert unconstrained[0].denotation == frozenset({"P2", "P3"})
        assert constrained[0].denotation == frozenset({"P2"})

    def test_matches_bruteforce_traversal(self, rng):
        # exhaustive reference: enumerate all paths/constraints directly
        entities = [f"E{i}" for i in range(4)]
        mids = [f"M{i}" for i in range(4)]
        leaves = [f"P{i}" for i in range(6)]
        rels = ["ra", "rb", "rc"]
        triples = set()
        for _ in range(60):
            kind = rng.integers(0, 3)
            if kind == 0:
                triples.add((entities[rng.integers(0, 4)],
                             rels[rng.integers(0, 3)],
                             mids[rng.integers(0, 4)]))
            elif kind == 1:
                triples.add((mids[rng.integers(0, 4)],
                             rels[rng.integers(0, 3)],
                             leaves[rng.integers(0, 6)]))
            else:
                triples.add((mids[rng.integers(0, 4)],
                             "attr", f"v{rng.integers(0, 3)}"))
        kb = ToyKB(triples, [])
        topic = entities[0]
        got = {(c.path, c.constraint, c.denotation)
               for c in generate_subgraphs([topic], kb)}

        expected = set()
        out1 = [(r, o) for s, r, o in triples if s == topic]
        for r1 in {r for r, _ in out1}:
            deno1 = frozenset(o for r, o in out1 if r == r1)
            expected.add(((r1,), None, deno1))
            mids1 = list(deno1)
            rel2 = {r for m in mids1 for s, r, o in triples if s == m}
            for r2 in rel2:
                deno2 = frozenset(o for m in mids1 for s, r, o in triples
                                  if s == m and r == r2)
                if deno2:
                    expected.add(((r1, r2), None, deno2))
                cons = {(rc, v) for m in mids1 for s, rc, v in triples if s == m}
                for rc, v in cons:
                    if rc == r2:
                        continue
                    allowed = [m for m in mids1 if (m, rc, v) in triples]
                    deno_c = frozenset(o for m in allowed for s, r, o in triples
                                       if s == m and r == r2)
                    if deno_c:
                        expected.add(((r1, r2), (rc, v), deno_c))
        assert got == expected

    def test_empty_entities_raise(self):
        with pytest.raises(InvalidArgumentError):
            generate_subgraphs([], small_kb())


class TestF1:
    def test_exact(self):
        assert f1_vs_gold({"a", "b"}, {"a", "b"}) == 1.0

    def test_disjoint(self):
        assert f1_vs_gold({"a"}, {"b"}) == 0.0

    def test_half_overlap(self):
        assert f1_vs_gold({"a", "b"}, {"b", "c"}) == pytest.approx(0.5)

    def test_range(self, rng):
        pool = list("abcdefgh")
        for _ in range(100):
            d = set(rng.choice(pool, size=rng.integers(1, 5), replace=False))
            g = set(rng.choice(pool, size=rng.integers(1, 5), replace=False))
            assert 0.0 <= f1_vs_gold(d, g) <= 1.0


class TestKbFeatures:
    def test_overlap_via_shared_stem(self):
        kb = ToyKB([("E1", "founded_by", "P1"), ("E1", "ceo", "P9")],
                   [("microsoft", "E1")])
        space = KBFeatureSpace(kb)
        cands = generate_subgraphs(["E1"], kb)
        founded = [c for c in cands if c.path == ("founded_by",)][0]
        q = normalize("who founded microsoft")
        vec = space.features(q, founded)
        assert vec[space.names.index("overlap")] >= 1

    def test_zero_overlap(self):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        cands = generate_subgraphs(["E1"], kb)
        q = normalize("random words only")
        for c in cands:
            assert space.features(q, c)[0] == 0

    def test_path_length_feature(self):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        two_hop = [c for c in generate_subgraphs(["E1"], kb)
                   if len(c.path) == 2][0]
        vec = space.features(normalize("anything"), two_hop)
        assert vec[space.names.index("path_len")] == 2.0

    def test_relation_indicators(self):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        cand = [c for c in generate_subgraphs(["E1"], kb)
                if c.path == ("founded_by",)][0]
        vec = space.features(normalize("x"), cand)
        assert vec[space.names.index("rel::founded_by")] == 1.0
        assert vec[space.names.index("rel::employment")] == 0.0


class TestKbModel:
    def test_zero_weights_give_half(self):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        store = ParamStore()
        model = KbModel(store, space)
        p = model.prob(np.ones(space.dim))
        assert p.data[0] == pytest.approx(0.5)

    def test_hand_sigmoid(self):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        store = ParamStore()
        model = KbModel(store, space)
        model.w.data[0] = 2.0
        model.b.data[0] = -0.5
        f = np.zeros(space.dim)
        f[0] = 1.5
        expected = 1 / (1 + math.exp(-(2.0 * 1.5 - 0.5)))
        assert model.prob(f).data[0] == pytest.approx(expected, abs=1e-12)

    def test_output_in_open_interval(self, rng):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        store = ParamStore()
        model = KbModel(store, space)
        init_uniform(store, -1, 1, seed=rng)
        for _ in range(20):
            p = model.prob(rng.normal(size=space.dim))
            assert 0.0 < p.data[0] < 1.0

    def test_batch_matches_single(self, rng):
        kb = small_kb()
        space = KBFeatureSpace(kb)
        store = ParamStore()
        model = KbModel(store, space)
        init_uniform(store, -0.5, 0.5, seed=rng)
        mat = rng.normal(size=(4, space.dim))
        batch = model.probs(mat)
        for i in range(4):
            assert batch.data[i] == pytest.approx(model.prob(mat[i]).data[0])


def make_sentsel(n=2, d=2, use_counts=False, seed=4):
    store = ParamStore()
    vocab = Vocab(learned_words=["who", "start", "microsoft", "founder",
                                 "compani", "histori"])
    from paraqa.encoding import add_embedding_banks

    add_embedding_banks(store, vocab, d)
    model = SentSelModel(store, vocab, n=n, d=d, use_counts=use_counts)
    init_uniform(store, seed=seed)
    return store, model


class TestSentSel:
    def test_zero_scoring_weights_give_half(self):
        store, model = make_sentsel(seed=6)
        model.w.data[:] = 0.0
        model.b.data[:] = 0.0
        p = model.prob(normalize("who started microsoft"),
                       normalize("the founder of the company"))
        assert p.data[0] == pytest.approx(0.5)

    def test_output_in_open_interval(self):
        store, model = make_sentsel()
        p = model.prob(normalize("who started microsoft"),
                       normalize("company history text"))
        assert 0.0 < p.data[0] < 1.0

    def test_matches_reference_pipeline(self):
        store, model = make_sentsel(n=2, d=2)
        q = normalize("who started microsoft")
        s = normalize("founder company")
        qv = model.encode_question(q)
        sv = model.encode_sentence(s)
        feats = np.concatenate([qv.data, sv.data, qv.data * sv.data])
        expected = 1 / (1 + np.exp(-(model.w.data @ feats + model.b.data[0])))
        assert model.prob(q, s).data[0] == pytest.approx(expected, abs=1e-10)

    def test_separate_encoders(self):
        store, model = make_sentsel()
        q = normalize("who started microsoft")
        assert not np.allclose(model.encode_question(q).data,
                               model.encode_sentence(q).data)

    def test_gradients_end_to_end(self):
        store, model = make_sentsel(n=2, d=2, seed=8)
        q = normalize("who started microsoft")
        s = normalize("founder company")

        def loss():
            p = model.prob(q, s)
            return ag.neg(ag.log(p))

        finite_diff_check(store, loss)

    def test_counts_layer_gradients(self):
        store, model = make_sentsel(n=2, d=2, use_counts=True, seed=9)
        q = normalize("who started microsoft")
        s = normalize("microsoft founder")

        def loss():
            p = model.prob(q, s, counts=(1.0, 0.7))
            return ag.neg(ag.log(p))

        finite_diff_check(store, loss)


class TestWordMatch:
    def test_no_shared_words(self):
        c, ci = word_match_features(normalize("who started microsoft"),
                                    normalize("unrelated sentence entirely"))
        assert (c, ci) == (0.0, 0.0)

    def test_identical_gives_distinct_content_count(self):
        q = normalize("who started microsoft microsoft")
        c, _ = word_match_features(q, q)
        assert c == len(set(q.content_tokens()))

    def test_idf_weighted_hand_corpus(self):
        sents = [normalize("microsoft built software"),
                 normalize("microsoft founded redmond"),
                 normalize("apples grow slowly")]
        idf = IdfTable(sents)
        # df(microsoft) = 2, N = 3 -> idf = log(4/3)
        q = normalize("who started microsoft")
        c, ci = word_match_features(q, sents[0], idf)
        assert c == 1.0
        assert ci == pytest.approx(math.log(4 / 3))

    def test_idf_roundtrip(self, tmp_path):
        idf = IdfTable([normalize("alpha beta"), normalize("beta gamma")])
        p = tmp_path / "idf.tsv"
        idf.save(p)
        loaded = IdfTable.load(p)
        assert loaded.n_sentences == 2
        assert loaded.df == idf.df


class TestDatasetParsing:
    def test_kb_and_sentsel_lines(self, tmp_path):
        path = tmp_path / "data.tsv"
        path.write_text(
            "who started microsoft\tkb\tP1|P2\n"
            "who started microsoft\tsentsel\t1|the founder was P1\t0|other text\n"
        )
        recs = parse_dataset_file(path)
        assert recs[0].task == "kb"
        assert recs[0].gold == ["P1", "P2"]
        assert recs[1].task == "sentsel"
        assert recs[1].sentences == [(1, "the founder was P1"), (0, "other text")]

    def test_malformed_line_reports_number(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("question\tkb\tP1\nbroken line\n")
        with pytest.raises(ValueError, match="bad.tsv:2"):
            parse_dataset_file(path)

    def test_unknown_task_rejected(self, tmp_path):
        path = tmp_path / "bad.tsv"
        path.write_text("q\tweird\tx\n")
        with pytest.raises(ValueError, match="unknown task"):
            parse_dataset_file(path)
