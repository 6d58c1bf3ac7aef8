import math

import numpy as np
import pytest

from paraqa.errors import InvalidArgumentError, ShapeError
from paraqa.tensornet import (
    LstmParams,
    ParamStore,
    Tensor,
    Vocab,
    ag,
    backward,
    bilstm_encode,
    clip_grad_norm,
    dropout,
    embed,
    init_uniform,
    lstm_step,
    rmsprop_update,
)
from paraqa.tensornet.store import UNK, load_embedding_file

from conftest import finite_diff_check


class TestAutodiffOps:
    def test_sum_of_parameter_gives_ones(self):
        store = ParamStore()
        p = store.add("p", np.array([1.0, 2.0, 3.0]))
        backward(ag.tsum(p))
        np.testing.assert_array_equal(p.grad, np.ones(3))

    def test_half_squared_norm_gives_parameter(self):
        store = ParamStore()
        p = store.add("p", np.array([1.5, -2.0, 0.25]))
        loss = ag.scale(ag.tsum(ag.mul(p, p)), 0.5)
        backward(loss)
        np.testing.assert_allclose(p.grad, p.data)

    def test_each_op_against_finite_differences(self, rng):
        store = ParamStore()
        a = store.add("a", rng.normal(size=(3, 4)))
        b = store.add("b", rng.normal(size=4))
        c = store.add("c", rng.normal(size=3))

        cases = {
            "matvec": lambda: ag.tsum(ag.tanh(ag.matmul(a, b))),
            "sigmoid": lambda: ag.tsum(ag.sigmoid(ag.add(ag.matmul(a, b), c))),
            "exp_log": lambda: ag.tsum(ag.log(ag.add(ag.exp(b), Tensor(np.full(4, 2.0))))),
            "concat": lambda: ag.tsum(ag.mul(ag.concat([b, c]), ag.concat([b, c]))),
            "softmax": lambda: ag.take_row(ag.softmax(c), 1),
            "div": lambda: ag.tsum(ag.div(b, ag.add(ag.mul(b, b), Tensor(np.full(4, 1.5))))),
            "mean_rows": lambda: ag.tmean(ag.vstack([ag.take_row(a, i) for i in range(3)])),
            "clip": lambda: ag.tsum(ag.clip(b, -0.5, 0.5)),
        }
        for name, fn in cases.items():
            finite_diff_check(store, fn), name

    def test_matmul_shape_mismatch(self):
        with pytest.raises(ShapeError):
            ag.matmul(Tensor(np.zeros((2, 3))), Tensor(np.zeros(4)))

    def test_no_grad_builds_no_tape(self):
        store = ParamStore()
        p = store.add("p", np.ones(3))
        with ag.no_grad():
            out = ag.tsum(ag.mul(p, p))
        assert not out.requires_grad
        assert out.parents == ()


class TestLstm:
    def test_zero_weights_give_zero_state(self):
        store = ParamStore()
        p = LstmParams.create(store, "z", n=3, d=2)
        h, c = lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(3)),
                         Tensor(np.array([1.0, -1.0])), p)
        np.testing.assert_array_equal(h.data, np.zeros(3))
        np.testing.assert_array_equal(c.data, np.zeros(3))

    def test_scalar_hand_example(self):
        # n=1, d=1, all weights and biases 1, x=1, h_prev=c_prev=0:
        # every gate sees w.[h,x]+b = 2
        store = ParamStore()
        p = LstmParams.create(store, "s", n=1, d=1)
        for name in store.names():
            store[name].data[:] = 1.0
        h, c = lstm_step(Tensor(np.zeros(1)), Tensor(np.zeros(1)),
                         Tensor(np.ones(1)), p)
        sig2 = 1.0 / (1.0 + math.exp(-2.0))
        c_exp = sig2 * math.tanh(2.0)
        h_exp = sig2 * math.tanh(c_exp)
        assert c.data[0] == pytest.approx(c_exp, abs=1e-12)
        assert h.data[0] == pytest.approx(h_exp, abs=1e-12)

    def test_hidden_state_bounded(self, rng):
        store = ParamStore()
        p = LstmParams.create(store, "b", n=4, d=3)
        init_uniform(store, -2.0, 2.0, seed=rng)
        h = c = Tensor(np.zeros(4))
        for _ in range(5):
            h, c = lstm_step(h, c, Tensor(rng.normal(size=3)), p)
            assert np.all(np.abs(h.data) < 1.0)

    def test_dimension_mismatch_raises(self):
        store = ParamStore()
        p = LstmParams.create(store, "m", n=2, d=3)
        with pytest.raises(ShapeError):
            lstm_step(Tensor(np.zeros(2)), Tensor(np.zeros(2)),
                      Tensor(np.zeros(5)), p)

    def test_gradients_through_step(self, rng):
        store = ParamStore()
        p = LstmParams.create(store, "g", n=2, d=2)
        init_uniform(store, -0.5, 0.5, seed=rng)
        x = Tensor(rng.normal(size=2))

        def loss():
            h, c = lstm_step(Tensor(np.zeros(2)), Tensor(np.zeros(2)), x, p)
            return ag.tsum(ag.mul(h, h))

        finite_diff_check(store, loss)


class TestBilstm:
    def _params(self, rng, n=3, d=2):
        store = ParamStore()
        fwd = LstmParams.create(store, "fwd", n=n, d=d)
        bwd = LstmParams.create(store, "bwd", n=n, d=d)
        init_uniform(store, -0.5, 0.5, seed=rng)
        return store, fwd, bwd

    def test_single_step_concatenation(self, rng):
        store, fwd, bwd = self._params(rng)
        x = Tensor(rng.normal(size=(1, 2)))
        out = bilstm_encode(x, fwd, bwd)
        hf, _ = lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(3)),
                          ag.take_row(x, 0), fwd)
        hb, _ = lstm_step(Tensor(np.zeros(3)), Tensor(np.zeros(3)),
                          ag.take_row(x, 0), bwd)
        np.testing.assert_allclose(out.data, np.concatenate([hf.data, hb.data]))

    def test_reversal_swaps_halves(self, rng):
        store, fwd, bwd = self._params(rng)
        x = rng.normal(size=(4, 2))
        out = bilstm_encode(Tensor(x), fwd, bwd)
        rev = bilstm_encode(Tensor(x[::-1].copy()), bwd, fwd)
        np.testing.assert_allclose(out.data[:3], rev.data[3:], atol=1e-12)
        np.testing.assert_allclose(out.data[3:], rev.data[:3], atol=1e-12)

    def test_against_plain_numpy_reference(self, rng):
        store, fwd, bwd = self._params(rng)
        x = rng.normal(size=(3, 2))

        def ref_dir(p, seq):
            h = np.zeros(3)
            c = np.zeros(3)
            for row in seq:
                z = np.concatenate([h, row])
                i = 1 / (1 + np.exp(-(p.w_input.data @ z + p.b_input.data)))
                f = 1 / (1 + np.exp(-(p.w_forget.data @ z + p.b_forget.data)))
                o = 1 / (1 + np.exp(-(p.w_output.data @ z + p.b_output.data)))
                g = np.tanh(p.w_cand.data @ z + p.b_cand.data)
                c = f * c + i * g
                h = o * np.tanh(c)
            return h
        expected = np.concatenate([ref_dir(fwd, x), ref_dir(bwd, x[::-1])])
        out = bilstm_encode(Tensor(x), fwd, bwd)
        np.testing.assert_allclose(out.data, expected, atol=1e-10)

    def test_gradients_through_encoder(self, rng):
        store, fwd, bwd = self._params(rng)
        x = Tensor(rng.normal(size=(3, 2)))

        def loss():
            v = bilstm_encode(x, fwd, bwd)
            return ag.tsum(ag.mul(v, v))

        finite_diff_check(store, loss)


class TestEmbed:
    def test_one_hot_lookup(self):
        store = ParamStore()
        vocab = Vocab(learned_words=["w0", "w1", "w2"])
        learned = store.add("emb", np.eye(len(vocab)))
        out = embed(["w1"], vocab, None, learned)
        # rows: <s>, w1, </s>
        assert out.data.shape == (3, len(vocab))
        assert out.data[1][vocab.index("w1")] == 1.0
        assert out.data[1].sum() == 1.0

    def test_unknown_token_maps_to_unk_row(self, rng):
        store = ParamStore()
        vocab = Vocab(learned_words=["known"])
        learned = store.add("emb", rng.normal(size=(len(vocab), 4)))
        out = embed(["never-seen"], vocab, None, learned)
        np.testing.assert_array_equal(
            out.data[1], learned.data[vocab.index(UNK) - vocab.pretrained_count]
        )

    def test_hand_written_lookup(self):
        store = ParamStore()
        vocab = Vocab(pretrained_words=["alpha", "beta"])
        pre = store.add("pre", np.array([[1.0, 2, 3, 4, 5], [6, 7, 8, 9, 10.0]]),
                        trainable=False)
        lrn = store.add("lrn", np.zeros((3, 5)))
        out = embed(["beta", "alpha"], vocab, pre, lrn)
        np.testing.assert_array_equal(out.data[1], [6, 7, 8, 9, 10])
        np.testing.assert_array_equal(out.data[2], [1, 2, 3, 4, 5])

    def test_fixed_bank_gets_no_gradient_and_no_update(self, rng):
        store = ParamStore()
        vocab = Vocab(pretrained_words=["alpha", "beta"])
        pre = store.add("pre", rng.normal(size=(2, 3)), trainable=False)
        lrn = store.add("lrn", rng.normal(size=(3, 3)))
        before = pre.data.copy()

        for _ in range(3):
            store.zero_grad()
            out = embed(["alpha", "beta"], vocab, pre, lrn)
            backward(ag.tsum(ag.mul(out, out)))
            grads = store.grads()
            assert "pre" not in grads
            rmsprop_update(store, grads)

        assert pre.data.tobytes() == before.tobytes()
        assert lrn.grad is not None


class TestRmsprop:
    def test_zero_gradient_leaves_parameters(self):
        store = ParamStore()
        p = store.add("p", np.array([1.0, -2.0]))
        rmsprop_update(store, {"p": np.zeros(2)})
        np.testing.assert_array_equal(p.data, [1.0, -2.0])

    def test_hand_arithmetic_single_step(self):
        store = ParamStore()
        p = store.add("p", np.array([1.0]))
        rmsprop_update(store, {"p": np.array([1.0])}, lr=0.01, decay=0.95)
        a = 0.05 * 1.0
        expected = 1.0 - 0.01 * 1.0 / math.sqrt(a + 1e-8)
        assert p.data[0] == pytest.approx(expected, abs=1e-15)
        assert store.accum["p"][0] == pytest.approx(a, abs=1e-15)

    def test_defaults_match_protocol(self):
        import inspect

        sig = inspect.signature(rmsprop_update)
        assert sig.parameters["lr"].default == 0.01
        assert sig.parameters["decay"].default == 0.95


class TestClip:
    def test_norm_below_threshold_unchanged(self):
        g = {"a": np.array([3.0])}
        out = clip_grad_norm(g, 5.0)
        np.testing.assert_array_equal(out["a"], [3.0])

    def test_six_eight_scales_to_three_four(self):
        out = clip_grad_norm({"v": np.array([6.0, 8.0])}, 5.0)
        np.testing.assert_allclose(out["v"], [3.0, 4.0])

    def test_post_clip_norm_bounded(self, rng):
        for _ in range(50):
            g = {"a": rng.normal(size=7) * 10, "b": rng.normal(size=(2, 3)) * 10}
            out = clip_grad_norm(g, 5.0)
            norm = math.sqrt(sum(float(np.sum(v * v)) for v in out.values()))
            assert norm <= 5.0 + 1e-9


class TestInitUniform:
    def test_bounds_respected(self):
        store = ParamStore()
        store.add("p", np.zeros((100, 10)))
        init_uniform(store, seed=3)
        assert np.all(store["p"].data >= -0.08)
        assert np.all(store["p"].data <= 0.08)

    def test_same_seed_bitwise_identical(self):
        a, b = ParamStore(), ParamStore()
        for s in (a, b):
            s.add("p", np.zeros((20, 20)))
            init_uniform(s, seed=99)
        assert a["p"].data.tobytes() == b["p"].data.tobytes()

    def test_empirical_mean_near_zero(self):
        store = ParamStore()
        store.add("p", np.zeros(100000))
        init_uniform(store, seed=7)
        assert abs(store["p"].data.mean()) < 0.002

    def test_bad_bounds_raise(self):
        store = ParamStore()
        store.add("p", np.zeros(2))
        with pytest.raises(InvalidArgumentError):
            init_uniform(store, lo=0.1, hi=0.1)


class TestDropout:
    def test_rate_zero_is_identity(self):
        x = Tensor(np.ones(5))
        assert dropout(x, 0.0, training=True) is x

    def test_eval_mode_is_identity(self):
        x = Tensor(np.ones(5))
        assert dropout(x, 0.4, training=False) is x

    def test_unbiased_scaling(self):
        rng = np.random.default_rng(11)
        x = Tensor(np.ones(100000))
        out = dropout(x, 0.3, training=True, rng=rng)
        assert abs(out.data.mean() - 1.0) < 0.02

    def test_invalid_rate(self):
        with pytest.raises(InvalidArgumentError):
            dropout(Tensor(np.ones(2)), 1.0, training=True,
                    rng=np.random.default_rng(0))


class TestCheckpoint:
    def test_bit_exact_roundtrip(self, tmp_path, rng):
        store = ParamStore()
        store.add("enc.w", rng.normal(size=(4, 7)) * 1e-3)
        store.add("enc.b", rng.normal(size=4))
        store.add("emb.fixed", rng.normal(size=(3, 2)), trainable=False)
        path = tmp_path / "ckpt.txt"
        store.save(path)
        loaded = ParamStore.load(path)
        assert loaded.names() == store.names()
        for name in store.names():
            assert loaded[name].data.tobytes() == store[name].data.tobytes()
            assert loaded[name].requires_grad == store[name].requires_grad

    def test_identical_runs_identical_bytes(self, tmp_path):
        paths = []
        for tag in ("a", "b"):
            store = ParamStore()
            store.add("p", np.zeros((5, 5)))
            init_uniform(store, seed=42)
            p = tmp_path / f"{tag}.txt"
            store.save(p)
            paths.append(p.read_bytes())
        assert paths[0] == paths[1]


class TestEmbeddingFile:
    def test_parse_standard_layout(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("alpha 0.5 -1.0 2.0\nbeta 1.0 0.0 -0.25\n")
        words, mat = load_embedding_file(path)
        assert words == ["alpha", "beta"]
        np.testing.assert_array_equal(mat, [[0.5, -1.0, 2.0], [1.0, 0.0, -0.25]])

    def test_dimension_mismatch_rejected(self, tmp_path):
        path = tmp_path / "vecs.txt"
        path.write_text("alpha 0.5 1.0\nbeta 1.0\n")
        with pytest.raises(InvalidArgumentError):
            load_embedding_file(path)
