import numpy as np
import pytest

from conftest import max_rel_err
from fusionqa import attention as A
from fusionqa import tensor as T
from fusionqa.errors import DimensionError


def make_params(d=8, heads=2, seed=0, d_ff=None):
    return A.init_attention_params(np.random.default_rng(seed), d, heads, d_ff)


def rand(shape, seed=0):
    return T.tensor(np.random.default_rng(seed).normal(size=shape))


def test_output_shape_contract():
    p = make_params(d=8, heads=2)
    out = A.mha(rand((3, 8), 1), rand((5, 8), 2), rand((5, 8), 3), p)
    assert out.shape == (3, 8)
    out = A.attention_block(rand((3, 8), 1), rand((5, 8), 2), rand((5, 8), 3), p)
    assert out.shape == (3, 8)
    out = A.cross_attention(rand((4, 8), 4), rand((9, 8), 5), p)
    assert out.shape == (4, 8)
    out = A.self_attention(rand((6, 8), 6), p)
    assert out.shape == (6, 8)


def test_mha_uniform_weights_when_keys_identical():
    p = make_params()
    row = np.random.default_rng(7).normal(size=8)
    k = T.tensor(np.tile(row, (5, 1)))
    q = rand((3, 8), 8)
    for m in A.attention_maps(q, k, p):
        np.testing.assert_allclose(m, np.full((3, 5), 0.2), atol=1e-12)
    # pooled value equals the mean of projected V rows regardless of the query
    v = rand((5, 8), 9)
    out = A.mha(q, k, v, p).data
    vbar = np.tile(v.data.mean(axis=0), (5, 1))
    expected = A.mha(q, k, T.tensor(vbar), p).data
    np.testing.assert_allclose(out, expected, atol=1e-10)


def test_mha_weights_are_probability_rows():
    p = make_params(seed=3)
    maps = A.attention_maps(rand((4, 8), 10), rand((6, 8), 11), p)
    for m in maps:
        assert np.all(m >= 0)
        np.testing.assert_allclose(m.sum(axis=1), 1.0, atol=1e-9)


def test_mha_joint_permutation_of_k_and_v():
    p = make_params(seed=4)
    q, k, v = rand((3, 8), 12), rand((5, 8), 13), rand((5, 8), 14)
    base = A.mha(q, k, v, p).data
    perm = np.random.default_rng(15).permutation(5)
    out = A.mha(q, T.tensor(k.data[perm]), T.tensor(v.data[perm]), p).data
    assert np.max(np.abs(base - out)) <= 1e-12


def test_mha_rejects_kv_row_mismatch():
    p = make_params()
    with pytest.raises(DimensionError):
        A.mha(rand((3, 8), 1), rand((5, 8), 2), rand((4, 8), 3), p)


def test_cross_attention_rejects_width_mismatch():
    p = make_params()
    with pytest.raises(DimensionError):
        A.cross_attention(rand((3, 8), 1), rand((3, 4), 2), p)


def test_identity_ffn_passthrough():
    # identity FFN on a nonnegative MHA output leaves it unchanged
    p = make_params(d=4, heads=2, d_ff=4, seed=5)
    p.w_ff1 = T.tensor(np.eye(4))
    p.b_ff1 = T.zeros((4,))
    p.w_ff2 = T.tensor(np.eye(4))
    p.b_ff2 = T.zeros((4,))
    # positive value path + identity output projection force mha output >= 0
    rng = np.random.default_rng(16)
    p.w_v = [T.tensor(np.abs(rng.normal(size=(4, 2)))) for _ in range(2)]
    p.w_o = T.tensor(np.eye(4))
    q, k = rand((3, 4), 16), rand((4, 4), 17)
    v = T.tensor(np.abs(rng.normal(size=(4, 4))))
    raw = A.mha(q, k, v, p)
    assert np.all(raw.data >= 0)
    np.testing.assert_array_equal(A.attention_block(q, k, v, p).data, raw.data)


def test_cross_equals_self_on_same_input():
    p = make_params(seed=6)
    f = rand((4, 8), 19)
    a = A.cross_attention(f, f, p).data
    b = A.attention_block(f, f, f, p).data
    c = A.self_attention(f, p).data
    assert np.array_equal(a, b) and np.array_equal(b, c)


def test_single_row_self_attention():
    p = make_params(seed=7)
    h = rand((1, 8), 20)
    m = A.attention_maps(h, h, p)
    for w in m:
        np.testing.assert_array_equal(w, [[1.0]])
    out = A.self_attention(h, p)
    assert out.shape == (1, 8)


def test_identical_value_rows_give_identical_output_rows():
    p = make_params(seed=8)
    q = rand((4, 8), 21)
    k = rand((5, 8), 22)
    v = T.tensor(np.tile(np.random.default_rng(23).normal(size=8), (5, 1)))
    out = A.mha(q, k, v, p).data
    for i in range(1, 4):
        np.testing.assert_allclose(out[i], out[0], atol=1e-12)


def test_determinism():
    p = make_params(seed=9)
    q, k, v = rand((3, 8), 24), rand((5, 8), 25), rand((5, 8), 26)
    a = A.attention_block(q, k, v, p).data
    b = A.attention_block(q, k, v, p).data
    assert np.array_equal(a, b)


def grad_of(fn, params, leaf):
    T.zero_grad(t for _, t in params.named_parameters())
    T.backward(fn())
    return None if leaf.grad is None else leaf.grad.copy()


@pytest.mark.parametrize("op", ["block", "self"])
def test_gradients_match_finite_differences(op):
    d, heads = 4, 2
    p = make_params(d=d, heads=heads, d_ff=6, seed=10)
    q, k, v = rand((3, d), 27), rand((4, d), 28), rand((4, d), 29)
    c = rand((3, d), 30)  # fixed weighting keeps the scalar non-degenerate

    def run():
        if op == "block":
            out = A.attention_block(q, k, v, p)
        else:
            out = A.self_attention(q, p)
        return T.tsum(T.mul(out, c))

    for name, leaf in p.named_parameters():
        got = grad_of(run, p, leaf)
        x0 = leaf.data.copy()

        def f(t):
            leaf.data = t.data
            try:
                return run()
            finally:
                leaf.data = x0

        fd = T.finite_diff_grad(f, T.tensor(x0), 1e-5)
        assert got is not None, name
        assert max_rel_err(got, fd) <= 1e-4, name
