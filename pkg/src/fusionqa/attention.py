"""Attention primitives: multi-head attention, FFN, and the composite block.

The composite block is FFN(MHA(Q, K, V)) with no residual connections or
layer normalization; cross attention is the block applied as (F1, F2, F2)
and self attention as (H, H, H). Scaled dot-product uses 1/sqrt(d_h).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import tensor as T
from .errors import DimensionError
from .tensor import Tensor


@dataclass
class AttentionParams:
    """Weights of one attention block.

    Per-head projections are kept as separate d-by-d_h matrices; head outputs
    are concatenated and projected by ``w_o``. The FFN is two layers with
    biases and a ReLU between them.
    """

    heads: int
    w_q: list[Tensor]
    w_k: list[Tensor]
    w_v: list[Tensor]
    w_o: Tensor
    w_ff1: Tensor
    b_ff1: Tensor
    w_ff2: Tensor
    b_ff2: Tensor

    def __post_init__(self) -> None:
        d = self.w_o.shape[0]
        if self.heads < 1 or d % self.heads != 0:
            raise DimensionError(f"model width {d} not divisible by {self.heads} heads")
        d_h = d // self.heads
        for name, mats in (("w_q", self.w_q), ("w_k", self.w_k), ("w_v", self.w_v)):
            if len(mats) != self.heads:
                raise DimensionError(f"{name}: expected {self.heads} head matrices, got {len(mats)}")
            for m in mats:
                if m.shape != (d, d_h):
                    raise DimensionError(f"{name}: head matrix is {m.shape}, expected {(d, d_h)}")
        if self.w_o.shape != (d, d):
            raise DimensionError(f"w_o is {self.w_o.shape}, expected {(d, d)}")
        d_ff = self.w_ff1.shape[1]
        if self.w_ff1.shape != (d, d_ff) or self.b_ff1.shape != (d_ff,):
            raise DimensionError("FFN first layer shapes inconsistent")
        if self.w_ff2.shape != (d_ff, d) or self.b_ff2.shape != (d,):
            raise DimensionError("FFN second layer shapes inconsistent")

    @property
    def d(self) -> int:
        return self.w_o.shape[0]

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        for h in range(self.heads):
            yield f"{prefix}w_q.{h}", self.w_q[h]
            yield f"{prefix}w_k.{h}", self.w_k[h]
            yield f"{prefix}w_v.{h}", self.w_v[h]
        yield f"{prefix}w_o", self.w_o
        yield f"{prefix}w_ff1", self.w_ff1
        yield f"{prefix}b_ff1", self.b_ff1
        yield f"{prefix}w_ff2", self.w_ff2
        yield f"{prefix}b_ff2", self.b_ff2


def init_attention_params(
    rng: np.random.Generator,
    d: int,
    heads: int,
    d_ff: int | None = None,
    qk_gain: float = 3.0,
) -> AttentionParams:
    """Fresh trainable block weights; ``d_ff`` defaults to 4*d.

    W_K starts as a copy of W_Q (the weights stay independent afterwards),
    making the initial score matrix positive semidefinite: a position
    attends to others with similar content from step 0. Training from
    scratch at small width needs this head start; with independent random
    projections, content matching takes thousands of steps to emerge.
    ``qk_gain`` sharpens the initial score scale.
    """
    if heads < 1 or d % heads != 0:
        raise DimensionError(f"model width {d} not divisible by {heads} heads")
    d_ff = 4 * d if d_ff is None else d_ff
    d_h = d // heads
    s = 1.0 / math.sqrt(d)
    w_q = [T.randn(rng, (d, d_h), s * qk_gain) for _ in range(heads)]
    return AttentionParams(
        heads=heads,
        w_q=w_q,
        w_k=[T.tensor(w.data.copy(), requires_grad=True) for w in w_q],
        w_v=[T.randn(rng, (d, d_h), s) for _ in range(heads)],
        w_o=T.randn(rng, (d, d), s),
        w_ff1=T.randn(rng, (d, d_ff), s),
        b_ff1=T.zeros((d_ff,), requires_grad=True),
        w_ff2=T.randn(rng, (d_ff, d), 1.0 / math.sqrt(d_ff)),
        b_ff2=T.zeros((d,), requires_grad=True),
    )


def _check_inputs(q: Tensor, k: Tensor, v: Tensor, params: AttentionParams) -> None:
    if k.shape[0] != v.shape[0]:
        raise DimensionError(f"K has {k.shape[0]} rows but V has {v.shape[0]}")
    d = params.d
    for name, m in (("Q", q), ("K", k), ("V", v)):
        if m.data.ndim != 2 or m.shape[1] != d:
            raise DimensionError(f"{name} is {m.shape}, expected (*, {d})")


def mha(q: Tensor, k: Tensor, v: Tensor, params: AttentionParams) -> Tensor:
    """Multi-head scaled dot-product attention, output shape n_q x d."""
    _check_inputs(q, k, v, params)
    d_h = params.d // params.heads
    inv_sqrt = 1.0 / math.sqrt(d_h)
    pooled = []
    for h in range(params.heads):
        qh = T.matmul(q, params.w_q[h])
        kh = T.matmul(k, params.w_k[h])
        vh = T.matmul(v, params.w_v[h])
        scores = T.scale(T.matmul(qh, T.transpose(kh)), inv_sqrt)
        weights = T.softmax_temp(scores, 1.0)
        pooled.append(T.matmul(weights, vh))
    cat = pooled[0]
    for p in pooled[1:]:
        cat = T.concat_last_axis(cat, p)
    return T.matmul(cat, params.w_o)


def attention_maps(q: Tensor, k: Tensor, params: AttentionParams) -> list[np.ndarray]:
    """Per-head attention weight matrices (n_q x n_k), forward only."""
    _check_inputs(q, k, k, params)
    d_h = params.d // params.heads
    inv_sqrt = 1.0 / math.sqrt(d_h)
    maps = []
    for h in range(params.heads):
        qh = q.data @ params.w_q[h].data
        kh = k.data @ params.w_k[h].data
        scores = (qh @ kh.T) * inv_sqrt
        e = np.exp(scores - scores.max(axis=-1, keepdims=True))
        maps.append(e / e.sum(axis=-1, keepdims=True))
    return maps


def ffn(x: Tensor, params: AttentionParams) -> Tensor:
    """relu(x W_ff1 + b1) W_ff2 + b2."""
    h = T.relu(T.add_row_bias(T.matmul(x, params.w_ff1), params.b_ff1))
    return T.add_row_bias(T.matmul(h, params.w_ff2), params.b_ff2)


def attention_block(q: Tensor, k: Tensor, v: Tensor, params: AttentionParams) -> Tensor:
    """The composite block: FFN applied to the MHA output, nothing else."""
    return ffn(mha(q, k, v, params), params)


def cross_attention(f1: Tensor, f2: Tensor, params: AttentionParams) -> Tensor:
    """Query one modality with the other: attention_block(F1, F2, F2)."""
    if f1.shape[1] != f2.shape[1]:
        raise DimensionError(f"feature widths differ: {f1.shape} vs {f2.shape}")
    return attention_block(f1, f2, f2, params)


def self_attention(h: Tensor, params: AttentionParams) -> Tensor:
    """attention_block(H, H, H)."""
    return attention_block(h, h, h, params)
