"""Modality encoders and cross-modal fusion.

Two small trainable encoders (token embedding + learned positions + two self
attention blocks) stand in for large pretrained speech/text models; the
point under study is the fusion machinery, not the pretraining.

The main fusion pipeline aligns the two modalities in three stages:
cross attention in both directions, a gated contextualized-attention merge,
then self attention over the merged sequence. Baseline mechanisms
(concatenation, single-modality passthrough) are provided for ablations.

Padding: token id 0 is reserved as the pad token in every vocabulary.
Attention runs over pad positions too; there is no masking, by design,
so every fusion mechanism sees the identical padded geometry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from . import tensor as T
from .attention import AttentionParams, cross_attention, init_attention_params, self_attention
from .errors import ContractError, DimensionError, InputError
from .tensor import Tensor

PAD_ID = 0

MODALITIES = ("speech", "text")
MECHANISMS = ("dual_attention", "con_fusion", "speech_only", "text_only")


@dataclass
class EncoderParams:
    """One modality's encoder: embeddings, positions, two attention blocks."""

    modality: str
    embed: Tensor
    pos: Tensor
    layers: list[AttentionParams]

    def __post_init__(self) -> None:
        if self.modality not in MODALITIES:
            raise InputError(f"unknown modality {self.modality!r}")
        if self.embed.shape[1] != self.pos.shape[1]:
            raise DimensionError(
                f"embedding width {self.embed.shape} and position width {self.pos.shape} differ"
            )

    @property
    def vocab_size(self) -> int:
        return self.embed.shape[0]

    @property
    def max_len(self) -> int:
        return self.pos.shape[0]

    @property
    def d(self) -> int:
        return self.embed.shape[1]

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        yield f"{prefix}embed", self.embed
        yield f"{prefix}pos", self.pos
        for i, layer in enumerate(self.layers):
            yield from layer.named_parameters(f"{prefix}layer{i}.")


@dataclass
class FusionParams:
    """Weights of the cross-modal alignment pipeline.

    ``w1_second`` is None when both gating branches share ``w1`` (the
    default); a separate second-branch weight is available as a config
    switch.
    """

    cross_speech_text: AttentionParams
    cross_text_speech: AttentionParams
    w1: Tensor
    w2: Tensor
    self_attn: AttentionParams
    w1_second: Tensor | None = None

    def __post_init__(self) -> None:
        d = self.w1.shape[0]
        for name, w in (("w1", self.w1), ("w2", self.w2)):
            if w.shape != (d, d):
                raise DimensionError(f"{name} is {w.shape}, expected square ({d}, {d})")
        if self.w1_second is not None and self.w1_second.shape != (d, d):
            raise DimensionError(f"w1_second is {self.w1_second.shape}, expected ({d}, {d})")

    def named_parameters(self, prefix: str = "") -> Iterator[tuple[str, Tensor]]:
        yield from self.cross_speech_text.named_parameters(f"{prefix}cross_st.")
        yield from self.cross_text_speech.named_parameters(f"{prefix}cross_ts.")
        yield f"{prefix}w1", self.w1
        if self.w1_second is not None:
            yield f"{prefix}w1_second", self.w1_second
        yield f"{prefix}w2", self.w2
        yield from self.self_attn.named_parameters(f"{prefix}self.")


def init_encoder_params(
    rng: np.random.Generator,
    modality: str,
    vocab_size: int,
    max_len: int,
    d: int,
    heads: int,
    d_ff: int | None = None,
    layers: int = 2,
) -> EncoderParams:
    s = 1.0 / math.sqrt(d)
    return EncoderParams(
        modality=modality,
        embed=T.randn(rng, (vocab_size, d), s),
        pos=T.randn(rng, (max_len, d), s),
        layers=[init_attention_params(rng, d, heads, d_ff) for _ in range(layers)],
    )


def init_fusion_params(
    rng: np.random.Generator,
    d: int,
    heads: int,
    d_ff: int | None = None,
    shared_w1: bool = True,
    merge_gain: float = 0.1,
) -> FusionParams:
    """Fresh fusion weights.

    ``merge_gain`` shrinks the merge projection w2 at init so the fused
    half of the encoding layer starts near zero: the span head first fits
    the text half, and the alignment pipeline fades in through training
    instead of injecting random features from step 0.
    """
    s = 1.0 / math.sqrt(d)
    return FusionParams(
        cross_speech_text=init_attention_params(rng, d, heads, d_ff),
        cross_text_speech=init_attention_params(rng, d, heads, d_ff),
        w1=T.randn(rng, (d, d), s),
        w2=T.randn(rng, (d, d), s * merge_gain),
        self_attn=init_attention_params(rng, d, heads, d_ff),
        w1_second=None if shared_w1 else T.randn(rng, (d, d), s),
    )


def pad_tokens(tokens: Sequence[int], length: int) -> list[int]:
    """Right-pad with the reserved pad id; error if already too long."""
    if len(tokens) > length:
        raise InputError(f"sequence of {len(tokens)} tokens exceeds padded length {length}")
    return list(tokens) + [PAD_ID] * (length - len(tokens))


def encode(tokens: Sequence[int], params: EncoderParams) -> Tensor:
    """Embed a token sequence and contextualize it: output len x d.

    Token ids must be valid for the encoder's vocabulary and the sequence
    must fit in the learned position table. Truncation is a caller policy,
    never applied silently here.

    Each layer is applied with a residual connection; without one, the
    attention blocks average away per-position identity and the stack is
    untrainable from scratch. The blocks themselves stay residual-free.
    """
    ids = list(tokens)
    if len(ids) == 0:
        raise InputError("encode: empty token sequence (minimum length 1)")
    if len(ids) > params.max_len:
        raise InputError(f"encode: {len(ids)} tokens exceeds max_len {params.max_len}")
    for t in ids:
        if not (0 <= t < params.vocab_size):
            raise InputError(f"encode: token id {t} outside vocabulary of {params.vocab_size}")
    x = T.add(T.gather_rows(params.embed, ids), T.gather_rows(params.pos, range(len(ids))))
    for layer in params.layers:
        x = T.add(x, self_attention(x, layer))
    return x


def contextualized_attention(
    e_s_cross: Tensor,
    e_t_cross: Tensor,
    w1: Tensor,
    w2: Tensor,
    w1_second: Tensor | None = None,
) -> Tensor:
    """Gated merge of the two cross-attended views.

    H = (relu(E_s_cross W1^T) ⊙ relu(E_t_cross W1'^T)) W2^T, where ⊙ is the
    elementwise product and W1' is W1 unless a separate second-branch weight
    is supplied. Keeping W1, W2 square d x d preserves the n x d shape the
    downstream stages need.
    """
    if e_s_cross.shape != e_t_cross.shape:
        raise DimensionError(f"fused inputs differ: {e_s_cross.shape} vs {e_t_cross.shape}")
    w1b = w1 if w1_second is None else w1_second
    left = T.relu(T.matmul(e_s_cross, T.transpose(w1)))
    right = T.relu(T.matmul(e_t_cross, T.transpose(w1b)))
    return T.matmul(T.mul(left, right), T.transpose(w2))


def dual_attention(e_s: Tensor, e_t: Tensor, params: FusionParams) -> Tensor:
    """Full three-stage alignment; inputs must be padded to a common length."""
    if e_s.shape[0] != e_t.shape[0]:
        raise ContractError(
            f"dual_attention expects equal padded lengths, got {e_s.shape[0]} and {e_t.shape[0]}"
        )
    e_s_cross = cross_attention(e_s, e_t, params.cross_speech_text)
    e_t_cross = cross_attention(e_t, e_s, params.cross_text_speech)
    h = contextualized_attention(e_s_cross, e_t_cross, params.w1, params.w2, params.w1_second)
    return self_attention(h, params.self_attn)


def con_fusion(e_s: Tensor, e_t: Tensor) -> Tensor:
    """Baseline fusion: plain rowwise concatenation, no trainable weights."""
    if e_s.shape[0] != e_t.shape[0]:
        raise DimensionError(f"con_fusion: lengths differ, {e_s.shape} vs {e_t.shape}")
    return T.concat_last_axis(e_s, e_t)


def unimodal(e: Tensor, which: str) -> Tensor:
    """Single-modality baseline: pass the selected embedding through."""
    if which not in ("speech_only", "text_only"):
        raise InputError(f"unknown unimodal arm {which!r}")
    return e


def encoding_layer(e_t: Tensor, e_fused: Tensor) -> Tensor:
    """Concatenate the text embedding with the fused embedding, rowwise."""
    if e_t.shape[0] != e_fused.shape[0]:
        raise DimensionError(f"encoding_layer: row counts differ, {e_t.shape} vs {e_fused.shape}")
    return T.concat_last_axis(e_t, e_fused)
