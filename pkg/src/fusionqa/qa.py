"""Extractive span QA over fused speech and text streams.

An input concatenates the document, a window of previous question/answer
turns, and the current question, each question introduced by a question
marker and each past answer by an answer marker. Past answers are always
the reference answers, not model output. The text stream and a
pseudo-phoneme speech stream are encoded separately, fused by the
configured mechanism, and two linear heads score each document position
as the answer start and end. Decoding picks the best span under a length
cap; training minimizes the summed cross entropy of the gold start and
end positions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

import zlib

from . import tensor as T
from .corpus import Conversation, Corpus, Turn, noisy_speech_tokens, norm_word, speech_tokens
from .errors import ContractError, DimensionError, DomainError, InputError
from .fusion import (
    MECHANISMS,
    EncoderParams,
    FusionParams,
    con_fusion,
    dual_attention,
    encode,
    encoding_layer,
    init_encoder_params,
    init_fusion_params,
    pad_tokens,
    unimodal,
)
from .tensor import Tensor

PAD_ID = 0
UNK_ID = 1
QMARK_ID = 2
AMARK_ID = 3
SPECIAL_TOKENS = ("<pad>", "<unk>", "<q>", "<a>")

VIEWS = ("clean", "asr")


@dataclass
class ModelConfig:
    """Architecture and input-layout knobs."""

    d: int = 16
    heads: int = 2
    d_ff: int | None = None
    encoder_layers: int = 2
    max_len: int = 64
    k_history: int = 2
    max_span_len: int = 30
    fusion: str = "dual_attention"
    speech_vocab_size: int = 64
    speech_noise: float = 0.15
    shared_w1: bool = True

    def __post_init__(self) -> None:
        if self.d <= 0 or self.heads <= 0 or self.d % self.heads != 0:
            raise DomainError(f"width {self.d} must be a positive multiple of heads {self.heads}")
        if self.fusion not in MECHANISMS:
            raise InputError(f"unknown fusion mechanism {self.fusion!r}; choose from {MECHANISMS}")
        if self.max_len < 3:
            raise DomainError(f"max_len {self.max_len} leaves no room for a document and question")
        if self.max_span_len < 1:
            raise DomainError(f"max_span_len must be >= 1, got {self.max_span_len}")
        if self.k_history < 0:
            raise DomainError(f"k_history must be >= 0, got {self.k_history}")
        if self.encoder_layers < 1:
            raise DomainError(f"encoder_layers must be >= 1, got {self.encoder_layers}")
        if self.speech_vocab_size < 2:
            raise DomainError(f"speech_vocab_size must be >= 2, got {self.speech_vocab_size}")
        if not 0.0 <= self.speech_noise < 1.0:
            raise DomainError(f"speech_noise must lie in [0, 1), got {self.speech_noise}")

    def to_dict(self) -> dict:
        return {
            "d": self.d,
            "heads": self.heads,
            "d_ff": self.d_ff,
            "encoder_layers": self.encoder_layers,
            "max_len": self.max_len,
            "k_history": self.k_history,
            "max_span_len": self.max_span_len,
            "fusion": self.fusion,
            "speech_vocab_size": self.speech_vocab_size,
            "speech_noise": self.speech_noise,
            "shared_w1": self.shared_w1,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "ModelConfig":
        return cls(**payload)


def build_vocab(corpus: Corpus) -> dict[str, int]:
    """Map every normalized word in the corpus to an id; specials first.

    Ids 0..3 are reserved for padding, unknown, question marker, answer
    marker. Remaining words are sorted for run-to-run stability.
    """
    words: set[str] = set()
    for conv in corpus.conversations:
        for doc in (conv.document_clean, conv.document_asr or []):
            words.update(norm_word(w) for w in doc)
        for turn in conv.turns:
            words.update(norm_word(w) for w in turn.question_clean)
            words.update(norm_word(w) for w in turn.question_asr or [])
            words.update(norm_word(w) for w in turn.answer_text.split())
    words.discard("")
    vocab = {tok: i for i, tok in enumerate(SPECIAL_TOKENS)}
    for word in sorted(words):
        vocab[word] = len(vocab)
    return vocab


def text_ids(words, vocab: dict[str, int]) -> list[int]:
    """Normalized word ids; unknown or punctuation-only words become <unk>."""
    return [vocab.get(norm_word(w) or "<unk>", UNK_ID) for w in words]


@dataclass
class QAInput:
    """One model-ready example: token streams plus bookkeeping."""

    text_tokens: list[int]
    speech_tokens: list[int]
    doc_len: int
    conversation_id: str
    turn_index: int
    view: str


@dataclass
class GoldSpan:
    """Inclusive document-position targets and the reference answer text."""

    start: int
    end: int
    text: str


@dataclass
class SpanLogits:
    """Unnormalized start and end scores, one per document position."""

    start: Tensor
    end: Tensor


def _question_words(turn: Turn, view: str) -> list[str]:
    if view == "clean":
        return turn.question_clean
    if turn.question_asr is None:
        raise InputError("turn has no noisy question; apply the channel first")
    return turn.question_asr


def build_input(
    conversation: Conversation,
    L: int,
    view: str,
    vocab: dict[str, int],
    config: ModelConfig,
) -> QAInput:
    """Assemble the input for turn L (1-based) of a conversation.

    Layout: document, then up to k_history previous turns as marked
    question/answer pairs, then the marked current question. When the
    total exceeds max_len, whole history turns are dropped oldest first,
    then the question loses words from its end; the document is never cut.

    The speech stream is the pseudo-phoneme expansion of the clean words
    in the same layout (markers excluded), tail-truncated to max_len: the
    utterance itself does not change when the transcript is wrong. The asr
    view flips tokens at the configured speech_noise rate, standing in for
    the noisy recording the recognizer heard; the clean view is noise-free.
    """
    if view not in VIEWS:
        raise InputError(f"unknown view {view!r}; choose from {VIEWS}")
    if not 1 <= L <= len(conversation.turns):
        raise InputError(
            f"turn {L} out of range; conversation {conversation.id!r} has {len(conversation.turns)} turns"
        )
    if view == "clean":
        doc_words = conversation.document_clean
    else:
        if conversation.document_asr is None:
            raise InputError(
                f"conversation {conversation.id!r} has no noisy document; apply the channel first"
            )
        doc_words = conversation.document_asr

    doc_ids = text_ids(doc_words, vocab)
    if len(doc_ids) + 2 > config.max_len:
        raise InputError(
            f"document of {len(doc_ids)} words plus a marked question exceeds max_len {config.max_len}"
        )

    first_hist = max(0, L - 1 - config.k_history)
    history: list[tuple[list[int], list[str]]] = []
    for ti in range(first_hist, L - 1):
        turn = conversation.turns[ti]
        q_words = _question_words(turn, view)
        a_words = turn.answer_text.split()
        section = [QMARK_ID] + text_ids(q_words, vocab) + [AMARK_ID] + text_ids(a_words, vocab)
        history.append((section, list(turn.question_clean) + a_words))

    cur_q_words = list(_question_words(conversation.turns[L - 1], view))
    cur_q_clean = list(conversation.turns[L - 1].question_clean)
    question = [QMARK_ID] + text_ids(cur_q_words, vocab)

    def total() -> int:
        return len(doc_ids) + sum(len(s) for s, _ in history) + len(question)

    while total() > config.max_len and history:
        history.pop(0)
    if total() > config.max_len:
        room = config.max_len - len(doc_ids) - sum(len(s) for s, _ in history)
        question = question[:room]
        cur_q_words = cur_q_words[: room - 1]
        cur_q_clean = cur_q_clean[: room - 1]

    tokens = list(doc_ids)
    spoken_words = list(conversation.document_clean)
    for section, words in history:
        tokens.extend(section)
        spoken_words.extend(words)
    tokens.extend(question)
    spoken_words.extend(cur_q_clean)

    if view == "clean":
        speech = speech_tokens(spoken_words, config.speech_vocab_size)
    else:
        noise_seed = zlib.crc32(f"{conversation.id}:{L}:speech".encode("utf-8"))
        speech = noisy_speech_tokens(
            spoken_words, config.speech_vocab_size, config.speech_noise, noise_seed
        )
    speech = speech[: config.max_len]
    return QAInput(
        text_tokens=tokens,
        speech_tokens=speech,
        doc_len=len(doc_ids),
        conversation_id=conversation.id,
        turn_index=L - 1,
        view=view,
    )


def gold_span_for(turn: Turn, view: str) -> GoldSpan:
    """Training target for a turn: the rationale span of the given view."""
    if view == "clean":
        span = turn.rationale_clean_span
    elif view == "asr":
        span = turn.rationale_asr_span
        if span is None:
            raise InputError("turn has no noisy rationale span; filter the corpus first")
    else:
        raise InputError(f"unknown view {view!r}; choose from {VIEWS}")
    return GoldSpan(start=span[0], end=span[1], text=turn.answer_text)


@dataclass
class ModelParams:
    """All trainable weights plus the vocabulary they were built for."""

    config: ModelConfig
    vocab: dict[str, int]
    text_encoder: EncoderParams
    speech_encoder: EncoderParams
    fusion: FusionParams | None
    w_start: Tensor
    b_start: Tensor
    w_end: Tensor
    b_end: Tensor

    def named_parameters(self) -> list[tuple[str, Tensor]]:
        out = list(self.text_encoder.named_parameters("text_encoder."))
        out += list(self.speech_encoder.named_parameters("speech_encoder."))
        if self.fusion is not None:
            out += list(self.fusion.named_parameters("fusion."))
        out += [
            ("head.w_start", self.w_start),
            ("head.b_start", self.b_start),
            ("head.w_end", self.w_end),
            ("head.b_end", self.b_end),
        ]
        return out


def encoded_width(config: ModelConfig) -> int:
    """Width after the text stream is joined with the fused stream."""
    return 3 * config.d if config.fusion == "con_fusion" else 2 * config.d


def init_model(config: ModelConfig, vocab: dict[str, int], rng: np.random.Generator) -> ModelParams:
    if len(vocab) <= max(QMARK_ID, AMARK_ID):
        raise InputError(f"vocabulary of {len(vocab)} entries is missing the reserved ids")
    text_enc = init_encoder_params(
        rng, "text", len(vocab), config.max_len, config.d, config.heads,
        d_ff=config.d_ff, layers=config.encoder_layers,
    )
    speech_enc = init_encoder_params(
        rng, "speech", config.speech_vocab_size, config.max_len, config.d, config.heads,
        d_ff=config.d_ff, layers=config.encoder_layers,
    )
    # speech positions start as a stretched copy of the text positions
    # (word i expands to ~2 speech tokens, so token j belongs to word ~j/2);
    # with the tied query/key init this peaks the initial cross-attention
    # scores on the true rough alignment instead of leaving it to be
    # discovered from random projections
    stretch = np.minimum(np.arange(config.max_len) // 2, config.max_len - 1)
    speech_enc.pos.data[:] = text_enc.pos.data[stretch]
    fusion = None
    if config.fusion == "dual_attention":
        fusion = init_fusion_params(rng, config.d, config.heads, d_ff=config.d_ff, shared_w1=config.shared_w1)
    width = encoded_width(config)
    scale = 1.0 / np.sqrt(width)
    return ModelParams(
        config=config,
        vocab=dict(vocab),
        text_encoder=text_enc,
        speech_encoder=speech_enc,
        fusion=fusion,
        w_start=T.tensor(rng.normal(scale=scale, size=(width, 1)), requires_grad=True),
        b_start=T.tensor(np.zeros(1), requires_grad=True),
        w_end=T.tensor(rng.normal(scale=scale, size=(width, 1)), requires_grad=True),
        b_end=T.tensor(np.zeros(1), requires_grad=True),
    )


def forward(inp: QAInput, model: ModelParams) -> SpanLogits:
    """Score every document position as answer start and end."""
    cfg = model.config
    if inp.doc_len < 1:
        raise ContractError("input has an empty document")
    text = pad_tokens(inp.text_tokens, cfg.max_len)
    speech = pad_tokens(inp.speech_tokens, cfg.max_len)
    e_t = encode(text, model.text_encoder)
    e_s = encode(speech, model.speech_encoder)
    if cfg.fusion == "dual_attention":
        fused = dual_attention(e_s, e_t, model.fusion)
    elif cfg.fusion == "con_fusion":
        fused = con_fusion(e_s, e_t)
    elif cfg.fusion == "speech_only":
        fused = unimodal(e_s, "speech_only")
    else:
        fused = unimodal(e_t, "text_only")
    enc = encoding_layer(e_t, fused)
    doc_rows = T.slice_rows(enc, 0, inp.doc_len)
    start = T.reshape(T.add_row_bias(T.matmul(doc_rows, model.w_start), model.b_start), (inp.doc_len,))
    end = T.reshape(T.add_row_bias(T.matmul(doc_rows, model.w_end), model.b_end), (inp.doc_len,))
    return SpanLogits(start=start, end=end)


def _nll(logits: Tensor, index: int) -> Tensor:
    # cross entropy via max-shifted log-sum-exp so large logits cannot overflow
    m = float(np.max(logits.data))
    shifted = T.add_scalar(logits, -m)
    lse = T.add_scalar(T.log(T.tsum(T.exp(shifted))), m)
    return T.sub(lse, T.pick(logits, index))


def span_loss(logits: SpanLogits, gold: GoldSpan) -> Tensor:
    """Summed cross entropy of the gold start and end positions."""
    n = logits.start.data.shape[0]
    if logits.end.data.shape[0] != n:
        raise DimensionError(
            f"start scores have {n} positions but end scores have {logits.end.data.shape[0]}"
        )
    if not 0 <= gold.start <= gold.end < n:
        raise ContractError(
            f"gold span ({gold.start}, {gold.end}) out of range for {n} document positions"
        )
    return T.add(_nll(logits.start, gold.start), _nll(logits.end, gold.end))


def decode_span(logits: SpanLogits, max_span_len: int) -> tuple[int, int]:
    """Best (start, end) with start <= end < start + max_span_len.

    Ties break toward the lexicographically smallest pair.
    """
    if max_span_len < 1:
        raise DomainError(f"max_span_len must be >= 1, got {max_span_len}")
    start = np.asarray(logits.start.data, dtype=np.float64)
    end = np.asarray(logits.end.data, dtype=np.float64)
    n = start.shape[0]
    if n == 0 or end.shape[0] != n:
        raise ContractError(f"cannot decode from {n} start and {end.shape[0]} end positions")
    scores = start[:, None] + end[None, :]
    s_idx = np.arange(n)[:, None]
    e_idx = np.arange(n)[None, :]
    valid = (e_idx >= s_idx) & (e_idx < s_idx + max_span_len)
    scores = np.where(valid, scores, -np.inf)
    flat = int(np.argmax(scores))  # row-major first maximum: smallest s, then e
    return (flat // n, flat % n)
