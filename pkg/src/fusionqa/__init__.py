"""Desk-scale laboratory for spoken conversational question answering.

The pipeline runs entirely on numpy: a synthetic conversation corpus is
pushed through a word-level recognition noise channel, encoders over the
transcript and a pseudo-phoneme speech stream are fused by cross-modal
attention, an extractive head predicts answer spans, and a teacher trained
on clean transcripts distills into a student that only sees noisy ones.
"""

from .corpus import (
    Conversation,
    Corpus,
    NoiseConfig,
    Removal,
    SynthConfig,
    Turn,
    apply_channel,
    asr_channel,
    filter_corpus,
    load_corpus,
    save_corpus,
    split_corpus,
    synth,
    wer,
)
from .distill import (
    KDConfig,
    TrainedModel,
    infer,
    kd_loss,
    kl_div,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .errors import ConfigError, DimensionError, DomainError, FusionQAError, InputError
from .fusion import MECHANISMS
from .metrics import EvalReport, PredictedSpan, aos, evaluate, exact_match, f1_token, frame_f1
from .qa import GoldSpan, ModelConfig, SpanLogits, build_vocab, decode_span, forward, init_model

__version__ = "0.1.0"

__all__ = [
    "Conversation",
    "Corpus",
    "NoiseConfig",
    "Removal",
    "SynthConfig",
    "Turn",
    "apply_channel",
    "asr_channel",
    "filter_corpus",
    "load_corpus",
    "save_corpus",
    "split_corpus",
    "synth",
    "wer",
    "KDConfig",
    "TrainedModel",
    "infer",
    "kd_loss",
    "kl_div",
    "load_checkpoint",
    "save_checkpoint",
    "train",
    "ConfigError",
    "DimensionError",
    "DomainError",
    "FusionQAError",
    "InputError",
    "MECHANISMS",
    "EvalReport",
    "PredictedSpan",
    "aos",
    "evaluate",
    "exact_match",
    "f1_token",
    "frame_f1",
    "GoldSpan",
    "ModelConfig",
    "SpanLogits",
    "build_vocab",
    "decode_span",
    "forward",
    "init_model",
]
