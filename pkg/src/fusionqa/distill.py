"""Teacher-student training with temperature-softened distillation.

A teacher is trained on the clean view with the plain span loss. A student
trains on the noisy view; its loss blends the span loss against gold spans
with the KL divergence between its temperature-softened start/end
distributions and the teacher's, computed on the clean view of the same
example and projected onto noisy document positions through a minimal edit
alignment of the two documents. Teacher outputs are constants: no gradient
reaches teacher parameters. Inference never consults the teacher.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import tensor as T
from .corpus import Corpus, align_words
from .errors import ContractError, DimensionError, DomainError, InputError, ParseError
from .metrics import PredictedSpan
from .qa import (
    VIEWS,
    GoldSpan,
    ModelConfig,
    ModelParams,
    QAInput,
    SpanLogits,
    build_input,
    build_vocab,
    decode_span,
    forward,
    gold_span_for,
    init_model,
    span_loss,
)
from .tensor import Tensor

Q_FLOOR = 1e-12

CHECKPOINT_VERSION = 1


@dataclass
class KDConfig:
    """Distillation blend, temperature, and optimizer knobs."""

    alpha: float = 0.9
    tau: float = 2.0
    lr: float = 0.05
    steps: int = 200
    batch_size: int = 8
    clip_norm: float = 5.0
    seed: int = 0
    average_kl: bool = False  # average instead of summing the start/end KL terms

    def __post_init__(self) -> None:
        if not 0.0 <= self.alpha <= 1.0:
            raise DomainError(f"alpha must lie in [0, 1], got {self.alpha}")
        if self.tau <= 0.0:
            raise DomainError(f"tau must be positive, got {self.tau}")
        if self.lr <= 0.0:
            raise DomainError(f"learning rate must be positive, got {self.lr}")
        if self.steps < 0 or self.batch_size < 1:
            raise DomainError("steps must be >= 0 and batch_size >= 1")
        if self.clip_norm <= 0.0:
            raise DomainError(f"clip_norm must be positive, got {self.clip_norm}")

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "tau": self.tau,
            "lr": self.lr,
            "steps": self.steps,
            "batch_size": self.batch_size,
            "clip_norm": self.clip_norm,
            "seed": self.seed,
            "average_kl": self.average_kl,
        }

    @classmethod
    def from_dict(cls, payload: dict) -> "KDConfig":
        return cls(**payload)


def kl_div(p, q) -> float:
    """Kullback-Leibler divergence sum(p * ln(p / q)) with 0 * ln 0 := 0.

    q is floored at 1e-12 before the log so a zero teacher probability
    cannot produce an infinity.
    """
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    if p.shape != q.shape or p.ndim != 1:
        raise DimensionError(f"probability vectors differ: {p.shape} vs {q.shape}")
    for name, vec in (("p", p), ("q", q)):
        if abs(float(vec.sum()) - 1.0) > 1e-6:
            raise ContractError(f"{name} sums to {float(vec.sum())}, expected 1 within 1e-6")
        if np.any(vec < 0.0):
            raise DomainError(f"{name} has negative entries")
    q = np.maximum(q, Q_FLOOR)
    terms = np.where(p > 0.0, p * (np.log(np.maximum(p, Q_FLOOR)) - np.log(q)), 0.0)
    return float(terms.sum())


def _soft_target(z: np.ndarray, tau: float) -> np.ndarray:
    # same op as the student side so identical logits give identical bits
    q = T.softmax_temp(T.tensor(np.asarray(z, dtype=np.float64)), tau).data
    return np.maximum(q, Q_FLOOR)


def _kl_term(student_z: Tensor, teacher_z: np.ndarray, tau: float) -> Tensor:
    log_q = T.tensor(np.log(_soft_target(teacher_z, tau)))
    p = T.softmax_temp(student_z, tau)
    return T.tsum(T.mul(p, T.sub(T.log(p), log_q)))


def kd_loss(
    z_s: SpanLogits,
    z_t: SpanLogits,
    gold: GoldSpan,
    alpha: float,
    tau: float,
    average_kl: bool = False,
) -> Tensor:
    """alpha * tau^2 * [KL(start) + KL(end)] + (1 - alpha) * span loss.

    KL runs student-first on temperature-tau softened distributions.
    Teacher logits enter as plain numbers, so the returned node's gradient
    graph contains no teacher leaves. alpha=0 returns the span loss
    unchanged; alpha=1 drops the span term (and ignores gold).
    """
    if not 0.0 <= alpha <= 1.0:
        raise DomainError(f"alpha must lie in [0, 1], got {alpha}")
    if tau <= 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    n = z_s.start.data.shape[0]
    if z_t.start.data.shape[0] != n or z_t.end.data.shape[0] != z_s.end.data.shape[0]:
        raise DimensionError(
            f"student has {n} positions but teacher has {z_t.start.data.shape[0]}"
        )
    if alpha == 0.0:
        return span_loss(z_s, gold)
    kl = T.add(
        _kl_term(z_s.start, z_t.start.data, tau),
        _kl_term(z_s.end, z_t.end.data, tau),
    )
    if average_kl:
        kl = T.scale(kl, 0.5)
    if alpha == 1.0:
        return T.scale(kl, tau * tau)
    return T.add(T.scale(kl, alpha * tau * tau), T.scale(span_loss(z_s, gold), 1.0 - alpha))


@dataclass
class TrainedModel:
    """Trained weights plus how they were produced."""

    params: ModelParams
    kd: KDConfig
    view: str
    role: str  # "teacher" when trained alone, "student" when distilled
    teacher_id: str | None = None
    loss_curve: list[float] = field(default_factory=list)

    @property
    def initial_loss(self) -> float | None:
        return self.loss_curve[0] if self.loss_curve else None

    @property
    def final_loss(self) -> float | None:
        return self.loss_curve[-1] if self.loss_curve else None


def _require_view(corpus: Corpus, view: str) -> None:
    for conv in corpus.conversations:
        if view == "asr" and conv.document_asr is None:
            raise InputError(
                f"conversation {conv.id!r} has no noisy document; apply the channel and filter first"
            )
        for ti, turn in enumerate(conv.turns):
            if view == "asr" and turn.rationale_asr_span is None:
                raise InputError(
                    f"conversation {conv.id!r} turn {ti} has no noisy rationale span; filter the corpus first"
                )


def _project(z: np.ndarray, alignment: list[int | None]) -> np.ndarray:
    # positions the channel invented get the teacher's background score; a
    # far-below-minimum logit would make their soft targets so small that
    # the KL gradient is spent evacuating them instead of matching peaks
    floor = float(z.min())
    return np.array([z[a] if a is not None else floor for a in alignment], dtype=np.float64)


class _TeacherOutputs:
    """Per-example teacher logits, computed once and projected onto the
    student's noisy document positions."""

    def __init__(self, teacher: TrainedModel):
        self.teacher = teacher
        self.cache: dict[tuple[str, int], tuple[np.ndarray, np.ndarray]] = {}
        self.alignments: dict[str, list[int | None]] = {}

    def logits(self, conv, L: int, n_student: int) -> SpanLogits:
        key = (conv.id, L)
        if key not in self.cache:
            t_inp = build_input(conv, L, "clean", self.teacher.params.vocab, self.teacher.params.config)
            t_logits = forward(t_inp, self.teacher.params)
            if conv.id not in self.alignments:
                self.alignments[conv.id] = align_words(conv.document_clean, conv.document_asr)
            alignment = self.alignments[conv.id]
            self.cache[key] = (
                _project(t_logits.start.data, alignment),
                _project(t_logits.end.data, alignment),
            )
        zs, ze = self.cache[key]
        if zs.shape[0] != n_student:
            raise ContractError(
                f"teacher projection covers {zs.shape[0]} positions but the student document has {n_student}"
            )
        return SpanLogits(T.tensor(zs), T.tensor(ze))


def _clipped_sgd(params: list[Tensor], lr: float, clip_norm: float) -> None:
    grads = [(p, p.grad) for p in params if p.grad is not None]
    total = float(np.sqrt(sum(float((g * g).sum()) for _, g in grads)))
    factor = clip_norm / total if total > clip_norm else 1.0
    for p, g in grads:
        p.data = p.data - lr * factor * g


def train(
    corpus: Corpus,
    view: str,
    kd: KDConfig,
    model_config: ModelConfig,
    teacher: TrainedModel | None = None,
) -> TrainedModel:
    """Fit a model with seeded SGD; distill from a teacher when given.

    The teacher sees the clean view of the same turns the student trains
    on, so the corpus must already be filtered when training on the noisy
    view. Deterministic: the seed drives initialization and batch
    sampling, and nothing else draws randomness.
    """
    if view not in VIEWS:
        raise InputError(f"unknown view {view!r}; choose from {VIEWS}")
    if not corpus.conversations:
        raise InputError("cannot train on an empty corpus")
    if teacher is not None and view != "asr":
        raise ContractError("a teacher implies student mode, which trains on the asr view")
    _require_view(corpus, view)
    examples = [
        (conv, L) for conv in corpus.conversations for L in range(1, len(conv.turns) + 1)
    ]
    if not examples:
        raise InputError("corpus has no turns")

    vocab = build_vocab(corpus)
    rng = np.random.default_rng(kd.seed)
    model = init_model(model_config, vocab, rng)
    tensors = [p for _, p in model.named_parameters()]
    use_kd = teacher is not None and kd.alpha > 0.0
    teacher_out = _TeacherOutputs(teacher) if use_kd else None

    frozen: list[tuple[Tensor, bool]] = []
    if use_kd:
        for _, p in teacher.params.named_parameters():
            frozen.append((p, p.requires_grad))
            p.requires_grad = False

    loss_curve: list[float] = []
    try:
        for _ in range(kd.steps):
            batch = rng.integers(0, len(examples), size=kd.batch_size)
            T.zero_grad(tensors)
            batch_loss = 0.0
            for bi in batch:
                conv, L = examples[int(bi)]
                inp = build_input(conv, L, view, vocab, model_config)
                logits = forward(inp, model)
                gold = gold_span_for(conv.turns[L - 1], view)
                if use_kd:
                    z_t = teacher_out.logits(conv, L, inp.doc_len)
                    loss = kd_loss(logits, z_t, gold, kd.alpha, kd.tau, kd.average_kl)
                else:
                    loss = span_loss(logits, gold)
                T.backward(T.scale(loss, 1.0 / kd.batch_size))
                batch_loss += float(loss.data) / kd.batch_size
            _clipped_sgd(tensors, kd.lr, kd.clip_norm)
            loss_curve.append(batch_loss)
    finally:
        for p, flag in frozen:
            p.requires_grad = flag

    return TrainedModel(
        params=model,
        kd=kd,
        view=view,
        role="student" if teacher is not None else "teacher",
        teacher_id=checkpoint_id(teacher) if teacher is not None else None,
        loss_curve=loss_curve,
    )


def infer(model: TrainedModel, corpus: Corpus, view: str) -> list[PredictedSpan]:
    """Decode a span for every turn; touches only this model's parameters."""
    if view not in VIEWS:
        raise InputError(f"unknown view {view!r}; choose from {VIEWS}")
    cfg = model.params.config
    out: list[PredictedSpan] = []
    for conv in corpus.conversations:
        words = conv.document_clean if view == "clean" else conv.document_asr
        if words is None:
            raise InputError(f"conversation {conv.id!r} has no noisy document")
        for L in range(1, len(conv.turns) + 1):
            inp = build_input(conv, L, view, model.params.vocab, cfg)
            s, e = decode_span(forward(inp, model.params), cfg.max_span_len)
            out.append(
                PredictedSpan(
                    conversation_id=conv.id,
                    turn_index=L - 1,
                    start=s,
                    end=e,
                    text=" ".join(words[s : e + 1]),
                )
            )
    return out


# ---------------------------------------------------------------------------
# Checkpoints


def _checkpoint_payload(model: TrainedModel) -> dict:
    return {
        "schema_version": CHECKPOINT_VERSION,
        "kind": "model_checkpoint",
        "role": model.role,
        "view": model.view,
        "teacher_id": model.teacher_id,
        "loss_curve": model.loss_curve,
        "kd_config": model.kd.to_dict(),
        "model_config": model.params.config.to_dict(),
        "vocab": model.params.vocab,
        "params": {
            name: {"shape": list(p.data.shape), "data": p.data.reshape(-1).tolist()}
            for name, p in model.params.named_parameters()
        },
    }


def checkpoint_id(model: TrainedModel) -> str:
    """Stable 16-hex-digit digest of the full checkpoint payload."""
    blob = json.dumps(_checkpoint_payload(model), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()[:16]


def save_checkpoint(model: TrainedModel, path) -> str:
    """Write the checkpoint JSON; returns its digest."""
    payload = _checkpoint_payload(model)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")
    return checkpoint_id(model)


def load_checkpoint(path) -> TrainedModel:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    for key in ("schema_version", "kind", "model_config", "kd_config", "vocab", "params"):
        if key not in payload:
            raise ParseError(f"/{key}: missing required field")
    if payload["schema_version"] != CHECKPOINT_VERSION:
        raise ParseError(
            f"/schema_version: unsupported version {payload['schema_version']}, expected {CHECKPOINT_VERSION}"
        )
    if payload["kind"] != "model_checkpoint":
        raise ParseError(f"/kind: expected model_checkpoint, got {payload['kind']!r}")
    config = ModelConfig.from_dict(payload["model_config"])
    kd = KDConfig.from_dict(payload["kd_config"])
    vocab = {str(k): int(v) for k, v in payload["vocab"].items()}
    params = init_model(config, vocab, np.random.default_rng(0))
    stored = payload["params"]
    names = [name for name, _ in params.named_parameters()]
    if set(stored) != set(names):
        missing = sorted(set(names) - set(stored))
        extra = sorted(set(stored) - set(names))
        raise ParseError(f"/params: arrays do not match the architecture (missing {missing}, extra {extra})")
    for name, p in params.named_parameters():
        entry = stored[name]
        arr = np.array(entry["data"], dtype=np.float64)
        shape = tuple(entry["shape"])
        if tuple(p.data.shape) != shape or arr.size != int(np.prod(shape)):
            raise ParseError(f"/params/{name}: shape {shape} does not match expected {tuple(p.data.shape)}")
        p.data = arr.reshape(shape)
    return TrainedModel(
        params=params,
        kd=kd,
        view=payload.get("view", "clean"),
        role=payload.get("role", "teacher"),
        teacher_id=payload.get("teacher_id"),
        loss_curve=[float(x) for x in payload.get("loss_curve", [])],
    )
