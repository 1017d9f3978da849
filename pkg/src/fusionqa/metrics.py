"""Answer and span evaluation.

Text metrics follow the SQuAD convention: answers are compared after
lowercasing, punctuation stripping, article removal (a/an/the) and
whitespace collapsing. Span metrics treat predicted and gold answer
locations as inclusive token-index intervals; overlap over union gives the
audio-overlap score and the Dice/F1 of the position sets gives frame-level
F1. Token indices are the time axis at this scale, so the token-to-time
mapping is the identity.
"""

from __future__ import annotations

import collections
import json
import re
import string
from dataclasses import dataclass, field
from typing import Sequence

from .errors import ContractError

_ARTICLE_RE = re.compile(r"\b(a|an|the)\b", re.UNICODE)
_PUNCT = set(string.punctuation)


def normalize_answer(s: str) -> str:
    """Lowercase, strip punctuation and articles, collapse whitespace."""
    s = s.lower()
    s = "".join(ch for ch in s if ch not in _PUNCT)
    s = _ARTICLE_RE.sub(" ", s)
    return " ".join(s.split())


def exact_match(pred: str, gold: str) -> int:
    """1 iff the normalized strings are identical."""
    return int(normalize_answer(pred) == normalize_answer(gold))


def f1_token(pred: str, gold: str) -> float:
    """Bag-of-tokens F1 over normalized tokens.

    Both empty after normalization counts as agreement (1.0); exactly one
    empty is a miss (0.0).
    """
    pred_toks = normalize_answer(pred).split()
    gold_toks = normalize_answer(gold).split()
    if not pred_toks or not gold_toks:
        return float(pred_toks == gold_toks)
    common = collections.Counter(pred_toks) & collections.Counter(gold_toks)
    num_same = sum(common.values())
    if num_same == 0:
        return 0.0
    precision = num_same / len(pred_toks)
    recall = num_same / len(gold_toks)
    return 2 * precision * recall / (precision + recall)


def _check_span(span: tuple[int, int], name: str) -> None:
    s, e = span
    if s < 0 or e < s:
        raise ContractError(f"{name} span ({s}, {e}) is not a valid inclusive interval")


def aos(pred: tuple[int, int], gold: tuple[int, int]) -> float:
    """Overlap score: |intersection| / |union| of inclusive index intervals."""
    _check_span(pred, "pred")
    _check_span(gold, "gold")
    inter = min(pred[1], gold[1]) - max(pred[0], gold[0]) + 1
    if inter <= 0:
        return 0.0
    union = max(pred[1], gold[1]) - min(pred[0], gold[0]) + 1
    return inter / union


def frame_f1(pred: tuple[int, int], gold: tuple[int, int]) -> float:
    """F1 over the two position sets: 2|∩| / (|pred| + |gold|)."""
    _check_span(pred, "pred")
    _check_span(gold, "gold")
    inter = min(pred[1], gold[1]) - max(pred[0], gold[0]) + 1
    if inter <= 0:
        return 0.0
    return 2 * inter / ((pred[1] - pred[0] + 1) + (gold[1] - gold[0] + 1))


@dataclass
class PredictedSpan:
    """One decoded answer: where it lies and what text it selects."""

    conversation_id: str
    turn_index: int
    start: int
    end: int
    text: str


@dataclass
class EvalReport:
    """Per-example metrics plus their aggregate means (as percentages)."""

    per_example: list[dict]
    aggregates: dict[str, float]
    metadata: dict[str, str | int | None] = field(default_factory=dict)

    def to_json(self) -> str:
        payload = {
            "schema_version": 1,
            "metadata": self.metadata,
            "aggregates": self.aggregates,
            "per_example": self.per_example,
        }
        return json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False)

    @classmethod
    def from_json(cls, text: str) -> "EvalReport":
        payload = json.loads(text)
        return cls(
            per_example=payload["per_example"],
            aggregates=payload["aggregates"],
            metadata=payload["metadata"],
        )

    def csv_row(self) -> dict[str, str]:
        row = {str(k): str(v) for k, v in sorted(self.metadata.items())}
        for k in sorted(self.aggregates):
            row[k] = f"{self.aggregates[k]:.4f}"
        row["examples"] = str(len(self.per_example))
        return row


def evaluate(predictions: Sequence[PredictedSpan], corpus, view: str) -> EvalReport:
    """Score predictions against a corpus, one prediction per surviving turn.

    EM and F1 compare decoded text against the reference answer text; AOS
    and frame F1 compare the decoded span against the rationale span of the
    evaluated view.
    """
    turns = [(conv, i, turn) for conv in corpus.conversations for i, turn in enumerate(conv.turns)]
    if len(predictions) != len(turns):
        raise ContractError(
            f"{len(predictions)} predictions for {len(turns)} turns; run inference on the same filtered corpus"
        )
    per_example = []
    for pred, (conv, i, turn) in zip(predictions, turns):
        if pred.conversation_id != conv.id or pred.turn_index != i:
            raise ContractError(
                f"prediction for ({pred.conversation_id}, {pred.turn_index}) does not align with ({conv.id}, {i})"
            )
        gold_span = turn.rationale_clean_span if view == "clean" else turn.rationale_asr_span
        if gold_span is None:
            raise ContractError(f"turn ({conv.id}, {i}) has no rationale span in view {view!r}")
        per_example.append(
            {
                "conversation_id": conv.id,
                "turn_index": i,
                "em": exact_match(pred.text, turn.answer_text),
                "f1": f1_token(pred.text, turn.answer_text),
                "aos": aos((pred.start, pred.end), gold_span),
                "frame_f1": frame_f1((pred.start, pred.end), gold_span),
                "pred_text": pred.text,
                "pred_span": [pred.start, pred.end],
            }
        )
    n = len(per_example)
    aggregates = {
        key: (100.0 * sum(ex[key] for ex in per_example) / n if n else 0.0)
        for key in ("em", "f1", "aos", "frame_f1")
    }
    return EvalReport(per_example=per_example, aggregates=aggregates, metadata={"view": view})
