"""Conversational QA corpora over paired clean and noisy transcripts.

A corpus is a list of conversations. Each conversation carries a document
(a word sequence), an optional noisy rendering of it, and an ordered list
of turns. Every turn has a question, a free-text answer, and a rationale:
the inclusive word-index span of the document the answer was read from.
Spans always index the word list they belong to; the clean span indexes
document_clean and the noisy span indexes document_asr.

The module provides a deterministic synthetic generator, a word-level
noisy channel with a target error rate, word error rate measurement,
rationale re-anchoring with removal of unanchorable turns, per-domain
statistics, and a stable pseudo-phoneme expansion used as the speech
token stream.
"""

from __future__ import annotations

import collections
import copy
import json
import string
import zlib
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ConfigError, ContractError, DomainError, InputError, ParseError

SCHEMA_VERSION = 1

REMOVAL_SPAN_MISSING = "span_missing"
REMOVAL_CASCADE = "dependency_cascade"

_PUNCT_TABLE = str.maketrans("", "", string.punctuation)


def norm_word(word: str) -> str:
    """Lowercase a word and drop punctuation characters; used for matching."""
    return word.lower().translate(_PUNCT_TABLE)


@dataclass
class Turn:
    question_clean: list[str]
    answer_text: str
    rationale_clean_span: tuple[int, int]
    question_asr: list[str] | None = None
    rationale_asr_span: tuple[int, int] | None = None
    depends_on: int | None = None


@dataclass
class Conversation:
    id: str
    domain: str
    document_clean: list[str]
    turns: list[Turn]
    document_asr: list[str] | None = None


@dataclass
class Corpus:
    conversations: list[Conversation] = field(default_factory=list)

    def num_turns(self) -> int:
        return sum(len(c.turns) for c in self.conversations)


# ---------------------------------------------------------------------------
# Validation and JSON round-trip


def _span_ok(span: tuple[int, int], length: int) -> bool:
    s, e = span
    return 0 <= s <= e < length


def validate_corpus(corpus: Corpus) -> None:
    """Check structural invariants; raise InputError naming the violation."""
    seen_ids: set[str] = set()
    for ci, conv in enumerate(corpus.conversations):
        where = f"conversation {conv.id!r} (index {ci})"
        if conv.id in seen_ids:
            raise InputError(f"duplicate conversation id {conv.id!r}")
        seen_ids.add(conv.id)
        if not conv.document_clean:
            raise InputError(f"{where}: empty document")
        if conv.document_asr is not None and not conv.document_asr:
            raise InputError(f"{where}: empty noisy document")
        for ti, turn in enumerate(conv.turns):
            twhere = f"{where}, turn {ti}"
            if not turn.question_clean:
                raise InputError(f"{twhere}: empty question")
            if not _span_ok(turn.rationale_clean_span, len(conv.document_clean)):
                raise InputError(
                    f"{twhere}: rationale_clean_span {turn.rationale_clean_span} out of bounds "
                    f"for document of {len(conv.document_clean)} words"
                )
            if turn.rationale_asr_span is not None:
                if conv.document_asr is None:
                    raise InputError(f"{twhere}: noisy rationale span without a noisy document")
                if not _span_ok(turn.rationale_asr_span, len(conv.document_asr)):
                    raise InputError(
                        f"{twhere}: rationale_asr_span {turn.rationale_asr_span} out of bounds "
                        f"for noisy document of {len(conv.document_asr)} words"
                    )
            if turn.depends_on is not None and not 0 <= turn.depends_on < ti:
                raise InputError(
                    f"{twhere}: depends_on must name an earlier turn, got {turn.depends_on}"
                )


def _need(obj: dict, key: str, kind, pointer: str):
    if not isinstance(obj, dict):
        raise ParseError(f"{pointer}: expected an object")
    if key not in obj:
        raise ParseError(f"{pointer}/{key}: missing required field")
    value = obj[key]
    if kind is float:
        kind = (int, float)
    if not isinstance(value, kind) or isinstance(value, bool):
        raise ParseError(f"{pointer}/{key}: expected {getattr(kind, '__name__', kind)}")
    return value


def _opt_span(obj: dict, key: str, pointer: str) -> tuple[int, int] | None:
    if obj.get(key) is None:
        return None
    return _span(obj, key, pointer)


def _span(obj: dict, key: str, pointer: str) -> tuple[int, int]:
    raw = _need(obj, key, list, pointer)
    if len(raw) != 2 or not all(isinstance(v, int) and not isinstance(v, bool) for v in raw):
        raise ParseError(f"{pointer}/{key}: expected a [start, end] pair of integers")
    return (raw[0], raw[1])


def _words(obj: dict, key: str, pointer: str, optional: bool = False) -> list[str] | None:
    if optional and obj.get(key) is None:
        return None
    raw = _need(obj, key, str, pointer)
    return raw.split()


def corpus_to_dict(corpus: Corpus) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "conversations": [
            {
                "id": conv.id,
                "domain": conv.domain,
                "document_clean": " ".join(conv.document_clean),
                "document_asr": None if conv.document_asr is None else " ".join(conv.document_asr),
                "turns": [
                    {
                        "question_clean": " ".join(t.question_clean),
                        "question_asr": None if t.question_asr is None else " ".join(t.question_asr),
                        "answer_text": t.answer_text,
                        "rationale_clean_span": list(t.rationale_clean_span),
                        "rationale_asr_span": None
                        if t.rationale_asr_span is None
                        else list(t.rationale_asr_span),
                        "depends_on": t.depends_on,
                    }
                    for t in conv.turns
                ],
            }
            for conv in corpus.conversations
        ],
    }


def corpus_from_dict(payload: dict) -> Corpus:
    if not isinstance(payload, dict):
        raise ParseError("/: expected a JSON object at top level")
    version = _need(payload, "schema_version", int, "")
    if version != SCHEMA_VERSION:
        raise ParseError(f"/schema_version: unsupported version {version}, expected {SCHEMA_VERSION}")
    convs_raw = _need(payload, "conversations", list, "")
    conversations = []
    for ci, cobj in enumerate(convs_raw):
        cp = f"/conversations/{ci}"
        turns = []
        turns_raw = _need(cobj, "turns", list, cp)
        for ti, tobj in enumerate(turns_raw):
            tp = f"{cp}/turns/{ti}"
            q_asr = _words(tobj, "question_asr", tp, optional=True) if "question_asr" in tobj else None
            depends = tobj.get("depends_on")
            if depends is not None and (not isinstance(depends, int) or isinstance(depends, bool)):
                raise ParseError(f"{tp}/depends_on: expected an integer or null")
            turns.append(
                Turn(
                    question_clean=_words(tobj, "question_clean", tp) or [],
                    question_asr=q_asr,
                    answer_text=_need(tobj, "answer_text", str, tp),
                    rationale_clean_span=_span(tobj, "rationale_clean_span", tp),
                    rationale_asr_span=_opt_span(tobj, "rationale_asr_span", tp),
                    depends_on=depends,
                )
            )
        conversations.append(
            Conversation(
                id=_need(cobj, "id", str, cp),
                domain=_need(cobj, "domain", str, cp),
                document_clean=_words(cobj, "document_clean", cp) or [],
                document_asr=_words(cobj, "document_asr", cp, optional=True)
                if "document_asr" in cobj
                else None,
                turns=turns,
            )
        )
    corpus = Corpus(conversations)
    try:
        validate_corpus(corpus)
    except InputError as exc:
        raise ParseError(str(exc)) from exc
    return corpus


def save_corpus(corpus: Corpus, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(corpus_to_dict(corpus), fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")


def load_corpus(path) -> Corpus:
    with open(path, "r", encoding="utf-8") as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: not valid JSON ({exc})") from exc
    return corpus_from_dict(payload)


# ---------------------------------------------------------------------------
# Synthetic generation


@dataclass
class SynthConfig:
    """Knobs for the synthetic conversation generator."""

    num_conversations: int = 50
    turns_per_conversation: int = 5
    doc_length: int = 30
    vocab_size: int = 200
    min_rationale_len: int = 2
    max_rationale_len: int = 4
    depends_fraction: float = 0.3
    domains: tuple[str, ...] = ("children_story", "literature", "news", "wiki", "exam")
    seed: int = 0


QUESTION_WORDS = ("what", "who", "where", "when", "which")


def make_vocab_words(vocab_size: int) -> list[str]:
    """Deterministic pseudo-word list: w000, w001, ..."""
    width = max(3, len(str(vocab_size - 1)))
    return [f"w{idx:0{width}d}" for idx in range(vocab_size)]


def synth(config: SynthConfig) -> Corpus:
    """Generate a clean-view corpus; deterministic in config.seed."""
    if config.num_conversations < 0 or config.turns_per_conversation <= 0:
        raise ConfigError("num_conversations must be >= 0 and turns_per_conversation >= 1")
    if config.vocab_size < len(QUESTION_WORDS) + 2:
        raise ConfigError(f"vocab_size {config.vocab_size} too small")
    if not 1 <= config.min_rationale_len <= config.max_rationale_len:
        raise ConfigError("need 1 <= min_rationale_len <= max_rationale_len")
    if config.doc_length < config.max_rationale_len:
        raise ConfigError(
            f"doc_length {config.doc_length} shorter than max_rationale_len {config.max_rationale_len}"
        )
    if not 0.0 <= config.depends_fraction <= 1.0:
        raise ConfigError("depends_fraction must lie in [0, 1]")
    rng = np.random.default_rng(config.seed)
    words = make_vocab_words(config.vocab_size)
    conversations = []
    for ci in range(config.num_conversations):
        doc = [words[int(i)] for i in rng.integers(0, config.vocab_size, size=config.doc_length)]
        turns = []
        for ti in range(config.turns_per_conversation):
            length = int(rng.integers(config.min_rationale_len, config.max_rationale_len + 1))
            start = int(rng.integers(0, config.doc_length - length + 1))
            end = start + length - 1
            before = doc[start - 1] if start > 0 else doc[-1]
            after = doc[end + 1] if end + 1 < len(doc) else doc[0]
            question = [
                QUESTION_WORDS[int(rng.integers(0, len(QUESTION_WORDS)))],
                before,
                after,
                doc[start],
            ]
            depends = ti - 1 if ti > 0 and rng.random() < config.depends_fraction else None
            turns.append(
                Turn(
                    question_clean=question,
                    answer_text=" ".join(doc[start : end + 1]),
                    rationale_clean_span=(start, end),
                    depends_on=depends,
                )
            )
        conversations.append(
            Conversation(
                id=f"synth-{config.seed}-{ci:04d}",
                domain=config.domains[ci % len(config.domains)],
                document_clean=doc,
                turns=turns,
            )
        )
    corpus = Corpus(conversations)
    validate_corpus(corpus)
    return corpus


# ---------------------------------------------------------------------------
# Noisy channel and word error rate


@dataclass
class NoiseConfig:
    """Word-level corruption model: per-word error rate and edit mix."""

    wer: float = 0.2
    sub_weight: float = 0.7
    del_weight: float = 0.15
    ins_weight: float = 0.15
    seed: int = 0

    def mix(self) -> tuple[float, float, float]:
        total = self.sub_weight + self.del_weight + self.ins_weight
        if abs(total - 1.0) > 1e-9:
            raise ConfigError(f"edit mix weights sum to {total}, expected 1")
        if min(self.sub_weight, self.del_weight, self.ins_weight) < 0:
            raise ConfigError("edit mix weights must be nonnegative")
        return (self.sub_weight, self.del_weight, self.ins_weight)


def confusion_partner(word: str, confusion_vocab: Sequence[str]) -> str:
    """Return the fixed vocabulary word that substitutions replace ``word`` with.

    Recognizers confuse the same acoustically close pairs over and over, so
    the channel maps each word to one stable partner instead of a fresh random
    word per occurrence.  The partner is a hash of the word into the
    vocabulary, which keeps the mapping identical across every document and
    question drawn from the same vocabulary.
    """
    if not confusion_vocab:
        raise InputError("confusion vocabulary is empty")
    idx = zlib.crc32(word.encode("utf-8")) % len(confusion_vocab)
    if confusion_vocab[idx] == word:
        idx = (idx + 1) % len(confusion_vocab)
    return confusion_vocab[idx]


def asr_channel(
    words: Sequence[str], noise: NoiseConfig, confusion_vocab: Sequence[str]
) -> list[str]:
    """Corrupt a word sequence at the configured rate; deterministic per seed.

    Each word independently suffers at most one edit: substitution by its
    confusion partner, deletion, or insertion of a random vocabulary word
    after it.
    """
    if not 0.0 <= noise.wer < 1.0:
        raise DomainError(f"target word error rate must lie in [0, 1), got {noise.wer}")
    if not confusion_vocab:
        raise InputError("confusion vocabulary is empty")
    sub_w, del_w, _ = noise.mix()
    rng = np.random.default_rng(noise.seed)
    out: list[str] = []
    for word in words:
        if rng.random() >= noise.wer:
            out.append(word)
            continue
        draw = rng.random()
        if draw < sub_w:
            partner = confusion_partner(word, confusion_vocab)
            if partner == word:
                out.append(word)  # single-word vocabulary, nothing to substitute
            else:
                out.append(partner)
        elif draw < sub_w + del_w:
            pass
        else:
            out.append(word)
            out.append(confusion_vocab[int(rng.integers(0, len(confusion_vocab)))])
    return out


def wer(reference: Sequence[str], hypothesis: Sequence[str]) -> float:
    """Word error rate: edit distance / reference length.

    Row-vectorized DP: within a row, cur[j] = min(t[j], cur[j-1] + 1)
    unrolls to min over k <= j of t[k] + (j - k), a prefix minimum of
    t[k] - k, so each row is a handful of array operations.
    """
    if len(reference) == 0:
        raise DomainError("word error rate is undefined for an empty reference")
    if len(hypothesis) <= 24:  # scalar DP beats array overhead on short rows
        prev = list(range(len(hypothesis) + 1))
        for i, ref_word in enumerate(reference, start=1):
            cur = [i]
            for j, hyp_word in enumerate(hypothesis, start=1):
                cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ref_word != hyp_word)))
            prev = cur
        return prev[-1] / len(reference)
    ids: dict[str, int] = {}
    ref_ids = np.array([ids.setdefault(w, len(ids)) for w in reference], dtype=np.int64)
    hyp_ids = np.array([ids.setdefault(w, len(ids)) for w in hypothesis], dtype=np.int64)
    m = len(hyp_ids)
    positions = np.arange(m + 1, dtype=np.int64)
    prev = positions.copy()
    for i, rid in enumerate(ref_ids, start=1):
        t = np.minimum(prev[1:] + 1, prev[:-1] + (hyp_ids != rid))
        shifted = np.concatenate(([np.int64(i)], t - positions[1:]))
        prev = np.minimum.accumulate(shifted) + positions
    return int(prev[-1]) / len(reference)


def align_words(reference: Sequence[str], hypothesis: Sequence[str]) -> list[int | None]:
    """Map each hypothesis position to its reference position, or None.

    Positions are paired along a minimal edit alignment; inserted
    hypothesis words get None. Backtracing prefers match/substitution over
    deletion over insertion, which keeps surviving positions stable.
    """
    ids: dict[str, int] = {}
    ref_ids = np.array([ids.setdefault(w, len(ids)) for w in reference], dtype=np.int64)
    hyp_ids = np.array([ids.setdefault(w, len(ids)) for w in hypothesis], dtype=np.int64)
    n, m = len(ref_ids), len(hyp_ids)
    positions = np.arange(m + 1, dtype=np.int64)
    rows = [positions.copy()]
    for i, rid in enumerate(ref_ids, start=1):
        prev = rows[-1]
        t = np.minimum(prev[1:] + 1, prev[:-1] + (hyp_ids != rid))
        shifted = np.concatenate(([np.int64(i)], t - positions[1:]))
        rows.append(np.minimum.accumulate(shifted) + positions)
    dp = np.vstack(rows)
    align: list[int | None] = [None] * m
    i, j = n, m
    while i > 0 and j > 0:
        cost = int(ref_ids[i - 1] != hyp_ids[j - 1])
        if dp[i, j] == dp[i - 1, j - 1] + cost:
            align[j - 1] = i - 1
            i, j = i - 1, j - 1
        elif dp[i, j] == dp[i - 1, j] + 1:
            i -= 1
        else:
            j -= 1
    return align


def _derived_seed(base: int, *parts: str) -> int:
    tag = "|".join(parts).encode("utf-8")
    return (int(base) * 2654435761 + zlib.crc32(tag)) % (2**32)


def apply_channel(corpus: Corpus, noise: NoiseConfig, confusion_vocab: Sequence[str] | None = None) -> Corpus:
    """Return a copy with noisy documents and questions filled in.

    Clean fields are untouched; each document and question gets its own
    seed derived from the base seed and the conversation id so the result
    is reproducible yet streams do not share draws.
    """
    if confusion_vocab is None:
        seen: set[str] = set()
        vocab: list[str] = []
        for conv in corpus.conversations:
            for word in conv.document_clean:
                if word not in seen:
                    seen.add(word)
                    vocab.append(word)
        confusion_vocab = sorted(vocab)
    if not confusion_vocab:
        raise InputError("cannot derive a confusion vocabulary from an empty corpus")
    out = copy.deepcopy(corpus)
    for conv in out.conversations:
        doc_noise = NoiseConfig(
            noise.wer, noise.sub_weight, noise.del_weight, noise.ins_weight,
            seed=_derived_seed(noise.seed, conv.id, "doc"),
        )
        noisy_doc = asr_channel(conv.document_clean, doc_noise, confusion_vocab)
        if not noisy_doc:
            noisy_doc = [conv.document_clean[0]]  # keep documents nonempty
        conv.document_asr = noisy_doc
        for ti, turn in enumerate(conv.turns):
            q_noise = NoiseConfig(
                noise.wer, noise.sub_weight, noise.del_weight, noise.ins_weight,
                seed=_derived_seed(noise.seed, conv.id, f"q{ti}"),
            )
            noisy_q = asr_channel(turn.question_clean, q_noise, confusion_vocab)
            turn.question_asr = noisy_q if noisy_q else [turn.question_clean[0]]
            turn.rationale_asr_span = None
    return out


# ---------------------------------------------------------------------------
# Rationale re-anchoring filter


def _find_exact(doc_norm: list[str], target_norm: list[str]) -> tuple[int, int] | None:
    n, m = len(doc_norm), len(target_norm)
    for start in range(n - m + 1):
        if doc_norm[start : start + m] == target_norm:
            return (start, start + m - 1)
    return None


def _bag_f1(a: collections.Counter, b: collections.Counter, len_a: int, len_b: int) -> float:
    if len_a == 0 or len_b == 0:
        return float(len_a == len_b)
    overlap = sum((a & b).values())
    if overlap == 0:
        return 0.0
    return 2 * overlap / (len_a + len_b)


def _find_fuzzy(
    doc_norm: list[str], target_norm: list[str], threshold: float
) -> tuple[int, int] | None:
    m = len(target_norm)
    target_bag = collections.Counter(t for t in target_norm if t)
    target_len = sum(target_bag.values())
    best: tuple[float, int, int] | None = None
    for width in range(max(1, m - 2), m + 3):
        for start in range(0, len(doc_norm) - width + 1):
            window = [t for t in doc_norm[start : start + width] if t]
            score = _bag_f1(collections.Counter(window), target_bag, len(window), target_len)
            if best is None or score > best[0] + 1e-12:
                best = (score, start, start + width - 1)
    if best is not None and best[0] >= threshold:
        return (best[1], best[2])
    return None


def locate_rationale(
    document_asr: Sequence[str], rationale_words: Sequence[str], threshold: float = 0.8
) -> tuple[int, int] | None:
    """Find the rationale in a noisy document.

    Exact match first, on punctuation-stripped lowercased words; otherwise
    the best sliding window whose token F1 against the rationale reaches
    the threshold. Windows range over lengths within two words of the
    rationale length. Returns None when nothing anchors.
    """
    doc_norm = [norm_word(w) for w in document_asr]
    target_norm = [norm_word(w) for w in rationale_words]
    if not target_norm:
        return None
    exact = _find_exact(doc_norm, target_norm)
    if exact is not None:
        return exact
    return _find_fuzzy(doc_norm, target_norm, threshold)


@dataclass
class Removal:
    conversation_id: str
    turn_index: int
    reason: str

    def to_dict(self) -> dict:
        return {
            "conversation_id": self.conversation_id,
            "turn_index": self.turn_index,
            "reason": self.reason,
        }


def filter_corpus(corpus: Corpus, threshold: float = 0.8) -> tuple[Corpus, list[Removal]]:
    """Re-anchor every turn's rationale in the noisy document.

    Turns whose rationale cannot be located are removed with reason
    span_missing; turns depending (transitively) on a removed turn are
    removed with reason dependency_cascade. Surviving turns keep their
    clean fields untouched, get rationale_asr_span filled in, and have
    depends_on remapped to post-filter indices. The input corpus is not
    mutated and the operation is idempotent.
    """
    if not 0.0 < threshold <= 1.0:
        raise DomainError(f"match threshold must lie in (0, 1], got {threshold}")
    out_convs: list[Conversation] = []
    removals: list[Removal] = []
    for conv in corpus.conversations:
        if conv.document_asr is None:
            raise InputError(
                f"conversation {conv.id!r} has no noisy document; apply the channel before filtering"
            )
        keep: list[tuple[int, Turn, tuple[int, int]]] = []
        removed: set[int] = set()
        for ti, turn in enumerate(conv.turns):
            if turn.depends_on is not None and turn.depends_on in removed:
                removed.add(ti)
                removals.append(Removal(conv.id, ti, REMOVAL_CASCADE))
                continue
            s, e = turn.rationale_clean_span
            span = locate_rationale(conv.document_asr, conv.document_clean[s : e + 1], threshold)
            if span is None:
                removed.add(ti)
                removals.append(Removal(conv.id, ti, REMOVAL_SPAN_MISSING))
                continue
            keep.append((ti, turn, span))
        new_index = {ti: pos for pos, (ti, _, _) in enumerate(keep)}
        new_turns = []
        for ti, turn, span in keep:
            fresh = copy.deepcopy(turn)
            fresh.rationale_asr_span = span
            if fresh.depends_on is not None:
                fresh.depends_on = new_index[fresh.depends_on]
            new_turns.append(fresh)
        if new_turns:
            out_convs.append(
                Conversation(
                    id=conv.id,
                    domain=conv.domain,
                    document_clean=list(conv.document_clean),
                    document_asr=list(conv.document_asr),
                    turns=new_turns,
                )
            )
    filtered = Corpus(out_convs)
    validate_corpus(filtered)
    return filtered, removals


# ---------------------------------------------------------------------------
# Statistics, splits, speech tokens


def corpus_stats(corpus: Corpus) -> list[dict]:
    """Per-domain counts and means, with an Overall row last.

    Columns: domain, passages, qa_pairs, mean_passage_len, mean_turns.
    """
    by_domain: dict[str, list[Conversation]] = collections.defaultdict(list)
    for conv in corpus.conversations:
        by_domain[conv.domain].append(conv)
    rows = []
    for domain in sorted(by_domain):
        convs = by_domain[domain]
        rows.append(_stats_row(domain, convs))
    rows.append(_stats_row("Overall", corpus.conversations))
    return rows


def _stats_row(label: str, convs: list[Conversation]) -> dict:
    n = len(convs)
    qa = sum(len(c.turns) for c in convs)
    mean_len = sum(len(c.document_clean) for c in convs) / n if n else 0.0
    mean_turns = qa / n if n else 0.0
    return {
        "domain": label,
        "passages": n,
        "qa_pairs": qa,
        "mean_passage_len": mean_len,
        "mean_turns": mean_turns,
    }


def split_corpus(corpus: Corpus, test_fraction: float, seed: int) -> tuple[Corpus, Corpus]:
    """Deterministic conversation-level train/test split."""
    if not 0.0 <= test_fraction <= 1.0:
        raise DomainError(f"test_fraction must lie in [0, 1], got {test_fraction}")
    order = np.random.default_rng(seed).permutation(len(corpus.conversations))
    n_test = int(round(test_fraction * len(corpus.conversations)))
    test_idx = set(int(i) for i in order[:n_test])
    train = [c for i, c in enumerate(corpus.conversations) if i not in test_idx]
    test = [c for i, c in enumerate(corpus.conversations) if i in test_idx]
    return Corpus(copy.deepcopy(train)), Corpus(copy.deepcopy(test))


def speech_tokens(words: Sequence[str], vocab_size: int, salt: int = 0) -> list[int]:
    """Expand words into 1..3 pseudo-phoneme ids in [1, vocab_size).

    The mapping is a stable hash of the normalized word, so the same word
    always yields the same expansion across runs and platforms, and
    corrupted words yield different token subsequences. Id 0 stays
    reserved for padding.
    """
    if vocab_size < 2:
        raise DomainError(f"speech vocabulary needs at least 2 entries, got {vocab_size}")
    out: list[int] = []
    for word in words:
        key = norm_word(word) or word
        base = zlib.crc32(f"{salt}:{key}".encode("utf-8"))
        count = 1 + base % 3
        for j in range(count):
            h = zlib.crc32(f"{salt}:{key}:{j}".encode("utf-8"))
            out.append(1 + h % (vocab_size - 1))
    return out


def noisy_speech_tokens(
    words: Sequence[str], vocab_size: int, rate: float, seed: int, salt: int = 0
) -> list[int]:
    """Speech tokens of ``words`` with per-token substitution noise.

    Stands in for a noisy recording of the utterance: the expansion is the
    clean one, then each token independently flips to a random id with
    probability ``rate``.  Deterministic per seed.
    """
    if not 0.0 <= rate < 1.0:
        raise DomainError(f"speech noise rate must lie in [0, 1), got {rate}")
    clean = speech_tokens(words, vocab_size, salt)
    if rate == 0.0:
        return clean
    rng = np.random.default_rng(seed)
    return [
        1 + int(rng.integers(0, vocab_size - 1)) if rng.random() < rate else tok
        for tok in clean
    ]
