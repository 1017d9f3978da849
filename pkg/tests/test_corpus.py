"""Corpus generation, noisy channel, filtering, stats, and serialization."""

import copy
import functools
import itertools
import json
from pathlib import Path

import numpy as np
import pytest

from fusionqa.corpus import (
    Conversation,
    Corpus,
    NoiseConfig,
    SynthConfig,
    Turn,
    align_words,
    apply_channel,
    corpus_from_dict,
    corpus_stats,
    corpus_to_dict,
    filter_corpus,
    load_corpus,
    locate_rationale,
    make_vocab_words,
    save_corpus,
    speech_tokens,
    split_corpus,
    synth,
    wer,
)
from fusionqa.errors import ConfigError, DomainError, InputError, ParseError

FIXTURE = Path(__file__).parent / "fixtures" / "story.json"


# ---------------------------------------------------------------------------
# Synthetic generator


def test_synth_counts_and_invariants():
    cfg = SynthConfig(num_conversations=20, turns_per_conversation=4, seed=3)
    corpus = synth(cfg)
    assert len(corpus.conversations) == 20
    assert corpus.num_turns() == 80
    for conv in corpus.conversations:
        assert len(conv.document_clean) == cfg.doc_length
        assert conv.document_asr is None
        for ti, turn in enumerate(conv.turns):
            s, e = turn.rationale_clean_span
            assert 0 <= s <= e < cfg.doc_length
            assert e - s + 1 <= cfg.max_rationale_len
            assert turn.answer_text == " ".join(conv.document_clean[s : e + 1])
            if turn.depends_on is not None:
                assert turn.depends_on == ti - 1


def test_synth_deterministic_and_seed_sensitive():
    a = corpus_to_dict(synth(SynthConfig(num_conversations=5, seed=11)))
    b = corpus_to_dict(synth(SynthConfig(num_conversations=5, seed=11)))
    c = corpus_to_dict(synth(SynthConfig(num_conversations=5, seed=12)))
    assert a == b
    assert a != c


def test_synth_domains_cycle():
    corpus = synth(SynthConfig(num_conversations=7, domains=("x", "y"), seed=0))
    assert [c.domain for c in corpus.conversations] == ["x", "y"] * 3 + ["x"]


def test_synth_config_errors():
    with pytest.raises(ConfigError):
        synth(SynthConfig(doc_length=3, max_rationale_len=4))
    with pytest.raises(ConfigError):
        synth(SynthConfig(depends_fraction=1.5))
    with pytest.raises(ConfigError):
        synth(SynthConfig(min_rationale_len=0))


# ---------------------------------------------------------------------------
# Word error rate


def ref_edit_distance(ref, hyp):
    @functools.lru_cache(maxsize=None)
    def go(i, j):
        if i == len(ref):
            return len(hyp) - j
        if j == len(hyp):
            return len(ref) - i
        best = go(i + 1, j + 1) + (ref[i] != hyp[j])
        best = min(best, go(i + 1, j) + 1, go(i, j + 1) + 1)
        return best

    return go(0, 0)


def test_wer_examples():
    assert wer(["a", "b", "c"], ["a", "b", "c"]) == 0.0
    assert wer(["a", "b", "c"], ["a", "c"]) == pytest.approx(1 / 3)
    assert wer(["a", "b"], ["a", "x", "b"]) == pytest.approx(0.5)
    assert wer(["a", "b"], ["x", "y"]) == 1.0
    assert wer(["a"], []) == 1.0
    with pytest.raises(DomainError):
        wer([], ["a"])


def test_wer_matches_reference_on_random_pairs():
    rng = np.random.default_rng(0)
    alphabet = ["a", "b", "c"]
    for _ in range(300):
        ref = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(1, 7))]
        hyp = [alphabet[i] for i in rng.integers(0, 3, size=rng.integers(0, 7))]
        assert wer(ref, hyp) == pytest.approx(ref_edit_distance(tuple(ref), tuple(hyp)) / len(ref))


def test_wer_exhaustive_short_pairs():
    alphabet = ["a", "b", "c"]
    seqs = [()] + [t for n in (1, 2, 3) for t in itertools.product(alphabet, repeat=n)]
    for ref in seqs:
        if not ref:
            continue
        for hyp in seqs:
            assert wer(list(ref), list(hyp)) == pytest.approx(
                ref_edit_distance(ref, hyp) / len(ref)
            )


# ---------------------------------------------------------------------------
# Noisy channel


def test_channel_zero_rate_is_identity():
    words = make_vocab_words(50)
    out = asr_identity = __import__("fusionqa.corpus", fromlist=["asr_channel"]).asr_channel(
        words, NoiseConfig(wer=0.0, seed=5), words
    )
    assert out == words


def test_channel_deterministic_per_seed():
    from fusionqa.corpus import asr_channel

    vocab = make_vocab_words(100)
    words = [vocab[i % 100] for i in range(500)]
    a = asr_channel(words, NoiseConfig(wer=0.3, seed=9), vocab)
    b = asr_channel(words, NoiseConfig(wer=0.3, seed=9), vocab)
    c = asr_channel(words, NoiseConfig(wer=0.3, seed=10), vocab)
    assert a == b
    assert a != c


def test_channel_hits_target_rate():
    from fusionqa.corpus import asr_channel

    vocab = make_vocab_words(200)
    rng = np.random.default_rng(4)
    words = [vocab[int(i)] for i in rng.integers(0, 200, size=12000)]
    noisy = asr_channel(words, NoiseConfig(wer=0.2, seed=1), vocab)
    assert abs(wer(words, noisy) - 0.2) <= 0.02


def test_channel_pure_edit_modes():
    from fusionqa.corpus import asr_channel

    vocab = make_vocab_words(100)
    words = [vocab[i % 100] for i in range(2000)]
    subs = asr_channel(words, NoiseConfig(0.3, 1.0, 0.0, 0.0, seed=2), vocab)
    assert len(subs) == len(words)
    assert all(a == b or a != b for a, b in zip(words, subs))
    assert sum(a != b for a, b in zip(words, subs)) > 0
    dels = asr_channel(words, NoiseConfig(0.3, 0.0, 1.0, 0.0, seed=2), vocab)
    assert len(dels) < len(words)
    assert all(w in set(words) for w in dels)
    ins = asr_channel(words, NoiseConfig(0.3, 0.0, 0.0, 1.0, seed=2), vocab)
    assert len(ins) > len(words)


def test_channel_substitution_changes_word():
    from fusionqa.corpus import asr_channel

    words = ["same"] * 1000
    out = asr_channel(words, NoiseConfig(0.5, 1.0, 0.0, 0.0, seed=0), ["same", "other"])
    changed = [w for w in out if w != "same"]
    assert changed and all(w == "other" for w in changed)


def test_channel_errors():
    from fusionqa.corpus import asr_channel

    with pytest.raises(DomainError):
        asr_channel(["a"], NoiseConfig(wer=1.0), ["a", "b"])
    with pytest.raises(InputError):
        asr_channel(["a"], NoiseConfig(wer=0.1), [])
    with pytest.raises(ConfigError):
        asr_channel(["a"], NoiseConfig(0.1, 0.5, 0.5, 0.5), ["a", "b"])


def test_apply_channel_fills_asr_views():
    corpus = synth(SynthConfig(num_conversations=6, seed=1))
    before = corpus_to_dict(corpus)
    noisy = apply_channel(corpus, NoiseConfig(wer=0.3, seed=7))
    assert corpus_to_dict(corpus) == before  # input untouched
    docs = set()
    for conv in noisy.conversations:
        assert conv.document_asr is not None
        docs.add(tuple(conv.document_asr))
        for turn in conv.turns:
            assert turn.question_asr is not None
            assert turn.rationale_asr_span is None
    assert len(docs) > 1  # per-conversation seeds differ
    again = apply_channel(corpus, NoiseConfig(wer=0.3, seed=7))
    assert corpus_to_dict(again) == corpus_to_dict(noisy)


# ---------------------------------------------------------------------------
# Rationale location and filtering


def test_locate_exact_ignores_case_and_punctuation():
    doc = "She shared her hay bed with her mommy and 5 other sisters.".split()
    span = locate_rationale(doc, "with her mommy and 5 other sisters".split())
    assert span == (5, 11)


def test_locate_fuzzy_threshold_boundary():
    # two adjacent corrupted words: best window keeps the 2 survivors, F1 = 2/3 < 0.8
    doc = "alpha beta gamma XXX YYY zeta".split()
    assert locate_rationale(doc, ["beta", "gamma", "delta", "epsilon"]) is None
    # one corrupted word: the window dropping it scores F1 = 6/7 >= 0.8
    doc2 = "alpha beta gamma delta epsilon zeta".split()
    assert locate_rationale(doc2, ["beta", "gamma", "delta", "OTHER"]) == (1, 3)
    # all 4 words present around two intruders: width-6 window sits exactly at 0.8
    doc3 = "alpha beta gamma XXX YYY delta epsilon zeta".split()
    assert locate_rationale(doc3, ["beta", "gamma", "delta", "epsilon"]) == (1, 6)


def test_locate_fuzzy_handles_deletion():
    doc = "one two four five six seven".split()
    span = locate_rationale(doc, ["two", "three", "four", "five", "six"])
    assert span == (1, 4)  # 4-word window, F1 = 8/9


def test_locate_prefers_exact_and_earliest():
    doc = "a b c a b c".split()
    assert locate_rationale(doc, ["a", "b"]) == (0, 1)


def test_filter_story_fixture():
    corpus = load_corpus(FIXTURE)
    before = corpus_to_dict(corpus)
    filtered, removals = filter_corpus(corpus)
    assert corpus_to_dict(corpus) == before  # no mutation

    reasons = {(r.conversation_id, r.turn_index): r.reason for r in removals}
    assert reasons == {
        ("story-0001", 0): "span_missing",
        ("story-0002", 0): "span_missing",
        ("story-0002", 1): "dependency_cascade",
        ("story-0002", 2): "dependency_cascade",
    }

    story = filtered.conversations[0]
    assert [t.answer_text for t in story.turns] == [
        "with her mommy and 5 sisters",
        "orange and white",
    ]
    kept = story.turns[0]
    s, e = kept.rationale_asr_span
    assert [w.rstrip(".").lower() for w in story.document_asr[s : e + 1]] == (
        "with her mommy and 5 other sisters".split()
    )
    # clean fields untouched on survivors
    original = corpus.conversations[0].turns[1]
    assert kept.question_clean == original.question_clean
    assert kept.rationale_clean_span == original.rationale_clean_span

    barn = filtered.conversations[1]
    assert len(barn.turns) == 1
    assert barn.turns[0].answer_text == "in the field behind the barn"
    assert barn.turns[0].depends_on is None


def test_filter_idempotent():
    corpus = load_corpus(FIXTURE)
    once, _ = filter_corpus(corpus)
    twice, removals = filter_corpus(once)
    assert removals == []
    assert corpus_to_dict(twice) == corpus_to_dict(once)


def test_filter_remaps_depends_on():
    conv = Conversation(
        id="c",
        domain="d",
        document_clean="alpha beta gamma delta".split(),
        document_asr="ZZZ beta gamma delta".split(),
        turns=[
            Turn(["q"], "alpha", (0, 0)),
            Turn(["q"], "beta", (1, 1)),
            Turn(["q"], "gamma", (2, 2), depends_on=1),
        ],
    )
    filtered, removals = filter_corpus(Corpus([conv]))
    assert [r.reason for r in removals] == ["span_missing"]
    turns = filtered.conversations[0].turns
    assert [t.answer_text for t in turns] == ["beta", "gamma"]
    assert turns[1].depends_on == 0  # remapped from original index 1


def test_filter_drops_empty_conversations():
    conv = Conversation(
        id="c",
        domain="d",
        document_clean=["alpha"],
        document_asr=["ZZZ"],
        turns=[Turn(["q"], "alpha", (0, 0))],
    )
    filtered, removals = filter_corpus(Corpus([conv]))
    assert filtered.conversations == []
    assert [r.reason for r in removals] == ["span_missing"]


def test_filter_requires_noisy_view():
    corpus = synth(SynthConfig(num_conversations=2, seed=0))
    with pytest.raises(InputError):
        filter_corpus(corpus)
    with pytest.raises(DomainError):
        filter_corpus(load_corpus(FIXTURE), threshold=0.0)


# ---------------------------------------------------------------------------
# Serialization


def test_round_trip_preserves_everything(tmp_path):
    corpus = apply_channel(synth(SynthConfig(num_conversations=4, seed=2)), NoiseConfig(wer=0.2, seed=3))
    path = tmp_path / "corpus.json"
    save_corpus(corpus, path)
    again = load_corpus(path)
    assert corpus_to_dict(again) == corpus_to_dict(corpus)


def test_save_is_byte_deterministic(tmp_path):
    corpus = synth(SynthConfig(num_conversations=3, seed=5))
    p1, p2 = tmp_path / "a.json", tmp_path / "b.json"
    save_corpus(corpus, p1)
    save_corpus(corpus, p2)
    assert p1.read_bytes() == p2.read_bytes()


def test_parse_error_names_location(tmp_path):
    payload = corpus_to_dict(load_corpus(FIXTURE))
    del payload["conversations"][0]["turns"][1]["rationale_clean_span"]
    with pytest.raises(ParseError, match=r"/conversations/0/turns/1/rationale_clean_span"):
        corpus_from_dict(payload)


def test_parse_rejects_bad_schema_and_spans():
    good = corpus_to_dict(load_corpus(FIXTURE))
    bad_version = copy.deepcopy(good)
    bad_version["schema_version"] = 99
    with pytest.raises(ParseError, match="schema_version"):
        corpus_from_dict(bad_version)
    bad_span = copy.deepcopy(good)
    bad_span["conversations"][0]["turns"][0]["rationale_clean_span"] = [1, 2, 3]
    with pytest.raises(ParseError, match=r"\[start, end\]"):
        corpus_from_dict(bad_span)
    out_of_bounds = copy.deepcopy(good)
    out_of_bounds["conversations"][0]["turns"][0]["rationale_clean_span"] = [0, 10_000]
    with pytest.raises(ParseError, match="out of bounds"):
        corpus_from_dict(out_of_bounds)
    bad_depends = copy.deepcopy(good)
    bad_depends["conversations"][1]["turns"][1]["depends_on"] = 5
    with pytest.raises(ParseError, match="earlier turn"):
        corpus_from_dict(bad_depends)


def test_parse_rejects_invalid_json(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_corpus(path)


def test_align_words_cases():
    assert align_words(["a", "b", "c"], ["a", "b", "c"]) == [0, 1, 2]
    assert align_words(["a", "b"], ["a", "x", "b"]) == [0, None, 1]
    assert align_words(["a", "b", "c"], ["a", "c"]) == [0, 2]
    assert align_words(["a", "b", "c"], ["a", "X", "c"]) == [0, 1, 2]
    assert align_words(["a"], []) == []
    assert align_words([], ["a", "b"]) == [None, None]


def test_align_words_consistent_with_wer():
    rng = np.random.default_rng(3)
    vocab = make_vocab_words(10)
    for _ in range(50):
        ref = [vocab[int(i)] for i in rng.integers(0, 10, size=rng.integers(1, 15))]
        hyp = [vocab[int(i)] for i in rng.integers(0, 10, size=rng.integers(0, 15))]
        alignment = align_words(ref, hyp)
        # aligned reference indices strictly increase left to right
        matched = [a for a in alignment if a is not None]
        assert matched == sorted(set(matched))
        for j, a in enumerate(alignment):
            if a is not None:
                assert 0 <= a < len(ref)


# ---------------------------------------------------------------------------
# Stats and splits


def test_stats_empty_corpus():
    rows = corpus_stats(Corpus([]))
    assert rows == [
        {"domain": "Overall", "passages": 0, "qa_pairs": 0, "mean_passage_len": 0.0, "mean_turns": 0.0}
    ]


def test_stats_counts_and_means():
    corpus = synth(SynthConfig(num_conversations=10, turns_per_conversation=5, domains=("a", "b"), seed=0))
    rows = corpus_stats(corpus)
    assert [r["domain"] for r in rows] == ["a", "b", "Overall"]
    overall = rows[-1]
    assert overall["passages"] == 10
    assert overall["qa_pairs"] == 50
    assert overall["mean_passage_len"] == pytest.approx(30.0)
    assert overall["mean_turns"] == pytest.approx(5.0)
    assert rows[0]["passages"] == 5


def test_split_disjoint_and_deterministic():
    corpus = synth(SynthConfig(num_conversations=10, seed=0))
    train, test = split_corpus(corpus, 0.3, seed=1)
    assert len(train.conversations) == 7
    assert len(test.conversations) == 3
    train_ids = {c.id for c in train.conversations}
    test_ids = {c.id for c in test.conversations}
    assert not train_ids & test_ids
    assert train_ids | test_ids == {c.id for c in corpus.conversations}
    train2, test2 = split_corpus(corpus, 0.3, seed=1)
    assert corpus_to_dict(train2) == corpus_to_dict(train)
    assert corpus_to_dict(test2) == corpus_to_dict(test)


def test_split_boundaries():
    corpus = synth(SynthConfig(num_conversations=4, seed=0))
    train, test = split_corpus(corpus, 0.0, seed=0)
    assert len(train.conversations) == 4 and len(test.conversations) == 0
    with pytest.raises(DomainError):
        split_corpus(corpus, 1.5, seed=0)


# ---------------------------------------------------------------------------
# Speech tokens


def test_speech_tokens_stable_frozen_values():
    assert speech_tokens(["cat"], 64) == [37, 49]
    assert speech_tokens(["cat"], 64, salt=7) == [5]


def test_speech_tokens_properties():
    words = make_vocab_words(50)
    out = speech_tokens(words, 64)
    assert all(1 <= t < 64 for t in out)
    assert speech_tokens(words, 64) == out
    per_word = [speech_tokens([w], 64) for w in words]
    assert all(1 <= len(p) <= 3 for p in per_word)
    assert len({tuple(p) for p in per_word}) > 1


def test_speech_tokens_normalize_surface_forms():
    assert speech_tokens(["Cotton."], 64) == speech_tokens(["cotton"], 64)
    assert speech_tokens(["cotton"], 64) != speech_tokens(["kitten"], 64)


def test_speech_tokens_vocab_too_small():
    with pytest.raises(DomainError):
        speech_tokens(["cat"], 1)
