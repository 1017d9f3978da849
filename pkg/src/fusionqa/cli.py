"""Command-line harness: prepare corpora, train models, evaluate, run sweeps.

Verbs:
    prepare   synthesize or load a corpus, apply the noisy channel, filter,
              split into train/test files, and report removal statistics
    train     fit a teacher (clean view) or a distilled student (asr view)
    eval      score a checkpoint on a corpus and emit a report
    ablate    run a sweep (temperature | fusion | wer) and emit one CSV
    stats     print and save per-domain corpus composition

Settings come from a key=value config file (--config), overridden by CLI
flags. The only environment variable read is FUSIONQA_LOG_LEVEL. Every
command writes a manifest.json holding the resolved config, its hash, and
output digests; timestamps live only there, so re-running a command with
the same config and seed reproduces every other artifact byte for byte.
"""

from __future__ import annotations

import argparse
import concurrent.futures
import csv
import dataclasses
import hashlib
import io
import json
import logging
import os
import sys
from datetime import datetime, timezone
from pathlib import Path

from .corpus import (
    Corpus,
    NoiseConfig,
    SynthConfig,
    apply_channel,
    corpus_from_dict,
    corpus_stats,
    corpus_to_dict,
    filter_corpus,
    load_corpus,
    save_corpus,
    split_corpus,
    synth,
)
from .distill import (
    KDConfig,
    TrainedModel,
    checkpoint_id,
    infer,
    load_checkpoint,
    save_checkpoint,
    train,
)
from .errors import ConfigError, FusionQAError
from .fusion import MECHANISMS
from .metrics import EvalReport, evaluate
from .qa import VIEWS, ModelConfig

log = logging.getLogger("fusionqa")

TEMPERATURE_GRID = (1.0, 2.0, 4.0, 6.0, 8.0, 10.0)
WER_GRID = (0.1, 0.2, 0.4)
ABLATION_KINDS = ("temperature", "fusion", "wer")

_BOOL_WORDS = {"true": True, "yes": True, "1": True, "false": False, "no": False, "0": False}


@dataclasses.dataclass
class RunConfig:
    """Resolved settings for one command invocation.

    Defaults here are the experiment defaults; library-level dataclasses
    keep their own smaller defaults for unit work.
    """

    # corpus source: a JSON file, or synthesis parameters when absent
    corpus: str | None = None
    synth_conversations: int = 500
    synth_turns: int = 10
    synth_doc_length: int = 30
    synth_vocab_size: int = 200
    synth_min_rationale: int = 2
    synth_max_rationale: int = 4
    synth_depends_fraction: float = 0.3
    synth_domains: tuple[str, ...] = SynthConfig().domains
    test_fraction: float = 0.2

    # noisy channel
    wer: float = 0.2
    sub_weight: float = 0.7
    del_weight: float = 0.15
    ins_weight: float = 0.15
    filter_threshold: float = 0.8

    # model
    d: int = 32
    heads: int = 4
    d_ff: int = 64
    encoder_layers: int = 2
    max_len: int = 96
    k_history: int = 2
    max_span_len: int = 30
    fusion: str = "dual_attention"
    speech_vocab_size: int = 64
    speech_noise: float = 0.15
    shared_w1: bool = True

    # training
    alpha: float = 0.9
    tau: float = 2.0
    lr: float = 0.05
    steps: int = 300
    batch_size: int = 8
    clip_norm: float = 5.0
    average_kl: bool = False
    mode: str = "teacher"
    teacher: str | None = None
    checkpoint: str | None = None
    view: str = "clean"

    # run control
    seed: int = 0
    out: str = "runs/out"
    plot: bool = False
    parallel: bool = False

    def to_dict(self) -> dict:
        data = dataclasses.asdict(self)
        data["synth_domains"] = list(self.synth_domains)
        return data

    def model_config(self, fusion: str | None = None) -> ModelConfig:
        return ModelConfig(
            d=self.d,
            heads=self.heads,
            d_ff=self.d_ff,
            encoder_layers=self.encoder_layers,
            max_len=self.max_len,
            k_history=self.k_history,
            max_span_len=self.max_span_len,
            fusion=self.fusion if fusion is None else fusion,
            speech_vocab_size=self.speech_vocab_size,
            speech_noise=self.speech_noise,
            shared_w1=self.shared_w1,
        )

    def kd_config(self, alpha: float | None = None, tau: float | None = None) -> KDConfig:
        return KDConfig(
            alpha=self.alpha if alpha is None else alpha,
            tau=self.tau if tau is None else tau,
            lr=self.lr,
            steps=self.steps,
            batch_size=self.batch_size,
            clip_norm=self.clip_norm,
            seed=self.seed,
            average_kl=self.average_kl,
        )

    def synth_config(self) -> SynthConfig:
        return SynthConfig(
            num_conversations=self.synth_conversations,
            turns_per_conversation=self.synth_turns,
            doc_length=self.synth_doc_length,
            vocab_size=self.synth_vocab_size,
            min_rationale_len=self.synth_min_rationale,
            max_rationale_len=self.synth_max_rationale,
            depends_fraction=self.synth_depends_fraction,
            domains=self.synth_domains,
            seed=self.seed,
        )

    def noise_config(self, wer: float | None = None) -> NoiseConfig:
        return NoiseConfig(
            wer=self.wer if wer is None else wer,
            sub_weight=self.sub_weight,
            del_weight=self.del_weight,
            ins_weight=self.ins_weight,
            seed=self.seed,
        )


_FIELD_TYPES = {f.name: f.type for f in dataclasses.fields(RunConfig)}


def _coerce(key: str, raw: str):
    """Parse one config value from its textual form."""
    if key not in _FIELD_TYPES:
        raise ConfigError(f"unknown config key: {key!r}")
    text = raw.strip()
    kind = _FIELD_TYPES[key]
    if key == "synth_domains":
        domains = tuple(part.strip() for part in text.split(",") if part.strip())
        if not domains:
            raise ConfigError("synth_domains needs at least one name")
        return domains
    if kind in ("str | None", "str"):
        return text or None
    if kind == "bool":
        if text.lower() not in _BOOL_WORDS:
            raise ConfigError(f"config key {key!r} expects a boolean, got {raw!r}")
        return _BOOL_WORDS[text.lower()]
    try:
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
    except ValueError as exc:
        raise ConfigError(f"config key {key!r}: {exc}") from None
    raise ConfigError(f"config key {key!r} has unsupported type {kind}")


def parse_config_file(path: str | os.PathLike) -> dict:
    """Read a key = value config file; # starts a comment, blank lines skip."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    values: dict = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ConfigError(f"{path}:{lineno}: expected key = value, got {line!r}")
        key, _, raw = stripped.partition("=")
        key = key.strip()
        values[key] = _coerce(key, raw)
    return values


def resolve_config(args: argparse.Namespace) -> RunConfig:
    """Layer defaults, then the config file, then CLI flag overrides."""
    values: dict = {}
    if getattr(args, "config", None):
        values.update(parse_config_file(args.config))
    for flag in ("seed", "out", "teacher", "view", "fusion", "alpha", "tau", "wer"):
        flag_value = getattr(args, flag, None)
        if flag_value is not None:
            values[flag] = flag_value
    if getattr(args, "plot", False):
        values["plot"] = True
    if getattr(args, "parallel", False):
        values["parallel"] = True
    cfg = RunConfig(**values)
    _validate(cfg)
    return cfg


def _validate(cfg: RunConfig) -> None:
    if cfg.view not in VIEWS:
        raise ConfigError(f"view must be one of {VIEWS}, got {cfg.view!r}")
    if cfg.fusion not in MECHANISMS:
        raise ConfigError(f"fusion must be one of {MECHANISMS}, got {cfg.fusion!r}")
    if cfg.mode not in ("teacher", "student"):
        raise ConfigError(f"mode must be 'teacher' or 'student', got {cfg.mode!r}")
    if not 0.0 < cfg.test_fraction < 1.0:
        raise ConfigError(f"test_fraction must lie in (0, 1), got {cfg.test_fraction}")
    if cfg.seed < 0:
        raise ConfigError(f"seed must be non-negative, got {cfg.seed}")


def config_hash(cfg: RunConfig) -> str:
    """Digest of the settings that determine artifact content.

    Output location and presentation switches are excluded, so the same
    experiment hashed into two directories gets the same id.
    """
    data = cfg.to_dict()
    for key in ("out", "plot", "parallel"):
        data.pop(key)
    payload = json.dumps(data, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]


def _out_dir(cfg: RunConfig) -> Path:
    out = Path(cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def write_manifest(cfg: RunConfig, command: str, out: Path, outputs: list[str]) -> Path:
    """Record the resolved config and output digests; the timestamp lives
    only here so the other artifacts stay byte-identical across re-runs."""
    digests = {}
    for name in sorted(outputs):
        digests[name] = hashlib.sha256((out / name).read_bytes()).hexdigest()[:16]
    manifest = {
        "command": command,
        "config": cfg.to_dict(),
        "config_hash": config_hash(cfg),
        "created": datetime.now(timezone.utc).isoformat(),
        "outputs": digests,
    }
    path = out / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    """One header row, one row per arm, numeric cells with 4 decimals."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([f"{v:.4f}" if isinstance(v, float) else v for v in row])
    path.write_text(buf.getvalue(), encoding="utf-8")


def _load_or_synth(cfg: RunConfig) -> Corpus:
    if cfg.corpus is not None:
        return load_corpus(cfg.corpus)
    return synth(cfg.synth_config())


def _prepare_corpora(cfg: RunConfig, wer: float | None = None):
    """Source -> channel -> filter -> split; shared by prepare and ablate."""
    base = _load_or_synth(cfg)
    noisy = apply_channel(base, cfg.noise_config(wer))
    filtered, removals = filter_corpus(noisy, threshold=cfg.filter_threshold)
    train_c, test_c = split_corpus(filtered, cfg.test_fraction, seed=cfg.seed)
    return noisy, filtered, train_c, test_c, removals


def _require_corpus(cfg: RunConfig, command: str) -> Corpus:
    if cfg.corpus is None:
        raise ConfigError(f"{command} needs a corpus path (config key 'corpus')")
    return load_corpus(cfg.corpus)


def cmd_prepare(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    noisy, filtered, train_c, test_c, removals = _prepare_corpora(cfg)
    save_corpus(noisy, out / "corpus_full.json")
    save_corpus(train_c, out / "corpus_train.json")
    save_corpus(test_c, out / "corpus_test.json")
    removal_payload = {
        "removed": [r.to_dict() for r in removals],
        "counts": {
            "span_missing": sum(1 for r in removals if r.reason == "span_missing"),
            "dependency_cascade": sum(1 for r in removals if r.reason == "dependency_cascade"),
        },
    }
    (out / "removals.json").write_text(
        json.dumps(removal_payload, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )
    stats_rows = corpus_stats(filtered)
    write_csv(
        out / "stats.csv",
        ["domain", "passages", "qa_pairs", "mean_passage_len", "mean_turns"],
        [
            [r["domain"], r["passages"], r["qa_pairs"], r["mean_passage_len"], r["mean_turns"]]
            for r in stats_rows
        ],
    )
    outputs = ["corpus_full.json", "corpus_train.json", "corpus_test.json", "removals.json", "stats.csv"]
    if cfg.plot:
        from . import plots

        plots.save_domain_bars(stats_rows, out / "stats.png")
        outputs.append("stats.png")
    write_manifest(cfg, "prepare", out, outputs)
    kept = train_c.num_turns() + test_c.num_turns()
    print(
        f"prepare: kept {kept} turns "
        f"(train {train_c.num_turns()}, test {test_c.num_turns()}), "
        f"removed {len(removals)} "
        f"({removal_payload['counts']['span_missing']} span_missing, "
        f"{removal_payload['counts']['dependency_cascade']} dependency_cascade)"
    )
    return 0


def _train_teacher(cfg: RunConfig, corpus: Corpus, fusion: str | None = None) -> TrainedModel:
    return train(corpus, "clean", cfg.kd_config(), cfg.model_config(fusion))


def _train_student(
    cfg: RunConfig,
    corpus: Corpus,
    teacher: TrainedModel | None,
    fusion: str | None = None,
    alpha: float | None = None,
    tau: float | None = None,
) -> TrainedModel:
    return train(corpus, "asr", cfg.kd_config(alpha, tau), cfg.model_config(fusion), teacher=teacher)


def cmd_train(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    corpus = _require_corpus(cfg, "train")
    if cfg.mode == "student" and cfg.teacher is None:
        raise ConfigError("student mode needs --teacher pointing at a teacher checkpoint")
    if cfg.teacher is not None:
        teacher = load_checkpoint(cfg.teacher)
        model = _train_student(cfg, corpus, teacher)
        name = "student.json"
    else:
        model = train(corpus, cfg.view, cfg.kd_config(), cfg.model_config())
        name = "teacher.json"
    digest = save_checkpoint(model, out / name)
    outputs = [name]
    if cfg.plot:
        from . import plots

        plots.save_loss_curve(model.loss_curve, out / "loss_curve.png", title=f"{model.role} loss")
        outputs.append("loss_curve.png")
    write_manifest(cfg, "train", out, outputs)
    print(
        f"train: {model.role} checkpoint {digest} -> {out / name} "
        f"(loss {model.initial_loss:.4f} -> {model.final_loss:.4f})"
    )
    return 0


def cmd_eval(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    corpus = _require_corpus(cfg, "eval")
    ckpt_path = cfg.checkpoint
    if ckpt_path is None:
        for candidate in (out / "student.json", out / "teacher.json"):
            if candidate.exists():
                ckpt_path = str(candidate)
                break
    if ckpt_path is None:
        raise ConfigError("eval needs a checkpoint (config key 'checkpoint')")
    model = load_checkpoint(ckpt_path)
    predictions = infer(model, corpus, cfg.view)
    report = evaluate(predictions, corpus, cfg.view)
    report.metadata = {
        "model_id": checkpoint_id(model),
        "role": model.role,
        "view": cfg.view,
        "corpus": Path(cfg.corpus).name,
    }
    (out / "eval_report.json").write_text(report.to_json() + "\n", encoding="utf-8")
    row = report.csv_row()
    write_csv(out / "eval_summary.csv", list(row.keys()), [list(row.values())])
    outputs = ["eval_report.json", "eval_summary.csv"]
    if cfg.plot:
        from . import plots

        plots.save_metric_bars(
            report.aggregates, out / "eval_metrics.png", title=f"{model.role} on {cfg.view}"
        )
        outputs.append("eval_metrics.png")
    write_manifest(cfg, "eval", out, outputs)
    agg = report.aggregates
    print(
        f"eval: {len(report.per_example)} examples  "
        f"em {agg['em']:.4f}  f1 {agg['f1']:.4f}  aos {agg['aos']:.4f}  "
        f"frame_f1 {agg['frame_f1']:.4f}"
    )
    return 0


def _eval_aggregates(model: TrainedModel, corpus: Corpus, view: str) -> dict[str, float]:
    predictions = infer(model, corpus, view)
    return evaluate(predictions, corpus, view).aggregates


def _temperature_arm(payload: dict) -> list:
    cfg = RunConfig(**payload["config"])
    tau = payload["tau"]
    train_c = corpus_from_dict(payload["train"])
    test_c = corpus_from_dict(payload["test"])
    teacher = load_checkpoint(payload["teacher_path"])
    student = _train_student(cfg, train_c, teacher, tau=tau)
    agg = _eval_aggregates(student, test_c, "asr")
    return [tau, agg["em"], agg["f1"]]


def _fusion_arm(payload: dict) -> list:
    cfg = RunConfig(**payload["config"])
    fusion = payload["fusion"]
    train_c = corpus_from_dict(payload["train"])
    test_c = corpus_from_dict(payload["test"])
    teacher = _train_teacher(cfg, train_c, fusion=fusion)
    student = _train_student(cfg, train_c, teacher, fusion=fusion)
    agg = _eval_aggregates(student, test_c, "asr")
    return [fusion, agg["em"], agg["f1"]]


def _wer_arm(payload: dict) -> list[list]:
    cfg = RunConfig(**payload["config"])
    wer = payload["wer"]
    _, _, train_c, test_c, _ = _prepare_corpora(cfg, wer=wer)
    teacher = _train_teacher(cfg, train_c)
    distilled = _train_student(cfg, train_c, teacher)
    plain = _train_student(cfg, train_c, teacher=None)
    rows = []
    for label, model in (("yes", distilled), ("no", plain)):
        agg = _eval_aggregates(model, test_c, "asr")
        rows.append([wer, label, agg["em"], agg["f1"], agg["frame_f1"]])
    return rows


def _run_arms(worker, payloads: list[dict], parallel: bool) -> list:
    """Run sweep arms in order; results keep arm order either way."""
    if not parallel:
        return [worker(p) for p in payloads]
    with concurrent.futures.ProcessPoolExecutor(max_workers=min(4, len(payloads))) as pool:
        return list(pool.map(worker, payloads))


def cmd_ablate(cfg: RunConfig, kind: str) -> int:
    if kind not in ABLATION_KINDS:
        raise ConfigError(f"unknown ablation kind {kind!r}; expected one of {ABLATION_KINDS}")
    out = _out_dir(cfg)
    csv_name = f"ablation_{kind}.csv"
    outputs = [csv_name]
    if kind in ("temperature", "fusion"):
        _, _, train_c, test_c, _ = _prepare_corpora(cfg)
        shared = {
            "config": cfg.to_dict(),
            "train": corpus_to_dict(train_c),
            "test": corpus_to_dict(test_c),
        }
        if kind == "temperature":
            # one clean-view teacher serves every temperature arm
            teacher = _train_teacher(cfg, train_c)
            save_checkpoint(teacher, out / "teacher.json")
            outputs.append("teacher.json")
            payloads = [dict(shared, tau=tau, teacher_path=str(out / "teacher.json")) for tau in TEMPERATURE_GRID]
            rows = _run_arms(_temperature_arm, payloads, cfg.parallel)
            write_csv(out / csv_name, ["tau", "em", "f1"], rows)
            if cfg.plot:
                from . import plots

                dict_rows = [{"tau": r[0], "em": r[1], "f1": r[2]} for r in rows]
                plots.save_sweep_lines(
                    dict_rows, "tau", ["em", "f1"], out / f"ablation_{kind}.png",
                    title="distillation temperature sweep",
                )
                outputs.append(f"ablation_{kind}.png")
        else:
            payloads = [dict(shared, fusion=m) for m in MECHANISMS]
            rows = _run_arms(_fusion_arm, payloads, cfg.parallel)
            write_csv(out / csv_name, ["fusion", "em", "f1"], rows)
            if cfg.plot:
                from . import plots

                dict_rows = [{"fusion": r[0], "em": r[1], "f1": r[2]} for r in rows]
                plots.save_arm_bars(
                    dict_rows, "fusion", ["em", "f1"], out / f"ablation_{kind}.png",
                    title="fusion mechanism sweep",
                )
                outputs.append(f"ablation_{kind}.png")
    else:
        payloads = [dict(config=cfg.to_dict(), wer=w) for w in WER_GRID]
        nested = _run_arms(_wer_arm, payloads, cfg.parallel)
        rows = [row for arm in nested for row in arm]
        write_csv(out / csv_name, ["wer", "kd", "em", "f1", "frame_f1"], rows)
        if cfg.plot:
            from . import plots

            dict_rows = [
                {"wer": r[0], "kd": r[1], "em": r[2], "f1": r[3], "frame_f1": r[4]} for r in rows
            ]
            plots.save_sweep_lines(
                dict_rows, "wer", ["frame_f1"], out / f"ablation_{kind}.png",
                title="noise level sweep", group_key="kd",
            )
            outputs.append(f"ablation_{kind}.png")
    write_manifest(cfg, f"ablate:{kind}", out, outputs)
    print(f"ablate {kind}: wrote {out / csv_name}")
    return 0


def cmd_stats(cfg: RunConfig) -> int:
    out = _out_dir(cfg)
    corpus = _require_corpus(cfg, "stats")
    rows = corpus_stats(corpus)
    write_csv(
        out / "stats.csv",
        ["domain", "passages", "qa_pairs", "mean_passage_len", "mean_turns"],
        [[r["domain"], r["passages"], r["qa_pairs"], r["mean_passage_len"], r["mean_turns"]] for r in rows],
    )
    outputs = ["stats.csv"]
    if cfg.plot:
        from . import plots

        plots.save_domain_bars(rows, out / "stats.png")
        outputs.append("stats.png")
    write_manifest(cfg, "stats", out, outputs)
    widths = (16, 9, 9, 17, 11)
    header = ("domain", "passages", "qa_pairs", "mean_passage_len", "mean_turns")
    print("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for r in rows:
        cells = (
            r["domain"],
            str(r["passages"]),
            str(r["qa_pairs"]),
            f"{r['mean_passage_len']:.4f}",
            f"{r['mean_turns']:.4f}",
        )
        print("  ".join(c.ljust(w) for c, w in zip(cells, widths)))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="fusionqa",
        description="Spoken conversational QA lab: corpus synthesis, fusion models, distillation.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser) -> None:
        p.add_argument("--config", help="key = value config file")
        p.add_argument("--seed", type=int, help="master RNG seed")
        p.add_argument("--out", help="output directory (all artifacts land here)")
        p.add_argument("--teacher", help="teacher checkpoint path (student training)")
        p.add_argument("--view", choices=list(VIEWS), help="document view to train/evaluate on")
        p.add_argument("--fusion", choices=list(MECHANISMS), help="cross-modal fusion mechanism")
        p.add_argument("--alpha", type=float, help="distillation mixing weight")
        p.add_argument("--tau", type=float, help="distillation temperature")
        p.add_argument("--wer", type=float, help="target word error rate for the channel")
        p.add_argument("--plot", action="store_true", help="also render PNG figures")

    p_prepare = sub.add_parser("prepare", help="build train/test corpora through the noisy channel")
    add_common(p_prepare)
    p_train = sub.add_parser("train", help="train a teacher or distilled student")
    add_common(p_train)
    p_eval = sub.add_parser("eval", help="evaluate a checkpoint on a corpus")
    add_common(p_eval)
    p_ablate = sub.add_parser("ablate", help="run an ablation sweep")
    p_ablate.add_argument("kind", help="temperature | fusion | wer")
    p_ablate.add_argument("--parallel", action="store_true", help="run sweep arms in worker processes")
    add_common(p_ablate)
    p_stats = sub.add_parser("stats", help="per-domain corpus composition")
    add_common(p_stats)
    return parser


def run(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=os.environ.get("FUSIONQA_LOG_LEVEL", "WARNING").upper(),
        stream=sys.stderr,
        format="%(levelname)s %(name)s: %(message)s",
    )
    cfg = resolve_config(args)
    log.info("command=%s out=%s seed=%d hash=%s", args.command, cfg.out, cfg.seed, config_hash(cfg))
    if args.command == "prepare":
        return cmd_prepare(cfg)
    if args.command == "train":
        return cmd_train(cfg)
    if args.command == "eval":
        return cmd_eval(cfg)
    if args.command == "ablate":
        return cmd_ablate(cfg, args.kind)
    if args.command == "stats":
        return cmd_stats(cfg)
    raise ConfigError(f"unknown command {args.command!r}")


def main(argv: list[str] | None = None) -> int:
    try:
        return run(argv)
    except ConfigError as exc:
        print(f"fusionqa: usage error: {exc}", file=sys.stderr)
        return 2
    except FusionQAError as exc:
        print(f"fusionqa: error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"fusionqa: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
