"""Experiment configuration: TOML file plus command-line overrides.

Sections: [corpus], [run], [train], [metrics], [edeq].  Every value has a
default except the corpus path; CLI flags override file keys.  The config
hash recorded in artifact manifests is a SHA-256 over the canonical JSON
rendering, so identical manifests imply identical configurations.
"""

from __future__ import annotations

import hashlib
import json
import sys
from dataclasses import asdict, dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .edeq import RUN_THRESHOLDS, EdeqConfig
from .errors import ConfigurationError, ValidationError
from .metrics import MetricConfig
from .model import TrainConfig

TASK1_RUNS = (0, 1, 2)


@dataclass
class ExperimentConfig:
    corpus_path: Path
    corpus_format: str = "jsonl"          # jsonl | xml
    golden_path: Path | None = None       # labels for xml corpora / gold answer sheets
    task: int = 1
    run_id: int = 0
    out_dir: Path = Path("out")
    seed: int = 0
    provider: str = "test_hash"           # test_hash | file_cache:<path> | http://<url>
    provider_token: str | None = None
    encoder_dim: int = 1024
    truncation: int = 512
    emotion_provider: str = "zeros"       # zeros | file:<path> | http://<url>
    annotator: str = "builtin"
    last_n: int = 50
    questionnaire_path: Path | None = None
    gold_answers_path: Path | None = None
    train: TrainConfig = field(default_factory=TrainConfig)
    metrics: MetricConfig = field(default_factory=MetricConfig)
    edeq: EdeqConfig = field(default_factory=EdeqConfig)

    def validate(self) -> None:
        if not Path(self.corpus_path).exists():
            raise ValidationError(f"corpus path does not exist: {self.corpus_path}")
        if self.corpus_format not in ("jsonl", "xml"):
            raise ConfigurationError(f"corpus format must be jsonl or xml, got {self.corpus_format!r}")
        if self.golden_path is not None and not Path(self.golden_path).exists():
            raise ValidationError(f"golden path does not exist: {self.golden_path}")
        if self.questionnaire_path is not None and not Path(self.questionnaire_path).exists():
            raise ValidationError(f"questionnaire path does not exist: {self.questionnaire_path}")
        if self.gold_answers_path is not None and not Path(self.gold_answers_path).exists():
            raise ValidationError(f"gold answers path does not exist: {self.gold_answers_path}")
        if self.task == 1 and self.run_id not in TASK1_RUNS:
            raise ConfigurationError(f"task 1 run must be one of {TASK1_RUNS}, got {self.run_id}")
        if self.task == 3 and self.run_id not in RUN_THRESHOLDS:
            raise ConfigurationError(
                f"task 3 run must be one of {sorted(RUN_THRESHOLDS)}, got {self.run_id}"
            )
        if self.task not in (1, 3):
            raise ConfigurationError(f"task must be 1 or 3, got {self.task}")
        if self.last_n < 1:
            raise ConfigurationError("last_n must be positive")

    @property
    def preprocess(self) -> str:
        """Run 1 strips URLs before featurizing; other runs leave text as is."""
        return "strip_urls" if self.task == 1 and self.run_id == 1 else "none"

    @property
    def out_dim(self) -> int:
        return 2 if self.run_id == 2 else 1

    def edeq_for_run(self) -> EdeqConfig:
        return EdeqConfig(
            day_threshold=RUN_THRESHOLDS[self.run_id],
            window_days=self.edeq.window_days,
            inclusive_span=self.edeq.inclusive_span,
        )

    def to_canonical_dict(self) -> dict:
        payload = asdict(self)
        # The output directory is where artifacts land, not what they are;
        # keep it out of the hash so reruns elsewhere compare equal.
        payload.pop("out_dir")
        for key in ("corpus_path", "golden_path", "questionnaire_path", "gold_answers_path"):
            if payload[key] is not None:
                payload[key] = str(payload[key])
        return payload

    def config_hash(self) -> str:
        canonical = json.dumps(self.to_canonical_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _build_section(data: dict, section: str) -> dict:
    value = data.get(section, {})
    if not isinstance(value, dict):
        raise ConfigurationError(f"[{section}] must be a table")
    return value


def load_config(path=None, overrides: dict | None = None) -> ExperimentConfig:
    """Read a TOML config file and apply flat key overrides on top."""
    data: dict = {}
    if path is not None:
        config_path = Path(path)
        if not config_path.is_file():
            raise ValidationError(f"config file not found: {config_path}")
        with config_path.open("rb") as handle:
            try:
                data = tomllib.load(handle)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigurationError(f"invalid TOML in {config_path}: {exc}") from exc

    corpus = _build_section(data, "corpus")
    run = _build_section(data, "run")
    train = _build_section(data, "train")
    metrics = _build_section(data, "metrics")
    edeq = _build_section(data, "edeq")
    overrides = dict(overrides or {})

    def pick(section: dict, key: str, default):
        if key in overrides and overrides[key] is not None:
            return overrides.pop(key)
        return section.get(key, default)

    corpus_path = pick(corpus, "path", None)
    if corpus_path is None:
        raise ValidationError("a corpus path is required ([corpus].path or --corpus)")

    seed = int(pick(run, "seed", 0))
    train_cfg = TrainConfig(
        learning_rate=float(pick(train, "learning_rate", 5e-5)),
        batch_size=int(pick(train, "batch_size", 8)),
        epochs=int(pick(train, "epochs", 1)),
        weight_decay=float(pick(train, "weight_decay", 0.01)),
        folds=int(pick(train, "folds", 5)),
        seed=int(pick(train, "train_seed", seed)),
    )
    metric_cfg = MetricConfig(
        erde_o=tuple(int(o) for o in pick(metrics, "erde_o", (5, 50))),
        c_fp=pick(metrics, "c_fp", None),
        speed_p=float(pick(metrics, "speed_p", 0.0078)),
        latency_aggregate=pick(metrics, "latency_aggregate", "median"),
    )
    edeq_cfg = EdeqConfig(
        day_threshold=float(pick(edeq, "day_threshold", RUN_THRESHOLDS[1])),
        window_days=int(pick(edeq, "window_days", 28)),
        inclusive_span=bool(pick(edeq, "inclusive_span", False)),
    )

    golden = pick(corpus, "golden", None)
    questionnaire = pick(edeq, "questionnaire", None)
    gold_answers = pick(edeq, "gold_answers", None)
    cfg = ExperimentConfig(
        corpus_path=Path(corpus_path),
        corpus_format=pick(corpus, "format", "jsonl"),
        golden_path=Path(golden) if golden else None,
        task=int(pick(run, "task", 1)),
        run_id=int(pick(run, "id", 0)),
        out_dir=Path(pick(run, "out_dir", "out")),
        seed=seed,
        provider=pick(run, "provider", "test_hash"),
        provider_token=pick(run, "provider_token", None),
        encoder_dim=int(pick(run, "encoder_dim", 1024)),
        truncation=int(pick(run, "truncation", 512)),
        emotion_provider=pick(run, "emotion_provider", "zeros"),
        annotator=pick(run, "annotator", "builtin"),
        last_n=int(pick(run, "last_n", 50)),
        questionnaire_path=Path(questionnaire) if questionnaire else None,
        gold_answers_path=Path(gold_answers) if gold_answers else None,
        train=train_cfg,
        metrics=metric_cfg,
        edeq=edeq_cfg,
    )
    if overrides:
        raise ConfigurationError(f"unknown override keys: {sorted(overrides)}")
    cfg.validate()
    return cfg
