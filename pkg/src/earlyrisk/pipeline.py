"""End-to-end experiment orchestration shared by the CLI subcommands.

Every stage is seeded and ordered by subject_id, so a fixed configuration
produces byte-identical artifacts.  Artifact directories carry a manifest
with the config hash, seed and component versions.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path
from typing import Mapping, Sequence

import numpy as np

from . import __version__
from .annotate import annotate
from .config import ExperimentConfig
from .corpus import (
    LABEL_POSITIVE,
    LABEL_UNKNOWN,
    UserHistory,
    build_history,
    ingest_erisk_xml,
    ingest_jsonl,
    select_last_n,
)
from .edeq import fill_questionnaire, load_questionnaire, read_answers, score_sheet, write_answers
from .embed import get_provider
from .errors import ValidationError
from .features import (
    EmotionScores,
    FeatureVector,
    FileEmotionProvider,
    HttpEmotionProvider,
    Scaler,
    apply_scaler,
    assemble,
    concat_window,
    fit_scaler,
    save_scaler,
    volumetry,
    write_feature_csv,
)
from .lexdiv import LexDivConfig, LexDivScores, lexdiv
from .metrics import decision_metrics, questionnaire_metrics, ranking_metrics
from .model import (
    DecisionPolicy,
    POLICY_REGRESSION,
    POLICY_SOFTMAX,
    cross_validate,
    decide,
    save_head,
    train_head,
)
from .readability import ReadabilityScores, bundled_registry, readability
from .stream import LocalStreamClient, StreamEngine, run_client

logger = logging.getLogger(__name__)


def ingest(cfg: ExperimentConfig) -> list[UserHistory]:
    if cfg.corpus_format == "xml":
        return ingest_erisk_xml(cfg.corpus_path, golden_truth=cfg.golden_path)
    return ingest_jsonl(cfg.corpus_path)


def emotion_provider_from(spec: str):
    if spec == "zeros":
        from .features import EmotionProvider

        return EmotionProvider()
    if spec.startswith("file:"):
        return FileEmotionProvider(spec.split(":", 1)[1])
    if spec.startswith("http"):
        return HttpEmotionProvider(spec)
    raise ValidationError(f"unknown emotion provider {spec!r}")


def embedding_provider_from(cfg: ExperimentConfig):
    return get_provider(
        cfg.provider,
        encoder_dim=cfg.encoder_dim,
        truncation_limit=cfg.truncation,
        token=cfg.provider_token,
    )


def featurize_text(doc_text: str, annotator: str, emotions: EmotionScores,
                   lex_cfg: LexDivConfig | None = None) -> FeatureVector:
    """Annotate and assemble the 79-value vector for one document.

    Documents without a single word token get zeroed lexdiv/readability
    parts, flagged by name, instead of failing the whole run.
    """
    doc = annotate(doc_text, annotator)
    vol = volumetry(doc)
    if doc.n_words == 0 or doc.n_sentences == 0:
        zeros_lex = LexDivScores(*([0.0] * len(LexDivScores.FIELDS)))
        zeros_read = ReadabilityScores(*([0.0] * len(ReadabilityScores.FIELDS)))
        vector = assemble(vol, zeros_lex, zeros_read, emotions)
        flagged = tuple(sorted(set(vector.flagged) | set(LexDivScores.FIELDS) | set(ReadabilityScores.FIELDS)))
        return FeatureVector(values=vector.values, flagged=flagged)
    tokens = [t.lemma for t in doc.word_tokens]
    return assemble(vol, lexdiv(tokens, lex_cfg), readability(doc, bundled_registry()), emotions)


def build_documents(histories: Sequence[UserHistory], cfg: ExperimentConfig) -> dict[str, str]:
    """Per-subject document: last-n window, run preprocessing, concatenation."""
    return {
        h.subject_id: concat_window(select_last_n(h, cfg.last_n), cfg.preprocess)
        for h in histories
    }


def round_doc_id(subject_id: str, round_index: int) -> str:
    """Cache key for the window available after answering a given round."""
    return f"{subject_id}@{round_index}"


def build_round_documents(histories: Sequence[UserHistory], cfg: ExperimentConfig) -> dict[str, str]:
    """Prefix-window documents for every (subject, round), matching what the
    stream simulation sees; keys follow :func:`round_doc_id`.

    A static embedding cache exported from these keys can serve the whole
    simulation.
    """
    documents = {}
    for history in histories:
        for post in history.posts:
            prefix = build_history(
                history.subject_id, history.label,
                [(p.date, p.title, p.text) for p in history.posts[: post.round_index + 1]],
            )
            window = select_last_n(prefix, cfg.last_n)
            documents[round_doc_id(history.subject_id, post.round_index)] = concat_window(
                window, cfg.preprocess
            )
    return documents


def featurize_corpus(histories: Sequence[UserHistory], cfg: ExperimentConfig):
    docs = build_documents(histories, cfg)
    emotions = emotion_provider_from(cfg.emotion_provider)
    rows = []
    for sid in sorted(docs):
        scores = emotions.emotions(docs[sid], doc_id=sid)
        rows.append((sid, featurize_text(docs[sid], cfg.annotator, scores)))
    return docs, rows


def model_inputs(docs: Mapping[str, str], scaled: Mapping[str, FeatureVector],
                 provider) -> dict[str, np.ndarray]:
    """Embedding concatenated with the scaled features, per subject."""
    inputs = {}
    for sid in sorted(docs):
        embedded = provider.embed(docs[sid], doc_id=sid)
        inputs[sid] = np.concatenate([np.asarray(embedded.vector, dtype=np.float64),
                                      np.asarray(scaled[sid].values, dtype=np.float64)])
    return inputs


class ModelStrategy:
    """Round strategy: accumulate writings, featurize the trailing window,
    embed, and decide; once alerted a subject stays alerted."""

    def __init__(self, head, policy: DecisionPolicy, scaler: Scaler,
                 cfg: ExperimentConfig, provider, emotions):
        self.head = head
        self.policy = policy
        self.scaler = scaler
        self.cfg = cfg
        self.provider = provider
        self.emotions = emotions
        self._seen: dict[str, list] = {}
        self._alerted: dict[str, float] = {}

    def __call__(self, writings: list[dict]) -> list[dict]:
        from .corpus import parse_timestamp

        decisions = []
        for writing in writings:
            sid = writing["subject_id"]
            self._seen.setdefault(sid, []).append(
                (parse_timestamp(writing["date"]), writing["title"], writing["text"])
            )
            if sid in self._alerted:
                decisions.append({"subject_id": sid, "decision": 1, "score": self._alerted[sid]})
                continue
            history = build_history(sid, LABEL_UNKNOWN, self._seen[sid])
            window = select_last_n(history, self.cfg.last_n)
            doc_text = concat_window(window, self.cfg.preprocess)
            doc_id = round_doc_id(sid, writing["round"])
            scores = self.emotions.emotions(doc_text, doc_id=doc_id)
            vector = featurize_text(doc_text, self.cfg.annotator, scores)
            scaled = apply_scaler(self.scaler, vector)
            embedded = self.provider.embed(doc_text, doc_id=doc_id)
            x = np.concatenate([np.asarray(embedded.vector, dtype=np.float64),
                                np.asarray(scaled.values, dtype=np.float64)])
            decision = decide(self.head, x, self.policy)
            if decision.label == 1:
                self._alerted[sid] = decision.score
            decisions.append({"subject_id": sid, "decision": decision.label, "score": decision.score})
        return decisions


def write_manifest(out_dir: Path, cfg: ExperimentConfig, artifacts: Mapping[str, str]) -> Path:
    manifest = {
        "config_hash": cfg.config_hash(),
        "seed": cfg.seed,
        "versions": {
            "earlyrisk": __version__,
            "numpy": np.__version__,
            "python": ".".join(str(v) for v in sys.version_info[:3]),
        },
        "artifacts": dict(sorted(artifacts.items())),
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    return path


def labels_for(histories: Sequence[UserHistory]) -> dict[str, int]:
    return {
        h.subject_id: 1 if h.label == LABEL_POSITIVE else 0
        for h in histories
        if h.label != LABEL_UNKNOWN
    }


def run_task1(cfg: ExperimentConfig) -> dict[str, Path]:
    """Featurize, train (with CV report), simulate the stream, evaluate."""
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    histories = ingest(cfg)
    gold = labels_for(histories)
    labeled = [h for h in histories if h.subject_id in gold and h.posts]
    if len(set(gold.values())) < 2:
        raise ValidationError("task 1 needs labeled subjects of both classes")
    skipped = len(histories) - len(labeled)
    logger.info("ingest: %d subjects (%d unlabeled/empty skipped), seed %d",
                len(histories), skipped, cfg.seed)

    docs, feature_rows = featurize_corpus(labeled, cfg)
    logger.info("featurize: %d documents, preprocess=%s", len(docs), cfg.preprocess)
    features_path = out_dir / "features.csv"
    write_feature_csv(features_path, feature_rows)

    scaler = fit_scaler([vector for _, vector in feature_rows])
    scaler_path = out_dir / "scaler.json"
    save_scaler(scaler, scaler_path)
    scaled = {sid: apply_scaler(scaler, vector) for sid, vector in feature_rows}

    provider = embedding_provider_from(cfg)
    inputs = model_inputs(docs, scaled, provider)
    subject_ids = sorted(inputs)
    x = np.stack([inputs[sid] for sid in subject_ids])
    y = np.array([gold[sid] for sid in subject_ids])

    logger.info("embed: provider=%s width=%d", provider.provider_id, cfg.encoder_dim)
    folds = cross_validate((x, y), cfg.train, cfg.out_dim)
    logger.info("train: %d-fold CV mean F1 %.3f, final head out_dim=%d",
                cfg.train.folds, sum(f.f1 for f in folds) / len(folds), cfg.out_dim)
    head = train_head((x, y), cfg.train, cfg.out_dim)
    model_path = out_dir / "model.json"
    save_head(head, model_path, seed=cfg.train.seed, config={
        "learning_rate": cfg.train.learning_rate,
        "batch_size": cfg.train.batch_size,
        "epochs": cfg.train.epochs,
        "weight_decay": cfg.train.weight_decay,
        "folds": cfg.train.folds,
        "run": cfg.run_id,
    })

    policy = DecisionPolicy(
        kind=POLICY_SOFTMAX if cfg.out_dim == 2 else POLICY_REGRESSION,
        preprocess=cfg.preprocess,
    )
    engine = StreamEngine(labeled, tokens=("local",))
    emotions = emotion_provider_from(cfg.emotion_provider)
    strategy = ModelStrategy(head, policy, scaler, cfg, provider, emotions)
    log = run_client(LocalStreamClient(engine), strategy)
    logger.info("simulate: %d subjects over the round protocol", len(log.subjects()))
    decisions_path = out_dir / "decisions.csv"
    log.to_csv(decisions_path)

    results = decision_metrics(log, gold, cfg.metrics)
    results["cv_folds"] = [
        {"fold": f.fold, "precision": f.precision, "recall": f.recall, "f1": f.f1}
        for f in folds
    ]
    results["cv_mean_f1"] = sum(f.f1 for f in folds) / len(folds)
    results.update(ranking_metrics(log.first_scores(), gold))
    logger.info("evaluate: F1 %.3f, F_latency %.3f", results["f1"], results["f_latency"])
    metrics_path = out_dir / "metrics.json"
    metrics_path.write_text(json.dumps(results, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    artifacts = {
        "features": features_path.name,
        "scaler": scaler_path.name,
        "model": model_path.name,
        "decisions": decisions_path.name,
        "metrics": metrics_path.name,
    }
    write_manifest(out_dir, cfg, artifacts)
    return {name: out_dir / filename for name, filename in artifacts.items()} | {
        "manifest": out_dir / "manifest.json"
    }


def run_task3(cfg: ExperimentConfig) -> dict[str, Path]:
    """Fill the questionnaire per subject, score it, optionally evaluate."""
    cfg.validate()
    out_dir = Path(cfg.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    histories = ingest(cfg)
    questionnaire = load_questionnaire(cfg.questionnaire_path)
    edeq_cfg = cfg.edeq_for_run()
    provider = embedding_provider_from(cfg)
    logger.info("ingest: %d subjects; run %d threshold %.3f window %dd",
                len(histories), cfg.run_id, edeq_cfg.day_threshold, edeq_cfg.window_days)

    sheets = {
        h.subject_id: fill_questionnaire(h, questionnaire, edeq_cfg, provider)
        for h in histories
    }
    answers_path = out_dir / "answers.txt"
    write_answers(answers_path, sheets, questionnaire)

    scores = {sid: score_sheet(sheet, questionnaire) for sid, sheet in sorted(sheets.items())}
    scores_path = out_dir / "scores.json"
    scores_path.write_text(json.dumps(scores, sort_keys=True, indent=2) + "\n", encoding="utf-8")

    artifacts = {"answers": answers_path.name, "scores": scores_path.name}
    if cfg.gold_answers_path is not None:
        gold_sheets = read_answers(cfg.gold_answers_path, questionnaire)
        results = questionnaire_metrics(sheets, gold_sheets, questionnaire)
        metrics_path = out_dir / "metrics.json"
        metrics_path.write_text(json.dumps(results, sort_keys=True, indent=2) + "\n", encoding="utf-8")
        artifacts["metrics"] = metrics_path.name
        logger.info("evaluate: MZOE %.3f MAE %.3f", results["mzoe"], results["mae"])
    else:
        logger.info("no gold answer sheets provided; metrics step skipped")

    write_manifest(out_dir, cfg, artifacts)
    return {name: out_dir / filename for name, filename in artifacts.items()} | {
        "manifest": out_dir / "manifest.json"
    }
