"""Command-line entry point.

Subcommands: ingest, featurize, train, simulate (and ``simulate --serve``),
evaluate, edeq-fill, edeq-score, report.  Exit codes: 0 success, 2 on
validation/configuration errors, 1 on anything else.
"""

from __future__ import annotations

import json
import logging
import sys
from pathlib import Path

import click
import numpy as np

from . import __version__, pipeline
from .config import ExperimentConfig, load_config
from .corpus import ingest_erisk_xml, ingest_jsonl, save_jsonl
from .edeq import load_questionnaire, read_answers, score_sheet
from .errors import ValidationError, WorkbenchError
from .features import apply_scaler, fit_scaler, load_scaler, save_scaler, write_feature_csv
from .metrics import (
    MetricConfig,
    decision_metrics,
    format_table,
    questionnaire_metrics,
    ranking_metrics,
)
from .model import cross_validate, save_head, train_head
from .stream import DecisionLog, HttpStreamClient, StreamEngine, run_client, serve_forever


def _common_config(config, corpus, out_dir, seed, run, task, provider, golden,
                   emotion_provider=None) -> ExperimentConfig:
    overrides = {
        "path": corpus,
        "out_dir": out_dir,
        "seed": seed,
        "id": run,
        "task": task,
        "provider": provider,
        "golden": golden,
        "emotion_provider": emotion_provider,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    return load_config(config, overrides)


config_option = click.option("--config", type=click.Path(), default=None, help="TOML config file")
corpus_option = click.option("--corpus", type=click.Path(), default=None, help="corpus path (overrides config)")
out_option = click.option("--out-dir", type=click.Path(), default=None, help="artifact directory")
seed_option = click.option("--seed", type=int, default=None, help="seed (overrides config)")
run_option = click.option("--run", type=int, default=None, help="run id (task 1: 0/1/2, task 3: 1/2/3)")
provider_option = click.option("--provider", default=None, help="test_hash | file_cache:<path> | http://<url>")
golden_option = click.option("--golden", type=click.Path(), default=None, help="golden truth labels file")
emotion_option = click.option("--emotion-provider", default=None,
                              help="zeros | file:<path> | http://<url>")


@click.group()
@click.version_option(version=__version__)
@click.option("-v", "--verbose", is_flag=True, help="log pipeline stages to stderr")
def cli(verbose: bool) -> None:
    """Early-risk screening workbench."""
    if verbose:
        logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")


@cli.command()
@click.option("--corpus", type=click.Path(), required=True)
@click.option("--format", "corpus_format", type=click.Choice(["jsonl", "xml"]), default="jsonl")
@golden_option
@click.option("--out", type=click.Path(), required=True, help="normalized JSONL output")
def ingest(corpus, corpus_format, golden, out):
    """Validate a corpus and write it back in canonical JSONL."""
    if corpus_format == "xml":
        histories = ingest_erisk_xml(corpus, golden_truth=golden)
    else:
        histories = ingest_jsonl(corpus)
    save_jsonl(histories, out)
    click.echo(f"ingested {len(histories)} subjects -> {out}")


@cli.command()
@config_option
@corpus_option
@out_option
@seed_option
@run_option
@provider_option
@golden_option
@click.option("--docs-out", type=click.Path(), default=None,
              help="also write the per-subject documents as JSONL {doc_id, text}")
def featurize(config, corpus, out_dir, seed, run, provider, golden, docs_out):
    """Extract the 79-column feature matrix and fit the min-max scaler."""
    cfg = _common_config(config, corpus, out_dir, seed, run, 1, provider, golden)
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    histories = pipeline.ingest(cfg)
    docs, rows = pipeline.featurize_corpus(histories, cfg)
    write_feature_csv(out / "features.csv", rows)
    scaler = fit_scaler([v for _, v in rows])
    save_scaler(scaler, out / "scaler.json")
    if docs_out:
        # Subject-level training documents plus the per-round prefix windows
        # the stream simulation asks for, so one export serves both stages.
        all_docs = dict(docs)
        all_docs.update(pipeline.build_round_documents(histories, cfg))
        with Path(docs_out).open("w", encoding="utf-8") as handle:
            for doc_id in sorted(all_docs):
                handle.write(json.dumps({"doc_id": doc_id, "text": all_docs[doc_id]}) + "\n")
    click.echo(f"featurized {len(rows)} subjects -> {out / 'features.csv'}")


@cli.command()
@config_option
@corpus_option
@out_option
@seed_option
@run_option
@provider_option
@golden_option
def train(config, corpus, out_dir, seed, run, provider, golden):
    """Train the decision head with a cross-validation report."""
    cfg = _common_config(config, corpus, out_dir, seed, run, 1, provider, golden)
    cfg.validate()
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    histories = pipeline.ingest(cfg)
    gold = pipeline.labels_for(histories)
    labeled = [h for h in histories if h.subject_id in gold and h.posts]
    if len(set(gold.values())) < 2:
        raise ValidationError("training needs labeled subjects of both classes")
    docs, rows = pipeline.featurize_corpus(labeled, cfg)
    scaler = fit_scaler([v for _, v in rows])
    save_scaler(scaler, out / "scaler.json")
    scaled = {sid: apply_scaler(scaler, v) for sid, v in rows}
    inputs = pipeline.model_inputs(docs, scaled, pipeline.embedding_provider_from(cfg))
    sids = sorted(inputs)
    x = np.stack([inputs[sid] for sid in sids])
    y = np.array([gold[sid] for sid in sids])
    folds = cross_validate((x, y), cfg.train, cfg.out_dim)
    head = train_head((x, y), cfg.train, cfg.out_dim)
    save_head(head, out / "model.json", seed=cfg.train.seed)
    report = {
        "folds": [{"fold": f.fold, "precision": f.precision, "recall": f.recall, "f1": f.f1} for f in folds],
        "mean_f1": sum(f.f1 for f in folds) / len(folds),
    }
    (out / "cv_report.json").write_text(json.dumps(report, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    click.echo(f"trained head (mean CV F1 {report['mean_f1']:.3f}) -> {out / 'model.json'}")


@cli.command()
@config_option
@corpus_option
@out_option
@seed_option
@run_option
@provider_option
@golden_option
@click.option("--serve", is_flag=True, help="run the mock round server instead of a client")
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8800)
@click.option("--endpoint", default=None, help="drive a remote server instead of an in-process one")
@click.option("--token", default="local")
@click.option("--model", "model_path", type=click.Path(), default=None, help="trained model.json")
@click.option("--scaler", "scaler_path", type=click.Path(), default=None, help="scaler.json")
def simulate(config, corpus, out_dir, seed, run, provider, golden, serve, host, port,
             endpoint, token, model_path, scaler_path):
    """Replay the corpus through the round-based protocol."""
    cfg = _common_config(config, corpus, out_dir, seed, run, 1, provider, golden)
    cfg.validate()
    histories = pipeline.ingest(cfg)
    if serve:
        engine = StreamEngine([h for h in histories if h.posts], tokens=(token,))
        click.echo(f"serving {len(histories)} subjects on http://{host}:{port} (token {token!r})")
        serve_forever(engine, host, port)
        return

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    from .model import DecisionPolicy, POLICY_REGRESSION, POLICY_SOFTMAX, load_head

    if model_path is None or scaler_path is None:
        raise ValidationError("simulate needs --model and --scaler (or use `report` end to end)")
    head = load_head(model_path)
    scaler = load_scaler(scaler_path)
    policy = DecisionPolicy(
        kind=POLICY_SOFTMAX if head.out_dim == 2 else POLICY_REGRESSION,
        preprocess=cfg.preprocess,
    )
    strategy = pipeline.ModelStrategy(
        head, policy, scaler, cfg,
        pipeline.embedding_provider_from(cfg),
        pipeline.emotion_provider_from(cfg.emotion_provider),
    )
    if endpoint:
        client = HttpStreamClient(endpoint, token=token)
    else:
        from .stream import LocalStreamClient

        engine = StreamEngine([h for h in histories if h.posts], tokens=(token,))
        client = LocalStreamClient(engine, token=token)
    log = run_client(client, strategy)
    log.to_csv(out / "decisions.csv")
    click.echo(f"simulated {len(log.subjects())} subjects -> {out / 'decisions.csv'}")


@cli.command()
@click.option("--decisions", type=click.Path(), required=True, help="decisions.csv from simulate")
@click.option("--golden", type=click.Path(), required=True, help="subject_id label lines")
@click.option("--out", type=click.Path(), default=None, help="metrics.json output")
@click.option("--erde-o", multiple=True, type=int, default=(5, 50), show_default=True)
def evaluate(decisions, golden, out, erde_o):
    """Decision-based and ranking metrics for a finished simulation."""
    from .corpus import read_golden_truth

    log = DecisionLog.from_csv(decisions)
    labels = {sid: 1 if lbl == "positive" else 0 for sid, lbl in read_golden_truth(golden).items()}
    results = decision_metrics(log, labels, MetricConfig(erde_o=tuple(erde_o)))
    results.update(ranking_metrics(log.first_scores(), labels))
    click.echo(format_table(results))
    if out:
        Path(out).write_text(json.dumps(results, sort_keys=True, indent=2) + "\n", encoding="utf-8")


@cli.command("edeq-fill")
@config_option
@corpus_option
@out_option
@seed_option
@run_option
@provider_option
def edeq_fill(config, corpus, out_dir, seed, run, provider):
    """Fill the questionnaire for every subject (28-day window heuristics)."""
    cfg = _common_config(config, corpus, out_dir, seed, run if run is not None else 1, 3, provider, None)
    artifacts = pipeline.run_task3(cfg)
    click.echo(f"answers -> {artifacts['answers']}")


@cli.command("edeq-score")
@click.option("--answers", type=click.Path(), required=True)
@click.option("--questionnaire", type=click.Path(), default=None)
@click.option("--gold", type=click.Path(), default=None, help="gold answer sheets, same flat format")
@click.option("--out", type=click.Path(), default=None, help="scores.json output")
def edeq_score(answers, questionnaire, gold, out):
    """Score answer sheets; with gold sheets, also compute error metrics."""
    q = load_questionnaire(questionnaire)
    sheets = read_answers(answers, q)
    scores = {user: score_sheet(sheet, q) for user, sheet in sorted(sheets.items())}
    if out:
        Path(out).write_text(json.dumps(scores, sort_keys=True, indent=2) + "\n", encoding="utf-8")
    for user, s in scores.items():
        click.echo(f"{user}  RS={s['RS']:.2f} ECS={s['ECS']:.2f} SCS={s['SCS']:.2f} "
                   f"WCS={s['WCS']:.2f} global={s['global']:.2f}")
    if gold:
        gold_sheets = read_answers(gold, q)
        results = questionnaire_metrics(sheets, gold_sheets, q)
        click.echo(format_table(results))


@cli.command()
@config_option
@corpus_option
@out_option
@seed_option
@run_option
@click.option("--task", type=click.Choice(["1", "3"]), required=True)
@provider_option
@golden_option
@emotion_option
def report(config, corpus, out_dir, seed, run, task, provider, golden, emotion_provider):
    """Run a full experiment (task 1 or task 3) and print its metrics."""
    cfg = _common_config(config, corpus, out_dir, seed, run, int(task), provider, golden,
                         emotion_provider)
    artifacts = pipeline.run_task1(cfg) if cfg.task == 1 else pipeline.run_task3(cfg)
    metrics_path = artifacts.get("metrics")
    if metrics_path and Path(metrics_path).exists():
        results = json.loads(Path(metrics_path).read_text(encoding="utf-8"))
        simple = {k: v for k, v in results.items() if not isinstance(v, (list, dict))}
        click.echo(format_table(simple))
    for name, path in sorted(artifacts.items()):
        click.echo(f"{name}: {path}")


def main() -> None:
    try:
        cli(standalone_mode=False)
    except click.ClickException as exc:
        exc.show()
        sys.exit(2)
    except click.Abort:
        sys.exit(1)
    except ValidationError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(2)
    except WorkbenchError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    main()
