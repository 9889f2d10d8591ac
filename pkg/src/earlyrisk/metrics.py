"""Evaluation measures: decision-based early-detection metrics, ranking
metrics, and questionnaire error metrics.

Cost constants live in :class:`MetricConfig`; by default the false-positive
cost is the positive-class prevalence computed from the gold labels, true
positives pay a sigmoid latency cost with deadline ``o``, and latency/speed
aggregate true positives with the median.
"""

from __future__ import annotations

import json
import math
import statistics
from dataclasses import dataclass
from typing import Mapping, Sequence

from .errors import DomainError, ValidationError

DEFAULT_SPEED_P = 0.0078


@dataclass(frozen=True)
class MetricConfig:
    erde_o: tuple[int, ...] = (5, 50)
    c_fn: float = 1.0
    c_tp: float = 1.0
    c_fp: float | None = None  # None: positive prevalence from gold
    speed_p: float = DEFAULT_SPEED_P
    latency_aggregate: str = "median"

    def __post_init__(self):
        if any(o <= 0 for o in self.erde_o):
            raise DomainError("erde_o deadlines must be positive")
        if self.latency_aggregate not in ("median", "mean"):
            raise DomainError("latency_aggregate must be 'median' or 'mean'")


def latency_cost(k: int, o: float) -> float:
    """True-positive cost 1 - 1/(1 + e^(k-o)), evaluated stably."""
    # Equal to sigmoid(k - o).
    t = k - o
    if t >= 0:
        return 1.0 / (1.0 + math.exp(-t))
    e = math.exp(t)
    return e / (1.0 + e)


def speed_penalty(k: int, p: float = DEFAULT_SPEED_P) -> float:
    """Latency penalty -1 + 2/(1 + e^(-p*(k-1))); 0 at k=1, 1 in the limit."""
    return -1.0 + 2.0 / (1.0 + math.exp(-p * (k - 1)))


def _aggregate(values: Sequence[float], how: str) -> float:
    return statistics.median(values) if how == "median" else statistics.mean(values)


def decision_metrics(log, gold: Mapping[str, int], cfg: MetricConfig | None = None) -> dict:
    """Decision-based evaluation of a simulation log against gold labels.

    The alert round r (0-based) counts as the (r+1)-th processed writing.
    Subjects with no true positive leave latency undefined (null) and speed 0.
    """
    if cfg is None:
        cfg = MetricConfig()
    subjects = log.subjects()
    missing = [sid for sid in subjects if sid not in gold]
    if missing:
        raise ValidationError(f"gold labels missing for: {', '.join(sorted(missing))}")
    if not subjects:
        raise DomainError("decision log is empty")

    n_subjects = len(subjects)
    positives = sum(1 for sid in subjects if gold[sid] == 1)
    c_fp = cfg.c_fp if cfg.c_fp is not None else positives / n_subjects

    predicted = {sid: log.alert_round(sid) for sid in subjects}
    y_true = [gold[sid] for sid in subjects]
    y_pred = [int(predicted[sid] is not None) for sid in subjects]

    tp = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 1)
    fp = sum(1 for t, p in zip(y_true, y_pred) if t == 0 and p == 1)
    fn = sum(1 for t, p in zip(y_true, y_pred) if t == 1 and p == 0)
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0

    erde = {}
    for o in cfg.erde_o:
        total = 0.0
        for sid in subjects:
            alerted = predicted[sid] is not None
            if alerted and gold[sid] == 1:
                k = predicted[sid] + 1
                total += cfg.c_tp * latency_cost(k, o)
            elif alerted and gold[sid] == 0:
                total += c_fp
            elif not alerted and gold[sid] == 1:
                total += cfg.c_fn
        erde[f"erde_{o}"] = total / n_subjects

    tp_rounds = [predicted[sid] + 1 for sid in subjects if gold[sid] == 1 and predicted[sid] is not None]
    flags = []
    if tp_rounds:
        latency_tp = _aggregate(tp_rounds, cfg.latency_aggregate)
        penalty = _aggregate([speed_penalty(k, cfg.speed_p) for k in tp_rounds], cfg.latency_aggregate)
        speed = 1.0 - penalty
    else:
        latency_tp = None
        speed = 0.0
        flags.append("no_true_positives")

    result = {
        "precision": precision,
        "recall": recall,
        "f1": f1,
        **erde,
        "latency_tp": latency_tp,
        "speed": speed,
        "f_latency": f1 * speed,
    }
    if flags:
        result["flags"] = flags
    return result


def ranking_metrics(scores: Mapping[str, float], gold: Mapping[str, int],
                    ks: Sequence[int] = (10, 100)) -> dict:
    """P@k and NDCG@k over subjects ranked by descending score.

    Ties break lexicographically by subject_id.  A k beyond the population
    is evaluated over the available items and flagged.
    """
    if not scores:
        raise DomainError("ranking needs at least one scored subject")
    missing = [sid for sid in scores if sid not in gold]
    if missing:
        raise ValidationError(f"gold labels missing for: {', '.join(sorted(missing))}")
    ranked = sorted(scores, key=lambda sid: (-scores[sid], sid))
    relevance = [gold[sid] for sid in ranked]
    n = len(ranked)
    total_relevant = sum(relevance)

    result: dict = {}
    flags = []
    for k in ks:
        kk = min(k, n)
        if k > n:
            flags.append(f"k={k} truncated to population {n}")
        top = relevance[:kk]
        result[f"p_at_{k}"] = sum(top) / kk
        dcg = sum(rel / math.log2(i + 2) for i, rel in enumerate(top))
        ideal = sorted(relevance, reverse=True)[:kk]
        idcg = sum(rel / math.log2(i + 2) for i, rel in enumerate(ideal))
        if idcg == 0.0:
            result[f"ndcg_at_{k}"] = 0.0
            if total_relevant == 0 and "no_relevant_subjects" not in flags:
                flags.append("no_relevant_subjects")
        else:
            result[f"ndcg_at_{k}"] = dcg / idcg
    if flags:
        result["flags"] = flags
    return result


def questionnaire_metrics(pred: Mapping[str, "AnswerSheet"], gold: Mapping[str, "AnswerSheet"],
                          questionnaire) -> dict:
    """Answer-level and score-level errors between predicted and gold sheets."""
    from .edeq import score_sheet  # deferred: edeq imports metrics-free modules only

    if set(pred) != set(gold):
        only_pred = sorted(set(pred) - set(gold))
        only_gold = sorted(set(gold) - set(pred))
        raise ValidationError(
            f"prediction/gold user mismatch; only-pred={only_pred} only-gold={only_gold}"
        )
    if not pred:
        raise DomainError("no answer sheets to score")

    numbers = [item.number for item in questionnaire.items]
    pairs = []
    for user in sorted(pred):
        p_answers, g_answers = pred[user].answers, gold[user].answers
        for number in numbers:
            if number not in p_answers or number not in g_answers:
                raise ValidationError(f"user {user!r} misses an answer for item {number}")
            pairs.append((p_answers[number], g_answers[number]))

    mzoe = sum(1 for p, g in pairs if p != g) / len(pairs)
    mae = sum(abs(p - g) for p, g in pairs) / len(pairs)

    macro_terms = []
    for category in range(7):
        in_category = [(p, g) for p, g in pairs if g == category]
        if in_category:
            macro_terms.append(sum(abs(p - g) for p, g in in_category) / len(in_category))
    mae_macro = sum(macro_terms) / len(macro_terms)

    pred_scores = {user: score_sheet(pred[user], questionnaire) for user in pred}
    gold_scores = {user: score_sheet(gold[user], questionnaire) for user in gold}
    users = sorted(pred)

    def score_mae(key: str) -> float:
        return sum(abs(pred_scores[u][key] - gold_scores[u][key]) for u in users) / len(users)

    return {
        "mzoe": mzoe,
        "mae": mae,
        "mae_macro": mae_macro,
        "ged": score_mae("global"),
        "rs": score_mae("RS"),
        "ecs": score_mae("ECS"),
        "scs": score_mae("SCS"),
        "wcs": score_mae("WCS"),
    }


def metrics_to_json(metrics: Mapping) -> str:
    return json.dumps(metrics, sort_keys=True, indent=2) + "\n"


def format_table(metrics: Mapping) -> str:
    """Aligned two-column text table; flags render on their own line."""
    rows = [(k, v) for k, v in metrics.items() if k != "flags"]
    width = max(len(k) for k, _ in rows)
    lines = []
    for key, value in rows:
        if isinstance(value, float):
            rendered = f"{value:.6f}"
        elif value is None:
            rendered = "-"
        else:
            rendered = str(value)
        lines.append(f"{key.ljust(width)}  {rendered}")
    for flag in metrics.get("flags", ()):
        lines.append(f"{'flag'.ljust(width)}  {flag}")
    return "\n".join(lines)
