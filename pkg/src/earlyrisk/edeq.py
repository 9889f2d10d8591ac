"""Eating-disorder questionnaire model, similarity-driven completion, and scoring.

The questionnaire uses items 1-12 and 19-28 (22 in total) of the standard
instrument.  Day-based items count the day span over which a user's posts
stay similar to the item; scale-based items map the best post similarity
onto the 0-6 severity scale.  Subscale scores are means of member-item
answers and the global score is the mean of the four subscales.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Mapping

from .corpus import PostWindow, UserHistory, select_last_days
from .embed import cosine
from .errors import DomainError, ValidationError

SUBSCALES = ("RS", "ECS", "SCS", "WCS")
KIND_DAY = "day_based"
KIND_SCALE = "scale_based"

VALID_NUMBERS = frozenset(range(1, 13)) | frozenset(range(19, 29))
REQUIRED_RS = frozenset({1, 2, 3, 4, 5})
REQUIRED_SCS = frozenset({6, 8, 10, 11, 23, 26, 27, 28})

RUN_THRESHOLDS = {1: 0.4, 2: 0.35, 3: 0.375}

# Day-count buckets: (low, high) -> answer; >= 28 days is answer 6.
DAY_BUCKETS = ((0, 0), (1, 5), (6, 12), (13, 15), (16, 22), (23, 27))


@dataclass(frozen=True)
class QuestionnaireItem:
    number: int
    text: str
    kind: str
    subscales: frozenset[str]


@dataclass(frozen=True)
class Questionnaire:
    items: tuple[QuestionnaireItem, ...]

    def item(self, number: int) -> QuestionnaireItem:
        for item in self.items:
            if item.number == number:
                return item
        raise KeyError(number)

    def subscale_members(self, name: str) -> tuple[int, ...]:
        return tuple(item.number for item in self.items if name in item.subscales)


@dataclass(frozen=True)
class EdeqConfig:
    day_threshold: float = RUN_THRESHOLDS[1]
    window_days: int = 28
    inclusive_span: bool = False

    def __post_init__(self):
        if not 0.0 < self.day_threshold < 1.0:
            raise DomainError("day_threshold must lie in (0, 1)")
        if self.window_days < 1:
            raise DomainError("window_days must be positive")

    @classmethod
    def for_run(cls, run: int, **overrides) -> "EdeqConfig":
        if run not in RUN_THRESHOLDS:
            raise DomainError(f"edeq run must be one of {sorted(RUN_THRESHOLDS)}, got {run}")
        return cls(day_threshold=RUN_THRESHOLDS[run], **overrides)


@dataclass
class AnswerSheet:
    answers: dict[int, int]

    def validate(self, questionnaire: Questionnaire) -> None:
        for item in questionnaire.items:
            answer = self.answers.get(item.number)
            if answer is None:
                raise ValidationError(f"missing answer for item {item.number}")
            if not isinstance(answer, int) or not 0 <= answer <= 6:
                raise ValidationError(f"answer for item {item.number} must be an integer in 0..6")


def _validate_items(records) -> Questionnaire:
    if len(records) != 22:
        raise ValidationError(f"questionnaire must have exactly 22 items, got {len(records)}")
    items = []
    numbers = set()
    for record in records:
        number = record["number"]
        if number not in VALID_NUMBERS:
            raise ValidationError(f"item number {number} outside 1-12, 19-28")
        if number in numbers:
            raise ValidationError(f"duplicate item number {number}")
        numbers.add(number)
        kind = record["kind"]
        if kind not in (KIND_DAY, KIND_SCALE):
            raise ValidationError(f"item {number} has unknown kind {kind!r}")
        subscales = frozenset(record.get("subscales", ()))
        if not subscales <= set(SUBSCALES):
            raise ValidationError(f"item {number} names unknown subscales {sorted(subscales)}")
        items.append(QuestionnaireItem(
            number=number, text=record.get("text", ""), kind=kind, subscales=subscales,
        ))
    questionnaire = Questionnaire(items=tuple(sorted(items, key=lambda i: i.number)))
    rs = frozenset(questionnaire.subscale_members("RS"))
    if rs != REQUIRED_RS:
        raise ValidationError(f"RS must be exactly {sorted(REQUIRED_RS)}, got {sorted(rs)}")
    scs = frozenset(questionnaire.subscale_members("SCS"))
    if scs != REQUIRED_SCS:
        raise ValidationError(f"SCS must be exactly {sorted(REQUIRED_SCS)}, got {sorted(scs)}")
    for name in SUBSCALES:
        if not questionnaire.subscale_members(name):
            raise ValidationError(f"subscale {name} has no member items")
    return questionnaire


def load_questionnaire(path=None) -> Questionnaire:
    """Load and validate a questionnaire definition; default is the bundled one."""
    if path is None:
        text = resources.files("earlyrisk.data").joinpath("edeq_items.json").read_text(encoding="utf-8")
    else:
        text = Path(path).read_text(encoding="utf-8")
    return _validate_items(json.loads(text))


def clamped_similarity(a, b) -> float:
    """Cosine with negatives clamped to 0, as consumed by the heuristics."""
    return max(0.0, cosine(a, b))


def bucket_days(days: int) -> int:
    if days < 0:
        raise DomainError("day span cannot be negative")
    for answer, (low, high) in enumerate(DAY_BUCKETS):
        if low <= days <= high:
            return answer
    return 6


def bucket_scale(similarity: float) -> int:
    """Half-open tenth intervals [0, 0.1) .. [0.5, 0.6), then [0.6, 1] -> 6."""
    m = min(1.0, max(0.0, similarity))
    for answer, bound in enumerate((0.1, 0.2, 0.3, 0.4, 0.5, 0.6)):
        if m < bound:
            return answer
    return 6


def _post_similarities(window: PostWindow, item_vector, provider) -> list[float]:
    values = []
    for post in window.posts:
        embedded = provider.embed(post.content())
        if getattr(embedded, "degenerate", False):
            values.append(0.0)
        else:
            values.append(clamped_similarity(embedded, item_vector))
    return values


def answer_day_question(window: PostWindow, item: QuestionnaireItem,
                        cfg: EdeqConfig, provider) -> int:
    """Day span between the first and last post more similar than the threshold."""
    if item.kind != KIND_DAY:
        raise DomainError(f"item {item.number} is not day-based")
    item_vector = provider.embed(item.text)
    similarities = _post_similarities(window, item_vector, provider)
    qualifying = [post for post, sim in zip(window.posts, similarities) if sim > cfg.day_threshold]
    if not qualifying:
        return 0
    span = qualifying[-1].date - qualifying[0].date
    days = int(span.total_seconds() // 86400)
    if cfg.inclusive_span:
        days += 1
    return bucket_days(days)


def answer_scale_question(window: PostWindow, item: QuestionnaireItem, provider) -> int:
    """Severity from the single highest post similarity; empty window -> 0."""
    if item.kind != KIND_SCALE:
        raise DomainError(f"item {item.number} is not scale-based")
    if not window.posts:
        return 0
    item_vector = provider.embed(item.text)
    best = max(_post_similarities(window, item_vector, provider))
    return bucket_scale(best)


def fill_questionnaire(history: UserHistory, questionnaire: Questionnaire,
                       cfg: EdeqConfig, provider) -> AnswerSheet:
    """Answer every item from the user's trailing day window."""
    window = select_last_days(history, cfg.window_days)
    answers = {}
    for item in questionnaire.items:
        if item.kind == KIND_DAY:
            answers[item.number] = answer_day_question(window, item, cfg, provider)
        else:
            answers[item.number] = answer_scale_question(window, item, provider)
    return AnswerSheet(answers=answers)


def score_sheet(sheet: AnswerSheet, questionnaire: Questionnaire) -> dict[str, float]:
    """Subscale means plus their arithmetic-mean global score."""
    sheet.validate(questionnaire)
    scores: dict[str, float] = {}
    for name in SUBSCALES:
        members = questionnaire.subscale_members(name)
        scores[name] = sum(sheet.answers[n] for n in members) / len(members)
    scores["global"] = sum(scores[name] for name in SUBSCALES) / len(SUBSCALES)
    return scores


def write_answers(path, sheets: Mapping[str, AnswerSheet], questionnaire: Questionnaire) -> None:
    """Flat submission format: one line per user, id then 22 integers."""
    numbers = [item.number for item in questionnaire.items]
    with Path(path).open("w", encoding="utf-8") as handle:
        for user in sorted(sheets):
            sheets[user].validate(questionnaire)
            row = " ".join(str(sheets[user].answers[n]) for n in numbers)
            handle.write(f"{user} {row}\n")


def read_answers(path, questionnaire: Questionnaire) -> dict[str, AnswerSheet]:
    numbers = [item.number for item in questionnaire.items]
    sheets: dict[str, AnswerSheet] = {}
    with Path(path).open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 1 + len(numbers):
                raise ValidationError(
                    f"line {lineno} of {path}: expected user id plus {len(numbers)} answers"
                )
            user, values = parts[0], parts[1:]
            sheet = AnswerSheet(answers={n: int(v) for n, v in zip(numbers, values)})
            sheet.validate(questionnaire)
            sheets[user] = sheet
    return sheets
