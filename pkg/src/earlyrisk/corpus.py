"""Corpus ingestion: user post histories from JSONL or per-subject XML files.

Histories are immutable after construction: posts are sorted chronologically
(stable, so equal timestamps keep input order) and indexed by ``round_index``
from 0.  Windowing helpers cut the most recent ``n`` posts or a trailing
day-span off a history without copying post objects.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from dataclasses import dataclass, field
from datetime import datetime, timedelta, timezone
from pathlib import Path
from typing import Iterable, Sequence

from .errors import DomainError, ParseError, ValidationError

LABEL_POSITIVE = "positive"
LABEL_NEGATIVE = "negative"
LABEL_UNKNOWN = "unknown"
LABELS = (LABEL_POSITIVE, LABEL_NEGATIVE, LABEL_UNKNOWN)

DATE_FORMAT = "%Y-%m-%d %H:%M:%S"


def parse_timestamp(value: str) -> datetime:
    """Parse ``YYYY-MM-DD HH:MM:SS`` or ISO-8601 into an aware UTC datetime."""
    if not isinstance(value, str) or not value.strip():
        raise ValueError(f"unparseable timestamp: {value!r}")
    text = value.strip()
    try:
        dt = datetime.strptime(text, DATE_FORMAT)
    except ValueError:
        try:
            dt = datetime.fromisoformat(text.replace("Z", "+00:00"))
        except ValueError as exc:
            raise ValueError(f"unparseable timestamp: {value!r}") from exc
    if dt.tzinfo is None:
        return dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_timestamp(dt: datetime) -> str:
    return dt.astimezone(timezone.utc).strftime(DATE_FORMAT)


@dataclass(frozen=True)
class Post:
    date: datetime
    title: str
    text: str
    round_index: int

    def content(self) -> str:
        """Title and body joined with a single space, outer whitespace stripped."""
        return f"{self.title} {self.text}".strip()


@dataclass(frozen=True)
class UserHistory:
    subject_id: str
    label: str
    posts: tuple[Post, ...]

    def __post_init__(self):
        if self.label not in LABELS:
            raise ValidationError(
                f"label for {self.subject_id!r} must be one of {LABELS}, got {self.label!r}"
            )


@dataclass(frozen=True)
class PostWindow:
    subject_id: str
    posts: tuple[Post, ...]
    selection: str = ""


def label_from_int(value) -> str:
    if value is None:
        return LABEL_UNKNOWN
    if value in (0, 1):
        return LABEL_POSITIVE if value == 1 else LABEL_NEGATIVE
    raise ValidationError(f"label must be 0, 1 or null, got {value!r}")


def build_history(subject_id: str, label: str, raw_posts: Iterable[tuple[datetime, str, str]]) -> UserHistory:
    """Sort posts chronologically (stable) and assign 0-based round indices."""
    ordered = sorted(raw_posts, key=lambda item: item[0])
    posts = tuple(
        Post(date=date, title=title, text=text, round_index=i)
        for i, (date, title, text) in enumerate(ordered)
    )
    return UserHistory(subject_id=subject_id, label=label, posts=posts)


def ingest_jsonl(path) -> list[UserHistory]:
    """Read one subject per line: {"subject", "label", "posts": [{date,title,text}]}.

    Returns histories sorted by subject_id; posts re-sorted chronologically.
    """
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"corpus file not found: {path}")
    histories: dict[str, UserHistory] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"invalid JSON: {exc.msg}", path=path, line=lineno) from exc
            try:
                subject = record["subject"]
                raw_posts = record["posts"]
            except (KeyError, TypeError) as exc:
                raise ParseError(f"missing field: {exc}", path=path, line=lineno) from exc
            if not isinstance(subject, str) or not subject:
                raise ParseError("subject must be a non-empty string", path=path, line=lineno)
            if subject in histories:
                raise ValidationError(f"duplicate subject_id {subject!r} at line {lineno} of {path}")
            label = label_from_int(record.get("label"))
            parsed = []
            for i, post in enumerate(raw_posts):
                try:
                    date = parse_timestamp(post["date"])
                except (KeyError, TypeError, ValueError) as exc:
                    raise ParseError(
                        f"bad post #{i} for subject {subject!r}: {exc}", path=path, line=lineno
                    ) from exc
                parsed.append((date, str(post.get("title") or ""), str(post.get("text") or "")))
            histories[subject] = build_history(subject, label, parsed)
    return [histories[sid] for sid in sorted(histories)]


def read_golden_truth(path) -> dict[str, str]:
    """Whitespace-separated ``subject_id label`` lines; label is 0 or 1."""
    path = Path(path)
    if not path.is_file():
        raise ValidationError(f"golden truth file not found: {path}")
    labels: dict[str, str] = {}
    with path.open(encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            parts = line.split()
            if not parts:
                continue
            if len(parts) != 2:
                raise ParseError("expected 'subject_id label'", path=path, line=lineno)
            subject, raw = parts
            try:
                labels[subject] = label_from_int(int(raw))
            except (ValueError, ValidationError) as exc:
                raise ParseError(f"bad label {raw!r}: {exc}", path=path, line=lineno) from exc
    return labels


def _findtext(element: ET.Element, tag: str) -> str:
    node = element.find(tag)
    if node is None or node.text is None:
        return ""
    return node.text.strip()


def ingest_erisk_xml(directory, golden_truth=None) -> list[UserHistory]:
    """Read a directory of per-subject XML files with INDIVIDUAL/ID and WRITING elements.

    Labels come from an optional golden-truth file, else every history is unknown.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise ValidationError(f"corpus directory not found: {directory}")
    labels = read_golden_truth(golden_truth) if golden_truth is not None else {}
    histories: dict[str, UserHistory] = {}
    for xml_path in sorted(directory.glob("*.xml")):
        try:
            root = ET.parse(xml_path).getroot()
        except ET.ParseError as exc:
            raise ParseError(f"invalid XML: {exc}", path=xml_path) from exc
        individuals = [root] if root.tag == "INDIVIDUAL" else root.findall("INDIVIDUAL")
        if not individuals:
            raise ValidationError(f"no INDIVIDUAL element in {xml_path}")
        for individual in individuals:
            subject = _findtext(individual, "ID")
            if not subject:
                raise ValidationError(f"missing ID element in {xml_path}")
            if subject in histories:
                raise ValidationError(f"duplicate subject_id {subject!r} in {xml_path}")
            parsed = []
            for i, writing in enumerate(individual.findall("WRITING")):
                raw_date = _findtext(writing, "DATE")
                try:
                    date = parse_timestamp(raw_date)
                except ValueError as exc:
                    raise ValidationError(
                        f"bad DATE in WRITING #{i} of {xml_path}: {exc}"
                    ) from exc
                parsed.append((date, _findtext(writing, "TITLE"), _findtext(writing, "TEXT")))
            histories[subject] = build_history(
                subject, labels.get(subject, LABEL_UNKNOWN), parsed
            )
    return [histories[sid] for sid in sorted(histories)]


def save_jsonl(histories: Sequence[UserHistory], path) -> None:
    """Write histories back out in the canonical JSONL corpus format."""
    path = Path(path)
    label_to_int = {LABEL_POSITIVE: 1, LABEL_NEGATIVE: 0, LABEL_UNKNOWN: None}
    with path.open("w", encoding="utf-8") as handle:
        for history in histories:
            record = {
                "subject": history.subject_id,
                "label": label_to_int[history.label],
                "posts": [
                    {
                        "date": format_timestamp(post.date),
                        "title": post.title,
                        "text": post.text,
                    }
                    for post in history.posts
                ],
            }
            handle.write(json.dumps(record, sort_keys=True) + "\n")


def select_last_n(history: UserHistory, n: int) -> PostWindow:
    """The ``min(n, len(posts))`` most recent posts, chronological order kept."""
    if n < 1:
        raise DomainError(f"n must be >= 1, got {n}")
    return PostWindow(
        subject_id=history.subject_id,
        posts=history.posts[-n:],
        selection=f"last_n({n})",
    )


def select_last_days(history: UserHistory, days: int, reference: datetime | None = None) -> PostWindow:
    """All posts within the closed interval [reference - days*24h, reference].

    ``reference`` defaults to the subject's newest post date.
    """
    if days < 1:
        raise DomainError(f"days must be >= 1, got {days}")
    if not history.posts:
        return PostWindow(history.subject_id, (), selection=f"last_days({days})")
    if reference is None:
        reference = history.posts[-1].date
    lower = reference - timedelta(days=days)
    posts = tuple(p for p in history.posts if lower <= p.date <= reference)
    return PostWindow(
        subject_id=history.subject_id,
        posts=posts,
        selection=f"last_days({days}, {format_timestamp(reference)})",
    )
