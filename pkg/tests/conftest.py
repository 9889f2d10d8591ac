import sys
from datetime import datetime, timezone
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from earlyrisk.corpus import build_history


def utc(year, month, day, hour=0, minute=0, second=0):
    return datetime(year, month, day, hour, minute, second, tzinfo=timezone.utc)


def make_history(subject_id="u1", label="unknown", posts=()):
    """posts: iterable of (datetime, title, text)."""
    return build_history(subject_id, label, posts)


@pytest.fixture
def history_10():
    posts = [(utc(2021, 1, 1 + i), f"t{i}", f"post number {i}") for i in range(10)]
    return make_history("u1", "positive", posts)
