"""Deterministic synthetic corpora for demos, tests and benchmarks.

Positive subjects draw from a risk-flavored vocabulary, negative subjects
from an everyday one, so hashing-based embeddings separate the classes well
enough to exercise the full pipeline end to end.
"""

from __future__ import annotations

import json
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np

_RISK_WORDS = (
    "bet casino odds slots poker stake jackpot chips bookie wager parlay "
    "roulette payout bankroll losses chasing debt loan desperate spiral"
).split()
_NEUTRAL_WORDS = (
    "garden recipe soccer movie holiday coffee painting bicycle novel hiking "
    "museum coding guitar puppy weather picnic camera chess baking market"
).split()
_FILLER_WORDS = (
    "today again really just about still never maybe some more with after "
    "before while little around actually pretty very quite almost"
).split()


def make_corpus(path, n_subjects: int = 20, posts_per_subject: int = 6,
                words_per_post: int = 18, positive_fraction: float = 0.5,
                seed: int = 0) -> Path:
    """Write a labeled JSONL corpus and return its path."""
    rng = np.random.default_rng(seed)
    start = datetime(2021, 1, 1, tzinfo=timezone.utc)
    path = Path(path)
    with path.open("w", encoding="utf-8") as handle:
        for i in range(n_subjects):
            positive = i < round(n_subjects * positive_fraction)
            topic = _RISK_WORDS if positive else _NEUTRAL_WORDS
            posts = []
            for j in range(posts_per_subject):
                words = []
                for _ in range(words_per_post):
                    pool = topic if rng.random() < 0.6 else _FILLER_WORDS
                    words.append(pool[int(rng.integers(len(pool)))])
                date = start + timedelta(days=int(i + 3 * j), hours=int(rng.integers(24)))
                posts.append({
                    "date": date.strftime("%Y-%m-%d %H:%M:%S"),
                    "title": "",
                    "text": " ".join(words) + ".",
                })
            record = {"subject": f"subject{i:03d}", "label": int(positive), "posts": posts}
            handle.write(json.dumps(record) + "\n")
    return path


def main(argv=None) -> None:
    import argparse

    parser = argparse.ArgumentParser(description="generate a synthetic JSONL corpus")
    parser.add_argument("out", help="output JSONL path")
    parser.add_argument("--subjects", type=int, default=20)
    parser.add_argument("--posts", type=int, default=6)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    make_corpus(args.out, n_subjects=args.subjects, posts_per_subject=args.posts, seed=args.seed)
    print(f"wrote {args.out}")


if __name__ == "__main__":
    main()
