"""Independent single-purpose oracles used by the unit and acceptance suites.

Everything here is deliberately naive: plain loops, exhaustive enumeration,
no shared code with the implementations under test.
"""

from __future__ import annotations

import math
from itertools import combinations


def direct_ttr(tokens):
    return len(set(tokens)) / len(tokens)


def direct_root_ttr(tokens):
    return len(set(tokens)) / math.sqrt(len(tokens))


def direct_log_ttr(tokens):
    n = len(tokens)
    if n == 1:
        return 1.0
    return math.log(len(set(tokens))) / math.log(n)


def direct_maas(tokens):
    n = len(tokens)
    if n == 1:
        return 0.0
    return (math.log(n) - math.log(len(set(tokens)))) / (math.log(n) ** 2)


def direct_msttr(tokens, segment_len):
    n = len(tokens)
    if n < segment_len:
        return direct_ttr(tokens)
    ttrs = []
    for start in range(0, n - segment_len + 1, segment_len):
        segment = tokens[start : start + segment_len]
        ttrs.append(len(set(segment)) / segment_len)
    return sum(ttrs) / len(ttrs)


def direct_mattr(tokens, window_len):
    n = len(tokens)
    if n <= window_len:
        return direct_ttr(tokens)
    ttrs = []
    for start in range(n - window_len + 1):
        window = tokens[start : start + window_len]
        ttrs.append(len(set(window)) / window_len)
    return sum(ttrs) / len(ttrs)


def hdd_enumerate(tokens, sample_size):
    """Exhaustive HD-D: mean TTR over every position subset of the sample size.

    Only feasible for tiny inputs; C(len(tokens), sample_size) subsets are
    enumerated outright.
    """
    n = len(tokens)
    s = min(sample_size, n)
    total = 0.0
    count = 0
    for subset in combinations(range(n), s):
        total += len({tokens[i] for i in subset}) / s
        count += 1
    return total / count


def mtld_simple(tokens, threshold=0.72):
    """Straightforward MTLD re-implementation (forward + reverse mean)."""

    def one_pass(sequence):
        factors = 0.0
        types = set()
        count = 0
        ttr = 1.0
        for token in sequence:
            count += 1
            types.add(token)
            ttr = len(types) / count
            if ttr < threshold:
                factors += 1.0
                types = set()
                count = 0
        if count > 0:
            factors += (1.0 - ttr) / (1.0 - threshold)
        return len(sequence) / factors if factors > 0 else float(len(sequence))

    return (one_pass(list(tokens)) + one_pass(list(reversed(tokens)))) / 2.0


def erde_direct(decisions, gold, o, c_fp, c_tp=1.0, c_fn=1.0):
    """Direct ERDE: decisions is {subject: k or None} with k the 1-based
    alert position; gold is {subject: 0/1}."""
    total = 0.0
    for subject, k in decisions.items():
        truth = gold[subject]
        if k is not None and truth == 1:
            total += c_tp * (1.0 - 1.0 / (1.0 + math.exp(k - o)))
        elif k is not None and truth == 0:
            total += c_fp
        elif k is None and truth == 1:
            total += c_fn
    return total / len(decisions)


def sheet_metrics_bruteforce(pred, gold, items):
    """Questionnaire error metrics from first principles.

    pred/gold: {user: {item_number: answer}}.
    items: list of (number, subscales) with subscales a set of names.
    """
    users = sorted(pred)
    numbers = [number for number, _ in items]

    wrong = 0
    abs_err = 0.0
    per_category: dict[int, list[float]] = {}
    for user in users:
        for number in numbers:
            p, g = pred[user][number], gold[user][number]
            if p != g:
                wrong += 1
            abs_err += abs(p - g)
            per_category.setdefault(g, []).append(abs(p - g))
    n_pairs = len(users) * len(numbers)
    mzoe = wrong / n_pairs
    mae = abs_err / n_pairs
    mae_macro = sum(sum(v) / len(v) for v in per_category.values()) / len(per_category)

    def scores(sheet):
        out = {}
        for name in ("RS", "ECS", "SCS", "WCS"):
            members = [number for number, subs in items if name in subs]
            out[name] = sum(sheet[number] for number in members) / len(members)
        out["global"] = (out["RS"] + out["ECS"] + out["SCS"] + out["WCS"]) / 4.0
        return out

    result = {"mzoe": mzoe, "mae": mae, "mae_macro": mae_macro}
    for key, label in (("global", "ged"), ("RS", "rs"), ("ECS", "ecs"), ("SCS", "scs"), ("WCS", "wcs")):
        result[label] = sum(
            abs(scores(pred[user])[key] - scores(gold[user])[key]) for user in users
        ) / len(users)
    return result
