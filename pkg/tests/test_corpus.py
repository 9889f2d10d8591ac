import json
from datetime import timedelta

import pytest

from earlyrisk.corpus import (
    ingest_erisk_xml,
    ingest_jsonl,
    parse_timestamp,
    read_golden_truth,
    save_jsonl,
    select_last_days,
    select_last_n,
)
from earlyrisk.errors import DomainError, ParseError, ValidationError

from conftest import make_history, utc


def write_jsonl(path, records):
    path.write_text("\n".join(json.dumps(r) for r in records) + "\n", encoding="utf-8")


class TestIngestJsonl:
    def test_minimal_line(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{
            "subject": "u1", "label": 1,
            "posts": [{"date": "2021-01-01 00:00:00", "title": "", "text": "hi"}],
        }])
        histories = ingest_jsonl(corpus)
        assert len(histories) == 1
        assert histories[0].subject_id == "u1"
        assert histories[0].label == "positive"
        assert len(histories[0].posts) == 1
        assert histories[0].posts[0].text == "hi"

    def test_posts_resorted_by_date(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{
            "subject": "u1", "label": 0,
            "posts": [
                {"date": "2021-03-01 00:00:00", "title": "", "text": "late"},
                {"date": "2021-01-01 00:00:00", "title": "", "text": "early"},
            ],
        }])
        history = ingest_jsonl(corpus)[0]
        assert [p.text for p in history.posts] == ["early", "late"]
        assert [p.round_index for p in history.posts] == [0, 1]

    def test_malformed_line_carries_line_number(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        corpus.write_text("not json\n", encoding="utf-8")
        with pytest.raises(ParseError) as err:
            ingest_jsonl(corpus)
        assert err.value.line == 1

    def test_duplicate_subject_rejected(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        record = {"subject": "u1", "label": 0, "posts": []}
        write_jsonl(corpus, [record, record])
        with pytest.raises(ValidationError, match="duplicate"):
            ingest_jsonl(corpus)

    def test_sorted_by_subject_id(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [
            {"subject": "zz", "label": 0, "posts": []},
            {"subject": "aa", "label": 1, "posts": []},
        ])
        assert [h.subject_id for h in ingest_jsonl(corpus)] == ["aa", "zz"]

    def test_null_label_unknown(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{"subject": "u1", "label": None, "posts": []}])
        assert ingest_jsonl(corpus)[0].label == "unknown"

    def test_roundtrip_via_save(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{
            "subject": "u1", "label": 1,
            "posts": [{"date": "2021-01-02 03:04:05", "title": "a", "text": "b"}],
        }])
        histories = ingest_jsonl(corpus)
        out = tmp_path / "out.jsonl"
        save_jsonl(histories, out)
        assert ingest_jsonl(out) == histories


class TestIngestXml:
    def write_subject(self, directory, name, subject, writings):
        rows = "".join(
            f"<WRITING><TITLE>{t}</TITLE><DATE>{d}</DATE><TEXT>{x}</TEXT></WRITING>"
            for d, t, x in writings
        )
        (directory / name).write_text(
            f"<INDIVIDUAL><ID>{subject}</ID>{rows}</INDIVIDUAL>", encoding="utf-8"
        )

    def test_two_writings(self, tmp_path):
        self.write_subject(tmp_path, "u1.xml", "u1", [
            ("2021-01-01 00:00:00", "t1", "x1"),
            ("2021-01-02 00:00:00", "t2", "x2"),
        ])
        histories = ingest_erisk_xml(tmp_path)
        assert len(histories) == 1
        assert len(histories[0].posts) == 2
        assert histories[0].label == "unknown"

    def test_golden_truth_label(self, tmp_path):
        self.write_subject(tmp_path, "u1.xml", "u1", [("2021-01-01 00:00:00", "", "x")])
        golden = tmp_path / "golden.txt"
        golden.write_text("u1 1\n", encoding="utf-8")
        histories = ingest_erisk_xml(tmp_path, golden_truth=golden)
        assert histories[0].label == "positive"

    def test_missing_date_names_file_and_index(self, tmp_path):
        (tmp_path / "u1.xml").write_text(
            "<INDIVIDUAL><ID>u1</ID><WRITING><TITLE>t</TITLE><TEXT>x</TEXT></WRITING></INDIVIDUAL>",
            encoding="utf-8",
        )
        with pytest.raises(ValidationError) as err:
            ingest_erisk_xml(tmp_path)
        assert "u1.xml" in str(err.value)
        assert "#0" in str(err.value)

    def test_missing_id_rejected(self, tmp_path):
        (tmp_path / "u1.xml").write_text("<INDIVIDUAL></INDIVIDUAL>", encoding="utf-8")
        with pytest.raises(ValidationError, match="missing ID"):
            ingest_erisk_xml(tmp_path)


class TestGoldenTruth:
    def test_parse(self, tmp_path):
        golden = tmp_path / "g.txt"
        golden.write_text("u1 1\nu2 0\n\n", encoding="utf-8")
        assert read_golden_truth(golden) == {"u1": "positive", "u2": "negative"}


class TestTimestamps:
    def test_space_format(self):
        dt = parse_timestamp("2021-01-02 03:04:05")
        assert (dt.year, dt.hour, dt.second) == (2021, 3, 5)

    def test_iso_format_with_offset(self):
        dt = parse_timestamp("2021-01-02T03:04:05+01:00")
        assert dt.hour == 2  # normalized to UTC

    def test_garbage_rejected(self):
        with pytest.raises(ValueError):
            parse_timestamp("not a date")


class TestWindows:
    def test_last_n_fewer_than_n(self, history_10):
        assert len(select_last_n(history_10, 50).posts) == 10

    def test_last_n_most_recent(self):
        posts = [(utc(2021, 1, 1) + timedelta(days=i), "", f"p{i}") for i in range(60)]
        history = make_history(posts=posts)
        window = select_last_n(history, 50)
        assert [p.round_index for p in window.posts] == list(range(10, 60))

    def test_last_n_empty(self):
        assert select_last_n(make_history(), 5).posts == ()

    def test_last_n_idempotent(self, history_10):
        once = select_last_n(history_10, 5)
        twice = select_last_n(
            make_history("u1", "positive", [(p.date, p.title, p.text) for p in once.posts]), 5
        )
        assert [p.text for p in once.posts] == [p.text for p in twice.posts]

    def test_last_n_rejects_zero(self, history_10):
        with pytest.raises(DomainError):
            select_last_n(history_10, 0)

    def test_last_days_excludes_older(self):
        ref = utc(2021, 6, 1)
        history = make_history(posts=[
            (ref - timedelta(days=29), "", "old"),
            (ref - timedelta(days=1), "", "new"),
        ])
        window = select_last_days(history, 28, reference=ref)
        assert [p.text for p in window.posts] == ["new"]

    def test_last_days_lower_bound_inclusive(self):
        ref = utc(2021, 6, 1)
        history = make_history(posts=[(ref - timedelta(days=28), "", "edge")])
        assert len(select_last_days(history, 28, reference=ref).posts) == 1

    def test_last_days_empty_history(self):
        assert select_last_days(make_history(), 28).posts == ()

    def test_last_days_monotone_in_days(self):
        ref = utc(2021, 6, 1)
        history = make_history(posts=[
            (ref - timedelta(days=d), "", str(d)) for d in (40, 20, 10, 3, 0)
        ])
        sizes = [len(select_last_days(history, d, reference=ref).posts) for d in range(1, 50)]
        assert sizes == sorted(sizes)

    def test_default_reference_is_newest_post(self, history_10):
        window = select_last_days(history_10, 3)
        assert window.posts[-1] == history_10.posts[-1]
        assert len(window.posts) == 4  # days 7, 8, 9, 10 of January


class TestInvariants:
    def test_round_index_is_rank_and_dates_nondecreasing(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{
            "subject": "u1", "label": 1,
            "posts": [
                {"date": "2021-01-03 00:00:00", "title": "", "text": "c"},
                {"date": "2021-01-01 00:00:00", "title": "", "text": "a"},
                {"date": "2021-01-02 00:00:00", "title": "", "text": "b"},
            ],
        }])
        history = ingest_jsonl(corpus)[0]
        dates = [p.date for p in history.posts]
        assert dates == sorted(dates)
        assert [p.round_index for p in history.posts] == list(range(len(dates)))

    def test_date_ties_keep_input_order(self, tmp_path):
        corpus = tmp_path / "c.jsonl"
        write_jsonl(corpus, [{
            "subject": "u1", "label": 1,
            "posts": [
                {"date": "2021-01-01 00:00:00", "title": "", "text": "first"},
                {"date": "2021-01-01 00:00:00", "title": "", "text": "second"},
            ],
        }])
        history = ingest_jsonl(corpus)[0]
        assert [p.text for p in history.posts] == ["first", "second"]
