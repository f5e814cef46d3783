"""Record primitives: timestamps, path normal form, record validation."""

from datetime import datetime, timedelta, timezone

import pytest
from hypothesis import given
from hypothesis import strategies as st

from devcontext.records import (
    ChangedPath,
    Comment,
    RevisionRecord,
    TaskRecord,
    format_rfc3339,
    normalize_path,
    parse_rfc3339,
)

UTC = timezone.utc


class TestTimestamps:
    def test_parse_utc_z(self):
        ts = parse_rfc3339("2007-03-01T10:00:00Z")
        assert ts == datetime(2007, 3, 1, 10, 0, 0, tzinfo=UTC)

    def test_parse_lowercase_and_space_separator(self):
        assert parse_rfc3339("2007-03-01t10:00:00z") == parse_rfc3339(
            "2007-03-01 10:00:00Z"
        )

    def test_parse_offset_converts_to_utc(self):
        ts = parse_rfc3339("2007-03-01T12:30:00+02:30")
        assert ts == datetime(2007, 3, 1, 10, 0, 0, tzinfo=UTC)

    def test_parse_fractional_seconds(self):
        ts = parse_rfc3339("2007-03-01T10:00:00.25Z")
        assert ts.microsecond == 250000

    @pytest.mark.parametrize(
        "bad",
        [
            "2007-03-01T10:00:00",  # naive
            "2007-03-01",
            "yesterday",
            "2007-03-01T10:00Z",
            "",
            "2007-03-01T10:00:00+0200",
        ],
    )
    def test_parse_rejects(self, bad):
        with pytest.raises(ValueError, match="RFC 3339"):
            parse_rfc3339(bad)

    def test_format_whole_seconds(self):
        assert format_rfc3339(datetime(2007, 3, 1, 10, 0, 0, tzinfo=UTC)) == (
            "2007-03-01T10:00:00Z"
        )

    def test_format_strips_trailing_zeros(self):
        ts = datetime(2007, 3, 1, 10, 0, 0, 250000, tzinfo=UTC)
        assert format_rfc3339(ts) == "2007-03-01T10:00:00.25Z"

    def test_format_renders_in_utc(self):
        eastern = timezone(timedelta(hours=-5))
        ts = datetime(2007, 3, 1, 5, 0, 0, tzinfo=eastern)
        assert format_rfc3339(ts) == "2007-03-01T10:00:00Z"

    @given(
        st.datetimes(
            min_value=datetime(1000, 1, 1),
            max_value=datetime(9999, 12, 28),
        ),
        st.integers(min_value=-14 * 60, max_value=14 * 60),
    )
    def test_round_trip(self, naive, offset_minutes):
        ts = naive.replace(tzinfo=timezone(timedelta(minutes=offset_minutes)))
        assert parse_rfc3339(format_rfc3339(ts)) == ts.astimezone(UTC)


class TestNormalizePath:
    @pytest.mark.parametrize(
        ("raw", "want"),
        [
            ("src/Main.java", "src/Main.java"),
            ("src\\Main.java", "src/Main.java"),
            ("/trunk/src//Main.java/", "trunk/src/Main.java"),
            ("///", ""),
            ("a////b", "a/b"),
        ],
    )
    def test_cases(self, raw, want):
        assert normalize_path(raw) == want

    @given(st.text(max_size=40))
    def test_idempotent_and_clean(self, raw):
        norm = normalize_path(raw)
        assert normalize_path(norm) == norm
        assert "//" not in norm
        assert "\\" not in norm
        assert not norm.startswith("/") and not norm.endswith("/")


def _revision(**overrides):
    base = dict(
        revision_id="r1",
        author="alice",
        timestamp=datetime(2007, 3, 1, 10, 0, 0, tzinfo=UTC),
        message="first",
        changed_paths=(ChangedPath("src/Main.java", "modified"),),
    )
    base.update(overrides)
    return RevisionRecord(**base)


class TestRevisionValidation:
    def test_valid(self):
        _revision().validate()

    def test_empty_id(self):
        with pytest.raises(ValueError, match="revision_id"):
            _revision(revision_id="").validate()

    def test_no_paths(self):
        with pytest.raises(ValueError, match="no changed paths"):
            _revision(changed_paths=()).validate()

    def test_absolute_path(self):
        bad = (ChangedPath("/src/Main.java", "modified"),)
        with pytest.raises(ValueError, match="invalid path"):
            _revision(changed_paths=bad).validate()

    def test_backslash_path(self):
        bad = (ChangedPath("src\\Main.java", "modified"),)
        with pytest.raises(ValueError, match="invalid path"):
            _revision(changed_paths=bad).validate()

    def test_unknown_change_kind(self):
        bad = (ChangedPath("src/Main.java", "touched"),)
        with pytest.raises(ValueError, match="unknown change kind"):
            _revision(changed_paths=bad).validate()

    def test_duplicate_path(self):
        bad = (
            ChangedPath("src/Main.java", "modified"),
            ChangedPath("src//Main.java", "deleted"),
        )
        with pytest.raises(ValueError, match="duplicate path"):
            _revision(changed_paths=bad).validate()


class TestTaskValidation:
    def test_valid(self):
        TaskRecord("task-1", "1", "bob", "crash", "NEW").validate()

    def test_empty_task_id(self):
        with pytest.raises(ValueError, match="task_id"):
            TaskRecord("", "1", "bob", "crash", "NEW").validate()

    def test_empty_external_id(self):
        with pytest.raises(ValueError, match="external_id"):
            TaskRecord("task-1", "", "bob", "crash", "NEW").validate()

    def test_comments_must_be_ordered(self):
        later = Comment("a", datetime(2007, 3, 2, tzinfo=UTC), "x")
        earlier = Comment("b", datetime(2007, 3, 1, tzinfo=UTC), "y")
        task = TaskRecord("task-1", "1", "bob", "crash", "NEW", (later, earlier))
        with pytest.raises(ValueError, match="out of order"):
            task.validate()
