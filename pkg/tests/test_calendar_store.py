"""Store persistence, ordering, conflicts vs a brute-force overlap oracle."""

import json
import os
import random
from datetime import datetime, timedelta, timezone

import pytest

from mdwaist.calendar_store import CalendarStore, StoreError
from mdwaist.model import ResolvedEvent, SchedulingIntent

BASE = datetime(2025, 1, 20, 0, 0, tzinfo=timezone.utc)


def make_event(start_minutes, duration=30, title="Visit"):
    start = BASE + timedelta(minutes=start_minutes)
    return ResolvedEvent(
        intent=SchedulingIntent(date_expression="x"),
        start=start,
        end=start + timedelta(minutes=duration),
        title=title,
    )


def brute_force_overlaps(records, window_start, window_end):
    """Oracle: O(n) half-open interval intersection filter."""
    return [
        r
        for r in records
        if r.event.start < window_end and window_start < r.event.end
    ]


@pytest.fixture
def store(tmp_path):
    return CalendarStore(tmp_path / "calendar.json")


class TestCreateEvent:
    def test_create_on_empty_store(self, store):
        event = make_event(14 * 60, title="Follow-up with Mr. Smith")
        record = store.create_event(event)
        assert record.event == event
        assert record.external_id is None
        assert len(store.records) == 1
        assert store.path.exists()

    def test_same_event_twice_gets_distinct_ids(self, store):
        event = make_event(0)
        first = store.create_event(event)
        second = store.create_event(event)
        assert first.id != second.id
        assert len(store.records) == 2

    def test_random_insert_order_is_listed_sorted(self, store):
        rng = random.Random(99)
        starts = list(range(0, 100 * 40, 40))
        rng.shuffle(starts)
        for start in starts:
            store.create_event(make_event(start, duration=20))
        listed = store.list_events(BASE - timedelta(days=1), BASE + timedelta(days=10))
        assert [r.event.start for r in listed] == sorted(r.event.start for r in listed)
        assert len(listed) == 100

    def test_file_matches_memory_after_every_create(self, store):
        for start in (60, 0, 30):
            store.create_event(make_event(start))
            on_disk = json.loads(store.path.read_text())
            assert [e["id"] for e in on_disk["events"]] == [r.id for r in store.records]


class TestListEvents:
    def test_empty_store(self, store):
        assert store.list_events(BASE, BASE + timedelta(hours=1)) == []

    def test_half_open_boundary(self, store):
        store.create_event(make_event(14 * 60, duration=30))  # 14:00-14:30
        assert store.list_events(BASE + timedelta(hours=14, minutes=30), BASE + timedelta(hours=15)) == []
        assert len(store.list_events(BASE + timedelta(hours=14), BASE + timedelta(hours=14, minutes=30))) == 1

    def test_invalid_range(self, store):
        with pytest.raises(ValueError):
            store.list_events(BASE, BASE)

    def test_random_ranges_match_brute_force(self, store):
        rng = random.Random(4)
        for _ in range(10):
            store.create_event(make_event(rng.randrange(0, 2000), duration=rng.randrange(5, 120)))
        for _ in range(50):
            a, b = sorted(rng.sample(range(0, 2200), 2))
            window_start = BASE + timedelta(minutes=a)
            window_end = BASE + timedelta(minutes=b)
            expected = brute_force_overlaps(store.records, window_start, window_end)
            assert store.list_events(window_start, window_end) == expected


class TestFindConflicts:
    def test_empty_store(self, store):
        assert store.find_conflicts(make_event(0)) == []

    def test_textbook_overlap(self, store):
        record = store.create_event(make_event(14 * 60, duration=30))
        conflicts = store.find_conflicts(make_event(14 * 60 + 15, duration=30))
        assert [c.id for c in conflicts] == [record.id]

    def test_half_open_adjacency_is_no_conflict(self, store):
        store.create_event(make_event(14 * 60, duration=30))  # ends 14:30
        assert store.find_conflicts(make_event(14 * 60 + 30, duration=30)) == []

    def test_randomized_stores_match_brute_force(self, tmp_path):
        rng = random.Random(11)
        for i in range(20):
            store = CalendarStore(tmp_path / f"s{i}.json")
            for _ in range(rng.randrange(0, 120)):
                store.create_event(make_event(rng.randrange(0, 5000), duration=rng.randrange(5, 180)))
            candidate = make_event(rng.randrange(0, 5000), duration=rng.randrange(5, 180))
            expected = brute_force_overlaps(store.records, candidate.start, candidate.end)
            assert store.find_conflicts(candidate) == expected


class TestPersistence:
    def test_round_trip_close_and_reopen(self, store):
        rng = random.Random(5)
        for _ in range(25):
            store.create_event(make_event(rng.randrange(0, 3000), duration=rng.randrange(5, 90)))
        store.set_external_id(store.records[3].id, "evt_ext")
        reopened = CalendarStore(store.path)
        assert [r.to_dict() for r in reopened.records] == [r.to_dict() for r in store.records]

    def test_create_is_atomic_under_write_failure(self, store, monkeypatch):
        store.create_event(make_event(0))
        before_records = store.records
        before_file = store.path.read_text()

        def explode(src, dst):
            raise OSError("disk full")

        monkeypatch.setattr(os, "replace", explode)
        with pytest.raises(StoreError):
            store.create_event(make_event(100))
        monkeypatch.undo()
        assert store.records == before_records
        assert store.path.read_text() == before_file
        # No stray temp files left behind.
        assert list(store.path.parent.glob("*.tmp")) == []

    def test_corrupt_file_raises(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{nope")
        with pytest.raises(StoreError):
            CalendarStore(path)

    def test_wrong_version_raises(self, tmp_path):
        path = tmp_path / "versioned.json"
        path.write_text('{"version": 99, "events": []}')
        with pytest.raises(StoreError):
            CalendarStore(path)

    def test_store_file_schema(self, store):
        store.create_event(make_event(14 * 60, title="Follow-up with Mr. Smith"))
        data = json.loads(store.path.read_text())
        assert data["version"] == 1
        (event,) = data["events"]
        assert set(event) == {
            "id", "title", "start", "end", "attendee", "description", "external_id", "created_at",
        }
        assert event["start"] == "2025-01-20T14:00:00+00:00"


class TestExternalId:
    def test_set_and_persist(self, store):
        record = store.create_event(make_event(0))
        updated = store.set_external_id(record.id, "evt_123")
        assert updated.external_id == "evt_123"
        assert CalendarStore(store.path).records[0].external_id == "evt_123"

    def test_reset_to_different_id_rejected(self, store):
        record = store.create_event(make_event(0))
        store.set_external_id(record.id, "evt_123")
        with pytest.raises(StoreError):
            store.set_external_id(record.id, "evt_456")

    def test_same_id_is_idempotent(self, store):
        record = store.create_event(make_event(0))
        store.set_external_id(record.id, "evt_123")
        assert store.set_external_id(record.id, "evt_123").external_id == "evt_123"

    def test_unknown_record(self, store):
        with pytest.raises(StoreError):
            store.set_external_id("missing", "evt_123")
