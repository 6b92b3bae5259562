"""Shared helpers: calendar rules, RFC 3339 timestamps, error types."""

from __future__ import annotations

import datetime as dt

WEEKDAY = "wd"
WEEKEND = "we"
DAY_TYPES = (WEEKDAY, WEEKEND)

#: The four day-type transition keys, in canonical order.
DAY_TYPE_TRANSITIONS = (
    (WEEKDAY, WEEKDAY),
    (WEEKDAY, WEEKEND),
    (WEEKEND, WEEKDAY),
    (WEEKEND, WEEKEND),
)

DATA_TYPES = ("load", "pv", "ev")


class ConfigError(Exception):
    """Invalid or missing configuration; names the offending field."""


class DataError(Exception):
    """Unreadable or structurally broken input data."""


class MissingArtifactError(Exception):
    """A required pipeline artifact is absent; names the missing key or file."""


def day_type_of(date: dt.date) -> str:
    """Saturday and Sunday count as weekend days, everything else as weekdays."""
    return WEEKEND if date.weekday() >= 5 else WEEKDAY


def parse_rfc3339(text: str) -> dt.datetime:
    """Parse an RFC 3339 UTC instant such as ``2013-01-01T00:00:00Z``."""
    raw = text.strip()
    if raw.endswith(("Z", "z")):
        raw = raw[:-1] + "+00:00"
    stamp = dt.datetime.fromisoformat(raw)
    if stamp.tzinfo is None:
        raise ValueError(f"timestamp {text!r} has no timezone")
    return stamp.astimezone(dt.timezone.utc)


def format_rfc3339(stamp: dt.datetime) -> str:
    if stamp.tzinfo is None:
        raise ValueError("naive datetime cannot be formatted as RFC 3339")
    return stamp.astimezone(dt.timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")


def minutes_since_midnight(stamp: dt.datetime) -> float:
    return stamp.hour * 60 + stamp.minute + stamp.second / 60.0


def steps_per_day(resolution_minutes: int) -> int:
    if resolution_minutes < 1 or 1440 % resolution_minutes != 0:
        raise ValueError(f"resolution_minutes={resolution_minutes} must divide 1440")
    return 1440 // resolution_minutes
