"""RFC 3339 UTC timestamp helpers.

All persisted and wire timestamps are RFC 3339 in UTC with a ``Z``
suffix. Python 3.10's ``fromisoformat`` does not accept ``Z``, hence the
small parser here.
"""

from datetime import datetime, timedelta, timezone


def utc_now() -> datetime:
    return datetime.now(timezone.utc)


def epoch_to_utc(seconds: float) -> datetime:
    return datetime.fromtimestamp(seconds, tz=timezone.utc)


def parse_rfc3339(text: str) -> datetime:
    t = text.strip()
    if t.endswith(("Z", "z")):
        t = t[:-1] + "+00:00"
    dt = datetime.fromisoformat(t)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def format_rfc3339(dt: datetime) -> str:
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    base = dt.strftime("%Y-%m-%dT%H:%M:%S")
    if dt.microsecond:
        return f"{base}.{dt.microsecond:06d}Z"
    return base + "Z"


def parse_timestamp(text: str) -> datetime:
    """Accept RFC 3339 or integer/float seconds since the Unix epoch."""
    try:
        return epoch_to_utc(float(text))
    except (ValueError, OverflowError):
        return parse_rfc3339(text)


def seconds_between(start: datetime, end: datetime) -> float:
    return (end - start).total_seconds()


def add_seconds(dt: datetime, seconds: float) -> datetime:
    return dt + timedelta(seconds=seconds)
