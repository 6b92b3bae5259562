"""Raw meter/trip parsing, validity filtering and conversion to daily profiles."""

from __future__ import annotations

import csv
import datetime as dt
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .common import (
    DataError,
    day_type_of,
    format_rfc3339,
    minutes_since_midnight,
    parse_rfc3339,
    steps_per_day,
)

log = logging.getLogger(__name__)

METER_HEADER = ["home_id", "timestamp", "kwh"]
TRIP_HEADER = [
    "home_id",
    "start",
    "duration_min",
    "distance_miles",
    "origin_home",
    "destination_home",
    "area_type",
]
HOMES_HEADER = ["home_id", "valid_start", "valid_end", "valid_days"]

AREA_TYPES = ("urban", "rural")

# Finest resolutions the daily profiles may use, per data type.
MIN_RESOLUTION_MINUTES = {"pv": 1, "load": 30, "ev": 1}


@dataclass(frozen=True)
class RawMeterReading:
    home_id: str
    timestamp: dt.datetime
    value: float
    data_type: str


@dataclass(frozen=True)
class RawTripRecord:
    home_id: str
    start: dt.datetime
    duration_min: float
    distance_miles: float
    origin_home: bool
    destination_home: bool
    area_type: str | None  # None when the home has no urban/rural classification


@dataclass(frozen=True)
class ValidityRange:
    """Start/end/duration of trustworthy data for one home; any field may be unknown."""

    start: dt.datetime | None = None
    end: dt.datetime | None = None
    duration: dt.timedelta | None = None

    def resolve(self) -> tuple[dt.datetime, dt.datetime] | None:
        """Infer the missing piece when two of the three are known.

        Returns the closed [start, end] window, or None when the range cannot
        be confirmed (fewer than two fields known, or an inconsistent triple).
        """
        known = sum(x is not None for x in (self.start, self.end, self.duration))
        if known < 2:
            return None
        if self.start is not None and self.end is not None:
            if self.duration is not None and self.end - self.start != self.duration:
                log.warning("inconsistent validity triple: end - start != duration")
                return None
            return self.start, self.end
        if self.start is not None:
            return self.start, self.start + self.duration  # type: ignore[operator]
        return self.end - self.duration, self.end  # type: ignore[operator]


@dataclass
class DayProfile:
    """One home-day of values at fixed resolution.

    ``values`` holds kWh per step (for ev: kWh of driving demand per step).
    ``availability`` is present only for ev days. ``gaps`` lists step indices
    with no underlying data.
    """

    home_id: str
    date: dt.date
    data_type: str
    values: np.ndarray
    gaps: list[int] = field(default_factory=list)
    availability: np.ndarray | None = None

    @property
    def day_type(self) -> str:
        return day_type_of(self.date)

    @property
    def t_steps(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class ConsumptionFactors:
    """kWh-per-mile by driving class plus the feasibility caps.

    There are deliberately no default factor values; they are configuration
    inputs the caller must supply.
    """

    urban: float
    rural: float
    motorway: float
    motorway_threshold_miles: float = 10.0
    max_hourly_kwh: float = float("inf")
    max_daily_kwh: float = float("inf")

    def __post_init__(self):
        for name in ("urban", "rural", "motorway", "motorway_threshold_miles"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")

    def per_mile(self, trip_class: str) -> float:
        return {"urban": self.urban, "rural": self.rural, "motorway": self.motorway}[trip_class]


def trip_class(trip: RawTripRecord, factors: ConsumptionFactors) -> str:
    """Motorway above the distance threshold, else the home's area type."""
    if trip.distance_miles > factors.motorway_threshold_miles:
        return "motorway"
    assert trip.area_type is not None
    return trip.area_type


def trip_energy_kwh(trip: RawTripRecord, factors: ConsumptionFactors) -> float:
    return trip.distance_miles * factors.per_mile(trip_class(trip, factors))


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


@dataclass
class ParseResult:
    readings: list[RawMeterReading]
    n_skipped: int = 0


def _open_stream(source) -> io.TextIOBase:
    if isinstance(source, (str, Path)):
        return open(source, "r", newline="")
    return source


def parse_meter(source, data_type: str, max_malformed_fraction: float = 0.05) -> ParseResult:
    """Read a meter CSV (header ``home_id,timestamp,kwh``).

    Malformed rows are counted and skipped; more than max_malformed_fraction
    of them is fatal. The result is sorted by (home, timestamp).
    """
    stream = _open_stream(source)
    close = isinstance(source, (str, Path))
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("meter CSV is empty (missing header at line 1)")
        if [h.strip() for h in header] != METER_HEADER:
            raise DataError(f"meter CSV line 1: expected header {','.join(METER_HEADER)}")
        readings: list[RawMeterReading] = []
        skipped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) != 3:
                    raise ValueError("field count")
                value = float(row[2])
                if not np.isfinite(value) or value < 0:
                    raise ValueError("negative or non-finite value")
                readings.append(
                    RawMeterReading(
                        home_id=row[0].strip(),
                        timestamp=parse_rfc3339(row[1]),
                        value=value,
                        data_type=data_type,
                    )
                )
            except (ValueError, IndexError):
                skipped += 1
                log.debug("skipping malformed meter row at line %d", lineno)
        total = len(readings) + skipped
        if total > 0 and skipped / total > max_malformed_fraction:
            raise DataError(f"{skipped}/{total} malformed meter rows exceeds limit {max_malformed_fraction}")
        readings.sort(key=lambda r: (r.home_id, r.timestamp))
        return ParseResult(readings, skipped)
    finally:
        if close:
            stream.close()


@dataclass
class TripParseResult:
    trips: list[RawTripRecord]
    n_skipped: int = 0


def parse_trips(source, max_malformed_fraction: float = 0.05) -> TripParseResult:
    """Read a trip-diary CSV; empty area_type means the home is unclassified."""
    stream = _open_stream(source)
    close = isinstance(source, (str, Path))
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("trip CSV is empty (missing header at line 1)")
        if [h.strip() for h in header] != TRIP_HEADER:
            raise DataError(f"trip CSV line 1: expected header {','.join(TRIP_HEADER)}")
        trips: list[RawTripRecord] = []
        skipped = 0
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            try:
                if len(row) != 7:
                    raise ValueError("field count")
                duration = float(row[2])
                distance = float(row[3])
                if duration <= 0 or distance < 0:
                    raise ValueError("bad duration/distance")
                if row[4] not in ("0", "1") or row[5] not in ("0", "1"):
                    raise ValueError("flags must be 0/1")
                area = row[6].strip() or None
                if area is not None and area not in AREA_TYPES:
                    raise ValueError("bad area_type")
                trips.append(
                    RawTripRecord(
                        home_id=row[0].strip(),
                        start=parse_rfc3339(row[1]),
                        duration_min=duration,
                        distance_miles=distance,
                        origin_home=row[4] == "1",
                        destination_home=row[5] == "1",
                        area_type=area,
                    )
                )
            except (ValueError, IndexError):
                skipped += 1
                log.debug("skipping malformed trip row at line %d", lineno)
        total = len(trips) + skipped
        if total > 0 and skipped / total > max_malformed_fraction:
            raise DataError(f"{skipped}/{total} malformed trip rows exceeds limit {max_malformed_fraction}")
        trips.sort(key=lambda t: (t.home_id, t.start))
        return TripParseResult(trips, skipped)
    finally:
        if close:
            stream.close()


def parse_validity(source) -> dict[str, ValidityRange]:
    """Read the per-home validity sidecar (``home_id,valid_start,valid_end,valid_days``)."""
    stream = _open_stream(source)
    close = isinstance(source, (str, Path))
    try:
        reader = csv.reader(stream)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError("homes CSV is empty (missing header at line 1)")
        if [h.strip() for h in header] != HOMES_HEADER:
            raise DataError(f"homes CSV line 1: expected header {','.join(HOMES_HEADER)}")
        out: dict[str, ValidityRange] = {}
        for row in reader:
            if not row:
                continue
            start = parse_rfc3339(row[1]) if row[1].strip() else None
            end = parse_rfc3339(row[2]) if row[2].strip() else None
            duration = dt.timedelta(days=float(row[3])) if row[3].strip() else None
            out[row[0].strip()] = ValidityRange(start, end, duration)
        return out
    finally:
        if close:
            stream.close()


# ---------------------------------------------------------------------------
# Filtering
# ---------------------------------------------------------------------------


def enforce_validity(readings: Sequence[RawMeterReading], vrange: ValidityRange) -> list[RawMeterReading]:
    """Keep readings inside the home's resolved validity window.

    With fewer than two of (start, end, duration) known the validity of the
    data cannot be confirmed and everything is discarded.
    """
    window = vrange.resolve()
    if window is None:
        return []
    start, end = window
    return [r for r in readings if start <= r.timestamp <= end]


@dataclass
class TripFilter:
    kept: list[RawTripRecord]
    n_unclassified: int = 0
    n_over_hourly: int = 0
    n_days_over_daily: int = 0


def filter_trips(trips: Iterable[RawTripRecord], factors: ConsumptionFactors) -> TripFilter:
    """Drop infeasible trips.

    Trips from unclassified homes go first; then trips whose implied energy
    rate exceeds the hourly cap (the cap pro-rates to any step length, which
    reduces to a rate comparison); finally whole home-days whose remaining
    total exceeds the daily cap.
    """
    classified: list[RawTripRecord] = []
    n_unclassified = 0
    for trip in trips:
        if trip.area_type is None:
            n_unclassified += 1
        else:
            classified.append(trip)

    within_rate: list[RawTripRecord] = []
    n_over_hourly = 0
    for trip in classified:
        energy = trip_energy_kwh(trip, factors)
        if energy / (trip.duration_min / 60.0) > factors.max_hourly_kwh:
            n_over_hourly += 1
        else:
            within_rate.append(trip)

    day_totals: dict[tuple[str, dt.date], float] = {}
    for trip in within_rate:
        key = (trip.home_id, trip.start.date())
        day_totals[key] = day_totals.get(key, 0.0) + trip_energy_kwh(trip, factors)
    bad_days = {key for key, total in day_totals.items() if total > factors.max_daily_kwh}
    kept = [t for t in within_rate if (t.home_id, t.start.date()) not in bad_days]
    return TripFilter(kept, n_unclassified, n_over_hourly, len(bad_days))


# ---------------------------------------------------------------------------
# Daily profile construction
# ---------------------------------------------------------------------------


def infer_native_resolution(readings: Sequence[RawMeterReading], sample: int = 2000) -> int:
    """Most common positive gap (in minutes) between consecutive readings of one home."""
    deltas: dict[int, int] = {}
    count = 0
    prev: RawMeterReading | None = None
    for r in readings:
        if prev is not None and prev.home_id == r.home_id:
            gap = int(round((r.timestamp - prev.timestamp).total_seconds() / 60.0))
            if gap > 0:
                deltas[gap] = deltas.get(gap, 0) + 1
                count += 1
                if count >= sample:
                    break
        prev = r
    if not deltas:
        raise DataError("cannot infer native resolution from fewer than 2 readings per home")
    return sorted(deltas, key=lambda k: (-deltas[k], k))[0]


def resample_day(
    readings: Sequence[RawMeterReading],
    date: dt.date,
    native_minutes: int,
    target_minutes: int,
) -> DayProfile:
    """Sum one home-day of readings into target bins, conserving energy.

    A target bin joins ``gaps`` only when every native slot inside it is
    missing; partially covered bins keep the partial sum.
    """
    if not readings:
        raise ValueError("resample_day needs at least one reading")
    data_type = readings[0].data_type
    if target_minutes < native_minutes:
        raise ValueError(f"target resolution {target_minutes} finer than native {native_minutes}")
    if target_minutes % native_minutes != 0:
        raise ValueError(f"target {target_minutes} must be a multiple of native {native_minutes}")
    floor = MIN_RESOLUTION_MINUTES.get(data_type, 1)
    if target_minutes < floor:
        raise ValueError(f"{data_type} resolution must be >= {floor} minutes")
    t_native = steps_per_day(native_minutes)
    t_target = steps_per_day(target_minutes)

    native = np.full(t_native, np.nan)
    for r in readings:
        if r.timestamp.date() != date:
            raise ValueError(f"reading at {r.timestamp} is not on {date}")
        slot = int(minutes_since_midnight(r.timestamp) // native_minutes)
        native[slot] = r.value if np.isnan(native[slot]) else native[slot] + r.value

    ratio = target_minutes // native_minutes
    grouped = native.reshape(t_target, ratio)
    values = np.nansum(grouped, axis=1)
    gaps = [t for t in range(t_target) if np.isnan(grouped[t]).all()]
    values[gaps] = 0.0
    return DayProfile(readings[0].home_id, date, data_type, values, gaps=gaps)


def days_from_readings(
    readings: Sequence[RawMeterReading],
    native_minutes: int,
    target_minutes: int,
) -> list[DayProfile]:
    """Split one home's readings into calendar days and resample each."""
    days: list[DayProfile] = []
    bucket: list[RawMeterReading] = []
    for r in readings:
        if bucket and (r.home_id != bucket[0].home_id or r.timestamp.date() != bucket[0].timestamp.date()):
            days.append(resample_day(bucket, bucket[0].timestamp.date(), native_minutes, target_minutes))
            bucket = []
        bucket.append(r)
    if bucket:
        days.append(resample_day(bucket, bucket[0].timestamp.date(), native_minutes, target_minutes))
    return days


def _overlap_minutes(a0: float, a1: float, b0: float, b1: float) -> float:
    return max(0.0, min(a1, b1) - max(a0, b0))


def trips_to_ev_day(
    trips: Sequence[RawTripRecord],
    factors: ConsumptionFactors,
    area_type: str,
    resolution_minutes: int,
    date: dt.date,
    at_home_start: bool = True,
) -> tuple[DayProfile, bool]:
    """Convert one home-day of trips into driving demand and availability.

    Distance is spread uniformly over each trip's duration; the per-step kWh
    is distance times the class factor. Availability is 0 on every step that
    overlaps a span from a home-departing trip to the next home-arriving one.
    Returns the profile plus the at-home state at midnight for the next day.

    Preconditions: trips sorted by start, none overlapping, all within `date`
    (callers split midnight-crossing trips beforehand).
    """
    t_steps = steps_per_day(resolution_minutes)
    values = np.zeros(t_steps)
    prev_end = -1.0
    spans: list[tuple[float, float]] = []
    away_since: float | None = None if at_home_start else 0.0

    for trip in trips:
        start_min = minutes_since_midnight(trip.start)
        if trip.start.date() != date:
            raise ValueError(f"trip at {trip.start} is not on {date}")
        end_min = start_min + trip.duration_min
        if start_min < prev_end - 1e-9:
            raise ValueError("overlapping trips")
        prev_end = end_min
        if end_min > 1440.0 + 1e-9:
            raise ValueError("trip crosses midnight; split it first")

        cls = "motorway" if trip.distance_miles > factors.motorway_threshold_miles else area_type
        kwh_per_mile = factors.per_mile(cls)
        first = int(start_min // resolution_minutes)
        last = min(int((end_min - 1e-9) // resolution_minutes), t_steps - 1)
        for t in range(first, last + 1):
            frac = _overlap_minutes(start_min, end_min, t * resolution_minutes, (t + 1) * resolution_minutes)
            values[t] += trip.distance_miles * (frac / trip.duration_min) * kwh_per_mile

        if trip.origin_home and away_since is None:
            away_since = start_min
        if trip.destination_home:
            spans.append((away_since if away_since is not None else start_min, end_min))
            away_since = None

    if away_since is not None:
        spans.append((away_since, 1440.0))
    availability = np.ones(t_steps)
    for lo, hi in spans:
        for t in range(t_steps):
            if _overlap_minutes(lo, hi, t * resolution_minutes, (t + 1) * resolution_minutes) > 1e-9:
                availability[t] = 0.0

    profile = DayProfile(
        trips[0].home_id if trips else "",
        date,
        "ev",
        values,
        availability=availability,
    )
    return profile, away_since is None


def _split_midnight(trip: RawTripRecord) -> list[RawTripRecord]:
    start_min = minutes_since_midnight(trip.start)
    end_min = start_min + trip.duration_min
    if end_min <= 1440.0 + 1e-9:
        return [trip]
    first_dur = 1440.0 - start_min
    frac = first_dur / trip.duration_min
    midnight = dt.datetime.combine(
        trip.start.date() + dt.timedelta(days=1), dt.time(0, 0), tzinfo=trip.start.tzinfo
    )
    head = RawTripRecord(
        trip.home_id, trip.start, first_dur, trip.distance_miles * frac,
        trip.origin_home, False, trip.area_type,
    )
    tail = RawTripRecord(
        trip.home_id, midnight, trip.duration_min - first_dur, trip.distance_miles * (1.0 - frac),
        False, trip.destination_home, trip.area_type,
    )
    return [head] + _split_midnight(tail)


@dataclass
class EvDaysResult:
    days: list[DayProfile]
    n_discarded: int = 0


def build_ev_days(
    trips: Sequence[RawTripRecord],
    factors: ConsumptionFactors,
    resolution_minutes: int,
) -> EvDaysResult:
    """All ev day profiles for one home, covering its first to last trip date.

    Midnight-crossing trips are split at the boundary, the at-home state is
    carried across midnight, days with no trips become zero/available days,
    and days with overlapping trips are discarded (state resets to at-home).
    """
    if not trips:
        return EvDaysResult([])
    area = trips[0].area_type
    if area is None:
        raise ValueError("build_ev_days requires a classified home")
    home_id = trips[0].home_id

    pieces: list[RawTripRecord] = []
    for trip in sorted(trips, key=lambda t: t.start):
        pieces.extend(_split_midnight(trip))
    by_date: dict[dt.date, list[RawTripRecord]] = {}
    for piece in pieces:
        by_date.setdefault(piece.start.date(), []).append(piece)

    first = min(by_date)
    last = max(by_date)
    days: list[DayProfile] = []
    n_discarded = 0
    at_home = True
    date = first
    while date <= last:
        day_trips = sorted(by_date.get(date, []), key=lambda t: t.start)
        try:
            profile, at_home = trips_to_ev_day(
                day_trips, factors, area, resolution_minutes, date, at_home_start=at_home
            )
            profile.home_id = home_id
            days.append(profile)
        except ValueError:
            n_discarded += 1
            at_home = True
        date += dt.timedelta(days=1)
    return EvDaysResult(days, n_discarded)


# ---------------------------------------------------------------------------
# Segmenting
# ---------------------------------------------------------------------------


def segment_homes(records_by_home: Mapping[str, Sequence], n_segments: int) -> list[dict[str, Sequence]]:
    """Partition homes into n_segments without splitting any home.

    Largest homes are placed first onto the currently smallest segment, so
    segment sizes stay balanced to within one home's worth of records.
    """
    if n_segments < 1:
        raise ValueError("n_segments must be >= 1")
    segments: list[dict[str, Sequence]] = [{} for _ in range(n_segments)]
    loads = [0] * n_segments
    homes = sorted(records_by_home, key=lambda h: (-len(records_by_home[h]), h))
    for home in homes:
        idx = loads.index(min(loads))
        segments[idx][home] = records_by_home[home]
        loads[idx] += len(records_by_home[home])
    return segments


def write_meter_csv(path: Path, readings: Iterable[RawMeterReading]) -> int:
    """Helper used by tests and tooling; full-precision values."""
    n = 0
    with open(path, "w", newline="") as fh:
        fh.write(",".join(METER_HEADER) + "\n")
        for r in readings:
            fh.write(f"{r.home_id},{format_rfc3339(r.timestamp)},{r.value!r}\n")
            n += 1
    return n
