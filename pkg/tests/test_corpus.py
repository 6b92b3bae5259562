"""Synthetic corpus: determinism, schemas, defect bookkeeping, ground truth."""

import csv
import datetime as dt
import hashlib
import json
from pathlib import Path

import numpy as np
import pytest

from profilegen.corpus import (
    Archetype,
    CorpusSpec,
    default_ev_archetypes,
    default_load_archetypes,
    reference_spec,
    synth_corpus,
)

from conftest import single_type_spec


def _file_hashes(out_dir: Path) -> dict[str, str]:
    return {
        p.name: hashlib.sha256(p.read_bytes()).hexdigest()
        for p in sorted(out_dir.iterdir())
        if p.suffix in (".csv", ".json")
    }


def test_zero_defect_spec_emits_complete_days(tmp_path):
    spec = single_type_spec(1, 2)
    files = synth_corpus(spec, tmp_path)
    with open(files.meter_paths["load"]) as fh:
        rows = list(csv.DictReader(fh))
    assert len(rows) == 2 * 24
    assert all(not r["defect_positions"] for r in files.labels["records"])


def test_same_spec_and_seed_byte_identical(tmp_path):
    spec = single_type_spec(5, 6, seed=42, single_missing_rate=0.05, invalid_home_rate=0.2)
    first = synth_corpus(spec, tmp_path / "a")
    second = synth_corpus(spec, tmp_path / "b")
    assert _file_hashes(first.out_dir) == _file_hashes(second.out_dir)


def test_different_seed_differs(tmp_path):
    a = synth_corpus(single_type_spec(3, 3, seed=1), tmp_path / "a")
    b = synth_corpus(single_type_spec(3, 3, seed=2), tmp_path / "b")
    assert _file_hashes(a.out_dir) != _file_hashes(b.out_dir)


def test_single_missing_rate_binomial_count(tmp_path):
    # 1000 home-days at T=24 and rate 0.1: expect 2400 +- 150 (binomial 3 sigma)
    spec = single_type_spec(50, 20, seed=9, single_missing_rate=0.1)
    files = synth_corpus(spec, tmp_path)
    masked = sum(len(r["defect_positions"]) for r in files.labels["records"])
    assert abs(masked - 2400) <= 150


def test_defect_positions_match_missing_rows_exactly(tmp_path):
    spec = single_type_spec(6, 8, seed=3, single_missing_rate=0.08, multi_gap_day_rate=0.2)
    files = synth_corpus(spec, tmp_path)
    present: dict[tuple[str, str], set[int]] = {}
    with open(files.meter_paths["load"]) as fh:
        for row in csv.DictReader(fh):
            stamp = dt.datetime.fromisoformat(row["timestamp"].replace("Z", "+00:00"))
            key = (row["home_id"], stamp.date().isoformat())
            present.setdefault(key, set()).add(stamp.hour)
    for record in files.labels["records"]:
        key = (record["home_id"], record["date"])
        have = present.get(key, set())
        missing = set(range(24)) - have
        assert missing == set(record["defect_positions"])


def test_defect_free_day_sums_match_label_factor(tmp_path):
    spec = single_type_spec(4, 5, seed=8)
    files = synth_corpus(spec, tmp_path)
    sums: dict[tuple[str, str], float] = {}
    with open(files.meter_paths["load"]) as fh:
        for row in csv.DictReader(fh):
            stamp = dt.datetime.fromisoformat(row["timestamp"].replace("Z", "+00:00"))
            key = (row["home_id"], stamp.date().isoformat())
            sums[key] = sums.get(key, 0.0) + float(row["kwh"])
    for record in files.labels["records"]:
        assert sums[(record["home_id"], record["date"])] == pytest.approx(
            record["factor"], abs=1e-9
        )


def test_emitted_counts_match_files(tmp_path):
    spec = reference_spec(n_homes=6, n_days=5, seed=4)
    files = synth_corpus(spec, tmp_path)
    for data_type, path in files.meter_paths.items():
        with open(path) as fh:
            n_rows = sum(1 for _ in fh) - 1
        assert files.labels["emitted_counts"][data_type] == n_rows
    with open(files.trips_path) as fh:
        assert files.labels["emitted_counts"]["trips"] == sum(1 for _ in fh) - 1


def test_invalid_homes_have_incomplete_validity(tmp_path):
    spec = single_type_spec(40, 3, seed=6, invalid_home_rate=0.3)
    files = synth_corpus(spec, tmp_path)
    invalid = set(files.labels["invalid_range_homes"])
    assert invalid  # rate 0.3 over 40 homes: virtually certain
    with open(files.homes_path) as fh:
        for row in csv.DictReader(fh):
            incomplete = not row["valid_end"] and not row["valid_days"]
            assert (row["home_id"] in invalid) == incomplete


def test_ev_labels_record_total_miles(tmp_path):
    spec = reference_spec(n_homes=3, n_days=4, seed=12, data_types=("ev",))
    files = synth_corpus(spec, tmp_path)
    miles: dict[tuple[str, str], float] = {}
    with open(files.trips_path) as fh:
        for row in csv.DictReader(fh):
            stamp = dt.datetime.fromisoformat(row["start"].replace("Z", "+00:00"))
            key = (row["home_id"], stamp.date().isoformat())
            miles[key] = miles.get(key, 0.0) + float(row["distance_miles"])
    for record in files.labels["records"]:
        got = miles.get((record["home_id"], record["date"]), 0.0)
        assert got == pytest.approx(record["factor"], abs=1e-9)


def test_archetype_factors_follow_their_mean(tmp_path):
    spec = single_type_spec(30, 30, seed=21, n_archetypes=2)
    files = synth_corpus(spec, tmp_path)
    by_arch: dict[int, list[float]] = {0: [], 1: []}
    for record in files.labels["records"]:
        by_arch[record["archetype_id"]].append(record["factor"])
    means = {a: float(np.exp(np.mean(np.log(f)))) for a, f in by_arch.items() if f}
    # archetype geometric means are 8 and 10 in the fixture
    assert means[0] == pytest.approx(8.0, rel=0.15)
    assert means[1] == pytest.approx(10.0, rel=0.15)


@pytest.mark.parametrize(
    "kwargs,field",
    [
        (dict(n_homes=0), "n_homes"),
        (dict(n_days=0), "n_days"),
        (dict(single_missing_rate=1.5), "single_missing_rate"),
        (dict(invalid_home_rate=-0.1), "invalid_home_rate"),
    ],
)
def test_invalid_spec_rejected_with_field_name(kwargs, field):
    base = dict(
        n_homes=2,
        n_days=2,
        resolution_minutes=60,
        archetypes={"load": default_load_archetypes(24)},
    )
    base.update(kwargs)
    with pytest.raises(ValueError, match=field):
        CorpusSpec(**base).validate()


def test_resolution_must_divide_day():
    with pytest.raises(ValueError, match="resolution"):
        CorpusSpec(1, 1, 37, {"load": default_load_archetypes(24)}).validate()


def test_shape_length_must_match_resolution():
    arch = Archetype("x", (1.0, 2.0, 3.0), 5.0, 0.5, 0.1)
    with pytest.raises(ValueError, match="shape length"):
        CorpusSpec(1, 1, 60, {"load": (arch,)}).validate()


def test_ev_archetypes_have_driving_blocks():
    for arch in default_ev_archetypes(24):
        shape = np.array(arch.shape)
        assert (shape > 0).any() and (shape == 0).any()
