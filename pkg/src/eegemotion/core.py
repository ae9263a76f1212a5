"""Domain types, dataset CSV I/O, and deterministic splitting.

A dataset is stored columnar (one float64 matrix of channel values plus
label/timestamp/subject columns) so that million-record files stay cheap
to clean, split, and train on.  Records materialize as `SampleRecord`
views on demand.
"""

from __future__ import annotations

import csv
import enum
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Optional

import numpy as np

from .rng import Rng


class ChannelId(enum.IntEnum):
    """The 14 headset channels, in canonical (file column) order."""

    AF3 = 0
    F7 = 1
    F3 = 2
    FC5 = 3
    T7 = 4
    P7 = 5
    O1 = 6
    O2 = 7
    P8 = 8
    T8 = 9
    FC6 = 10
    F4 = 11
    F8 = 12
    AF4 = 13


CHANNEL_NAMES = tuple(c.name for c in ChannelId)
N_CHANNELS = len(CHANNEL_NAMES)


class EmotionLabel(enum.IntEnum):
    """Emotion classes; the int value fixes the canonical tie-break order."""

    HAPPY = 0
    RELAXED = 1
    SAD = 2


LABELS = tuple(EmotionLabel)
LABEL_NAMES = tuple(l.name for l in LABELS)

CSV_HEADER = ["subject", "timestamp_ms", "label"] + list(CHANNEL_NAMES)

_UNLABELED = -1


class DatasetFormatError(ValueError):
    """Header or column layout does not match the dataset CSV format."""


class DatasetParseError(ValueError):
    """A data row could not be parsed; the message carries the row number."""


@dataclass(frozen=True)
class SampleRecord:
    """One timestamped 14-channel sample, optionally labeled."""

    subject_id: str
    timestamp_ms: int
    label: Optional[EmotionLabel]
    values: np.ndarray

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.float64)
        if vals.shape != (N_CHANNELS,):
            raise ValueError(f"expected {N_CHANNELS} channel values, got shape {vals.shape}")
        if not np.isfinite(vals).all():
            raise ValueError("channel values must be finite")
        if self.timestamp_ms < 0:
            raise ValueError("timestamp_ms must be >= 0")
        object.__setattr__(self, "values", vals)


@dataclass(frozen=True)
class SubjectInfo:
    code: str
    age: int
    gender: str = ""
    civil_status: str = ""
    education: str = ""

    def __post_init__(self):
        if not self.code:
            raise ValueError("subject code must be non-empty")
        if not 1 <= self.age <= 130:
            raise ValueError(f"age {self.age} outside [1, 130]")


class Dataset:
    """Ordered collection of samples with optional subject metadata.

    Immutable after construction; all operations return new datasets.
    """

    def __init__(
        self,
        values: np.ndarray,
        labels: np.ndarray,
        timestamps: np.ndarray,
        subject_ids: list[str],
        subjects: Optional[dict[str, SubjectInfo]] = None,
    ):
        values = np.ascontiguousarray(values, dtype=np.float64)
        if values.ndim != 2 or values.shape[1] != N_CHANNELS:
            raise ValueError(f"values must be (n, {N_CHANNELS})")
        n = values.shape[0]
        labels = np.asarray(labels, dtype=np.int8)
        timestamps = np.asarray(timestamps, dtype=np.int64)
        if labels.shape != (n,) or timestamps.shape != (n,) or len(subject_ids) != n:
            raise ValueError("column lengths disagree")
        if n and not np.isfinite(values).all():
            raise ValueError("channel values must be finite")
        if n and timestamps.min() < 0:
            raise ValueError("timestamps must be >= 0")
        self._values = values
        self._labels = labels
        self._timestamps = timestamps
        self._subject_ids = list(subject_ids)
        self.subjects = dict(subjects or {})
        for arr in (self._values, self._labels, self._timestamps):
            arr.flags.writeable = False

    @classmethod
    def from_records(
        cls, records: Iterable[SampleRecord], subjects: Optional[dict[str, SubjectInfo]] = None
    ) -> "Dataset":
        records = list(records)
        n = len(records)
        values = np.empty((n, N_CHANNELS), dtype=np.float64)
        labels = np.empty(n, dtype=np.int8)
        timestamps = np.empty(n, dtype=np.int64)
        subject_ids = []
        for i, r in enumerate(records):
            values[i] = r.values
            labels[i] = _UNLABELED if r.label is None else int(r.label)
            timestamps[i] = r.timestamp_ms
            subject_ids.append(r.subject_id)
        return cls(values, labels, timestamps, subject_ids, subjects)

    @classmethod
    def empty(cls) -> "Dataset":
        return cls(np.empty((0, N_CHANNELS)), np.empty(0, np.int8), np.empty(0, np.int64), [])

    # columnar views (read-only)
    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def label_codes(self) -> np.ndarray:
        """Per-record label as int, -1 for unlabeled."""
        return self._labels

    @property
    def timestamps(self) -> np.ndarray:
        return self._timestamps

    @property
    def subject_ids(self) -> list[str]:
        return list(self._subject_ids)

    def __len__(self) -> int:
        return self._values.shape[0]

    def __getitem__(self, i: int) -> SampleRecord:
        code = self._labels[i]
        return SampleRecord(
            subject_id=self._subject_ids[i],
            timestamp_ms=int(self._timestamps[i]),
            label=None if code == _UNLABELED else EmotionLabel(code),
            values=self._values[i].copy(),
        )

    def __iter__(self) -> Iterator[SampleRecord]:
        for i in range(len(self)):
            yield self[i]

    def is_labeled(self) -> bool:
        return len(self) > 0 and bool((self._labels != _UNLABELED).all())

    def class_counts(self) -> dict[EmotionLabel, int]:
        out = {}
        for lab in LABELS:
            c = int((self._labels == int(lab)).sum())
            if c:
                out[lab] = c
        return out

    def take(self, indices: np.ndarray) -> "Dataset":
        indices = np.asarray(indices, dtype=np.int64)
        return Dataset(
            self._values[indices],
            self._labels[indices],
            self._timestamps[indices],
            [self._subject_ids[i] for i in indices],
            self.subjects,
        )

    def records_equal(self, other: "Dataset") -> bool:
        return (
            len(self) == len(other)
            and np.array_equal(self._values, other._values)
            and np.array_equal(self._labels, other._labels)
            and np.array_equal(self._timestamps, other._timestamps)
            and self._subject_ids == other._subject_ids
        )


def load_dataset(path) -> Dataset:
    """Read a dataset CSV, validating the canonical header and every row."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasetFormatError("empty file: missing header") from None
        if header != CSV_HEADER:
            _explain_header(header)
        rows_v, rows_l, rows_t, rows_s = [], [], [], []
        for rownum, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(CSV_HEADER):
                raise DatasetParseError(f"row {rownum}: expected {len(CSV_HEADER)} fields, got {len(row)}")
            subject, ts_s, label_s = row[0], row[1], row[2]
            try:
                ts = int(ts_s)
            except ValueError:
                raise DatasetParseError(f"row {rownum}: bad timestamp_ms {ts_s!r}") from None
            if ts < 0:
                raise DatasetParseError(f"row {rownum}: negative timestamp_ms")
            if label_s == "":
                lab = _UNLABELED
            elif label_s in LABEL_NAMES:
                lab = int(EmotionLabel[label_s])
            else:
                raise DatasetParseError(f"row {rownum}: unknown label {label_s!r}")
            vals = np.empty(N_CHANNELS, dtype=np.float64)
            for j, cell in enumerate(row[3:]):
                try:
                    v = float(cell)
                except ValueError:
                    raise DatasetParseError(
                        f"row {rownum}: non-numeric value {cell!r} in column {CHANNEL_NAMES[j]}"
                    ) from None
                if not np.isfinite(v):
                    raise DatasetParseError(
                        f"row {rownum}: non-finite value {cell!r} in column {CHANNEL_NAMES[j]}"
                    )
                vals[j] = v
            rows_v.append(vals)
            rows_l.append(lab)
            rows_t.append(ts)
            rows_s.append(subject)
    n = len(rows_v)
    values = np.vstack(rows_v) if n else np.empty((0, N_CHANNELS))
    return Dataset(values, np.array(rows_l, np.int8), np.array(rows_t, np.int64), rows_s)


def _explain_header(header: list[str]) -> None:
    missing = [c for c in CSV_HEADER if c not in header]
    extra = [c for c in header if c not in CSV_HEADER]
    if missing:
        raise DatasetFormatError(f"missing column(s): {', '.join(missing)}")
    if extra:
        raise DatasetFormatError(f"unexpected column(s): {', '.join(extra)}")
    raise DatasetFormatError(
        f"columns out of canonical order: expected {','.join(CSV_HEADER)}"
    )


def save_dataset(ds: Dataset, path) -> None:
    """Write the dataset CSV; values use shortest round-trip rendering."""
    labels = ds.label_codes
    ts = ds.timestamps
    subs = ds.subject_ids
    vals = ds.values
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(CSV_HEADER) + "\n")
        for i in range(len(ds)):
            lab = "" if labels[i] == _UNLABELED else EmotionLabel(int(labels[i])).name
            cells = [subs[i], str(int(ts[i])), lab]
            cells.extend(repr(float(v)) for v in vals[i])
            fh.write(",".join(cells) + "\n")


def random_split(ds: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Plain uniform split (no stratification); deterministic given seed."""
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    if not 0.0 < train_fraction < 1.0:
        raise ValueError(f"train_fraction {train_fraction} outside (0, 1)")
    n = len(ds)
    k = int(np.floor(train_fraction * n + 0.5))
    perm = Rng(seed).permutation(n)
    return ds.take(perm[:k]), ds.take(perm[k:])


def sample_subset(ds: Dataset, n: int, seed: int) -> Dataset:
    """Uniform sample of n records without replacement."""
    if n < 0 or n > len(ds):
        raise ValueError(f"cannot sample {n} of {len(ds)} records")
    perm = Rng(seed).permutation(len(ds))
    return ds.take(perm[:n])
