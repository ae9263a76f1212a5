"""Frame sources standing in for the headset, plus contact quality.

Replay re-emits a stored dataset at a configured rate; the synthetic
source draws class-conditional Gaussian channels from a profile whose
default variances are the published per-class sensor variances.  Only
second moments are known for the real signals, so Gaussian is the
maximum-entropy choice; class means are configuration (see
`build_profile`).
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Iterator, Optional, Sequence

import numpy as np

from .core import CHANNEL_NAMES, N_CHANNELS, Dataset, EmotionLabel, LABELS, SampleRecord
from .rng import Rng

DEFAULT_RATE_HZ = 33.0  # ~2000 records per minute
DEFAULT_BASELINE_OFFSET = 4200.0  # conventional raw-amplitude offset, not a measured value
DEFAULT_CLASS_MEAN_OFFSETS = {
    EmotionLabel.HAPPY: 300.0,
    EmotionLabel.RELAXED: 30.0,
    EmotionLabel.SAD: -30.0,
}


class FrameSource:
    """A pull-based stream of samples; next_frame() returns None at the end.

    Timestamps strictly increase at roughly 1000/nominal_rate_hz ms steps.
    A source is consumed by exactly one reader.
    """

    nominal_rate_hz: float = DEFAULT_RATE_HZ

    def next_frame(self) -> Optional[SampleRecord]:
        raise NotImplementedError

    def __iter__(self) -> Iterator[SampleRecord]:
        while True:
            frame = self.next_frame()
            if frame is None:
                return
            yield frame


@dataclass(frozen=True)
class SyntheticProfile:
    """Per-(class, channel) mean and variance, plus the nominal rate."""

    labels: tuple[EmotionLabel, ...]
    means: np.ndarray  # (len(labels), 14)
    variances: np.ndarray  # (len(labels), 14)
    rate_hz: float = DEFAULT_RATE_HZ
    baseline_offset: float = DEFAULT_BASELINE_OFFSET

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        variances = np.asarray(self.variances, dtype=np.float64)
        shape = (len(self.labels), N_CHANNELS)
        if means.shape != shape or variances.shape != shape:
            raise ValueError(f"profile grids must have shape {shape}")
        if (variances < 0).any():
            raise ValueError("variances must be nonnegative")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "variances", variances)

    def row(self, label: EmotionLabel) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise ValueError(f"profile has no class {label.name}") from None

    def to_json_dict(self) -> dict:
        return {
            "rate_hz": self.rate_hz,
            "baseline_offset": self.baseline_offset,
            "channels": list(CHANNEL_NAMES),
            "labels": [lab.name for lab in self.labels],
            "mean": {lab.name: [float(v) for v in self.means[i]] for i, lab in enumerate(self.labels)},
            "variance": {lab.name: [float(v) for v in self.variances[i]] for i, lab in enumerate(self.labels)},
        }

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json_dict(), fh, indent=2)

    @classmethod
    def from_json_dict(cls, doc: dict) -> "SyntheticProfile":
        if doc.get("channels", list(CHANNEL_NAMES)) != list(CHANNEL_NAMES):
            raise ValueError("profile channel order must be canonical")
        labels = tuple(EmotionLabel[name] for name in doc["labels"])
        means = np.array([doc["mean"][lab.name] for lab in labels], dtype=np.float64)
        variances = np.array([doc["variance"][lab.name] for lab in labels], dtype=np.float64)
        return cls(
            labels=labels,
            means=means,
            variances=variances,
            rate_hz=float(doc.get("rate_hz", DEFAULT_RATE_HZ)),
            baseline_offset=float(doc.get("baseline_offset", DEFAULT_BASELINE_OFFSET)),
        )

    @classmethod
    def load(cls, path) -> "SyntheticProfile":
        with open(path, "r", encoding="utf-8") as fh:
            return cls.from_json_dict(json.load(fh))


def build_profile(
    variances: np.ndarray,
    labels: Sequence[EmotionLabel] = LABELS,
    baseline_offset: float = DEFAULT_BASELINE_OFFSET,
    class_offsets: Optional[dict[EmotionLabel, float]] = None,
    rate_hz: float = DEFAULT_RATE_HZ,
) -> SyntheticProfile:
    """Profile with flat per-class means at baseline + class offset.

    The default offsets separate HAPPY clearly while keeping RELAXED and
    SAD overlapping, matching the qualitative structure of the collected
    signals.
    """
    offsets = class_offsets or DEFAULT_CLASS_MEAN_OFFSETS
    labels = tuple(labels)
    means = np.array([[baseline_offset + offsets[lab]] * N_CHANNELS for lab in labels])
    return SyntheticProfile(
        labels=labels,
        means=means,
        variances=np.asarray(variances, dtype=np.float64),
        rate_hz=rate_hz,
        baseline_offset=baseline_offset,
    )


def default_profile() -> SyntheticProfile:
    """The packaged profile (published per-class sensor variances)."""
    doc = json.loads(resources.files("eegemotion").joinpath("profiles/default_profile.json").read_text())
    return SyntheticProfile.from_json_dict(doc)


def frame_timestamp_ms(index: int, rate_hz: float) -> int:
    return int(np.floor(index * 1000.0 / rate_hz + 0.5))


class SyntheticSource(FrameSource):
    def __init__(
        self,
        profile: SyntheticProfile,
        label: EmotionLabel,
        seed: int,
        n_frames: Optional[int] = None,
        subject_id: str = "synthetic",
        labeled: bool = True,
    ):
        row = profile.row(label)
        self.profile = profile
        self.label = label
        self.nominal_rate_hz = profile.rate_hz
        self._means = profile.means[row]
        self._stds = np.sqrt(profile.variances[row])
        self._rng = Rng(seed)
        self._n_frames = n_frames
        self._k = 0
        self._subject = subject_id
        self._labeled = labeled

    def next_frame(self) -> Optional[SampleRecord]:
        if self._n_frames is not None and self._k >= self._n_frames:
            return None
        values = np.empty(N_CHANNELS, dtype=np.float64)
        for c in range(N_CHANNELS):
            values[c] = self._rng.normal(self._means[c], self._stds[c])
        frame = SampleRecord(
            subject_id=self._subject,
            timestamp_ms=frame_timestamp_ms(self._k, self.nominal_rate_hz),
            label=self.label if self._labeled else None,
            values=values,
        )
        self._k += 1
        return frame


def synthetic_source(
    profile: SyntheticProfile,
    label: EmotionLabel,
    seed: int,
    n_frames: Optional[int] = None,
    subject_id: str = "synthetic",
    labeled: bool = True,
) -> SyntheticSource:
    return SyntheticSource(profile, label, seed, n_frames, subject_id, labeled)


class ReplaySource(FrameSource):
    def __init__(self, ds: Dataset, rate_hz: float = DEFAULT_RATE_HZ):
        if len(ds) == 0:
            raise ValueError("cannot replay an empty dataset")
        if rate_hz <= 0:
            raise ValueError("rate_hz must be positive")
        self._ds = ds
        self.nominal_rate_hz = rate_hz
        self._k = 0

    def next_frame(self) -> Optional[SampleRecord]:
        if self._k >= len(self._ds):
            return None
        r = self._ds[self._k]
        frame = SampleRecord(
            subject_id=r.subject_id,
            timestamp_ms=frame_timestamp_ms(self._k, self.nominal_rate_hz),
            label=r.label,
            values=r.values,
        )
        self._k += 1
        return frame


def replay_source(ds: Dataset, rate_hz: float = DEFAULT_RATE_HZ) -> ReplaySource:
    return ReplaySource(ds, rate_hz)


def synthetic_dataset(
    profile: SyntheticProfile, counts: dict[EmotionLabel, int], seed: int, subject_id: str = "synthetic"
) -> Dataset:
    """Labeled dataset with `counts[label]` frames per class, one source each."""
    records = []
    for i, (label, n) in enumerate(sorted(counts.items())):
        src = synthetic_source(profile, label, seed=seed + i, n_frames=n, subject_id=subject_id)
        records.extend(src)
    return Dataset.from_records(records)


class ContactQuality(enum.Enum):
    BLACK = "BLACK"
    RED = "RED"
    ORANGE = "ORANGE"
    GREEN = "GREEN"


@dataclass(frozen=True)
class QualityConfig:
    missing_fraction: float = 0.2  # more than this share of expected frames absent -> RED
    flatline_threshold: float = 1e-6
    variance_low: float = 1.0
    variance_high: float = 1e7


def contact_quality(
    recent_frames: Sequence[SampleRecord],
    expected_count: int,
    cfg: QualityConfig = QualityConfig(),
) -> list[ContactQuality]:
    """Per-channel color for the last quality window (nominally 2 s)."""
    n = len(recent_frames)
    if n == 0:
        return [ContactQuality.BLACK] * N_CHANNELS
    values = np.stack([f.values for f in recent_frames])
    variances = values.var(axis=0)
    missing = expected_count > 0 and (1.0 - n / expected_count) > cfg.missing_fraction
    out = []
    for c in range(N_CHANNELS):
        if missing or variances[c] < cfg.flatline_threshold:
            out.append(ContactQuality.RED)
        elif not cfg.variance_low <= variances[c] <= cfg.variance_high:
            out.append(ContactQuality.ORANGE)
        else:
            out.append(ContactQuality.GREEN)
    return out
