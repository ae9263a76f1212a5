"""Interquartile-range outlier marking and removal.

Per-channel thresholds come from linear-interpolation quartiles over the
whole dataset (classes pooled); a record is dropped when any channel falls
strictly outside its outlier or extreme band.  Factors default to 3
(outlier) and 6 (extreme).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import CHANNEL_NAMES, N_CHANNELS, ChannelId, Dataset, EmotionLabel, LABELS, SampleRecord


@dataclass(frozen=True)
class IqrConfig:
    outlier_factor: float = 3.0
    extreme_factor: float = 6.0
    per_class: bool = False  # pooled thresholds are the default

    def __post_init__(self):
        if not self.outlier_factor > 0:
            raise ValueError("outlier_factor must be > 0")
        if self.extreme_factor < self.outlier_factor:
            raise ValueError("extreme_factor must be >= outlier_factor")


@dataclass(frozen=True)
class ChannelThresholds:
    channel: ChannelId
    q1: float
    q3: float
    iqr: float
    outlier_low: float
    outlier_high: float
    extreme_low: float
    extreme_high: float


class RecordFlag(enum.IntEnum):
    CLEAN = 0
    OUTLIER = 1
    EXTREME = 2


@dataclass(frozen=True)
class OutlierReport:
    """Per-class collected/outlier/retained counts, Table-style."""

    collected: dict[EmotionLabel, int]
    outliers: dict[EmotionLabel, int]

    @property
    def retained(self) -> dict[EmotionLabel, int]:
        return {lab: self.collected[lab] - self.outliers[lab] for lab in self.collected}

    @property
    def total_collected(self) -> int:
        return sum(self.collected.values())

    @property
    def total_outliers(self) -> int:
        return sum(self.outliers.values())

    @property
    def total_retained(self) -> int:
        return self.total_collected - self.total_outliers

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("class,collected,outliers,total\n")
            for lab in self.collected:
                fh.write(
                    f"{lab.name},{self.collected[lab]},{self.outliers[lab]},{self.retained[lab]}\n"
                )
            fh.write(f"TOTAL,{self.total_collected},{self.total_outliers},{self.total_retained}\n")


def quartiles(values) -> tuple[float, float]:
    """(q1, q3) by linear interpolation over the order statistics.

    Quantile p sits at fractional index p*(n-1) of the sorted data.
    """
    x = np.sort(np.asarray(values, dtype=np.float64))
    if x.size == 0:
        raise ValueError("quartiles of empty data")
    if not np.isfinite(x).all():
        raise ValueError("quartiles require finite data")
    return _interp_quantile(x, 0.25), _interp_quantile(x, 0.75)


def _interp_quantile(sorted_x: np.ndarray, p: float) -> float:
    h = p * (sorted_x.size - 1)
    lo = int(np.floor(h))
    if lo == sorted_x.size - 1:
        return float(sorted_x[lo])
    return float(sorted_x[lo] + (h - lo) * (sorted_x[lo + 1] - sorted_x[lo]))


def thresholds_from_values(values: np.ndarray, cfg: IqrConfig) -> list[ChannelThresholds]:
    """Thresholds for each channel column of an (n, 14) value matrix."""
    out = []
    for c in ChannelId:
        q1, q3 = quartiles(values[:, int(c)])
        iqr = q3 - q1
        out.append(
            ChannelThresholds(
                channel=c,
                q1=q1,
                q3=q3,
                iqr=iqr,
                outlier_low=q1 - cfg.outlier_factor * iqr,
                outlier_high=q3 + cfg.outlier_factor * iqr,
                extreme_low=q1 - cfg.extreme_factor * iqr,
                extreme_high=q3 + cfg.extreme_factor * iqr,
            )
        )
    return out


def compute_thresholds(ds: Dataset, cfg: IqrConfig = IqrConfig()) -> list[ChannelThresholds]:
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    return thresholds_from_values(ds.values, cfg)


def flag_record(record: SampleRecord, thresholds: list[ChannelThresholds]) -> RecordFlag:
    """EXTREME beats OUTLIER; values exactly on a bound are not flagged."""
    if len(thresholds) != N_CHANNELS:
        raise ValueError("thresholds must cover all 14 channels")
    flag = RecordFlag.CLEAN
    for t in thresholds:
        v = record.values[int(t.channel)]
        if v < t.extreme_low or v > t.extreme_high:
            return RecordFlag.EXTREME
        if v < t.outlier_low or v > t.outlier_high:
            flag = RecordFlag.OUTLIER
    return flag


def _flag_matrix(values: np.ndarray, thresholds: list[ChannelThresholds]) -> np.ndarray:
    """Vectorized per-record flags matching `flag_record`."""
    o_lo = np.array([t.outlier_low for t in thresholds])
    o_hi = np.array([t.outlier_high for t in thresholds])
    e_lo = np.array([t.extreme_low for t in thresholds])
    e_hi = np.array([t.extreme_high for t in thresholds])
    extreme = ((values < e_lo) | (values > e_hi)).any(axis=1)
    outlier = ((values < o_lo) | (values > o_hi)).any(axis=1) & ~extreme
    flags = np.zeros(values.shape[0], dtype=np.int8)
    flags[outlier] = int(RecordFlag.OUTLIER)
    flags[extreme] = int(RecordFlag.EXTREME)
    return flags


def clean_dataset(ds: Dataset, cfg: IqrConfig = IqrConfig()) -> tuple[Dataset, OutlierReport]:
    """Drop OUTLIER and EXTREME records; report counts per class."""
    if len(ds) == 0:
        raise ValueError("dataset is empty")
    if not ds.is_labeled():
        raise ValueError("cleaning requires a fully labeled dataset")
    codes = ds.label_codes
    if cfg.per_class:
        flags = np.zeros(len(ds), dtype=np.int8)
        for lab in LABELS:
            mask = codes == int(lab)
            if mask.any():
                th = thresholds_from_values(ds.values[mask], cfg)
                flags[mask] = _flag_matrix(ds.values[mask], th)
    else:
        thresholds = thresholds_from_values(ds.values, cfg)
        flags = _flag_matrix(ds.values, thresholds)
    keep = flags == int(RecordFlag.CLEAN)
    collected, outliers = {}, {}
    for lab in LABELS:
        mask = codes == int(lab)
        n = int(mask.sum())
        if n:
            collected[lab] = n
            outliers[lab] = int((~keep[mask]).sum())
    cleaned = ds.take(np.flatnonzero(keep))
    return cleaned, OutlierReport(collected=collected, outliers=outliers)
