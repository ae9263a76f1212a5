"""Windowed real-time classification loop.

Calibrate for ~30 s (baseline stats and contact quality only, no signal
correction), then classify each consecutive 10 s window by per-sample
forest prediction and majority vote until the session ends or the
operator stops it.  All timing is logical (frame timestamps), which makes
replayed and synthetic sessions deterministic; a live adapter may map
wall clock to timestamps at the boundary.
"""

from __future__ import annotations

import enum
import math
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .acquisition import ContactQuality, FrameSource, QualityConfig, contact_quality
from .core import CHANNEL_NAMES, N_CHANNELS, EmotionLabel, SampleRecord
from .evaluation import VarianceTable
from .forest import Forest

EventSink = Callable[[dict], None]


class SessionState(enum.Enum):
    IDLE = "IDLE"
    CALIBRATING = "CALIBRATING"
    RUNNING = "RUNNING"
    STOPPED = "STOPPED"


@dataclass(frozen=True)
class SessionConfig:
    calibration_s: float = 30.0
    window_s: float = 10.0
    session_s: float = 300.0
    rate_hz: float = 33.0
    quality_every_s: float = 2.0
    chart_frames_per_s: int = 8

    def __post_init__(self):
        if self.calibration_s < 0:
            raise ValueError("calibration_s must be >= 0")
        if self.window_s <= 0:
            raise ValueError("window_s must be > 0")
        if self.session_s <= self.calibration_s:
            raise ValueError("session_s must exceed calibration_s")
        if self.rate_hz <= 0:
            raise ValueError("rate_hz must be > 0")

    @property
    def n_windows(self) -> int:
        """Scheduled window count: full windows between calibration and session end."""
        return int(math.floor((self.session_s - self.calibration_s) / self.window_s + 1e-9))


@dataclass(frozen=True)
class WindowPrediction:
    window_index: int  # 1-based, contiguous
    t_end_s: float
    label: EmotionLabel
    confidence: float
    sample_count: int

    def to_json_dict(self) -> dict:
        return {
            "window_index": self.window_index,
            "t_end_s": self.t_end_s,
            "label": self.label.name,
            "confidence": self.confidence,
            "sample_count": self.sample_count,
        }


@dataclass
class SessionLog:
    config: SessionConfig
    state_history: list[tuple[SessionState, float]] = field(default_factory=list)
    predictions: list[WindowPrediction] = field(default_factory=list)
    skipped_windows: list[int] = field(default_factory=list)
    calibration_mean: Optional[np.ndarray] = None  # per-channel baseline
    calibration_variance: Optional[np.ndarray] = None
    frames: list[SampleRecord] = field(default_factory=list)
    stop_reason: str = ""


class CalibrationIncompleteError(RuntimeError):
    """The source ended before the calibration period elapsed."""

    def __init__(self, message: str, log: Optional[SessionLog] = None):
        super().__init__(message)
        self.log = log


def classify_window(
    samples: list[SampleRecord], forest: Forest, window_index: int = 1, t_end_s: float = 0.0
) -> Optional[WindowPrediction]:
    """Majority class over per-sample forest predictions.

    Returns None for an empty window (the caller logs the skip); ties go to
    the canonical label order.
    """
    if not samples:
        return None
    X = np.stack([s.values for s in samples])
    pred = forest.predict_batch(X)
    tallies = np.bincount(pred, minlength=forest.n_labels)
    modal = int(np.argmax(tallies))  # forest.labels is canonically sorted
    return WindowPrediction(
        window_index=window_index,
        t_end_s=t_end_s,
        label=forest.labels[modal],
        confidence=float(tallies[modal] / len(samples)),
        sample_count=len(samples),
    )


class _StopFlag:
    def is_set(self) -> bool:
        return False


class StopAtSource(FrameSource):
    """Wraps a source and trips `flag` once frames reach t_s.

    Models a deterministic operator stop in logical time: the engine
    notices the flag before consuming the following frame, so the open
    window is discarded exactly as with a live stop button.
    """

    def __init__(self, source: FrameSource, t_s: float, flag):
        self._source = source
        self._t_ms = t_s * 1000.0
        self._flag = flag
        self.nominal_rate_hz = source.nominal_rate_hz

    def next_frame(self) -> Optional[SampleRecord]:
        frame = self._source.next_frame()
        if frame is not None and frame.timestamp_ms >= self._t_ms:
            self._flag.set()
        return frame


def run_session(
    source: FrameSource,
    forest: Forest,
    cfg: SessionConfig = SessionConfig(),
    sink: Optional[EventSink] = None,
    stop=None,
    quality_cfg: QualityConfig = QualityConfig(),
) -> SessionLog:
    """Drive the calibrate-then-classify loop over a frame source.

    Emits state, quality, frames, and prediction events through `sink`;
    `stop` is any object with is_set() (e.g. threading.Event).  Window k
    covers [calibration + (k-1)*window, calibration + k*window) and its
    prediction carries t_end = calibration + k*window exactly.
    """
    emit = sink or (lambda event: None)
    stop = stop or _StopFlag()
    log = SessionLog(config=cfg)

    calib_ms = cfg.calibration_s * 1000.0
    window_ms = cfg.window_s * 1000.0
    n_windows = cfg.n_windows
    quality_ms = cfg.quality_every_s * 1000.0
    expected_quality_frames = int(round(cfg.rate_hz * cfg.quality_every_s))

    def set_state(state: SessionState, t_s: float):
        log.state_history.append((state, t_s))
        emit({"type": "state", "state": state.value, "t_s": t_s})

    def emit_quality(t_s: float, recent: list[SampleRecord]):
        colors = contact_quality(recent, expected_quality_frames, quality_cfg)
        emit(
            {
                "type": "quality",
                "t_s": t_s,
                "channels": {name: q.value for name, q in zip(CHANNEL_NAMES, colors)},
            }
        )

    def emit_frame_batch(t_s: float, batch: list[SampleRecord]):
        if not batch:
            return
        step = max(1, len(batch) // max(1, cfg.chart_frames_per_s))
        picked = batch[::step][: cfg.chart_frames_per_s]
        emit(
            {
                "type": "frames",
                "t_s": t_s,
                "frames": [
                    {"timestamp_ms": f.timestamp_ms, "values": [float(v) for v in f.values]}
                    for f in picked
                ],
            }
        )

    set_state(SessionState.IDLE, 0.0)
    calibrating = cfg.calibration_s > 0
    if calibrating:
        set_state(SessionState.CALIBRATING, 0.0)
    else:
        set_state(SessionState.RUNNING, 0.0)

    recent: deque[SampleRecord] = deque()  # frames within the trailing quality window
    second_batch: list[SampleRecord] = []
    calib_frames: list[SampleRecord] = []
    window_frames: list[SampleRecord] = []
    current_window = 1
    next_quality_ms = quality_ms
    next_second_ms = 1000.0
    stopped = False

    def trim_recent(now_ms: float):
        while recent and recent[0].timestamp_ms < now_ms - quality_ms:
            recent.popleft()

    def finish_calibration():
        nonlocal calibrating
        if calib_frames:
            values = np.stack([f.values for f in calib_frames])
            log.calibration_mean = values.mean(axis=0)
            log.calibration_variance = values.var(axis=0)
        calibrating = False
        set_state(SessionState.RUNNING, cfg.calibration_s)

    def close_window(index: int):
        t_end = (calib_ms + index * window_ms) / 1000.0
        prediction = classify_window(window_frames, forest, window_index=index, t_end_s=t_end)
        if prediction is None:
            log.skipped_windows.append(index)
        else:
            log.predictions.append(prediction)
            emit({"type": "prediction", **prediction.to_json_dict()})
        window_frames.clear()

    def cross_boundaries(up_to_ms: float):
        """Emit periodic events whose boundary time has passed."""
        nonlocal next_quality_ms, next_second_ms
        while next_second_ms <= up_to_ms or next_quality_ms <= up_to_ms:
            if next_second_ms <= next_quality_ms and next_second_ms <= up_to_ms:
                emit_frame_batch(next_second_ms / 1000.0, second_batch)
                second_batch.clear()
                next_second_ms += 1000.0
            elif next_quality_ms <= up_to_ms:
                trim_recent(next_quality_ms)
                emit_quality(next_quality_ms / 1000.0, list(recent))
                next_quality_ms += quality_ms
            else:
                break

    while True:
        if stop.is_set():
            if window_frames:
                window_frames.clear()  # partial window discarded
            reason = "operator"
            t_now = log.frames[-1].timestamp_ms / 1000.0 if log.frames else 0.0
            log.stop_reason = reason
            set_state(SessionState.STOPPED, t_now)
            stopped = True
            break

        frame = source.next_frame()
        if frame is None:
            if calibrating:
                log.stop_reason = "calibration-incomplete"
                raise CalibrationIncompleteError("source ended during calibration", log)
            # final scheduled window is complete by schedule when the stream
            # delivered frames into it; earlier windows are partial
            if current_window == n_windows and window_frames:
                close_window(current_window)
                log.stop_reason = "completed"
            else:
                window_frames.clear()
                log.stop_reason = "source-exhausted"
            set_state(
                SessionState.STOPPED,
                log.frames[-1].timestamp_ms / 1000.0 if log.frames else cfg.calibration_s,
            )
            stopped = True
            break

        ts = float(frame.timestamp_ms)
        cross_boundaries(ts)

        if calibrating and ts >= calib_ms:
            finish_calibration()

        if not calibrating:
            w_idx = int(math.floor((ts - calib_ms) / window_ms)) + 1
            if w_idx > current_window:
                last_to_close = min(w_idx - 1, n_windows)
                for k in range(current_window, last_to_close + 1):
                    close_window(k)
                current_window = w_idx
            if current_window > n_windows:
                log.stop_reason = "completed"
                set_state(SessionState.STOPPED, cfg.calibration_s + n_windows * cfg.window_s)
                stopped = True
                break

        log.frames.append(frame)
        recent.append(frame)
        second_batch.append(frame)
        if calibrating:
            calib_frames.append(frame)
        else:
            window_frames.append(frame)

    if not stopped:
        set_state(SessionState.STOPPED, cfg.session_s)
    return log


@dataclass(frozen=True)
class VarianceComparison:
    """Model-vs-session variance per class per channel, with ratios."""

    labels: tuple[EmotionLabel, ...]
    model: np.ndarray  # (len(labels), 14)
    session: np.ndarray
    ratio: np.ndarray  # session / model (inf where model variance is 0)

    def to_json_dict(self) -> dict:
        return {
            "channels": list(CHANNEL_NAMES),
            "classes": [
                {
                    "label": lab.name,
                    "model": [float(v) for v in self.model[i]],
                    "session": [float(v) for v in self.session[i]],
                    "ratio": [None if not np.isfinite(v) else float(v) for v in self.ratio[i]],
                }
                for i, lab in enumerate(self.labels)
            ],
        }


def compare_session_variance(log: SessionLog, model_table: VarianceTable) -> VarianceComparison:
    """Pair the model's per-class channel variances with the session's.

    Uses labeled classification-phase frames (calibration excluded); every
    class present must have at least 2 frames.
    """
    calib_ms = log.config.calibration_s * 1000.0
    by_class: dict[EmotionLabel, list[np.ndarray]] = {}
    for f in log.frames:
        if f.label is not None and f.timestamp_ms >= calib_ms:
            by_class.setdefault(f.label, []).append(f.values)
    labels = [lab for lab in sorted(by_class) if lab in model_table.labels]
    if not labels:
        raise ValueError("session captured no labeled frames for any model class")
    model = np.empty((len(labels), N_CHANNELS))
    session = np.empty((len(labels), N_CHANNELS))
    for i, lab in enumerate(labels):
        frames = by_class[lab]
        if len(frames) < 2:
            raise ValueError(f"class {lab.name} has {len(frames)} frame(s); need >= 2")
        session[i] = np.stack(frames).var(axis=0, ddof=1)
        model[i] = model_table.values[model_table.labels.index(lab)]
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = session / model
    return VarianceComparison(labels=tuple(labels), model=model, session=session, ratio=ratio)
