"""EEG emotion classification: cleaning, forest training, validation, and
real-time windowed prediction over replayable 14-channel frame sources.
"""

from .core import (
    CHANNEL_NAMES,
    ChannelId,
    Dataset,
    DatasetFormatError,
    DatasetParseError,
    EmotionLabel,
    SampleRecord,
    SubjectInfo,
    load_dataset,
    random_split,
    sample_subset,
    save_dataset,
)
from .cleaning import (
    ChannelThresholds,
    IqrConfig,
    OutlierReport,
    RecordFlag,
    clean_dataset,
    compute_thresholds,
    flag_record,
    quartiles,
)
from .forest import (
    Forest,
    Leaf,
    Prediction,
    Split,
    TrainConfig,
    best_split,
    gini,
    grow_tree,
    load_forest,
    save_forest,
    train,
)
from .evaluation import (
    ConfusionMatrix,
    HoldoutRun,
    NormalityResult,
    SweepPoint,
    SweepResult,
    ValidationSummary,
    VarianceTable,
    auc_one_vs_rest,
    confusion,
    pairwise_models,
    per_class_accuracy,
    repeated_holdout,
    shapiro_wilk,
    tree_count_sweep,
    variance_table,
)
from .acquisition import (
    ContactQuality,
    FrameSource,
    SyntheticProfile,
    contact_quality,
    default_profile,
    replay_source,
    synthetic_dataset,
    synthetic_source,
)
from .realtime import (
    CalibrationIncompleteError,
    SessionConfig,
    SessionLog,
    SessionState,
    VarianceComparison,
    WindowPrediction,
    classify_window,
    compare_session_variance,
    run_session,
)
from .rng import Rng, derive_seed

__version__ = "0.1.0"
