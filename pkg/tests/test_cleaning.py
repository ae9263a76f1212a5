import numpy as np
import pytest

from eegemotion.cleaning import (
    ChannelThresholds,
    IqrConfig,
    OutlierReport,
    RecordFlag,
    clean_dataset,
    compute_thresholds,
    flag_record,
    quartiles,
    thresholds_from_values,
)
from eegemotion.core import ChannelId, EmotionLabel, N_CHANNELS, SampleRecord
from testutil import make_dataset


def test_quartiles_hand_computed():
    assert quartiles([1, 2, 3, 4]) == (1.75, 3.25)
    assert quartiles([5, 5, 5, 5, 5]) == (5.0, 5.0)
    assert quartiles(list(range(1, 9))) == (2.75, 6.25)


def test_quartiles_single_value():
    assert quartiles([7.0]) == (7.0, 7.0)


def test_quartiles_errors():
    with pytest.raises(ValueError):
        quartiles([])
    with pytest.raises(ValueError):
        quartiles([1.0, np.nan])


def test_iqr_config_validation():
    IqrConfig(3, 6)
    IqrConfig(3, 3)
    with pytest.raises(ValueError):
        IqrConfig(0, 6)
    with pytest.raises(ValueError):
        IqrConfig(3, 2)


def test_compute_thresholds_hand_case():
    values = np.tile(np.array([[1.0], [2.0], [3.0], [4.0]]), (1, N_CHANNELS))
    ths = thresholds_from_values(values, IqrConfig(3, 6))
    assert len(ths) == N_CHANNELS
    t = ths[0]
    assert t.channel == ChannelId.AF3
    assert (t.q1, t.q3, t.iqr) == (1.75, 3.25, 1.5)
    assert (t.outlier_low, t.outlier_high) == (-2.75, 7.75)
    assert (t.extreme_low, t.extreme_high) == (-7.25, 12.25)


def test_compute_thresholds_constant_channel():
    values = np.full((10, N_CHANNELS), 42.0)
    t = thresholds_from_values(values, IqrConfig())[3]
    assert t.iqr == 0.0
    assert t.outlier_low == t.outlier_high == t.extreme_low == t.extreme_high == 42.0


def test_equal_factors_coincide():
    values = np.tile(np.array([[1.0], [2.0], [3.0], [4.0]]), (1, N_CHANNELS))
    t = thresholds_from_values(values, IqrConfig(3, 3))[0]
    assert (t.outlier_low, t.outlier_high) == (t.extreme_low, t.extreme_high)


def test_compute_thresholds_empty_dataset():
    from eegemotion.core import Dataset

    with pytest.raises(ValueError):
        compute_thresholds(Dataset.empty(), IqrConfig())


def _uniform_thresholds(outlier=(-1.0, 1.0), extreme=(-2.0, 2.0)):
    return [
        ChannelThresholds(
            channel=c,
            q1=0.0,
            q3=0.0,
            iqr=0.0,
            outlier_low=outlier[0],
            outlier_high=outlier[1],
            extreme_low=extreme[0],
            extreme_high=extreme[1],
        )
        for c in ChannelId
    ]


def _record(values):
    return SampleRecord("s", 0, EmotionLabel.HAPPY, np.asarray(values, float))


def test_flag_record_clean_outlier_extreme():
    ths = _uniform_thresholds()
    assert flag_record(_record([0.5] * 14), ths) is RecordFlag.CLEAN
    v = [0.0] * 14
    v[4] = 1.5  # beyond outlier, inside extreme
    assert flag_record(_record(v), ths) is RecordFlag.OUTLIER
    v[4] = 5.0
    assert flag_record(_record(v), ths) is RecordFlag.EXTREME


def test_flag_record_extreme_beats_outlier_on_other_channels():
    ths = _uniform_thresholds()
    v = [0.0] * 14
    v[1] = 1.5  # outlier on F7
    v[9] = -9.0  # extreme on T8
    assert flag_record(_record(v), ths) is RecordFlag.EXTREME


def test_flag_record_boundary_is_not_flagged():
    ths = _uniform_thresholds()
    v = [0.0] * 14
    v[0] = 1.0  # exactly on the outlier bound
    assert flag_record(_record(v), ths) is RecordFlag.CLEAN
    v[0] = 2.0  # exactly on the extreme bound
    assert flag_record(_record(v), ths) is RecordFlag.OUTLIER


def test_flag_record_requires_full_threshold_set():
    with pytest.raises(ValueError):
        flag_record(_record([0.0] * 14), _uniform_thresholds()[:5])


def test_clean_dataset_identity_when_nothing_flagged():
    rng = np.random.default_rng(2)
    ds = make_dataset(rng.uniform(0, 1, (50, 14)), rng.integers(0, 3, 50))
    cleaned, report = clean_dataset(ds, IqrConfig(outlier_factor=50, extreme_factor=100))
    assert cleaned.records_equal(ds)
    assert report.total_outliers == 0
    assert report.total_retained == 50


def test_clean_dataset_removes_planted_extremes():
    rng = np.random.default_rng(7)
    values = rng.normal(0, 1, (100, 14))
    planted = [3, 17, 31, 44, 58, 76, 91]
    for i in planted:
        values[i, i % 14] = 100.0 * np.sign(values[i, i % 14] + 0.1)
    ds = make_dataset(values, rng.integers(0, 3, 100))
    cleaned, report = clean_dataset(ds, IqrConfig(3, 6))
    # brute-force scan with hand-applied threshold rule
    ths = thresholds_from_values(values, IqrConfig(3, 6))
    flagged = {i for i in range(100) if flag_record(ds[i], ths) is not RecordFlag.CLEAN}
    assert flagged == set(planted)
    assert len(cleaned) == 93
    assert report.total_outliers == 7
    kept = [i for i in range(100) if i not in flagged]
    assert np.array_equal(cleaned.values, values[kept])


def test_report_arithmetic_per_class():
    rng = np.random.default_rng(8)
    values = rng.normal(0, 1, (90, 14))
    values[::10, 0] = 50.0  # plant extremes across classes
    labels = np.repeat([0, 1, 2], 30)
    cleaned, report = clean_dataset(make_dataset(values, labels), IqrConfig())
    for lab in report.collected:
        assert report.retained[lab] == report.collected[lab] - report.outliers[lab]
    assert sum(report.collected.values()) == report.total_collected == 90
    assert report.total_retained == len(cleaned)
    assert report.total_outliers == sum(report.outliers.values())


def test_flagging_is_idempotent_against_original_thresholds():
    rng = np.random.default_rng(9)
    values = rng.normal(0, 1, (200, 14))
    values[5] *= 40
    values[100] *= 25
    ds = make_dataset(values, rng.integers(0, 3, 200))
    cfg = IqrConfig()
    ths = compute_thresholds(ds, cfg)
    cleaned, _ = clean_dataset(ds, cfg)
    assert all(flag_record(r, ths) is RecordFlag.CLEAN for r in cleaned)


def test_monotonicity_in_factors():
    rng = np.random.default_rng(10)
    ds = make_dataset(rng.standard_t(df=2, size=(300, 14)), rng.integers(0, 3, 300))
    previous = None
    for factor in (1.0, 2.0, 3.0, 5.0, 8.0):
        _, report = clean_dataset(ds, IqrConfig(outlier_factor=factor, extreme_factor=2 * factor))
        if previous is not None:
            assert report.total_outliers <= previous
        previous = report.total_outliers


def test_per_class_thresholding_flag():
    rng = np.random.default_rng(11)
    # classes on very different scales: pooled thresholds flag the wide class,
    # per-class thresholds keep both
    tight = rng.normal(0, 1, (100, 14))
    wide = rng.normal(0, 40, (100, 14))
    values = np.vstack([tight, wide])
    labels = [0] * 100 + [1] * 100
    ds = make_dataset(values, labels)
    _, pooled = clean_dataset(ds, IqrConfig())
    _, per_class = clean_dataset(ds, IqrConfig(per_class=True))
    assert per_class.total_outliers <= pooled.total_outliers


def test_clean_requires_labels():
    ds = make_dataset(np.zeros((5, 14)), None)
    with pytest.raises(ValueError):
        clean_dataset(ds, IqrConfig())


def test_report_csv(tmp_path):
    report = OutlierReport(
        collected={EmotionLabel.HAPPY: 10, EmotionLabel.SAD: 20},
        outliers={EmotionLabel.HAPPY: 1, EmotionLabel.SAD: 4},
    )
    path = tmp_path / "report.csv"
    report.to_csv(path)
    lines = path.read_text().splitlines()
    assert lines[0] == "class,collected,outliers,total"
    assert "HAPPY,10,1,9" in lines
    assert lines[-1] == "TOTAL,30,5,25"
