import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sitstand.ekf import EkfConfig, run_ekf
from sitstand.errors import DegenerateInputError, RejectedInputError
from sitstand.labels import STATIONARY, TRANSITION, labels_from_segments
from sitstand.model_sim import Kinematics
from sitstand.segmenter import (
    FeatureSignal,
    build_feature,
    classify_and_correct,
    feature_peaks,
    first_bin_edge,
    forward_moving_average,
    remove_islands,
    scott_bin_width,
    scott_threshold,
    segment,
)

S, T = STATIONARY, TRANSITION


def const_kin(theta, omega, n=20):
    return Kinematics(np.full(n, theta), np.full(n, omega), np.zeros(n))


def test_stationary_feature_is_zero():
    f = build_feature(const_kin(0.1, 0.0), const_kin(0.15, 0.0))
    assert not f.values.any()


def test_constant_product_feature():
    f = build_feature(const_kin(0.5, 1.0), const_kin(0.3, -2.0))
    np.testing.assert_allclose(f.values, 0.3, rtol=1e-14)


def test_additive_form():
    f = build_feature(const_kin(0.5, 1.0), const_kin(0.3, -2.0), form="additive")
    np.testing.assert_allclose(f.values, 0.1, rtol=1e-14)
    with pytest.raises(RejectedInputError):
        build_feature(const_kin(0.5, 1.0), const_kin(0.3, -2.0), form="sum")


def test_moving_average_spreads_impulse():
    x = np.zeros(20)
    x[10] = 1.0
    y = forward_moving_average(x, 5)
    np.testing.assert_allclose(y[6:11], 0.2)
    assert np.count_nonzero(y) == 5


def test_moving_average_truncates_tail():
    y = forward_moving_average(np.arange(6.0), 5)
    assert y[-1] == 5.0 and y[-2] == 4.5


def test_scott_width_hand_value():
    rng = np.random.default_rng(0)
    v = rng.standard_normal(1000)
    v = (v - v.mean()) / v.std(ddof=1)
    assert scott_bin_width(v) == pytest.approx(0.349, abs=1e-12)
    assert first_bin_edge(v, start=0.0) == pytest.approx(0.349, abs=1e-12)


def test_identical_peaks_degenerate():
    with pytest.raises(DegenerateInputError):
        scott_bin_width([2.0, 2.0, 2.0])
    with pytest.raises(DegenerateInputError):
        scott_threshold(FeatureSignal(np.ones(50)))


def test_single_peak_is_degenerate():
    v = np.zeros(50)
    v[20:25] = [0.2, 0.5, 1.0, 0.5, 0.2]
    with pytest.raises(DegenerateInputError):
        scott_threshold(FeatureSignal(v))


def test_feature_rejects_negative_values():
    with pytest.raises(RejectedInputError):
        FeatureSignal(np.array([0.0, -1.0]))


@pytest.mark.parametrize(
    "raw, expected",
    [
        ([S, S, T, S, S], [S, S, S, S, S]),
        ([S, T, T, T, S], [S, T, T, T, S]),
        ([S, S, S, T, T, S, S, S], [S] * 8),
        ([T, S, S, S, S], [T, S, S, S, S]),
        ([S, S, S, T, S, T, T, S, S, S], [S] * 10),
        ([S, S, S, T, T, T, S, T, T, T, S, S, S], [S, S, S] + [T] * 7 + [S, S, S]),
    ],
)
def test_island_removal(raw, expected):
    assert remove_islands(np.array(raw)).tolist() == expected


@settings(max_examples=200, deadline=None)
@given(st.lists(st.sampled_from([S, T]), min_size=1, max_size=60))
def test_island_removal_idempotent_and_partition(raw):
    once = remove_islands(np.array(raw))
    np.testing.assert_array_equal(remove_islands(once), once)
    change = np.flatnonzero(once[1:] != once[:-1]) + 1
    runs = np.diff(np.concatenate([[0], change, [once.size]]))
    assert runs.size <= 2 or runs[1:-1].min() >= 3


def _trial_feature(trial):
    truth, rec = trial
    shank = run_ekf(rec.shank_stream.planar(), EkfConfig(l=0.25))
    back = run_ekf(rec.back_stream.planar(), EkfConfig(l=0.35))
    return truth, shank, back


def test_clean_trial_has_six_transitions(clean_trial):
    truth, shank, back = _trial_feature(clean_trial)
    seg = segment(shank, back)
    assert len(seg.transitions) == 6
    assert len(seg.segments) == 13
    np.testing.assert_array_equal(labels_from_segments(seg.segments, len(truth)), seg.labels)


def test_each_true_transition_overlaps_one_detection(clean_trial):
    truth, shank, back = _trial_feature(clean_trial)
    det = segment(shank, back).transitions
    for tr in (s for s in truth.segments if s.label in ("SitToStand", "StandToSit")):
        hits = [d for d in det if d.start_idx < tr.end_idx and tr.start_idx < d.end_idx]
        assert len(hits) == 1


@settings(max_examples=20, deadline=None)
@given(scale=st.floats(1e-3, 1e3))
def test_scale_covariance(scale, clean_trial):
    _, shank, back = _trial_feature(clean_trial)
    f = build_feature(shank, back)
    g = FeatureSignal(f.values * scale)
    np.testing.assert_allclose(feature_peaks(g), feature_peaks(f) * scale, rtol=1e-12)
    tf, tg = scott_threshold(f), scott_threshold(g)
    assert tg == pytest.approx(tf * scale, rel=1e-9)
    a = classify_and_correct(f, tf).labels
    b = classify_and_correct(g, tg).labels
    np.testing.assert_array_equal(a, b)


def test_short_edge_transition_becomes_stationary():
    v = np.array([5.0, 5.0, 0, 0, 0, 0, 5, 5, 5, 0, 0, 0, 0, 5])
    seg = classify_and_correct(FeatureSignal(v), 1.0)
    assert seg.labels.tolist() == [S] * 6 + [T] * 3 + [S] * 5
    kept = classify_and_correct(FeatureSignal(np.array([5.0, 5, 5, 0, 0, 0])), 1.0)
    assert kept.labels.tolist() == [T, T, T, S, S, S]


def test_threshold_must_be_positive():
    with pytest.raises(RejectedInputError):
        classify_and_correct(FeatureSignal(np.zeros(5)), 0.0)


def _true_transitions(truth):
    return [s for s in truth.segments if s.label in ("SitToStand", "StandToSit")]


@pytest.mark.xfail(
    strict=True,
    reason="the logistic transition barely moves in the outer ~15 samples of a labelled span and the "
    "product feature also fades where standing angles reach 0; detected edges fall 24-37 samples inside",
)
def test_zero_noise_boundary_error_within_five_samples(clean_trial):
    truth, shank, back = _trial_feature(clean_trial)
    det = segment(shank, back).segments
    true_bin = [s for s in truth.segments]
    errs = [min(abs(d.start_idx - t.start_idx) for d in det[1:]) for t in true_bin[1:]]
    assert max(errs) <= 5


@pytest.mark.xfail(strict=True, reason="same edge loss as above; binary agreement is 74 %")
def test_zero_noise_binary_match_99_percent(clean_trial):
    from sitstand.labels import to_binary

    truth, shank, back = _trial_feature(clean_trial)
    seg = segment(shank, back)
    assert np.mean(seg.labels == to_binary(truth.labels)) >= 0.99


@pytest.mark.xfail(
    strict=True,
    reason="noise-free stationary spans give only a handful of peaks, so the Scott width of the "
    "peak histogram exceeds the smaller transition peaks when transition speeds differ",
)
def test_zero_noise_random_schedules_detect_every_transition():
    from sitstand.model_sim import sample_profile, simulate_trial

    rng = np.random.default_rng(2024)
    for i in range(5):
        truth, rec = simulate_trial(sample_profile(rng), seed=i)
        shank = run_ekf(rec.shank_stream.planar(), EkfConfig(l=0.25))
        back = run_ekf(rec.back_stream.planar(), EkfConfig(l=0.35))
        det = segment(shank, back).transitions
        for tr in _true_transitions(truth):
            assert sum(d.start_idx < tr.end_idx and tr.start_idx < d.end_idx for d in det) == 1


def test_default_noise_random_schedules_detect_every_transition():
    from sitstand.evaluation import DEFAULT_ACCEL_SD, DEFAULT_GYRO_SD
    from sitstand.model_sim import sample_profile, simulate_trial

    rng = np.random.default_rng(2024)
    for i in range(5):
        profile = sample_profile(rng, noise_accel_sd=DEFAULT_ACCEL_SD, noise_gyro_sd=DEFAULT_GYRO_SD)
        truth, rec = simulate_trial(profile, seed=i)
        shank = run_ekf(rec.shank_stream.planar(), EkfConfig(l=0.25))
        back = run_ekf(rec.back_stream.planar(), EkfConfig(l=0.35))
        det = segment(shank, back).transitions
        for tr in _true_transitions(truth):
            assert sum(d.start_idx < tr.end_idx and tr.start_idx < d.end_idx for d in det) == 1
