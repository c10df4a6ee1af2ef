import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from sitstand.errors import AmbiguityError, InsufficientDataError, RejectedInputError
from sitstand.labels import (
    SIT,
    SIT_TO_STAND,
    STAND,
    STAND_TO_SIT,
    STATIONARY,
    TRANSITION,
    TRANSITIONS,
    StateSegment,
)
from sitstand.model_sim import Kinematics, TrajectoryProfile, sample_profile, simulate_segment_trajectory
from sitstand.transition_classifier import (
    ClusterResult,
    SequenceWarning,
    TransitionFeatures,
    assign_cluster_labels,
    classify_segments,
    cluster_transitions,
    extract_features,
    label_stationary,
    ols_slope,
    standardize,
)

FS = 50.0


def seg(a, b, label):
    return StateSegment.from_indices(a, b, label, FS)


def unlabelled(truth):
    return [s.relabel(TRANSITION if s.label in TRANSITIONS else STATIONARY) for s in truth.segments]


def test_slope_of_exact_line():
    assert ols_slope([0, 1, 2, 3]) == pytest.approx(1.0)


def test_constant_shank_angle_gives_zero_delta():
    n = 10
    shank = Kinematics(np.full(n, 0.1), np.arange(n, dtype=float), np.zeros(n))
    back = Kinematics(np.linspace(0.15, 0.0, n), np.zeros(n), np.zeros(n))
    f = extract_features(seg(0, n, TRANSITION), shank, back)
    assert f.delta_theta_s == 0.0
    assert f.slope_omega_s == pytest.approx(1.0)
    assert f.delta_theta_b == pytest.approx(-0.15)


def test_short_segment_rejected():
    k = Kinematics(np.zeros(5), np.zeros(5), np.zeros(5))
    with pytest.raises(RejectedInputError):
        extract_features(seg(0, 2, TRANSITION), k, k)


def test_sit_to_stand_lowers_back_angle():
    truth = simulate_segment_trajectory(TrajectoryProfile.cycles(1), FS)
    rise = next(s for s in truth.segments if s.label == SIT_TO_STAND)
    assert extract_features(rise, truth.shank, truth.back).delta_theta_b < 0


def feats(*rows):
    return [TransitionFeatures(*r) for r in rows]


def test_two_transitions_split():
    res = cluster_transitions(feats((1, 1, 1, -0.1), (-1, -1, -1, 0.1)))
    assert sorted(res.assignments.tolist()) == [0, 1]
    assert res.assignments[0] == 0


def test_clustering_needs_two_transitions():
    with pytest.raises(InsufficientDataError):
        cluster_transitions(feats((1, 1, 1, 1)))
    with pytest.raises(AmbiguityError):
        cluster_transitions(feats((1, 1, 1, 1), (1, 1, 1, 1)))


def test_clustering_deterministic():
    rng = np.random.default_rng(5)
    fs = feats(*rng.normal(size=(9, 4)))
    a = cluster_transitions(fs, seed=3)
    b = cluster_transitions(fs, seed=3)
    np.testing.assert_array_equal(a.assignments, b.assignments)


@settings(max_examples=30, deadline=None)
@given(
    scale=st.lists(st.floats(0.01, 100), min_size=4, max_size=4),
    shift=st.lists(st.floats(-10, 10), min_size=4, max_size=4),
    seed=st.integers(0, 1000),
)
def test_affine_rescaling_invariance(scale, shift, seed):
    rng = np.random.default_rng(seed)
    x = np.vstack([rng.normal(-2, 0.3, (4, 4)), rng.normal(2, 0.3, (4, 4))])
    base = cluster_transitions(feats(*x), seed=1)
    moved = cluster_transitions(feats(*(x * scale + shift)), seed=1)
    np.testing.assert_array_equal(base.assignments, moved.assignments)


def test_standardize_zeroes_rounding_residue():
    x = np.array([[1e-18, -0.1], [-3e-18, 0.1], [2e-18, -0.1]])
    z = standardize(x)
    assert not z[:, 0].any()
    np.testing.assert_allclose(z[:, 1].std(), 1.0)


def _result(centroids):
    return ClusterResult(np.array([0, 1]), np.asarray(centroids, dtype=float), 0.0)


def test_label_rule_primary_feature():
    r = _result([[0, 0, 0, -0.15], [0, 0, 0, 0.15]])
    assert assign_cluster_labels(r) == {0: SIT_TO_STAND, 1: STAND_TO_SIT}


def test_label_rule_order_independent():
    r = _result([[0, 0, 0, 0.15], [0, 0, 0, -0.15]])
    assert assign_cluster_labels(r) == {1: SIT_TO_STAND, 0: STAND_TO_SIT}


def test_label_rule_tie_break_and_full_tie():
    r = _result([[0, 0.2, 0, 0.1], [0, -0.2, 0, 0.1]])
    assert assign_cluster_labels(r)[1] == SIT_TO_STAND
    with pytest.raises(AmbiguityError):
        assign_cluster_labels(_result([[1, 0.2, 0, 0.1], [0, 0.2, 0, 0.1]]))


def test_label_stationary_rule():
    segs = [
        seg(0, 10, STATIONARY),
        seg(10, 20, SIT_TO_STAND),
        seg(20, 30, STATIONARY),
        seg(30, 40, STAND_TO_SIT),
        seg(40, 50, STATIONARY),
    ]
    assert [s.label for s in label_stationary(segs)] == [SIT, SIT_TO_STAND, STAND, STAND_TO_SIT, SIT]


def test_label_stationary_mid_stand_start():
    segs = [seg(0, 10, STATIONARY), seg(10, 20, STAND_TO_SIT), seg(20, 30, STATIONARY)]
    assert [s.label for s in label_stationary(segs)] == [STAND, STAND_TO_SIT, SIT]


def test_label_stationary_warns_on_repeat():
    segs = [seg(0, 10, STATIONARY), seg(10, 20, SIT_TO_STAND), seg(20, 30, STATIONARY), seg(30, 40, SIT_TO_STAND)]
    with pytest.warns(SequenceWarning):
        label_stationary(segs)


def test_label_stationary_requires_transitions():
    with pytest.raises(InsufficientDataError):
        label_stationary([seg(0, 10, STATIONARY)])


def test_full_clean_trial_classification():
    truth = simulate_segment_trajectory(TrajectoryProfile.cycles(3), FS)
    labelled, clusters = classify_segments(unlabelled(truth), truth.shank, truth.back)
    assert [s.label for s in labelled] == [s.label for s in truth.segments]
    assert sorted(np.bincount(clusters.assignments).tolist()) == [3, 3]


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 100_000), n_cycles=st.integers(1, 5))
def test_clean_cohorts_classified_perfectly(seed, n_cycles):
    rng = np.random.default_rng(seed)
    profile = sample_profile(rng, n_cycles=n_cycles)
    schedule = profile.schedule
    # optionally start mid-stand so both alternation patterns appear
    if rng.random() < 0.5:
        schedule = schedule[2:]
    truth = simulate_segment_trajectory(TrajectoryProfile(schedule), FS)
    if sum(s.label in TRANSITIONS for s in truth.segments) < 2:
        return
    labelled, _ = classify_segments(unlabelled(truth), truth.shank, truth.back, seed=seed)
    assert [s.label for s in labelled] == [s.label for s in truth.segments]
    for a, b in zip(labelled, labelled[1:]):
        assert not (a.label == STAND_TO_SIT and b.label == STAND)
