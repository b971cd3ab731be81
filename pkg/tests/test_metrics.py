import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netreservoir.metrics import (
    MetricError,
    balanced_accuracy,
    evaluate,
    f1_macro,
    filtered_accuracy,
    majority_baseline,
)


def oracle_scores(y_true, y_pred, fixation):
    """Confusion-matrix bookkeeping with plain loops."""
    labels = sorted(set(y_true) | set(y_pred))
    conf = {(a, b): 0 for a in labels for b in labels}
    for a, b in zip(y_true, y_pred):
        conf[(a, b)] += 1
    present = sorted(set(y_true))
    recalls, f1s = [], []
    for c in present:
        tp = conf[(c, c)]
        actual = sum(conf[(c, b)] for b in labels)
        predicted = sum(conf[(a, c)] for a in labels)
        recalls.append(tp / actual)
        p = tp / predicted if predicted else 0.0
        r = tp / actual
        f1s.append(2 * p * r / (p + r) if p + r else 0.0)
    kept = [(a, b) for a, b, f in zip(y_true, y_pred, fixation) if f < 0.5]
    return sum(recalls) / len(recalls), sum(f1s) / len(f1s), sum(a == b for a, b in kept) / len(kept)


def test_balanced_accuracy_examples():
    assert balanced_accuracy([0, 1, 2, 0], [0, 1, 2, 0]) == 1.0
    assert balanced_accuracy([0, 0, 1, 2], [0, 0, 1, 1]) == pytest.approx(2 / 3, abs=1e-15)
    assert balanced_accuracy([0, 0, 1, 2], [0, 0, 0, 0]) == pytest.approx(1 / 3, abs=1e-15)


def test_f1_examples():
    assert f1_macro([1, 2, 2, 0], [1, 2, 2, 0]) == 1.0
    assert f1_macro([1, 1, 2], [1, 2, 2]) == pytest.approx(2 / 3, abs=1e-15)
    assert f1_macro([1, 1, 2], [0, 0, 0]) == 0.0


def test_filtered_examples():
    assert filtered_accuracy([0, 1, 2], [0, 1, 1], [0, 0, 0]) == pytest.approx(2 / 3)
    assert filtered_accuracy([0, 0, 1], [9, 9, 1], [1, 1, 0]) == 1.0
    with pytest.raises(MetricError):
        filtered_accuracy([0, 1], [0, 1], [1, 1])


def test_length_mismatch():
    with pytest.raises(MetricError):
        balanced_accuracy([0, 1], [0])
    with pytest.raises(MetricError):
        f1_macro([0, 1], [0, 1, 2])
    with pytest.raises(MetricError):
        evaluate([0, 1], [0], [0, 0])


def test_evaluate_composition():
    y = [0, 0, 1, 0, 2]
    fix = [1, 1, 0, 1, 0]
    r = evaluate(y, y, fix)
    assert (r.balanced_accuracy, r.f1_macro, r.filtered_accuracy) == (1.0, 1.0, 1.0)
    assert (r.n_steps, r.n_decision_steps) == (5, 2)
    pred = [0, 1, 1, 0, 1]
    r = evaluate(y, pred, fix)
    assert r.balanced_accuracy == balanced_accuracy(y, pred)
    assert r.f1_macro == f1_macro(y, pred)
    assert r.filtered_accuracy == filtered_accuracy(y, pred, fix)


@pytest.mark.parametrize("seed", range(200))
def test_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 60))
    y_true = rng.integers(0, 4, size=n).tolist()
    y_pred = rng.integers(0, 5, size=n).tolist()
    fixation = rng.integers(0, 2, size=n).astype(float).tolist()
    fixation[int(rng.integers(n))] = 0.0
    ba, f1, fa = oracle_scores(y_true, y_pred, fixation)
    assert abs(balanced_accuracy(y_true, y_pred) - ba) < 1e-12
    assert abs(f1_macro(y_true, y_pred) - f1) < 1e-12
    assert abs(filtered_accuracy(y_true, y_pred, fixation) - fa) < 1e-12


labels = st.lists(st.integers(0, 3), min_size=1, max_size=40)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_relabel_invariance(data):
    y_true = data.draw(labels)
    y_pred = data.draw(st.lists(st.integers(0, 3), min_size=len(y_true), max_size=len(y_true)))
    perm = data.draw(st.permutations(range(4)))
    fix = [0.0] * len(y_true)
    t2 = [perm[v] for v in y_true]
    p2 = [perm[v] for v in y_pred]
    assert balanced_accuracy(t2, p2) == pytest.approx(balanced_accuracy(y_true, y_pred), abs=1e-15)
    assert f1_macro(t2, p2) == pytest.approx(f1_macro(y_true, y_pred), abs=1e-15)
    assert filtered_accuracy(t2, p2, fix) == filtered_accuracy(y_true, y_pred, fix)


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_perfect_iff_equal(data):
    y_true = data.draw(labels)
    y_pred = data.draw(st.lists(st.integers(0, 3), min_size=len(y_true), max_size=len(y_true)))
    equal = y_true == y_pred
    assert (balanced_accuracy(y_true, y_pred) == 1.0) == equal
    assert (f1_macro(y_true, y_pred) == 1.0) == equal


@settings(max_examples=100, deadline=None)
@given(st.data())
def test_scores_in_unit_interval(data):
    y_true = data.draw(labels)
    y_pred = data.draw(st.lists(st.integers(0, 5), min_size=len(y_true), max_size=len(y_true)))
    for v in (balanced_accuracy(y_true, y_pred), f1_macro(y_true, y_pred)):
        assert 0.0 <= v <= 1.0


def test_exhaustive_small():
    for y_true, y_pred in itertools.product(itertools.product(range(3), repeat=3), repeat=2):
        ba, f1, fa = oracle_scores(y_true, y_pred, [0, 0, 0])
        assert abs(balanced_accuracy(y_true, y_pred) - ba) < 1e-12
        assert abs(f1_macro(y_true, y_pred) - f1) < 1e-12


def test_majority_baseline():
    assert majority_baseline([0, 0, 0, 1, 2]) == pytest.approx(1 / 3)
    assert majority_baseline([1, 1]) == 1.0
