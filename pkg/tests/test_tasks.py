import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from netreservoir.tasks import (
    GONOGO,
    PDM,
    TaskParams,
    TrialTiming,
    default_params,
    format_dataset_csv,
    generate,
    generate_gonogo,
    generate_pdm,
    split_by_trial,
)


def _trial_classes(d):
    return np.array([d.labels[b - 1] for b in d.trial_boundaries[1:]])


def test_pdm_zero_noise_values():
    params = TaskParams(
        n_trials=50,
        timing=TrialTiming(fix_steps=2, stim_steps=3, decision_steps=1),
        noise_sigma=0.0,
        coherence_set=(0.4,),
        seed=1,
    )
    d = generate_pdm(params)
    classes = _trial_classes(d)
    k = int(np.flatnonzero(classes == 1)[0])
    seg = slice(6 * k, 6 * k + 6)
    assert d.inputs[seg, 0].tolist() == [1, 1, 1, 1, 1, 0]
    assert d.inputs[seg, 1] == pytest.approx([0, 0, 0.7, 0.7, 0.7, 0], abs=1e-15)
    assert d.inputs[seg, 2] == pytest.approx([0, 0, 0.3, 0.3, 0.3, 0], abs=1e-15)
    assert d.labels[seg].tolist() == [0, 0, 0, 0, 0, 1]
    k2 = int(np.flatnonzero(classes == 2)[0])
    seg2 = slice(6 * k2, 6 * k2 + 6)
    assert d.inputs[seg2, 1] == pytest.approx([0, 0, 0.3, 0.3, 0.3, 0], abs=1e-15)
    assert d.labels[seg2].tolist() == [0, 0, 0, 0, 0, 2]


def test_gonogo_zero_noise_values():
    params = TaskParams(
        n_trials=20,
        timing=TrialTiming(fix_steps=1, cue_steps=1, delay_steps=2, decision_steps=1),
        noise_sigma=0.0,
        seed=2,
    )
    d = generate_gonogo(params)
    classes = _trial_classes(d)
    k = int(np.flatnonzero(classes == 1)[0])
    seg = slice(5 * k, 5 * k + 5)
    assert d.inputs[seg, 0].tolist() == [1, 1, 1, 1, 0]
    assert d.inputs[seg, 1].tolist() == [0, 1, 0, 0, 0]
    assert d.inputs[seg, 2].tolist() == [0, 0, 0, 0, 0]
    assert d.labels[seg].tolist() == [0, 0, 0, 0, 1]


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([PDM, GONOGO]), st.integers(0, 2**32 - 1), st.floats(0, 1))
def test_dataset_invariants(task, seed, sigma):
    p = default_params(task)
    d = generate(task, TaskParams(20, p.timing, sigma, p.coherence_set, seed))
    fix = d.fixation
    assert set(np.unique(fix)) <= {0.0, 1.0}
    assert np.all(d.labels[fix == 1.0] == 0)
    assert d.trial_boundaries[0] == 0 and d.trial_boundaries[-1] == d.n_steps
    assert all(a < b for a, b in zip(d.trial_boundaries, d.trial_boundaries[1:]))
    for lo, hi in zip(d.trial_boundaries, d.trial_boundaries[1:]):
        block = d.labels[lo:hi][fix[lo:hi] == 0]
        assert len(block) and len(set(block.tolist())) == 1 and block[0] in (1, 2)


def test_pdm_class_balance():
    d = generate_pdm(TaskParams(n_trials=10000, seed=2024))
    frac = np.mean(_trial_classes(d) == 1)
    assert 0.48 <= frac <= 0.52


def test_gonogo_cue_precedes_decision():
    p = default_params(GONOGO)
    d = generate_gonogo(TaskParams(100, p.timing, 0.0, seed=3))
    for lo, hi in zip(d.trial_boundaries, d.trial_boundaries[1:]):
        cue = np.flatnonzero((d.inputs[lo:hi, 1] == 1) | (d.inputs[lo:hi, 2] == 1))
        decision = np.flatnonzero(d.fixation[lo:hi] == 0)
        assert len(cue) and cue.max() < decision.min()


def test_gonogo_class_swap_swaps_channels():
    p = default_params(GONOGO)
    params = TaskParams(40, p.timing, 0.0, seed=9)
    d = generate_gonogo(params)
    flipped = generate_gonogo(params, classes=3 - _trial_classes(d))
    assert np.array_equal(flipped.inputs[:, 1], d.inputs[:, 2])
    assert np.array_equal(flipped.inputs[:, 2], d.inputs[:, 1])
    assert np.array_equal(flipped.inputs[:, 0], d.inputs[:, 0])


@pytest.mark.parametrize("task", [PDM, GONOGO])
def test_same_seed_bit_identical(task):
    a = generate(task, default_params(task).with_seed(11))
    b = generate(task, default_params(task).with_seed(11))
    c = generate(task, default_params(task).with_seed(12))
    assert a.inputs.tobytes() == b.inputs.tobytes() and np.array_equal(a.labels, b.labels)
    assert a.inputs.tobytes() != c.inputs.tobytes()


def test_pdm_zero_noise_value_set():
    params = TaskParams(n_trials=400, noise_sigma=0.0, seed=5)
    d = generate_pdm(params)
    allowed = {0.0} | {0.5 + c / 2 for c in params.coherence_set} | {0.5 - c / 2 for c in params.coherence_set}
    for col in (1, 2):
        values = set(np.unique(d.inputs[:, col]).tolist())
        assert values <= allowed
        assert len(values) == 1 + 2 * len(params.coherence_set)


def test_split_by_trial():
    d = generate_pdm(TaskParams(n_trials=10, seed=0))
    train, test = split_by_trial(d, 0.8)
    assert (train.n_trials, test.n_trials) == (8, 2)
    assert train.n_steps + test.n_steps == d.n_steps
    assert np.array_equal(np.vstack([train.inputs, test.inputs]), d.inputs)
    assert test.trial_boundaries[0] == 0 and test.trial_boundaries[-1] == test.n_steps


@pytest.mark.parametrize("frac", [0.96, 0.0, 1.0])
def test_split_degenerate(frac):
    d = generate_pdm(TaskParams(n_trials=10, seed=0))
    with pytest.raises(ValueError):
        split_by_trial(d, frac)


def test_params_validation():
    with pytest.raises(ValueError):
        TaskParams(n_trials=1)
    with pytest.raises(ValueError):
        TrialTiming(decision_steps=0)
    with pytest.raises(ValueError):
        TaskParams(coherence_set=(0.0,))
    with pytest.raises(ValueError):
        generate_pdm(TaskParams(coherence_set=()))


def test_csv_export():
    d = generate_gonogo(default_params(GONOGO).with_seed(1))
    lines = format_dataset_csv(d).splitlines()
    assert lines[0] == "t,x1,x2,x3,y"
    assert len(lines) == d.n_steps + 1
    t, x1, x2, x3, y = lines[5].split(",")
    assert float(x2) == d.inputs[4, 1] and int(y) == d.labels[4]
