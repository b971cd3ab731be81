"""Trial-structured classification tasks: perceptual decision making and
go/no-go.

Both tasks emit three input channels (fixation, two stimulus channels) and a
per-step label that is 0 outside the decision period and the trial class
(1 or 2) inside it. Trials are concatenated back to back.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

PDM = "pdm"
GONOGO = "gonogo"
TASK_NAMES = (PDM, GONOGO)


@dataclass(frozen=True)
class TrialTiming:
    """Step counts for the trial periods.

    PDM uses ``fix_steps``, ``stim_steps`` and ``decision_steps``; go/no-go
    uses ``fix_steps``, ``cue_steps``, ``delay_steps`` and ``decision_steps``.
    """

    fix_steps: int = 3
    stim_steps: int = 20
    cue_steps: int = 2
    delay_steps: int = 10
    decision_steps: int = 2

    def __post_init__(self):
        for name, value in asdict(self).items():
            if int(value) != value or value < 1:
                raise ValueError(f"{name} must be a positive integer, got {value!r}")

    def trial_length(self, task: str) -> int:
        if task == PDM:
            return self.fix_steps + self.stim_steps + self.decision_steps
        if task == GONOGO:
            return self.fix_steps + self.cue_steps + self.delay_steps + self.decision_steps
        raise ValueError(f"unknown task {task!r}")


@dataclass(frozen=True)
class TaskParams:
    n_trials: int = 200
    timing: TrialTiming = field(default_factory=TrialTiming)
    noise_sigma: float = 0.1
    coherence_set: tuple[float, ...] = (0.1, 0.2, 0.4, 0.8)
    seed: int = 0

    def __post_init__(self):
        if isinstance(self.timing, dict):
            object.__setattr__(self, "timing", TrialTiming(**self.timing))
        object.__setattr__(self, "coherence_set", tuple(float(c) for c in self.coherence_set))
        if self.n_trials < 2:
            raise ValueError("n_trials must be >= 2")
        if not (math.isfinite(self.noise_sigma) and self.noise_sigma >= 0):
            raise ValueError("noise_sigma must be finite and >= 0")
        if any(not 0 < c <= 1 for c in self.coherence_set):
            raise ValueError("coherences must lie in (0, 1]")

    def with_seed(self, seed: int) -> "TaskParams":
        return TaskParams(self.n_trials, self.timing, self.noise_sigma, self.coherence_set, seed)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["coherence_set"] = list(self.coherence_set)
        return d


def default_params(task: str) -> TaskParams:
    if task == PDM:
        return TaskParams(
            n_trials=200,
            timing=TrialTiming(fix_steps=3, stim_steps=20, decision_steps=2),
            noise_sigma=0.1,
        )
    if task == GONOGO:
        return TaskParams(
            n_trials=200,
            timing=TrialTiming(fix_steps=3, cue_steps=2, delay_steps=10, decision_steps=2),
            noise_sigma=0.05,
        )
    raise ValueError(f"unknown task {task!r}")


@dataclass(frozen=True, eq=False)
class TaskDataset:
    """Concatenated trials.

    Attributes:
        inputs: ``(T, 3)`` array; column 0 is fixation, 1 and 2 the stimuli.
        labels: ``(T,)`` int array over {0, 1, 2}.
        trial_boundaries: Start index of every trial followed by ``T``.
        task_name: ``"pdm"`` or ``"gonogo"``.
    """

    inputs: np.ndarray
    labels: np.ndarray
    trial_boundaries: tuple[int, ...]
    task_name: str

    @property
    def n_steps(self) -> int:
        return len(self.labels)

    @property
    def n_trials(self) -> int:
        return len(self.trial_boundaries) - 1

    @property
    def fixation(self) -> np.ndarray:
        return self.inputs[:, 0]

    def trials(self, start: int, stop: int) -> "TaskDataset":
        """Sub-dataset made of trials ``start`` to ``stop - 1``."""
        if not 0 <= start < stop <= self.n_trials:
            raise ValueError(f"invalid trial range [{start}, {stop})")
        lo, hi = self.trial_boundaries[start], self.trial_boundaries[stop]
        bounds = tuple(b - lo for b in self.trial_boundaries[start : stop + 1])
        return TaskDataset(self.inputs[lo:hi].copy(), self.labels[lo:hi].copy(), bounds, self.task_name)


def _assemble(task, n_trials, trial_len, fixation_off, x2, x3, classes, decision_steps):
    T = n_trials * trial_len
    inputs = np.empty((T, 3))
    fix = np.ones(trial_len)
    fix[fixation_off:] = 0.0
    inputs[:, 0] = np.tile(fix, n_trials)
    inputs[:, 1] = x2.ravel()
    inputs[:, 2] = x3.ravel()
    labels = np.zeros((n_trials, trial_len), dtype=np.int64)
    labels[:, trial_len - decision_steps :] = classes[:, None]
    bounds = tuple(range(0, T + 1, trial_len))
    return TaskDataset(inputs, labels.ravel(), bounds, task)


def generate_pdm(params: TaskParams) -> TaskDataset:
    """Perceptual decision making.

    Each trial draws a class ``c`` in {1, 2} and a coherence ``coh``. During
    the stimulus period the winning channel (x2 for class 1) has mean
    ``0.5 + coh/2`` and the other ``0.5 - coh/2``; elsewhere both channels
    are zero-mean noise. The label equals ``c`` during the decision steps.
    """
    if not params.coherence_set:
        raise ValueError("coherence_set must be nonempty for pdm")
    tm = params.timing
    n = params.n_trials
    L = tm.trial_length(PDM)
    rng = np.random.default_rng(params.seed)
    classes = rng.integers(1, 3, size=n)
    coh = np.asarray(params.coherence_set)[rng.integers(0, len(params.coherence_set), size=n)]
    noise = rng.normal(0.0, 1.0, size=(2, n, L)) * params.noise_sigma

    stim = slice(tm.fix_steps, tm.fix_steps + tm.stim_steps)
    hi = np.where(classes == 1, 0.5 + coh / 2, 0.5 - coh / 2)
    lo = np.where(classes == 1, 0.5 - coh / 2, 0.5 + coh / 2)
    x2 = noise[0]
    x3 = noise[1]
    x2[:, stim] += hi[:, None]
    x3[:, stim] += lo[:, None]
    return _assemble(PDM, n, L, L - tm.decision_steps, x2, x3, classes, tm.decision_steps)


def _gonogo_from_classes(classes: np.ndarray, params: TaskParams, rng: np.random.Generator) -> TaskDataset:
    tm = params.timing
    n = len(classes)
    L = tm.trial_length(GONOGO)
    noise = rng.normal(0.0, 1.0, size=(2, n, L)) * params.noise_sigma
    cue = slice(tm.fix_steps, tm.fix_steps + tm.cue_steps)
    x2 = noise[0]
    x3 = noise[1]
    x2[:, cue] = (classes == 1).astype(float)[:, None]
    x3[:, cue] = (classes == 2).astype(float)[:, None]
    return _assemble(GONOGO, n, L, L - tm.decision_steps, x2, x3, classes, tm.decision_steps)


def generate_gonogo(params: TaskParams, classes: Optional[Sequence[int]] = None) -> TaskDataset:
    """Go/no-go.

    A cue on x2 (go, class 1) or x3 (no-go, class 2) is shown after the
    fixation period, followed by a delay; the class must be reported during
    the decision steps once fixation is released. ``classes`` overrides the
    random class draw (the noise stream is unchanged).
    """
    rng = np.random.default_rng(params.seed)
    drawn = rng.integers(1, 3, size=params.n_trials)
    if classes is not None:
        drawn = np.asarray(classes, dtype=np.int64)
        if drawn.shape != (params.n_trials,) or not np.isin(drawn, (1, 2)).all():
            raise ValueError("classes must hold n_trials values from {1, 2}")
    return _gonogo_from_classes(drawn, params, rng)


def generate(task: str, params: TaskParams) -> TaskDataset:
    if task == PDM:
        return generate_pdm(params)
    if task == GONOGO:
        return generate_gonogo(params)
    raise ValueError(f"unknown task {task!r}")


def split_by_trial(d: TaskDataset, train_frac: float) -> tuple[TaskDataset, TaskDataset]:
    """First ``ceil(train_frac * n_trials)`` trials for training, the rest for testing."""
    if not 0 < train_frac < 1:
        raise ValueError("train_frac must be in (0, 1)")
    n_train = math.ceil(train_frac * d.n_trials)
    if n_train < 1 or n_train >= d.n_trials:
        raise ValueError(
            f"train_frac={train_frac} leaves an empty side for {d.n_trials} trials"
        )
    return d.trials(0, n_train), d.trials(n_train, d.n_trials)


def format_dataset_csv(d: TaskDataset) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "x1", "x2", "x3", "y"])
    for t, (row, y) in enumerate(zip(d.inputs.tolist(), d.labels.tolist())):
        writer.writerow([t, repr(row[0]), repr(row[1]), repr(row[2]), y])
    return buf.getvalue()
