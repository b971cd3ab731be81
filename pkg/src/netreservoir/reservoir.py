"""Echo state network built on a fixed weighted digraph.

The graph's weight matrix is used as the recurrent matrix after rescaling it
to a target spectral radius ``alpha``. Three input channels are injected
unweighted into three input nodes and six output nodes are read out. The
update is ``x(t) = tanh(W x(t-1) + B u(t))`` starting from ``x(0) = 0``.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional

import numpy as np

from .netgraph import WeightedDigraph, degrees

N_INPUTS = 3
N_OUTPUTS = 6

RANDOM = "random"
DEGREE_INFORMED = "informed"
STRATEGIES = (RANDOM, DEGREE_INFORMED)

RHO_EPS = 1e-12


class ReservoirError(ValueError):
    pass


@dataclass(frozen=True)
class NodeSelection:
    input_nodes: tuple[int, ...]
    output_nodes: tuple[int, ...]
    strategy: str

    def __post_init__(self):
        object.__setattr__(self, "input_nodes", tuple(int(i) for i in self.input_nodes))
        object.__setattr__(self, "output_nodes", tuple(int(i) for i in self.output_nodes))
        if len(self.input_nodes) != N_INPUTS or len(self.output_nodes) != N_OUTPUTS:
            raise ReservoirError(f"need {N_INPUTS} input and {N_OUTPUTS} output nodes")
        if len(set(self.io_nodes)) != N_INPUTS + N_OUTPUTS:
            raise ReservoirError("input and output nodes must be distinct")
        if self.strategy not in STRATEGIES:
            raise ReservoirError(f"unknown strategy {self.strategy!r}")

    @property
    def io_nodes(self) -> tuple[int, ...]:
        return self.input_nodes + self.output_nodes

    def check(self, n_nodes: int):
        if any(not 0 <= i < n_nodes for i in self.io_nodes):
            raise ReservoirError(f"selection references a node outside 0..{n_nodes - 1}")

    def to_dict(self) -> dict:
        return {
            "input_nodes": list(self.input_nodes),
            "output_nodes": list(self.output_nodes),
            "strategy": self.strategy,
        }


@dataclass(frozen=True)
class EsnConfig:
    alpha: float
    seed: int = 0

    def __post_init__(self):
        if not self.alpha > 0:
            raise ReservoirError("alpha must be > 0")


@dataclass(frozen=True, eq=False)
class Esn:
    """Scaled reservoir.

    ``w[i, j]`` is the scaled weight of edge ``j -> i``. ``rho_raw`` is the
    spectral radius of the unscaled matrix, so ``w / scale`` recovers it.
    """

    w: np.ndarray
    selection: NodeSelection
    alpha_applied: float
    rho_raw: float
    scale: float
    labels: tuple[str, ...] = field(default=())

    @property
    def n_nodes(self) -> int:
        return self.w.shape[0]

    def descriptor(self) -> dict:
        return {
            "labels": list(self.labels),
            "selection": self.selection.to_dict(),
            "alpha": self.alpha_applied,
            "rho_raw": self.rho_raw,
            "scale": self.scale,
            "activation": "tanh",
        }

    def to_json(self) -> str:
        return json.dumps(self.descriptor(), indent=2)

    def save(self, stem):
        """Write ``<stem>.json`` and the matrix as ``<stem>.npy``."""
        with open(f"{stem}.json", "w", encoding="utf-8") as f:
            f.write(self.to_json())
        np.save(f"{stem}.npy", self.w)


@dataclass(frozen=True, eq=False)
class StateTrace:
    states: np.ndarray
    output_nodes: tuple[int, ...]

    @property
    def output_states(self) -> np.ndarray:
        return self.states[:, list(self.output_nodes)]


def _top_k(candidates: list[int], degree, strength, k: int) -> list[int]:
    # descending degree, then descending strength, then ascending index
    return sorted(candidates, key=lambda i: (-degree[i], -strength[i], i))[:k]


def select_nodes(g: WeightedDigraph, strategy: str, seed: int = 0) -> NodeSelection:
    """Pick 3 input and 6 output nodes.

    ``random`` draws 9 distinct nodes uniformly. ``informed`` takes the three
    largest out-degrees as inputs, then the six largest in-degrees among the
    rest as outputs; ties go to the larger strength, then the lower index.
    """
    n = g.n_nodes
    need = N_INPUTS + N_OUTPUTS
    if n < need:
        raise ReservoirError(f"graph has {n} nodes, need at least {need}")
    if strategy == RANDOM:
        picked = np.random.default_rng(seed).choice(n, size=need, replace=False).tolist()
        return NodeSelection(picked[:N_INPUTS], picked[N_INPUTS:], RANDOM)
    if strategy == DEGREE_INFORMED:
        deg = degrees(g)
        inputs = _top_k(list(range(n)), deg.out_degree, deg.out_strength, N_INPUTS)
        rest = [i for i in range(n) if i not in inputs]
        outputs = _top_k(rest, deg.in_degree, deg.in_strength, N_OUTPUTS)
        return NodeSelection(inputs, outputs, DEGREE_INFORMED)
    raise ReservoirError(f"unknown strategy {strategy!r}")


class SpectralRadius(NamedTuple):
    value: float
    converged: bool


def estimate_spectral_radius(
    w: np.ndarray,
    restarts: int = 10,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    seed: int = 0,
    patience: int = 10,
) -> SpectralRadius:
    """Largest eigenvalue magnitude by power iteration.

    All restarts run together as the columns of one block. For a nonnegative
    matrix the iteration runs on ``w + s*I`` with ``s`` the mean row sum: the
    Perron root becomes strictly dominant, which handles periodic graphs
    (e.g. a 2-cycle with eigenvalues +-r). A restart has converged once the
    relative change of the estimate stays within ``tol`` for ``patience``
    consecutive steps. An iterate that vanishes exactly
    means the matrix is nilpotent on that start vector and counts as a
    converged 0. If no restart converges, the largest singular value is
    returned as an upper bound with ``converged=False``.
    """
    w = np.asarray(w, dtype=float)
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise ReservoirError("matrix must be square")
    n = w.shape[0]
    if n == 0 or not np.any(w):
        return SpectralRadius(0.0, True)

    nonneg = bool((w >= 0).all())
    shift = float(w.sum(axis=1).mean()) if nonneg else 0.0
    rng = np.random.default_rng(seed)
    if nonneg:
        x = rng.random((n, restarts)) + 0.5
    else:
        x = rng.standard_normal((n, restarts))
    x /= np.linalg.norm(x, axis=0)

    # nilpotent detection: n unshifted steps annihilate every start vector
    y = x.copy()
    for _ in range(n):
        y = w @ y
        norms = np.linalg.norm(y, axis=0)
        if not norms.all():
            return SpectralRadius(0.0, True)
        y /= norms

    b = w + shift * np.eye(n) if shift else w
    prev = np.full(restarts, np.inf)
    streak = np.zeros(restarts, dtype=int)
    converged = np.zeros(restarts, dtype=bool)
    estimate = np.zeros(restarts)
    for _ in range(max_iter):
        y = b @ x
        lam = np.linalg.norm(y, axis=0)
        if not lam.all():
            return SpectralRadius(0.0, True)
        x = y / lam
        # a single small change can be the turning point of an oscillating
        # estimate (complex subdominant pair), so require a run of them
        streak = np.where(np.abs(lam - prev) <= tol * lam, streak + 1, 0)
        newly = (streak >= patience) & ~converged
        estimate[newly] = lam[newly]
        converged |= newly
        if converged.all():
            break
        prev = lam
    if not converged.any():
        warnings.warn("power iteration did not converge; returning largest singular value")
        return SpectralRadius(float(np.linalg.norm(w, 2)), False)
    return SpectralRadius(max(float(estimate[converged].max()) - shift, 0.0), True)


def _scaled(w_raw: np.ndarray, alpha: float) -> tuple[np.ndarray, float, float]:
    rho = estimate_spectral_radius(w_raw).value
    if rho > RHO_EPS:
        scale = alpha / rho
    else:
        peak = float(np.abs(w_raw).max()) if w_raw.size else 0.0
        if peak == 0:
            raise ReservoirError("degenerate reservoir: all weights are zero")
        scale = alpha / peak
    return w_raw * scale, rho, scale


def build_esn(g: WeightedDigraph, sel: NodeSelection, cfg: EsnConfig) -> Esn:
    """Scale the graph's weight matrix to spectral radius ``cfg.alpha``.

    Nilpotent topologies (spectral radius ~0, e.g. DAGs) are scaled so the
    largest weight equals ``alpha`` instead.
    """
    sel.check(g.n_nodes)
    w, rho, scale = _scaled(g.adjacency(), cfg.alpha)
    return Esn(w, sel, cfg.alpha, rho, scale, g.labels)


def simulate(esn: Esn, inputs: np.ndarray, x0: Optional[np.ndarray] = None) -> StateTrace:
    """Run the reservoir over ``inputs`` (``T x 3``) and return every state."""
    u = np.asarray(inputs, dtype=float)
    if u.ndim != 2 or u.shape[1] != N_INPUTS:
        raise ReservoirError(f"inputs must have shape (T, {N_INPUTS}), got {u.shape}")
    n = esn.n_nodes
    drive = np.zeros((len(u), n))
    drive[:, list(esn.selection.input_nodes)] = u
    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float)
    if x.shape != (n,):
        raise ReservoirError(f"initial state must have shape ({n},)")
    states = np.empty((len(u), n))
    wt = np.ascontiguousarray(esn.w.T)
    for t in range(len(u)):
        x = np.tanh(x @ wt + drive[t])
        states[t] = x
    return StateTrace(states, esn.selection.output_nodes)


def zero_out_nodes(esn: Esn, ids: Iterable[int], rescale: bool = False) -> Esn:
    """Silence ``ids`` by zeroing their rows and columns.

    Node indexing is unchanged. With ``rescale`` the damaged matrix is scaled
    back to the original ``alpha``; by default it is left as is.
    """
    ids = sorted(set(int(i) for i in ids))
    if not ids:
        return esn
    io = set(esn.selection.io_nodes)
    hit = [i for i in ids if i in io]
    if hit:
        raise ReservoirError(
            f"nodes {hit} are input/output nodes; deleted nodes must not be part of the input or output nodes"
        )
    if any(not 0 <= i < esn.n_nodes for i in ids):
        raise ReservoirError("node index out of range")
    w = esn.w.copy()
    w[ids, :] = 0.0
    w[:, ids] = 0.0
    if rescale:
        rho = estimate_spectral_radius(w).value
        if rho > RHO_EPS:
            w *= esn.alpha_applied / rho
    return Esn(w, esn.selection, esn.alpha_applied, esn.rho_raw, esn.scale, esn.labels)
