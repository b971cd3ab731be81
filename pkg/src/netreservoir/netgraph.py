"""Weighted directed graphs: parsing, degree tables, node deletion and
degree-preserving rewiring.

Edges are stored in a fixed order (the order they were read in). Node order is
first appearance in the edge list and every downstream index refers to it.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np


class GraphParseError(ValueError):
    """A CSV row could not be read."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class GraphValidationError(ValueError):
    """The graph violates a structural invariant."""


class Edge(NamedTuple):
    src: int
    dst: int
    weight: float


@dataclass(frozen=True)
class WeightedDigraph:
    """Node-labelled directed graph with nonnegative edge weights.

    Attributes:
        labels: Unique node labels, in index order.
        edges: Edges as ``(src, dst, weight)`` index triples.
        coords: Optional ``(lon, lat)`` per node, ``None`` where unknown.
    """

    labels: tuple[str, ...]
    edges: tuple[Edge, ...] = ()
    coords: tuple[Optional[tuple[float, float]], ...] = field(default=())

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "edges", tuple(Edge(int(s), int(d), float(w)) for s, d, w in self.edges))
        if not self.coords:
            object.__setattr__(self, "coords", (None,) * len(self.labels))
        else:
            object.__setattr__(self, "coords", tuple(self.coords))
        self._validate()

    def _validate(self):
        n = len(self.labels)
        if len(set(self.labels)) != n:
            raise GraphValidationError("node labels must be unique")
        if len(self.coords) != n:
            raise GraphValidationError("coords must have one entry per node")
        seen = set()
        for src, dst, weight in self.edges:
            if not (0 <= src < n and 0 <= dst < n):
                raise GraphValidationError(f"edge ({src}, {dst}) references an unknown node")
            if not math.isfinite(weight) or weight < 0:
                raise GraphValidationError(
                    f"edge {self.labels[src]}->{self.labels[dst]} has invalid weight {weight!r}"
                )
            if (src, dst) in seen:
                raise GraphValidationError(
                    f"duplicate edge {self.labels[src]}->{self.labels[dst]}"
                )
            seen.add((src, dst))

    @property
    def n_nodes(self) -> int:
        return len(self.labels)

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def index_of(self, label: str) -> int:
        return self.labels.index(label)

    def adjacency(self) -> np.ndarray:
        """Dense matrix with ``a[dst, src] = weight`` (column = source)."""
        a = np.zeros((self.n_nodes, self.n_nodes))
        for src, dst, weight in self.edges:
            a[dst, src] = weight
        return a


@dataclass(frozen=True)
class DegreeTable:
    in_degree: np.ndarray
    out_degree: np.ndarray
    in_strength: np.ndarray
    out_strength: np.ndarray

    def __len__(self):
        return len(self.in_degree)


def _read_rows(text: str, header: Sequence[str]) -> Iterable[tuple[int, list[str]]]:
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        first = next(reader)
    except StopIteration:
        raise GraphParseError("missing header", line=1) from None
    if [c.strip() for c in first] != list(header):
        raise GraphParseError(f"expected header {','.join(header)!r}, got {','.join(first)!r}", line=1)
    for row in reader:
        lineno = reader.line_num
        if not row or all(not c.strip() for c in row):
            continue
        if len(row) != len(header):
            raise GraphParseError(f"expected {len(header)} fields, got {len(row)}", line=lineno)
        yield lineno, [c.strip() for c in row]


def _parse_float(value: str, lineno: int, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise GraphParseError(f"{what} {value!r} is not a number", line=lineno) from None


def parse_edge_list(text: str) -> WeightedDigraph:
    """Read a ``src,dst,weight`` CSV into a graph.

    Nodes are numbered in order of first appearance. Malformed rows raise
    :class:`GraphParseError` with the offending line number; negative or
    non-finite weights and repeated ``(src, dst)`` pairs raise
    :class:`GraphValidationError`.
    """
    index: dict[str, int] = {}
    labels: list[str] = []
    edges: list[Edge] = []
    seen: set[tuple[int, int]] = set()

    def intern(label: str) -> int:
        if label not in index:
            index[label] = len(labels)
            labels.append(label)
        return index[label]

    for lineno, (src, dst, raw_weight) in _read_rows(text, ("src", "dst", "weight")):
        if not src or not dst:
            raise GraphParseError("empty node label", line=lineno)
        weight = _parse_float(raw_weight, lineno, "weight")
        if not math.isfinite(weight) or weight < 0:
            raise GraphValidationError(f"line {lineno}: weight must be finite and >= 0, got {raw_weight!r}")
        s, d = intern(src), intern(dst)
        if (s, d) in seen:
            raise GraphValidationError(f"line {lineno}: duplicate edge {src}->{dst}")
        seen.add((s, d))
        edges.append(Edge(s, d, weight))
    return WeightedDigraph(tuple(labels), tuple(edges))


def parse_node_metadata(text: str, g: WeightedDigraph) -> tuple[WeightedDigraph, int]:
    """Attach ``id,lon,lat`` coordinates to the nodes of ``g``.

    Returns the new graph and the number of rows naming unknown nodes, which
    are skipped.
    """
    coords = list(g.coords)
    index = {label: i for i, label in enumerate(g.labels)}
    unmatched = 0
    for lineno, (node_id, lon, lat) in _read_rows(text, ("id", "lon", "lat")):
        lon_f = _parse_float(lon, lineno, "lon")
        lat_f = _parse_float(lat, lineno, "lat")
        if node_id not in index:
            unmatched += 1
            continue
        coords[index[node_id]] = (lon_f, lat_f)
    return WeightedDigraph(g.labels, g.edges, tuple(coords)), unmatched


def format_edge_list(g: WeightedDigraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["src", "dst", "weight"])
    for src, dst, weight in g.edges:
        writer.writerow([g.labels[src], g.labels[dst], repr(weight)])
    return buf.getvalue()


def format_node_metadata(g: WeightedDigraph) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["id", "lon", "lat"])
    for label, xy in zip(g.labels, g.coords):
        if xy is not None:
            writer.writerow([label, repr(xy[0]), repr(xy[1])])
    return buf.getvalue()


def read_graph(edges_path, nodes_path=None) -> WeightedDigraph:
    with open(edges_path, encoding="utf-8", newline="") as f:
        g = parse_edge_list(f.read())
    if nodes_path is not None:
        with open(nodes_path, encoding="utf-8", newline="") as f:
            g, _ = parse_node_metadata(f.read(), g)
    return g


def degrees(g: WeightedDigraph) -> DegreeTable:
    """Per-node in/out degree counts and weighted strengths.

    Strengths are accumulated in edge-list order, so ``out_strength.sum()``
    reproduces the plain sum of edge weights.
    """
    n = g.n_nodes
    in_deg = np.zeros(n, dtype=np.int64)
    out_deg = np.zeros(n, dtype=np.int64)
    in_str = np.zeros(n)
    out_str = np.zeros(n)
    for src, dst, weight in g.edges:
        out_deg[src] += 1
        in_deg[dst] += 1
        out_str[src] += weight
        in_str[dst] += weight
    return DegreeTable(in_deg, out_deg, in_str, out_str)


def delete_nodes(g: WeightedDigraph, ids: Iterable[int]) -> WeightedDigraph:
    """Return a copy of ``g`` without the nodes ``ids`` and their edges."""
    drop = set(ids)
    for i in drop:
        if not 0 <= i < g.n_nodes:
            raise GraphValidationError(f"unknown node index {i}")
    keep = [i for i in range(g.n_nodes) if i not in drop]
    remap = {old: new for new, old in enumerate(keep)}
    edges = tuple(
        Edge(remap[s], remap[d], w) for s, d, w in g.edges if s in remap and d in remap
    )
    return WeightedDigraph(
        tuple(g.labels[i] for i in keep), edges, tuple(g.coords[i] for i in keep)
    )


def rewire_null_model(g: WeightedDigraph, seed: int, swap_factor: int = 10) -> WeightedDigraph:
    """Degree-preserving randomisation by directed double-edge swaps.

    ``swap_factor * n_edges`` swaps are attempted. A swap picks two distinct
    non-self-loop edges ``a->b`` and ``c->d`` and replaces them by ``a->d`` and
    ``c->b``; each edge keeps its weight. Swaps that share an endpoint, would
    duplicate an existing edge or would create a self-loop are skipped.
    Existing self-loops are left alone.
    """
    if swap_factor < 0:
        raise ValueError("swap_factor must be >= 0")
    edges = list(g.edges)
    movable = [k for k, e in enumerate(edges) if e.src != e.dst]
    n_attempts = swap_factor * len(edges)
    if n_attempts == 0 or len(movable) < 2:
        return g

    present = {(e.src, e.dst) for e in edges}
    rng = np.random.default_rng(seed)
    m = len(movable)
    # draw all candidate pairs up front; the rejection rule is the only state
    picks = rng.integers(0, m, size=(n_attempts, 2))
    for i, j in picks.tolist():
        if i == j:
            continue
        ki, kj = movable[i], movable[j]
        a, b, w1 = edges[ki]
        c, d, w2 = edges[kj]
        if a == c or b == d or a == d or c == b:
            continue
        if (a, d) in present or (c, b) in present:
            continue
        present.difference_update(((a, b), (c, d)))
        present.update(((a, d), (c, b)))
        edges[ki] = Edge(a, d, w1)
        edges[kj] = Edge(c, b, w2)
    return WeightedDigraph(g.labels, tuple(edges), g.coords)


def erdos_renyi_digraph(
    n_nodes: int, mean_out_degree: float, seed: int, self_loops: bool = False
) -> WeightedDigraph:
    """Random digraph with independent edges and uniform weights in (0, 1].

    Each ordered pair is an edge with probability ``mean_out_degree / (n - 1)``
    (``/ n`` when self-loops are allowed).
    """
    if n_nodes < 1:
        raise ValueError("n_nodes must be >= 1")
    rng = np.random.default_rng(seed)
    denom = n_nodes if self_loops else max(n_nodes - 1, 1)
    p = min(1.0, mean_out_degree / denom)
    mask = rng.random((n_nodes, n_nodes)) < p
    if not self_loops:
        np.fill_diagonal(mask, False)
    src, dst = np.nonzero(mask)
    weights = 1.0 - rng.random(len(src))
    labels = tuple(f"n{i}" for i in range(n_nodes))
    edges = tuple(Edge(int(s), int(d), float(w)) for s, d, w in zip(src, dst, weights))
    return WeightedDigraph(labels, edges)
