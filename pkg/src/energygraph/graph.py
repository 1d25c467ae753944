"""Weighted graphs, measures, node functions and exhaustion families.

A graph is stored as three parallel arrays ``(heads, tails, weights)`` with
one entry per unordered pair, ``heads < tails``, sorted lexicographically.
Node functions are plain float arrays of length ``node_count``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .errors import DisconnectedGraphError, GraphError, GraphFormatError

__all__ = [
    "WeightedGraph",
    "Measure",
    "ExhaustionFamily",
    "FAMILIES",
    "as_function",
    "connected_components",
    "weighted_degree",
    "generate",
    "generations",
    "sphere_sizes",
    "load_graph",
    "save_graph",
    "load_measure",
    "save_measure",
    "load_function",
    "save_function",
    "load_node_set",
]


def _readonly(a):
    a = np.ascontiguousarray(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class WeightedGraph:
    """Finite undirected graph with strictly positive edge weights.

    Construct with :meth:`from_edges` or :meth:`from_arrays`; both normalise
    pairs to ``u < v`` and sort them.  The instance is immutable.
    """

    node_count: int
    heads: np.ndarray
    tails: np.ndarray
    weights: np.ndarray
    labels: tuple[str, ...] | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        n = int(self.node_count)
        if n < 1:
            raise GraphError("node_count must be positive")
        u = np.asarray(self.heads, dtype=np.int64)
        v = np.asarray(self.tails, dtype=np.int64)
        w = np.asarray(self.weights, dtype=np.float64)
        if not (u.shape == v.shape == w.shape) or u.ndim != 1:
            raise GraphError("heads, tails and weights must be 1-d arrays of equal length")
        if u.size:
            if u.min() < 0 or v.min() < 0 or max(u.max(), v.max()) >= n:
                raise GraphError(f"node id out of range 0..{n - 1}")
            loops = np.flatnonzero(u == v)
            if loops.size:
                raise GraphError(f"self-loop at node {u[loops[0]]}")
            bad = np.flatnonzero(~(np.isfinite(w) & (w > 0)))
            if bad.size:
                e = bad[0]
                raise GraphError(f"edge ({u[e]}, {v[e]}) has nonpositive or non-finite weight {w[e]!r}")
            lo, hi = np.minimum(u, v), np.maximum(u, v)
            order = np.lexsort((hi, lo))
            u, v, w = lo[order], hi[order], w[order]
            dup = np.flatnonzero((u[1:] == u[:-1]) & (v[1:] == v[:-1]))
            if dup.size:
                e = dup[0]
                raise GraphError(f"duplicate edge ({u[e]}, {v[e]})")
        if self.labels is not None:
            labels = tuple(str(s) for s in self.labels)
            if len(labels) != n:
                raise GraphError("labels must have one entry per node")
            object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "node_count", n)
        object.__setattr__(self, "heads", _readonly(u))
        object.__setattr__(self, "tails", _readonly(v))
        object.__setattr__(self, "weights", _readonly(w))

    @classmethod
    def from_edges(cls, node_count: int | None, edges: Iterable[Sequence], labels=None) -> "WeightedGraph":
        """Build from ``(u, v, w)`` triples; ``node_count=None`` infers ``1 + max id``."""
        edges = list(edges)
        if edges:
            arr = np.array([(e[0], e[1]) for e in edges], dtype=np.int64)
            w = np.array([e[2] for e in edges], dtype=np.float64)
        else:
            arr = np.empty((0, 2), dtype=np.int64)
            w = np.empty(0)
        if node_count is None:
            if not edges:
                raise GraphError("cannot infer node count of an empty edge list")
            node_count = int(arr.max()) + 1
        return cls(node_count, arr[:, 0], arr[:, 1], w, labels)

    @classmethod
    def from_arrays(cls, node_count, heads, tails, weights, labels=None) -> "WeightedGraph":
        return cls(node_count, heads, tails, weights, labels)

    @property
    def edge_count(self) -> int:
        return int(self.heads.size)

    def edges(self):
        """Iterate ``(u, v, w)`` with Python scalars, in storage order."""
        for u, v, w in zip(self.heads.tolist(), self.tails.tolist(), self.weights.tolist()):
            yield u, v, w

    def __eq__(self, other):
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return (
            self.node_count == other.node_count
            and np.array_equal(self.heads, other.heads)
            and np.array_equal(self.tails, other.tails)
            and np.array_equal(self.weights, other.weights)
            and self.labels == other.labels
        )

    __hash__ = None

    def __repr__(self):
        return f"WeightedGraph(node_count={self.node_count}, edge_count={self.edge_count})"

    @cached_property
    def adjacency(self) -> sp.csr_matrix:
        """Symmetric weight matrix ``b`` in CSR form."""
        n = self.node_count
        rows = np.concatenate([self.heads, self.tails])
        cols = np.concatenate([self.tails, self.heads])
        data = np.concatenate([self.weights, self.weights])
        return sp.csr_matrix((data, (rows, cols)), shape=(n, n))

    @cached_property
    def degrees(self) -> np.ndarray:
        n = self.node_count
        deg = np.bincount(self.heads, weights=self.weights, minlength=n)
        deg += np.bincount(self.tails, weights=self.weights, minlength=n)
        return _readonly(deg)

    @cached_property
    def component_labels(self) -> np.ndarray:
        _, labels = csgraph.connected_components(self.adjacency, directed=False)
        return _readonly(labels)

    @property
    def component_count(self) -> int:
        return int(self.component_labels.max()) + 1

    @property
    def is_connected(self) -> bool:
        return self.component_count == 1

    @property
    def is_forest(self) -> bool:
        return self.edge_count == self.node_count - self.component_count

    def require_connected(self, what="this operation"):
        if not self.is_connected:
            raise DisconnectedGraphError(
                f"{what} needs a connected graph; found {self.component_count} components"
            )

    def check_node(self, x) -> int:
        x = int(x)
        if not 0 <= x < self.node_count:
            raise GraphError(f"node {x} out of range 0..{self.node_count - 1}")
        return x

    def induced_prefix(self, k: int) -> "WeightedGraph":
        """Subgraph induced on nodes ``0..k-1``."""
        keep = self.tails < k
        labels = self.labels[:k] if self.labels is not None else None
        return WeightedGraph(k, self.heads[keep], self.tails[keep], self.weights[keep], labels)


@dataclass(frozen=True, eq=False)
class Measure:
    """Strictly positive node weights ``m({x})``."""

    values: np.ndarray

    def __post_init__(self):
        vals = np.array(self.values, dtype=np.float64)
        if vals.ndim != 1 or vals.size == 0:
            raise GraphError("measure must be a nonempty 1-d array")
        bad = np.flatnonzero(~(np.isfinite(vals) & (vals > 0)))
        if bad.size:
            raise GraphError(f"measure at node {bad[0]} is {vals[bad[0]]!r}; must be positive and finite")
        object.__setattr__(self, "values", _readonly(vals))

    @classmethod
    def uniform(cls, n, value=1.0):
        return cls(np.full(n, float(value)))

    def __len__(self):
        return self.values.size

    @cached_property
    def total(self) -> float:
        return math.fsum(self.values)

    def of(self, nodes) -> float:
        """``m(A)`` for an index array or boolean mask ``nodes``."""
        return math.fsum(self.values[np.asarray(nodes)])

    def check_matches(self, g: WeightedGraph):
        if self.values.size != g.node_count:
            raise GraphError(f"measure has {self.values.size} entries, graph has {g.node_count} nodes")


def as_function(g: WeightedGraph, f) -> np.ndarray:
    """Validate a node function against ``g`` and return it as a float array."""
    f = np.asarray(f, dtype=np.float64)
    if f.shape != (g.node_count,):
        raise GraphError(f"function has shape {f.shape}, expected ({g.node_count},)")
    return f


def connected_components(g: WeightedGraph) -> list[list[int]]:
    """Partition of the node set, parts ordered by their smallest node."""
    labels = g.component_labels
    parts: dict[int, list[int]] = {}
    for x, c in enumerate(labels.tolist()):
        parts.setdefault(c, []).append(x)
    return sorted(parts.values(), key=lambda p: p[0])


def weighted_degree(g: WeightedGraph, x) -> float:
    x = g.check_node(x)
    return float(g.degrees[x])


def generations(g: WeightedGraph, root: int = 0) -> np.ndarray:
    """Hop distance from ``root``; -1 for unreachable nodes."""
    root = g.check_node(root)
    d = csgraph.shortest_path(g.adjacency, directed=False, unweighted=True, indices=root)
    out = np.full(g.node_count, -1, dtype=np.int64)
    ok = np.isfinite(d)
    out[ok] = d[ok].astype(np.int64)
    return out


def sphere_sizes(gen: np.ndarray) -> np.ndarray:
    """Number of nodes in each generation (``gen >= 0`` only)."""
    return np.bincount(gen[gen >= 0])


# ---------------------------------------------------------------------------
# exhaustion families

FAMILIES = ("path", "cycle", "star", "complete", "binary_tree", "spherically_symmetric_tree", "from_file")

_MAX_NODES = 5_000_000


@dataclass(frozen=True)
class ExhaustionFamily:
    """Nested finite truncations of an infinite graph, rooted at node 0.

    ``params`` (all optional):

    * ``weight`` -- edge weight for every edge (default 1.0)
    * ``branching`` -- list ``b_1, b_2, ...`` for the spherically symmetric tree
    * ``branching_base`` -- alternative to ``branching``: ``b_k = base**k`` (default 4)
    * ``path`` -- graph file for ``from_file``

    Level ``k`` is an induced subgraph of level ``k+1`` on a node prefix, except
    for ``cycle`` whose closing edge moves with the level.
    """

    family_id: str
    params: Mapping[str, Any] = field(default_factory=dict)
    root: int = 0

    def __post_init__(self):
        if self.family_id not in FAMILIES:
            raise GraphError(f"unknown family {self.family_id!r}; choose from {', '.join(FAMILIES)}")
        if self.root != 0:
            raise GraphError("families are rooted at node 0")

    def generate(self, level: int) -> WeightedGraph:
        return generate(self, level)

    def branching(self, level):
        if "branching" in self.params:
            seq = [int(b) for b in self.params["branching"]]
            if len(seq) < level:
                raise GraphError(f"branching sequence has {len(seq)} entries, level {level} needs {level}")
            seq = seq[:level]
        else:
            base = int(self.params.get("branching_base", 4))
            seq = [base**k for k in range(1, level + 1)]
        if any(b < 1 for b in seq):
            raise GraphError("branching numbers must be positive integers")
        return seq


def _weight(family):
    w = float(family.params.get("weight", 1.0))
    if not (math.isfinite(w) and w > 0):
        raise GraphError(f"weight must be positive, got {w!r}")
    return w


def _spherical_tree(branching, weight):
    sizes = [1]
    for b in branching:
        sizes.append(sizes[-1] * b)
    if sum(sizes) > _MAX_NODES:
        raise GraphError(f"spherically symmetric tree would have {sum(sizes)} nodes (limit {_MAX_NODES})")
    parents = []
    offset = 0
    for k, b in enumerate(branching):
        parents.append(np.repeat(np.arange(offset, offset + sizes[k], dtype=np.int64), b))
        offset += sizes[k]
    parents = np.concatenate(parents) if parents else np.empty(0, dtype=np.int64)
    n = offset + sizes[-1]
    children = np.arange(1, n, dtype=np.int64)
    return WeightedGraph(n, parents, children, np.full(n - 1, weight))


_FILE_CACHE: dict = {}


def _from_file_level(family, level):
    path = family.params.get("path")
    if path is None:
        raise GraphError("from_file family needs params['path']")
    key = ("_from_file", str(path))
    base = _FILE_CACHE.get(key)
    if base is None:
        g = load_graph(path)
        gen = generations(g, 0)
        reach = np.flatnonzero(gen >= 0)
        order = reach[np.lexsort((reach, gen[reach]))]
        new_id = np.full(g.node_count, -1, dtype=np.int64)
        new_id[order] = np.arange(order.size)
        keep = (new_id[g.heads] >= 0) & (new_id[g.tails] >= 0)
        relabelled = WeightedGraph(
            order.size,
            new_id[g.heads[keep]],
            new_id[g.tails[keep]],
            g.weights[keep],
            labels=tuple(str(x) for x in order.tolist()),
        )
        base = (relabelled, gen[order])
        _FILE_CACHE[key] = base
    g, gen = base
    return g.induced_prefix(int(np.searchsorted(gen, level, side="right")))


def generate(family: ExhaustionFamily, level: int) -> WeightedGraph:
    """Level ``level`` truncation of ``family``.

    path: ``level+1`` nodes.  cycle: ``level+2`` nodes.  star: centre plus
    ``level`` leaves.  complete: ``K_{level+1}``.  binary_tree and
    spherically_symmetric_tree: generations ``0..level``.  from_file: the
    ball of hop radius ``level`` around node 0, renumbered breadth first.
    """
    if isinstance(level, bool) or int(level) != level or level < 1:
        raise GraphError(f"level must be a positive integer, got {level!r}")
    level = int(level)
    fid = family.family_id
    if fid == "from_file":
        return _from_file_level(family, level)
    w = _weight(family)
    if fid == "path":
        if level + 1 > _MAX_NODES:
            raise GraphError(f"path level {level} exceeds node limit")
        u = np.arange(level, dtype=np.int64)
        return WeightedGraph(level + 1, u, u + 1, np.full(level, w))
    if fid == "cycle":
        n = level + 2
        if n > _MAX_NODES:
            raise GraphError(f"cycle level {level} exceeds node limit")
        u = np.arange(n, dtype=np.int64)
        return WeightedGraph(n, u, (u + 1) % n, np.full(n, w))
    if fid == "star":
        if level + 1 > _MAX_NODES:
            raise GraphError(f"star level {level} exceeds node limit")
        return WeightedGraph(level + 1, np.zeros(level, dtype=np.int64), np.arange(1, level + 1), np.full(level, w))
    if fid == "complete":
        n = level + 1
        if n * (n - 1) // 2 > _MAX_NODES:
            raise GraphError(f"complete graph level {level} has too many edges")
        u, v = np.triu_indices(n, k=1)
        return WeightedGraph(n, u, v, np.full(u.size, w))
    if fid == "binary_tree":
        return _spherical_tree([2] * level, w)
    if fid == "spherically_symmetric_tree":
        return _spherical_tree(family.branching(level), w)
    raise GraphError(f"unknown family {fid!r}")  # pragma: no cover


# ---------------------------------------------------------------------------
# text formats


def _content_lines(path):
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line:
                yield lineno, line


def _header_nodes(line, path, lineno):
    parts = line[1:].split()
    if len(parts) == 2 and parts[0] == "nodes":
        try:
            n = int(parts[1])
        except ValueError:
            raise GraphFormatError(f"bad node count {parts[1]!r}", path, lineno) from None
        if n < 1:
            raise GraphFormatError("node count must be positive", path, lineno)
        return n
    return None


def load_graph(path) -> WeightedGraph:
    """Read ``u v w`` lines; ``#nodes N`` fixes the node count, other ``#`` lines are comments."""
    node_count = None
    heads, tails, weights = [], [], []
    seen: dict[tuple[int, int], int] = {}
    for lineno, line in _content_lines(path):
        if line.startswith("#"):
            n = _header_nodes(line, path, lineno)
            if n is not None:
                node_count = n
            continue
        parts = line.split()
        if len(parts) != 3:
            raise GraphFormatError(f"expected 'u v w', got {line!r}", path, lineno)
        try:
            u, v, w = int(parts[0]), int(parts[1]), float(parts[2])
        except ValueError:
            raise GraphFormatError(f"cannot parse {line!r}", path, lineno) from None
        if u < 0 or v < 0:
            raise GraphFormatError("node ids must be nonnegative", path, lineno)
        if u == v:
            raise GraphFormatError(f"self-loop at node {u}", path, lineno)
        if not (math.isfinite(w) and w > 0):
            raise GraphFormatError(f"weight must be positive, got {parts[2]}", path, lineno)
        key = (min(u, v), max(u, v))
        if key in seen:
            raise GraphFormatError(f"duplicate edge {key} (first on line {seen[key]})", path, lineno)
        seen[key] = lineno
        heads.append(u)
        tails.append(v)
        weights.append(w)
    top = max(max(heads, default=-1), max(tails, default=-1))
    if node_count is None:
        if top < 0:
            raise GraphFormatError("no edges and no '#nodes' header", path)
        node_count = top + 1
    elif top >= node_count:
        raise GraphFormatError(f"node id {top} exceeds '#nodes {node_count}'", path)
    return WeightedGraph(node_count, np.array(heads, dtype=np.int64), np.array(tails, dtype=np.int64), np.array(weights))


def save_graph(g: WeightedGraph, path, values=None):
    """Write ``g``; ``values`` replaces the weights column (edge-length metrics)."""
    col = g.weights if values is None else np.asarray(values, dtype=np.float64)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes {g.node_count}\n")
        fh.writelines(f"{u} {v} {w!r}\n" for u, v, w in zip(g.heads.tolist(), g.tails.tolist(), col.tolist()))


def _load_node_values(path, node_count, what):
    n_header = None
    values: dict[int, float] = {}
    for lineno, line in _content_lines(path):
        if line.startswith("#"):
            n = _header_nodes(line, path, lineno)
            if n is not None:
                n_header = n
            continue
        parts = line.split()
        if len(parts) != 2:
            raise GraphFormatError(f"expected 'v {what}', got {line!r}", path, lineno)
        try:
            x, val = int(parts[0]), float(parts[1])
        except ValueError:
            raise GraphFormatError(f"cannot parse {line!r}", path, lineno) from None
        if x < 0:
            raise GraphFormatError("node ids must be nonnegative", path, lineno)
        if x in values:
            raise GraphFormatError(f"node {x} listed twice", path, lineno)
        values[x] = val
    n = node_count or n_header or (max(values, default=-1) + 1)
    if n < 1:
        raise GraphFormatError(f"empty {what} file", path)
    missing = [x for x in range(n) if x not in values]
    if missing:
        raise GraphFormatError(f"{what} missing for node {missing[0]} ({len(missing)} nodes missing)", path)
    extra = [x for x in values if x >= n]
    if extra:
        raise GraphFormatError(f"node {max(extra)} out of range for {n} nodes", path)
    return np.array([values[x] for x in range(n)])


def load_measure(path, node_count=None) -> Measure:
    return Measure(_load_node_values(path, node_count, "measure"))


def save_measure(m: Measure, path):
    _save_node_values(m.values, path)


def load_function(path, node_count=None) -> np.ndarray:
    return _load_node_values(path, node_count, "value")


def save_function(f, path):
    _save_node_values(np.asarray(f, dtype=np.float64), path)


def _save_node_values(vals, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#nodes {vals.size}\n")
        fh.writelines(f"{x} {val!r}\n" for x, val in enumerate(vals.tolist()))


def load_node_set(path) -> list[int]:
    """Whitespace-separated node ids; ``#`` lines ignored; duplicates collapse."""
    nodes = set()
    for lineno, line in _content_lines(path):
        if line.startswith("#"):
            continue
        for tok in line.split():
            try:
                x = int(tok)
            except ValueError:
                raise GraphFormatError(f"bad node id {tok!r}", path, lineno) from None
            if x < 0:
                raise GraphFormatError("node ids must be nonnegative", path, lineno)
            nodes.add(x)
    return sorted(nodes)
