"""Pseudo metrics on graphs and the intrinsic-metric condition.

A :class:`PseudoMetric` is either a path metric generated by positive edge
lengths (distances are shortest-path sums) or an explicit symmetric matrix
whose entries may be ``inf``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.sparse import csgraph

from .energy import dirichlet_energy
from .errors import GraphError, GraphFormatError, NotIntrinsicError
from .graph import Measure, WeightedGraph, load_graph, save_graph

__all__ = [
    "PseudoMetric",
    "IntrinsicReport",
    "Lemma1Report",
    "verify_intrinsic",
    "canonical_intrinsic_metric",
    "distance_to_set",
    "lemma1_check",
    "diameter_sigma",
    "covering_radius",
    "load_metric",
    "save_metric",
    "INTRINSIC_TOL",
    "ALL_PAIRS_CUTOFF",
]

INTRINSIC_TOL = 1e-12
TRIANGLE_TOL = 1e-12
ALL_PAIRS_CUTOFF = 5000


class PseudoMetric:
    """Pseudo metric attached to a graph.

    Use :meth:`from_edge_lengths` or :meth:`from_matrix`.  Instances are not
    modified after construction.
    """

    def __init__(self, graph: WeightedGraph, *, lengths=None, matrix=None):
        if (lengths is None) == (matrix is None):
            raise GraphError("give exactly one of lengths or matrix")
        self.graph = graph
        self.lengths = None
        self.matrix = None
        if lengths is not None:
            lengths = np.array(lengths, dtype=np.float64)
            if lengths.shape != (graph.edge_count,):
                raise GraphError(f"expected {graph.edge_count} edge lengths, got shape {lengths.shape}")
            bad = np.flatnonzero(~(np.isfinite(lengths) & (lengths > 0)))
            if bad.size:
                raise GraphError(f"edge length {lengths[bad[0]]!r} at edge {bad[0]} is not positive and finite")
            lengths.setflags(write=False)
            self.lengths = lengths
            n = graph.node_count
            rows = np.concatenate([graph.heads, graph.tails])
            cols = np.concatenate([graph.tails, graph.heads])
            self._csr = sp.csr_matrix((np.concatenate([lengths, lengths]), (rows, cols)), shape=(n, n))
        else:
            M = np.array(matrix, dtype=np.float64)
            _check_matrix(M, graph.node_count)
            M.setflags(write=False)
            self.matrix = M

    @classmethod
    def from_edge_lengths(cls, graph, lengths):
        return cls(graph, lengths=lengths)

    @classmethod
    def from_matrix(cls, graph, matrix):
        return cls(graph, matrix=matrix)

    @property
    def kind(self):
        return "edge_lengths" if self.lengths is not None else "explicit_matrix"

    @property
    def node_count(self):
        return self.graph.node_count

    def scaled(self, alpha):
        """``alpha * sigma``; scaling by ``alpha in (0, 1]`` keeps a metric intrinsic."""
        alpha = float(alpha)
        if not alpha > 0:
            raise GraphError("scale factor must be positive")
        if self.lengths is not None:
            return PseudoMetric(self.graph, lengths=alpha * self.lengths)
        return PseudoMetric(self.graph, matrix=alpha * self.matrix)

    def distances_from(self, sources) -> np.ndarray:
        """``min_{s in sources} sigma(s, x)`` for every node ``x``."""
        src = np.unique(np.asarray(list(sources) if not isinstance(sources, np.ndarray) else sources, dtype=np.int64))
        if src.size == 0:
            raise GraphError("source set is empty")
        if src.min() < 0 or src.max() >= self.node_count:
            raise GraphError("source node out of range")
        if self.matrix is not None:
            return self.matrix[src].min(axis=0)
        d = csgraph.dijkstra(self._csr, directed=False, indices=src, min_only=True)
        d[src] = 0.0
        return d

    def distance(self, x, y) -> float:
        return float(self.distances_from([x])[y])

    def edge_distances(self) -> np.ndarray:
        """``sigma(u, v)`` for each stored edge ``(u, v)`` of the graph."""
        g = self.graph
        if self.matrix is not None:
            return self.matrix[g.heads, g.tails]
        if g.is_forest:
            return self.lengths.copy()
        n = g.node_count
        out = np.empty(g.edge_count)
        limit = float(self.lengths.max())
        order = np.argsort(g.heads, kind="stable")
        heads = g.heads[order]
        chunk = max(1, int(2e7 // n))
        starts = np.searchsorted(heads, np.arange(0, n, chunk))
        for c, s0 in zip(range(0, n, chunk), starts):
            nodes = np.arange(c, min(c + chunk, n))
            d = csgraph.dijkstra(self._csr, directed=False, indices=nodes, limit=limit)
            s1 = np.searchsorted(heads, c + chunk)
            sel = order[s0:s1]
            out[sel] = d[g.heads[sel] - c, g.tails[sel]]
        return out

    def to_matrix(self, cutoff=ALL_PAIRS_CUTOFF) -> np.ndarray:
        if self.matrix is not None:
            return np.array(self.matrix)
        if self.node_count > cutoff:
            raise GraphError(f"all-pairs distances refused: {self.node_count} nodes > cutoff {cutoff}")
        D = csgraph.dijkstra(self._csr, directed=False)
        # both directions are path sums; the smaller is the better-rounded one
        return np.minimum(D, D.T)


def _check_matrix(M, n):
    if M.shape != (n, n):
        raise GraphError(f"metric matrix has shape {M.shape}, expected ({n}, {n})")
    if np.isnan(M).any():
        raise GraphError("metric matrix contains NaN")
    if (M < 0).any():
        raise GraphError("metric matrix has negative entries")
    if np.any(np.diag(M) != 0):
        raise GraphError("metric matrix must vanish on the diagonal")
    if not np.array_equal(M, M.T):
        raise GraphError("metric matrix must be symmetric")
    for y in range(n):
        through = M[:, y, None] + M[None, y, :]
        with np.errstate(invalid="ignore"):
            bad = M > through + TRIANGLE_TOL
        if bad.any():
            x, z = np.argwhere(bad)[0]
            raise GraphError(
                f"triangle inequality fails: sigma({x},{z}) = {M[x, z]!r} > "
                f"sigma({x},{y}) + sigma({y},{z}) = {through[x, z]!r}"
            )


@dataclass(frozen=True)
class IntrinsicReport:
    worst_node: int
    worst_ratio: float
    holds: bool


def _check_pair(g, m, sigma):
    m.check_matches(g)
    if sigma.node_count != g.node_count:
        raise GraphError(f"metric has {sigma.node_count} nodes, graph has {g.node_count}")
    if sigma.lengths is not None and sigma.graph is not g and sigma.graph != g:
        raise GraphError("edge-length metric belongs to a different graph")


def intrinsic_load(g: WeightedGraph, sigma: PseudoMetric) -> np.ndarray:
    """``(1/2) sum_y b(x, y) sigma(x, y)**2`` at every node ``x``."""
    s = sigma.edge_distances()
    with np.errstate(invalid="ignore", over="ignore"):
        terms = 0.5 * g.weights * s * s
    n = g.node_count
    return np.bincount(g.heads, weights=terms, minlength=n) + np.bincount(g.tails, weights=terms, minlength=n)


def verify_intrinsic(g: WeightedGraph, m: Measure, sigma: PseudoMetric, tol=INTRINSIC_TOL) -> IntrinsicReport:
    """Check ``(1/2) sum_y b(x, y) sigma(x, y)**2 <= m({x})`` at every node."""
    _check_pair(g, m, sigma)
    ratio = intrinsic_load(g, sigma) / m.values
    worst = int(np.argmax(ratio))
    worst_ratio = float(ratio[worst])
    return IntrinsicReport(worst, worst_ratio, bool(worst_ratio <= 1.0 + tol))


def canonical_intrinsic_metric(g: WeightedGraph, m: Measure) -> PseudoMetric:
    """Path metric with ``l(x, y) = min(sqrt(m(x)/Deg(x)), sqrt(m(y)/Deg(y)))``.

    Each node then carries at most half its measure, since
    ``(1/2) sum_y b(x, y) l(x, y)**2 <= (1/2) Deg(x) m(x)/Deg(x)`` and path
    distances never exceed edge lengths.
    """
    m.check_matches(g)
    deg = g.degrees
    isolated = np.flatnonzero(deg == 0)
    if isolated.size:
        raise GraphError(f"node {isolated[0]} is isolated; the canonical metric needs Deg > 0")
    g.require_connected("canonical intrinsic metric")
    scale = np.sqrt(m.values / deg)
    lengths = np.minimum(scale[g.heads], scale[g.tails])
    return PseudoMetric(g, lengths=lengths)


def _node_set(n, U):
    U = np.unique(np.asarray(list(U), dtype=np.int64))
    if U.size == 0:
        raise GraphError("node set must be nonempty")
    if U.min() < 0 or U.max() >= n:
        raise GraphError("node set contains an out-of-range id")
    return U


def distance_to_set(sigma: PseudoMetric, U) -> np.ndarray:
    """``sigma_U(x) = min_{y in U} sigma(x, y)``."""
    return sigma.distances_from(_node_set(sigma.node_count, U))


@dataclass(frozen=True)
class Lemma1Report:
    energy: float
    bound: float
    holds: bool


def lemma1_check(g, m, sigma, U, tol=1e-9) -> Lemma1Report:
    """Compare ``Q(sigma_U)`` with ``2 m(X \\ U)``.

    Refuses (``NotIntrinsicError``) if ``sigma`` is not intrinsic for ``m``,
    because the bound is only guaranteed under that hypothesis.
    """
    report = verify_intrinsic(g, m, sigma)
    if not report.holds:
        raise NotIntrinsicError(
            f"metric is not intrinsic for the measure: ratio {report.worst_ratio!r} at node {report.worst_node}"
        )
    U = _node_set(g.node_count, U)
    f = sigma.distances_from(U)
    outside = np.ones(g.node_count, dtype=bool)
    outside[U] = False
    energy = dirichlet_energy(g, f)
    bound = 2.0 * m.of(outside)
    return Lemma1Report(energy, bound, bool(energy <= bound + tol))


def diameter_sigma(sigma: PseudoMetric) -> float:
    if sigma.matrix is not None:
        return float(sigma.matrix.max())
    g = sigma.graph
    if g.node_count == 1:
        return 0.0
    if g.is_forest:
        if not g.is_connected:
            return math.inf
        d0 = sigma.distances_from([0])
        a = int(np.argmax(d0))
        return float(sigma.distances_from([a]).max())
    return float(sigma.to_matrix().max())


def covering_radius(sigma: PseudoMetric, S) -> float:
    """``max_x sigma(x, S)``."""
    return float(distance_to_set(sigma, S).max())


def save_metric(sigma: PseudoMetric, path):
    if sigma.lengths is not None:
        save_graph(sigma.graph, path, values=sigma.lengths)
        return
    n = sigma.node_count
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"#matrix {n}\n")
        for row in sigma.matrix.tolist():
            fh.write("\t".join("inf" if math.isinf(x) else repr(x) for x in row) + "\n")


def _read_matrix(path, n):
    rows = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            try:
                rows.append([float(t) for t in line.split()])
            except ValueError:
                raise GraphFormatError(f"cannot parse matrix row {line!r}", path, lineno) from None
            if len(rows[-1]) != n:
                raise GraphFormatError(f"matrix row has {len(rows[-1])} entries, expected {n}", path, lineno)
    if len(rows) != n:
        raise GraphFormatError(f"matrix has {len(rows)} rows, expected {n}", path)
    return np.array(rows)


def load_metric(path, g: WeightedGraph, fmt="auto") -> PseudoMetric:
    """Read an edge-length file (graph format) or a ``#matrix N`` TSV.

    ``fmt="auto"`` picks the matrix reader when the file starts with a
    ``#matrix`` header.
    """
    if fmt == "auto":
        with open(path, encoding="utf-8") as fh:
            first = next((ln.strip() for ln in fh if ln.strip()), "")
        fmt = "matrix" if first.startswith("#matrix") else "edges"
    if fmt == "matrix":
        return PseudoMetric(g, matrix=_read_matrix(path, g.node_count))
    if fmt != "edges":
        raise GraphError(f"unknown metric format {fmt!r}")
    lg = load_graph(path)
    if lg.node_count != g.node_count or not (
        np.array_equal(lg.heads, g.heads) and np.array_equal(lg.tails, g.tails)
    ):
        raise GraphError("edge-length file does not list exactly the edges of the graph")
    return PseudoMetric(g, lengths=lg.weights)
