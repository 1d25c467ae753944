"""Effective resistance, the metric ``rho = sqrt(r)`` and energy minimizers.

All solves go through the grounded Laplacian: pinned nodes are eliminated
from the system (row elimination), which leaves a symmetric positive
definite matrix on the free nodes of a connected graph.

Solver choice (``SolveSettings.method``):

``cg``      Jacobi-preconditioned conjugate gradients.
``direct``  sparse LU; minimum-degree ordering in general, leaves-first
            elimination without pivoting on trees.
``auto``    ``direct`` on forests, where elimination in leaf order produces no
            fill (paths become tridiagonal solves), and whenever many
            right-hand sides share one grounded matrix; ``cg`` otherwise.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Mapping, NamedTuple

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.sparse import csgraph

from .energy import dirichlet_energy
from .errors import GraphError, SolverError
from .graph import WeightedGraph

__all__ = [
    "SolveSettings",
    "LaplacianSystem",
    "conjugate_gradient",
    "effective_resistance",
    "rho_metric",
    "energy_minimizer",
    "Minimizer",
    "resistances_from",
    "series_upper_bounds",
    "resistance_matrix",
    "diameter_rho",
    "RhoDiameter",
]

_METHODS = ("auto", "cg", "direct")
_LU_ORDERING = "MMD_AT_PLUS_A"
_BLOCK = 256


@dataclass(frozen=True)
class SolveSettings:
    rel_tolerance: float = 1e-10
    max_iterations: int | None = None  # None means 20 * n
    pin_strategy: str = "row-elimination"
    method: str = "auto"
    preconditioner: str = "jacobi"
    exact_cutoff: int = 2000

    def __post_init__(self):
        if not (self.rel_tolerance > 0):
            raise GraphError(f"rel_tolerance must be positive, got {self.rel_tolerance!r}")
        if self.max_iterations is not None and self.max_iterations < 1:
            raise GraphError("max_iterations must be positive")
        if self.pin_strategy != "row-elimination":
            raise GraphError(f"unsupported pin strategy {self.pin_strategy!r}")
        if self.method not in _METHODS:
            raise GraphError(f"method must be one of {_METHODS}")
        if self.preconditioner not in ("jacobi", "none"):
            raise GraphError("preconditioner must be 'jacobi' or 'none'")
        if self.exact_cutoff < 1:
            raise GraphError("exact_cutoff must be positive")

    def iteration_cap(self, n):
        return self.max_iterations if self.max_iterations is not None else 20 * max(n, 1)

    def as_dict(self):
        return asdict(self)


DEFAULT_SETTINGS = SolveSettings()


def conjugate_gradient(A, b, *, rel_tolerance=1e-10, max_iterations=None, diagonal=None):
    """Solve ``A x = b`` for symmetric positive definite ``A``.

    Stops when ``||b - A x|| <= rel_tolerance * ||b||``, checked against the
    recomputed true residual.  ``diagonal`` enables Jacobi preconditioning.

    Returns
    -------
    x, iterations, relative residual
    """
    b = np.asarray(b, dtype=np.float64)
    n = b.shape[0]
    maxit = max_iterations if max_iterations is not None else 20 * max(n, 1)
    x = np.zeros(n)
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return x, 0, 0.0
    inv_diag = None if diagonal is None else 1.0 / np.asarray(diagonal, dtype=np.float64)
    target = rel_tolerance * bnorm
    r = b.copy()
    z = r * inv_diag if inv_diag is not None else r
    p = z.copy()
    rz = r @ z
    it = 0
    while it < maxit:
        it += 1
        Ap = A @ p
        pAp = p @ Ap
        if pAp <= 0:
            raise SolverError("matrix is not positive definite along a search direction", iterations=it)
        alpha = rz / pAp
        x += alpha * p
        r -= alpha * Ap
        if np.linalg.norm(r) <= target:
            # guard against drift of the recursive residual
            r = b - A @ x
            if np.linalg.norm(r) <= target:
                return x, it, float(np.linalg.norm(r) / bnorm)
            z = r * inv_diag if inv_diag is not None else r
            p = z.copy()
            rz = r @ z
            continue
        z = r * inv_diag if inv_diag is not None else r
        rz_new = r @ z
        p = z + (rz_new / rz) * p
        rz = rz_new
    res = float(np.linalg.norm(b - A @ x) / bnorm)
    raise SolverError(
        f"conjugate gradients did not converge in {maxit} iterations (relative residual {res:.3e})",
        residual=res,
        iterations=maxit,
    )


class LaplacianSystem:
    """Sparse Laplacian ``L = Deg - b`` of a graph, assembled once.

    ``L[x, x] = Deg(x)`` and ``L[x, y] = -b(x, y)``; rows sum to zero.
    """

    def __init__(self, graph: WeightedGraph):
        self.graph = graph
        self.matrix = (sp.diags(np.asarray(graph.degrees)) - graph.adjacency).tocsr()
        self.matrix.sort_indices()

    @classmethod
    def of(cls, graph: WeightedGraph) -> "LaplacianSystem":
        sys_ = graph._cache.get("laplacian")
        if sys_ is None:
            sys_ = graph._cache["laplacian"] = cls(graph)
        return sys_

    def split(self, pinned_mask):
        free = np.flatnonzero(~pinned_mask)
        pinned = np.flatnonzero(pinned_mask)
        rows = self.matrix[free]
        return rows[:, free].tocsr(), rows[:, pinned].tocsr(), free, pinned

    def _method(self, settings, many_rhs=False):
        if settings.method != "auto":
            return settings.method
        return "direct" if (self.graph.is_forest or many_rhs) else "cg"

    def solve(self, pinned_nodes, pinned_values, settings=DEFAULT_SETTINGS, source=None):
        """Return ``u`` with ``u = pinned_values`` on pins and ``(L u)(x) = source(x)`` elsewhere."""
        g = self.graph
        n = g.node_count
        mask = np.zeros(n, dtype=bool)
        mask[pinned_nodes] = True
        u = np.zeros(n)
        u[pinned_nodes] = pinned_values
        if mask.all():
            return u
        A, B, free, pinned = self.split(mask)
        rhs = -(B @ u[pinned])
        if source is not None:
            rhs = rhs + np.asarray(source, dtype=np.float64)[free]
        u[free] = self._solve(A, rhs, settings, free)
        return u

    @property
    def bfs_rank(self):
        """Position of each node in breadth-first order from node 0."""
        rank = self.__dict__.get("_bfs_rank")
        if rank is None:
            order = csgraph.breadth_first_order(self.graph.adjacency, 0, directed=False, return_predecessors=False)
            rank = np.full(self.graph.node_count, -1, dtype=np.int64)
            rank[order] = np.arange(order.size)
            self._bfs_rank = rank
        return rank

    def factorize(self, A, free):
        """Sparse LU of the grounded matrix ``A`` on the nodes ``free``.

        On a tree the free nodes are eliminated leaves first (reverse
        breadth-first order), a perfect elimination order: no fill and no
        cancellation across long pendant chains.
        """
        if self.graph.is_forest and self.graph.is_connected:
            perm = np.argsort(-self.bfs_rank[free], kind="stable")
            return _PermutedLU(A, perm)
        return _factorize(A)

    def _solve(self, A, rhs, settings, free):
        method = self._method(settings)
        if method == "direct":
            x = self.factorize(A, free).solve(rhs)
            bnorm = np.linalg.norm(rhs)
            if bnorm > 0:
                res = np.linalg.norm(rhs - A @ x) / bnorm
                if not res <= max(settings.rel_tolerance, 1e-8):
                    raise SolverError(f"direct solve residual {res:.3e} exceeds tolerance", residual=res)
            return x
        diag = A.diagonal() if settings.preconditioner == "jacobi" else None
        x, _, _ = conjugate_gradient(
            A,
            rhs,
            rel_tolerance=settings.rel_tolerance,
            max_iterations=settings.iteration_cap(A.shape[0]),
            diagonal=diag,
        )
        return x


def _factorize(A):
    try:
        return spla.splu(A.tocsc(), permc_spec=_LU_ORDERING)
    except RuntimeError as exc:  # singular factor
        raise SolverError(f"sparse factorization failed: {exc}") from exc


class _PermutedLU:
    """LU of ``A[perm][:, perm]`` in the given order, without pivoting."""

    def __init__(self, A, perm):
        self.perm = perm
        Ap = A[perm][:, perm].tocsc()
        try:
            self.lu = spla.splu(Ap, permc_spec="NATURAL", diag_pivot_thresh=0.0, options={"SymmetricMode": True})
        except RuntimeError as exc:
            raise SolverError(f"sparse factorization failed: {exc}") from exc

    def solve(self, rhs):
        xp = self.lu.solve(rhs[self.perm])
        x = np.empty_like(xp)
        x[self.perm] = xp
        return x


def effective_resistance(g: WeightedGraph, x, y, settings=DEFAULT_SETTINGS) -> float:
    """Potential drop ``u(x) - u(y)`` for a unit current from ``x`` to ``y``.

    The node ``y`` is grounded (``u(y) = 0``) to remove the constant kernel.
    """
    x, y = g.check_node(x), g.check_node(y)
    g.require_connected("effective resistance")
    if x == y:
        return 0.0
    source = np.zeros(g.node_count)
    source[x] = 1.0
    u = LaplacianSystem.of(g).solve([y], [0.0], settings, source=source)
    return float(u[x])


def rho_metric(g: WeightedGraph, x, y, settings=DEFAULT_SETTINGS) -> float:
    """``rho(x, y) = sup{|f(x) - f(y)| : Q(f) <= 1}``, equal to ``sqrt(r(x, y))``."""
    return math.sqrt(max(effective_resistance(g, x, y, settings), 0.0))


class Minimizer(NamedTuple):
    f: np.ndarray
    energy: float


def _normalize_pins(g, pins):
    items = pins.items() if isinstance(pins, Mapping) else pins
    out: dict[int, float] = {}
    for node, value in items:
        node = g.check_node(node)
        value = float(value)
        if not math.isfinite(value):
            raise GraphError(f"pin value at node {node} is not finite")
        if node in out and out[node] != value:
            raise GraphError(f"conflicting pins on node {node}: {out[node]!r} and {value!r}")
        out[node] = value
    if not out:
        raise GraphError("at least one pin is required")
    return out


def energy_minimizer(g: WeightedGraph, pins, clamp=None, settings=DEFAULT_SETTINGS) -> Minimizer:
    """Minimize the Dirichlet energy subject to pinned values.

    The minimizer is harmonic at every free node.  With ``clamp=(lo, hi)`` the
    result is required to lie in ``[lo, hi]``: by the maximum principle the
    harmonic extension of pins inside the interval already does, so the clamp
    is checked, not imposed.  Round-off excursions below ``1e-9 * (hi - lo)``
    are clipped, which never raises the energy.
    """
    g.require_connected("energy minimization")
    pins = _normalize_pins(g, pins)
    nodes = np.fromiter(pins.keys(), dtype=np.int64, count=len(pins))
    values = np.fromiter(pins.values(), dtype=np.float64, count=len(pins))
    if clamp is not None:
        lo, hi = float(clamp[0]), float(clamp[1])
        if not lo <= hi:
            raise GraphError(f"empty clamp interval [{lo}, {hi}]")
        if values.min() < lo or values.max() > hi:
            raise GraphError("pinned values must lie inside the clamp interval")
    if values.min() == values.max():
        # equal pins on a connected graph: the minimizer is exactly constant
        f = np.full(g.node_count, values[0])
        return Minimizer(f, 0.0)
    f = LaplacianSystem.of(g).solve(nodes, values, settings)
    f[nodes] = values
    if clamp is not None:
        slack = 1e-9 * (hi - lo)
        if f.min() < lo - slack or f.max() > hi + slack:
            raise SolverError(
                f"minimizer range [{f.min()!r}, {f.max()!r}] leaves the clamp [{lo}, {hi}]; "
                "the maximum principle rules this out for an accurate solve"
            )
        np.clip(f, lo, hi, out=f)
    return Minimizer(f, dirichlet_energy(g, f))


def _length_matrix(g: WeightedGraph):
    """Adjacency with entries ``1/b``: series resistance of each edge."""
    m = g._cache.get("resistor_lengths")
    if m is None:
        a = g.adjacency.copy()
        a.data = 1.0 / a.data
        m = g._cache["resistor_lengths"] = a
    return m


def series_upper_bounds(g: WeightedGraph, o) -> np.ndarray:
    """Shortest-path sums of ``1/b`` from ``o``.

    Resistance never exceeds the series resistance of any single path, so
    these bound ``r(x, o)`` from above, with equality on trees.
    """
    o = g.check_node(o)
    return csgraph.dijkstra(_length_matrix(g), directed=False, indices=o)


def resistances_from(g: WeightedGraph, o, nodes=None, settings=DEFAULT_SETTINGS) -> np.ndarray:
    """``r(x, o)`` for every ``x`` in ``nodes`` (default: all nodes).

    On forests this is the exact series sum along the unique path.  Otherwise
    the Laplacian grounded at ``o`` is factored once and ``r(x, o)`` is read off
    the diagonal of its inverse, one column solve per node.
    """
    o = g.check_node(o)
    g.require_connected("effective resistance")
    nodes = np.arange(g.node_count) if nodes is None else np.asarray(nodes, dtype=np.int64)
    if g.is_forest:
        return series_upper_bounds(g, o)[nodes]
    system = LaplacianSystem.of(g)
    mask = np.zeros(g.node_count, dtype=bool)
    mask[o] = True
    A, _, free, _ = system.split(mask)
    pos = np.full(g.node_count, -1, dtype=np.int64)
    pos[free] = np.arange(free.size)
    out = np.zeros(nodes.size)
    targets = np.flatnonzero(nodes != o)
    if targets.size == 0:
        return out
    if system._method(settings, many_rhs=True) == "direct":
        lu = system.factorize(A, free)
        for start in range(0, targets.size, _BLOCK):
            idx = targets[start:start + _BLOCK]
            cols = pos[nodes[idx]]
            rhs = np.zeros((free.size, idx.size))
            rhs[cols, np.arange(idx.size)] = 1.0
            sol = lu.solve(rhs)
            out[idx] = sol[cols, np.arange(idx.size)]
    else:
        diag = A.diagonal() if settings.preconditioner == "jacobi" else None
        for i in targets.tolist():
            rhs = np.zeros(free.size)
            rhs[pos[nodes[i]]] = 1.0
            x, _, _ = conjugate_gradient(
                A, rhs, rel_tolerance=settings.rel_tolerance,
                max_iterations=settings.iteration_cap(free.size), diagonal=diag,
            )
            out[i] = x[pos[nodes[i]]]
    return out


def resistance_matrix(g: WeightedGraph, settings=DEFAULT_SETTINGS) -> np.ndarray:
    """Dense all-pairs effective resistance via a Cholesky factor of the grounded Laplacian.

    Refused above ``settings.exact_cutoff`` nodes.
    """
    g.require_connected("effective resistance")
    n = g.node_count
    if n > settings.exact_cutoff:
        raise GraphError(f"all-pairs resistance refused: {n} nodes > cutoff {settings.exact_cutoff}")
    if n == 1:
        return np.zeros((1, 1))
    L = LaplacianSystem.of(g).matrix
    grounded = L[1:, 1:].toarray()
    inv = sla.cho_solve(sla.cho_factor(grounded), np.eye(n - 1))
    G = np.zeros((n, n))
    G[1:, 1:] = inv
    d = np.diag(G)
    R = d[:, None] + d[None, :] - 2.0 * G
    R = 0.5 * (R + R.T)
    np.fill_diagonal(R, 0.0)
    np.maximum(R, 0.0, out=R)
    return R


class RhoDiameter(NamedTuple):
    value: float
    exact: bool
    endpoints: tuple[int, int]


def diameter_rho(g: WeightedGraph, mode="exact", landmarks=8, settings=DEFAULT_SETTINGS) -> RhoDiameter:
    """``sup rho(x, y)`` over the node set.

    ``mode="exact"`` uses a double sweep on forests (exact for tree metrics)
    and the dense resistance matrix up to ``settings.exact_cutoff`` nodes;
    larger non-tree graphs are refused.  ``mode="landmark"`` takes the maximum
    against ``landmarks`` farthest-point-sampled nodes and is flagged as a lower
    bound.  ``mode="auto"`` picks exact when available, else landmarks.
    """
    g.require_connected("rho diameter")
    if mode not in ("exact", "landmark", "auto"):
        raise GraphError(f"unknown diameter mode {mode!r}")
    if g.node_count == 1:
        return RhoDiameter(0.0, True, (0, 0))
    exact_ok = g.is_forest or g.node_count <= settings.exact_cutoff
    if mode == "auto":
        mode = "exact" if exact_ok else "landmark"
    if mode == "exact":
        if g.is_forest:
            d0 = series_upper_bounds(g, 0)
            a = int(np.argmax(d0))
            da = series_upper_bounds(g, a)
            b = int(np.argmax(da))
            lo, hi = min(a, b), max(a, b)
            return RhoDiameter(math.sqrt(float(da[b])), True, (lo, hi))
        if not exact_ok:
            raise GraphError(
                f"exact rho diameter refused: {g.node_count} nodes > cutoff {settings.exact_cutoff}; "
                "use landmark mode"
            )
        R = resistance_matrix(g, settings)
        flat = int(np.argmax(R))
        a, b = divmod(flat, g.node_count)
        return RhoDiameter(math.sqrt(float(R[a, b])), True, (min(a, b), max(a, b)))
    if landmarks < 1:
        raise GraphError("landmark count must be positive")
    nearest = np.full(g.node_count, np.inf)
    best, pair = 0.0, (0, 0)
    mark = 0
    for _ in range(int(landmarks)):
        r = resistances_from(g, mark, settings=settings)
        far = int(np.argmax(r))
        if r[far] > best:
            best, pair = float(r[far]), (min(mark, far), max(mark, far))
        np.minimum(nearest, r, out=nearest)
        mark = int(np.argmax(nearest))
        if nearest[mark] == 0.0:
            break
    return RhoDiameter(math.sqrt(best), False, pair)
