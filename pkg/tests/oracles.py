"""Independent reference computations used by the tests.

Nothing here imports the solver code paths under test: these are brute-force
or closed-form routes (BFS, heap Dijkstra, dense linear algebra, circuit
reduction) against which the library is checked.
"""
from __future__ import annotations

import heapq
import math
from collections import defaultdict, deque

import numpy as np

from energygraph.graph import WeightedGraph


def bfs_components(n, edges):
    adj = defaultdict(list)
    for u, v, _ in edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * n
    parts = []
    for s in range(n):
        if seen[s]:
            continue
        seen[s] = True
        part, queue = [s], deque([s])
        while queue:
            x = queue.popleft()
            for y in adj[x]:
                if not seen[y]:
                    seen[y] = True
                    part.append(y)
                    queue.append(y)
        parts.append(sorted(part))
    return parts


def heap_dijkstra(n, edges, sources):
    """Multi-source shortest paths with ``heapq``; ``edges`` are ``(u, v, length)``."""
    adj = defaultdict(list)
    for u, v, ell in edges:
        adj[u].append((v, ell))
        adj[v].append((u, ell))
    dist = [math.inf] * n
    heap = []
    for s in sources:
        dist[s] = 0.0
        heap.append((0.0, s))
    heapq.heapify(heap)
    while heap:
        d, x = heapq.heappop(heap)
        if d > dist[x]:
            continue
        for y, ell in adj[x]:
            nd = d + ell
            if nd < dist[y]:
                dist[y] = nd
                heapq.heappush(heap, (nd, y))
    return np.array(dist)


def dense_laplacian(n, edges):
    L = np.zeros((n, n))
    for u, v, w in edges:
        L[u, u] += w
        L[v, v] += w
        L[u, v] -= w
        L[v, u] -= w
    return L


def dense_minimizer(n, edges, pins):
    """Harmonic extension of ``pins`` by a dense solve of the Euler-Lagrange system."""
    L = dense_laplacian(n, edges)
    pinned = sorted(pins)
    free = [x for x in range(n) if x not in pins]
    f = np.zeros(n)
    for x in pinned:
        f[x] = pins[x]
    if free:
        A = L[np.ix_(free, free)]
        B = L[np.ix_(free, pinned)]
        f[free] = np.linalg.solve(A, -B @ f[pinned])
    return f


def pinv_resistance(n, edges, x, y):
    """``(e_x - e_y)^T L^+ (e_x - e_y)`` with the Moore-Penrose pseudo-inverse."""
    Lp = np.linalg.pinv(dense_laplacian(n, edges))
    return Lp[x, x] + Lp[y, y] - 2 * Lp[x, y]


def random_connected_graph(rng, n, extra=None, wlo=0.1, whi=10.0) -> WeightedGraph:
    """Random spanning tree plus ``extra`` random chords, weights uniform in ``[wlo, whi]``."""
    edges = {}
    for i in range(1, n):
        j = int(rng.integers(0, i))
        edges[(j, i)] = float(rng.uniform(wlo, whi))
    if extra is None:
        extra = int(rng.integers(0, 2 * n + 1))
    for _ in range(extra):
        a, b = (int(v) for v in rng.integers(0, n, size=2))
        if a != b:
            edges.setdefault((min(a, b), max(a, b)), float(rng.uniform(wlo, whi)))
    return WeightedGraph.from_edges(n, [(u, v, w) for (u, v), w in edges.items()])


# ---------------------------------------------------------------------------
# series-parallel networks


def _series(a, b):
    """Join terminal t of ``a`` to terminal s of ``b``; result keeps terminals at ids 0 and 1."""
    (n1, e1), (n2, e2) = a, b
    bmap = {0: 1, 1: n1}
    mb = lambda k: bmap.get(k, n1 + k - 1)  # noqa: E731
    edges = list(e1) + [(mb(x), mb(y), w) for x, y, w in e2]
    swap = lambda k: n1 if k == 1 else (1 if k == n1 else k)  # noqa: E731
    return n1 + n2 - 1, [(swap(x), swap(y), w) for x, y, w in edges]


def _parallel(a, b):
    (n1, e1), (n2, e2) = a, b
    mb = lambda k: k if k < 2 else n1 + k - 2  # noqa: E731
    return n1 + n2 - 2, list(e1) + [(mb(x), mb(y), w) for x, y, w in e2]


def random_series_parallel(rng, n_edges, wlo=0.1, whi=10.0):
    """Random two-terminal series-parallel network with ``n_edges`` resistors.

    Returns ``(node_count, edges, s, t, resistance)`` with terminals 0 and 1.
    Parallel resistors between the same pair are merged (conductances add),
    so the edge list is simple.  ``resistance`` is accumulated along the
    composition tree, independently of any reduction of the final graph.
    """

    def build(k):
        if k == 1:
            w = float(rng.uniform(wlo, whi))
            return (2, [(0, 1, w)]), 1.0 / w
        left = int(rng.integers(1, k))
        a, ra = build(left)
        b, rb = build(k - left)
        if rng.random() < 0.5:
            return _series(a, b), ra + rb
        return _parallel(a, b), 1.0 / (1.0 / ra + 1.0 / rb)

    (n, edges), r = build(n_edges)
    merged = defaultdict(float)
    for x, y, w in edges:
        merged[(min(x, y), max(x, y))] += w
    return n, [(x, y, w) for (x, y), w in sorted(merged.items())], 0, 1, r


def series_parallel_reduce(n, edges, s, t):
    """Effective resistance between ``s`` and ``t`` by repeated series and parallel reduction.

    Works on conductances; raises ``ValueError`` if the network does not
    reduce to a single ``s``-``t`` resistor.
    """
    cond = {}
    adj = defaultdict(set)
    for a, b, w in edges:
        key = (min(a, b), max(a, b))
        cond[key] = cond.get(key, 0.0) + w
        adj[a].add(b)
        adj[b].add(a)
    work = [x for x in adj if x not in (s, t) and len(adj[x]) == 2]
    while work:
        x = work.pop()
        if x not in adj or len(adj[x]) != 2:
            continue
        a, b = sorted(adj[x])
        ra = 1.0 / cond.pop((min(a, x), max(a, x)))
        rb = 1.0 / cond.pop((min(b, x), max(b, x)))
        del adj[x]
        adj[a].discard(x)
        adj[b].discard(x)
        key = (min(a, b), max(a, b))
        cond[key] = cond.get(key, 0.0) + 1.0 / (ra + rb)
        adj[a].add(b)
        adj[b].add(a)
        for y in (a, b):
            if y not in (s, t) and len(adj[y]) == 2:
                work.append(y)
    if set(cond) != {(min(s, t), max(s, t))}:
        raise ValueError("network is not series-parallel between the terminals")
    return 1.0 / cond[(min(s, t), max(s, t))]
