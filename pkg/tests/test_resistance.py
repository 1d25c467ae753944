import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from energygraph.errors import DisconnectedGraphError, GraphError, SolverError
from energygraph.graph import ExhaustionFamily, WeightedGraph, generate
from energygraph.resistance import (
    LaplacianSystem,
    SolveSettings,
    conjugate_gradient,
    diameter_rho,
    effective_resistance,
    energy_minimizer,
    resistance_matrix,
    resistances_from,
    rho_metric,
    series_upper_bounds,
)

from oracles import (
    dense_minimizer,
    pinv_resistance,
    random_connected_graph,
    random_series_parallel,
    series_parallel_reduce,
)

CG = SolveSettings(method="cg")
DIRECT = SolveSettings(method="direct")
TRIANGLE = WeightedGraph.from_edges(None, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])

graphs = st.builds(
    lambda seed, n: random_connected_graph(np.random.default_rng(seed), n),
    st.integers(0, 2**32 - 1),
    st.integers(2, 30),
)


def test_resistance_examples():
    assert effective_resistance(TRIANGLE, 1, 1) == 0.0
    assert effective_resistance(WeightedGraph.from_edges(None, [(0, 1, 4.0)]), 0, 1) == pytest.approx(0.25, rel=1e-12)
    assert effective_resistance(TRIANGLE, 0, 1) == pytest.approx(2 / 3, rel=1e-10)


def test_rho_examples():
    assert rho_metric(TRIANGLE, 2, 2) == 0.0
    assert rho_metric(WeightedGraph.from_edges(None, [(0, 1, 1.0)]), 0, 1) == pytest.approx(1.0, rel=1e-12)
    assert rho_metric(generate(ExhaustionFamily("path"), 4), 0, 4) == pytest.approx(2.0, rel=1e-10)


def test_resistance_rejects_disconnected_and_bad_nodes():
    two = WeightedGraph.from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    with pytest.raises(DisconnectedGraphError):
        effective_resistance(two, 0, 2)
    with pytest.raises(GraphError):
        effective_resistance(TRIANGLE, 0, 3)


@pytest.mark.parametrize("s", [CG, DIRECT, SolveSettings(preconditioner="none")])
def test_solver_routes_agree_with_pinv(s):
    rng = np.random.default_rng(11)
    for _ in range(10):
        g = random_connected_graph(rng, 25)
        x, y = (int(v) for v in rng.choice(25, 2, replace=False))
        ref = pinv_resistance(25, list(g.edges()), x, y)
        assert effective_resistance(g, x, y, s) == pytest.approx(ref, rel=1e-8)


def test_series_parallel_oracle_equivalence():
    rng = np.random.default_rng(2024)
    for _ in range(200):
        n, edges, s, t, r_tree = random_series_parallel(rng, int(rng.integers(1, 60)))
        r_reduce = series_parallel_reduce(n, edges, s, t)
        assert r_reduce == pytest.approx(r_tree, rel=1e-12)
        g = WeightedGraph.from_edges(n, edges)
        assert effective_resistance(g, s, t) == pytest.approx(r_reduce, rel=1e-9)


@settings(max_examples=30, deadline=None)
@given(g=graphs)
def test_rho_triangle_inequality(g):
    R = resistance_matrix(g)
    rho = np.sqrt(R)
    n = g.node_count
    for x, y, z in itertools.product(range(n), repeat=3):
        assert rho[x, z] <= rho[x, y] + rho[y, z] + 1e-8


def test_rho_triangle_inequality_iterative_n50():
    rng = np.random.default_rng(50)
    g = random_connected_graph(rng, 50)
    rho = np.sqrt(np.array([resistances_from(g, o, settings=CG) for o in range(50)]))
    assert np.allclose(rho, rho.T, rtol=1e-8, atol=1e-12)
    viol = rho[:, None, :] - rho[:, :, None] - rho.T[None, :, :]
    assert viol.max() <= 1e-8


@settings(max_examples=40, deadline=None)
@given(g=graphs, data=st.data())
def test_minimizer_energy_is_inverse_resistance(g, data):
    x, y = data.draw(st.lists(st.integers(0, g.node_count - 1), min_size=2, max_size=2, unique=True))
    res = energy_minimizer(g, {x: 0.0, y: 1.0}, settings=CG)
    assert 1.0 / res.energy == pytest.approx(effective_resistance(g, x, y, DIRECT), rel=1e-6)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(3, 25))
def test_rayleigh_monotonicity(seed, n):
    rng = np.random.default_rng(seed)
    g = random_connected_graph(rng, n, extra=n)
    edges = list(g.edges())
    R = resistance_matrix(g)
    for k in range(len(edges)):
        h = WeightedGraph.from_edges(n, edges[:k] + edges[k + 1:])
        if not h.is_connected:
            continue
        Rh = resistance_matrix(h)
        assert np.all(Rh >= R - 1e-9 * np.maximum(R, 1e-300))


@settings(max_examples=40, deadline=None)
@given(g=graphs, data=st.data(), method=st.sampled_from(["cg", "direct"]))
def test_minimizer_is_harmonic_and_matches_dense(g, data, method):
    n = g.node_count
    k = data.draw(st.integers(1, min(n, 5)))
    nodes = data.draw(st.lists(st.integers(0, n - 1), min_size=k, max_size=k, unique=True))
    vals = data.draw(st.lists(st.floats(-100, 100), min_size=k, max_size=k))
    pins = dict(zip(nodes, vals))
    f, q = energy_minimizer(g, pins, settings=SolveSettings(method=method))
    for node, v in pins.items():
        assert f[node] == v
    # sum of b(x,y)(f(x)-f(y)) from edge differences
    d = g.weights * (f[g.heads] - f[g.tails])
    flux = np.bincount(g.heads, d, n) - np.bincount(g.tails, d, n)
    deg = np.asarray(LaplacianSystem.of(g).matrix.diagonal())
    spread = max(f.max() - f.min(), 1e-300)
    free = [x for x in range(n) if x not in pins]
    assert np.all(np.abs(flux[free]) <= 1e-8 * deg[free] * spread)
    ref = dense_minimizer(n, list(g.edges()), pins)
    assert np.allclose(f, ref, rtol=1e-7, atol=1e-8 * spread)


def test_minimizer_examples():
    path = generate(ExhaustionFamily("path"), 2)
    f, q = energy_minimizer(path, {1: 3.5})
    assert np.all(f == 3.5) and q == 0.0
    f, q = energy_minimizer(path, {0: 0.0, 2: 1.0})
    assert np.allclose(f, [0.0, 0.5, 1.0], rtol=0, atol=1e-12)
    assert q == pytest.approx(0.5, rel=1e-10)


def test_clamp_is_a_no_op_on_small_graphs():
    rng = np.random.default_rng(8)
    for _ in range(50):
        n = int(rng.integers(2, 9))
        g = random_connected_graph(rng, n)
        x, y = (int(v) for v in rng.choice(n, 2, replace=False))
        C = float(rng.uniform(0.1, 100))
        free = energy_minimizer(g, {x: 0.0, y: C})
        clamped = energy_minimizer(g, {x: 0.0, y: C}, clamp=(0.0, C))
        ref = dense_minimizer(n, list(g.edges()), {x: 0.0, y: C})
        assert np.all(ref >= -1e-12 * C) and np.all(ref <= C * (1 + 1e-12))
        assert np.allclose(clamped.f, free.f, rtol=0, atol=1e-9 * C)
        assert clamped.energy <= free.energy * (1 + 1e-12)
        assert free.energy == pytest.approx(C * C / effective_resistance(g, x, y), rel=1e-8)


def test_minimizer_validation():
    path = generate(ExhaustionFamily("path"), 2)
    with pytest.raises(GraphError):
        energy_minimizer(path, {})
    with pytest.raises(GraphError):
        energy_minimizer(path, [(0, 1.0), (0, 2.0)])
    with pytest.raises(GraphError):
        energy_minimizer(path, {0: 0.0, 2: 5.0}, clamp=(0.0, 1.0))
    with pytest.raises(GraphError):
        energy_minimizer(path, {0: math.nan})


def test_iteration_cap_raises_solver_error():
    g = generate(ExhaustionFamily("path"), 200)
    with pytest.raises(SolverError) as info:
        effective_resistance(g, 0, 200, SolveSettings(method="cg", max_iterations=3))
    assert info.value.iterations == 3


def test_conjugate_gradient_small_spd():
    A = np.array([[4.0, 1.0], [1.0, 3.0]])
    x, its, relres = conjugate_gradient(A, np.array([1.0, 2.0]), rel_tolerance=1e-14)
    assert np.allclose(x, np.linalg.solve(A, [1.0, 2.0]), rtol=1e-12)
    assert its <= 2 and relres <= 1e-14


def test_resistances_from_matches_pairwise():
    rng = np.random.default_rng(5)
    g = random_connected_graph(rng, 40)
    for s in (CG, DIRECT):
        r = resistances_from(g, 3, settings=s)
        assert r[3] == 0.0
        for x in (0, 17, 39):
            assert r[x] == pytest.approx(pinv_resistance(40, list(g.edges()), x, 3), rel=1e-8)
    sub = resistances_from(g, 3, [39, 3, 0])
    assert sub[1] == 0.0 and sub[0] == pytest.approx(r[39], rel=1e-8)


def test_series_bounds_dominate_and_are_exact_on_trees():
    rng = np.random.default_rng(6)
    g = random_connected_graph(rng, 30, extra=30)
    assert np.all(resistances_from(g, 0) <= series_upper_bounds(g, 0) * (1 + 1e-10))
    t = random_connected_graph(rng, 30, extra=0)
    exact = [pinv_resistance(30, list(t.edges()), x, 0) for x in range(30)]
    assert np.allclose(series_upper_bounds(t, 0), exact, rtol=1e-9, atol=1e-12)


def test_resistance_matrix_matches_pinv_and_cutoff():
    rng = np.random.default_rng(7)
    g = random_connected_graph(rng, 20)
    R = resistance_matrix(g)
    edges = list(g.edges())
    for x, y in [(0, 19), (4, 7), (12, 12)]:
        assert R[x, y] == pytest.approx(pinv_resistance(20, edges, x, y), rel=1e-9, abs=1e-14)
    with pytest.raises(GraphError, match="cutoff"):
        resistance_matrix(g, SolveSettings(exact_cutoff=10))


# ---------------------------------------------------------------------------
# diameter


def test_diameter_examples():
    assert diameter_rho(WeightedGraph.from_edges(None, [(0, 1, 1.0)])).value == pytest.approx(1.0, rel=1e-12)
    d = diameter_rho(generate(ExhaustionFamily("path"), 9))
    assert d.value == pytest.approx(3.0, rel=1e-12) and d.exact and d.endpoints == (0, 9)
    for n in (3, 6, 11):
        d = diameter_rho(generate(ExhaustionFamily("complete"), n - 1))
        assert d.value == pytest.approx(math.sqrt(2 / n), rel=1e-10)


def test_diameter_cycle_exact_above_forest():
    c = generate(ExhaustionFamily("cycle"), 8)  # 10 nodes
    # antipodal pair: two paths of 5 in parallel
    assert diameter_rho(c).value == pytest.approx(math.sqrt(2.5), rel=1e-10)


@settings(max_examples=30, deadline=None)
@given(g=graphs, k=st.integers(1, 6))
def test_landmark_is_a_lower_bound(g, k):
    exact = diameter_rho(g, "exact")
    lm = diameter_rho(g, "landmark", landmarks=k)
    assert not lm.exact
    assert lm.value <= exact.value * (1 + 1e-9)
    assert lm.value >= exact.value / 2 * (1 - 1e-9)  # any eccentricity is at least half the diameter


def test_diameter_modes():
    g = random_connected_graph(np.random.default_rng(9), 30, extra=20)
    with pytest.raises(GraphError):
        diameter_rho(g, "exact", settings=SolveSettings(exact_cutoff=10))
    auto = diameter_rho(g, "auto", settings=SolveSettings(exact_cutoff=10))
    assert not auto.exact
    assert diameter_rho(g, "auto").exact
    with pytest.raises(GraphError):
        diameter_rho(g, "bogus")


def test_tree_diameter_double_sweep_matches_matrix():
    rng = np.random.default_rng(10)
    for _ in range(10):
        t = random_connected_graph(rng, 40, extra=0)
        R = np.array([[pinv_resistance(40, list(t.edges()), x, y) for y in range(40)] for x in range(40)])
        assert diameter_rho(t).value == pytest.approx(math.sqrt(R.max()), rel=1e-9)


def test_settings_validation():
    for bad in ({"rel_tolerance": 0.0}, {"max_iterations": 0}, {"pin_strategy": "penalty"},
                {"method": "magic"}, {"preconditioner": "ilu"}, {"exact_cutoff": 0}):
        with pytest.raises(GraphError):
            SolveSettings(**bad)
    assert SolveSettings().iteration_cap(7) == 140
