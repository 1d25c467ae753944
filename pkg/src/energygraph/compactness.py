"""epsilon-nets from small-measure sets, a greedy baseline and level profiles.

The measure-threshold net works as follows.  Put ``D = diam_rho(X)`` and
``U_delta = {x : m({x}) < delta}``.  If ``m(U_delta) < eps**2 / (2 D**2)``
then ``S = X \\ U_delta`` is finite and every node lies within ``eps`` of it:
``sigma_S`` has energy at most ``2 m(U_delta)`` and so
``sigma(x, S) <= Q(sigma_S)**0.5 * D < eps``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DisconnectedGraphError, GraphError, GuaranteeViolation, NotIntrinsicError
from .graph import ExhaustionFamily, Measure, WeightedGraph, generations, load_measure, sphere_sizes
from .intrinsic import PseudoMetric, canonical_intrinsic_metric, distance_to_set, verify_intrinsic
from .resistance import DEFAULT_SETTINGS, diameter_rho

__all__ = [
    "NetReport",
    "epsilon_net_theorem2",
    "greedy_net",
    "MeasureRule",
    "MEASURE_RULES",
    "get_measure_rule",
    "ProfileRow",
    "PROFILE_COLUMNS",
    "total_boundedness_profile",
]


@dataclass(frozen=True)
class NetReport:
    epsilon: float
    delta: float
    net: tuple[int, ...]
    net_size: int
    covering_radius: float
    diam_rho_used: float
    diam_rho_exact: bool
    m_small: float
    m_total: float
    threshold: float
    size_bound: float
    radius_bound: float
    guarantee: str  # "proved" or "empirical"
    status: str  # "ok" or "inconclusive"

    def as_dict(self, include_net=True):
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d["net"] = list(self.net) if include_net else None
        return d


def _select_delta(values: np.ndarray, threshold: float):
    """Largest distinct measure value ``delta`` with ``m({m < delta}) < threshold``.

    Returns ``(delta, mass of U_delta)``.  The smallest value always qualifies
    (its ``U`` is empty) and every candidate leaves ``S`` nonempty.
    """
    order = np.argsort(values, kind="stable")
    s = values[order]
    distinct, first = np.unique(s, return_index=True)
    class_mass = np.add.reduceat(s, first)
    below = np.concatenate([[0.0], np.cumsum(class_mass)[:-1]])
    j = int(np.searchsorted(below, threshold, side="left")) - 1
    j = max(j, 0)
    while True:
        mass = math.fsum(s[: first[j]])
        if mass < threshold or j == 0:
            return float(distinct[j]), mass
        j -= 1


def epsilon_net_theorem2(g: WeightedGraph, m: Measure, sigma: PseudoMetric, epsilon, settings=DEFAULT_SETTINGS,
                         diameter=None) -> NetReport:
    """Build the net ``S = X \\ U_delta`` for the largest admissible ``delta``.

    ``diameter`` may pass a precomputed :class:`RhoDiameter`.  With an exact
    rho diameter the covering radius is guaranteed to be below ``epsilon``
    and a failure raises :class:`GuaranteeViolation`.  With a landmark lower
    bound the result is marked ``empirical`` and a miss is ``inconclusive``.
    """
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise GraphError("epsilon must be positive")
    g.require_connected("epsilon net")
    report = verify_intrinsic(g, m, sigma)
    if not report.holds:
        raise NotIntrinsicError(
            f"metric is not intrinsic for the measure: ratio {report.worst_ratio!r} at node {report.worst_node}"
        )
    diam = diameter if diameter is not None else diameter_rho(g, mode="auto", settings=settings)
    D = diam.value
    threshold = math.inf if D == 0 else epsilon**2 / (2.0 * D * D)
    delta, m_small = _select_delta(m.values, threshold)
    in_net = m.values >= delta
    net = np.flatnonzero(in_net)
    radius = float(distance_to_set(sigma, net).max())
    size_bound = m.total / delta
    if net.size > size_bound:
        raise GuaranteeViolation(f"net size {net.size} exceeds m(X)/delta = {size_bound!r}")
    radius_bound = math.sqrt(2.0 * m_small) * D
    guarantee = "proved" if diam.exact else "empirical"
    status = "ok"
    if not radius < epsilon:
        if diam.exact:
            raise GuaranteeViolation(
                f"covering radius {radius!r} is not below epsilon {epsilon!r} although the rho diameter is exact"
            )
        status = "inconclusive"
    return NetReport(
        epsilon=epsilon,
        delta=delta,
        net=tuple(net.tolist()),
        net_size=int(net.size),
        covering_radius=radius,
        diam_rho_used=D,
        diam_rho_exact=bool(diam.exact),
        m_small=m_small,
        m_total=m.total,
        threshold=threshold,
        size_bound=size_bound,
        radius_bound=radius_bound,
        guarantee=guarantee,
        status=status,
    )


def greedy_net(sigma: PseudoMetric, epsilon) -> list[int]:
    """Farthest-point net: start at node 0, add the farthest node until all are within ``epsilon``.

    Ties go to the smaller node id.  Net points are pairwise at least
    ``epsilon`` apart, so the size is bounded by the ``epsilon/2``-packing number.
    """
    epsilon = float(epsilon)
    if not epsilon > 0:
        raise GraphError("epsilon must be positive")
    net = [0]
    nearest = sigma.distances_from([0])
    while True:
        far = int(np.argmax(nearest))
        if nearest[far] < epsilon:
            return net
        net.append(far)
        np.minimum(nearest, sigma.distances_from([far]), out=nearest)


# ---------------------------------------------------------------------------
# measure rules


@dataclass(frozen=True)
class MeasureRule:
    """Recipe for a measure on each level; ``total_bound`` bounds ``m(X)`` uniformly in the level."""

    name: str
    total_bound: float | None
    build: Callable[[WeightedGraph], Measure] = field(repr=False)

    def __call__(self, g):
        return self.build(g)


def _by_generation(weight_of_gen):
    def build(g):
        gen = generations(g, 0)
        if (gen < 0).any():
            raise DisconnectedGraphError("generation-based measures need every node reachable from the root")
        sizes = sphere_sizes(gen)
        return Measure(weight_of_gen(gen) / sizes[gen])
    return build


MEASURE_RULES = {
    "uniform-total": MeasureRule("uniform-total", 1.0, lambda g: Measure.uniform(g.node_count, 1.0 / g.node_count)),
    # m(x) = 2**-gen(x) / |sphere(gen(x))|
    "geometric-by-generation": MeasureRule(
        "geometric-by-generation", 2.0, _by_generation(lambda k: np.ldexp(1.0, -k.astype(np.int64)))
    ),
    # m(x) = (gen(x) + 1)**-2 / |sphere(gen(x))|
    "inverse-square-by-generation": MeasureRule(
        "inverse-square-by-generation", math.pi**2 / 6, _by_generation(lambda k: 1.0 / (k + 1.0) ** 2)
    ),
    "counting": MeasureRule("counting", None, lambda g: Measure.uniform(g.node_count, 1.0)),
}


def _file_rule(path):
    m_full = load_measure(path)
    total = m_full.total

    def build(g):
        if g.node_count > len(m_full):
            raise GraphError(f"measure file has {len(m_full)} nodes, level needs {g.node_count}")
        return Measure(m_full.values[: g.node_count])

    return MeasureRule(f"file:{path}", total, build)


def get_measure_rule(name) -> MeasureRule:
    """Look up a rule by name; ``file:PATH`` reads a measure file and restricts it to each level."""
    if isinstance(name, MeasureRule):
        return name
    if name.startswith("file:"):
        return _file_rule(name[5:])
    try:
        return MEASURE_RULES[name]
    except KeyError:
        raise GraphError(f"unknown measure rule {name!r}; choose from {', '.join(MEASURE_RULES)} or file:PATH") from None


# ---------------------------------------------------------------------------
# profiles

PROFILE_COLUMNS = (
    "family", "level", "epsilon", "delta", "net_size_thm2", "net_size_greedy",
    "covering_radius", "diam_rho", "diam_rho_exactness", "m_total",
)


@dataclass(frozen=True)
class ProfileRow:
    family: str
    level: int
    epsilon: float
    delta: float
    net_size_thm2: int
    net_size_greedy: int
    covering_radius: float
    diam_rho: float
    diam_rho_exactness: str
    m_total: float
    greedy_covering_radius: float
    status: str

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _profile_level(family, rule, level, epsilons, settings):
    g = family.generate(level)
    m = rule(g)
    if m.total > rule.total_bound * (1 + 1e-12):
        raise GraphError(f"rule {rule.name} produced m(X) = {m.total!r} above its declared bound {rule.total_bound!r}")
    sigma = canonical_intrinsic_metric(g, m)
    diam = diameter_rho(g, mode="auto", settings=settings)
    rows = []
    for eps in epsilons:
        net = epsilon_net_theorem2(g, m, sigma, eps, settings, diameter=diam)
        greedy = greedy_net(sigma, eps)
        rows.append(ProfileRow(
            family=family.family_id,
            level=int(level),
            epsilon=float(eps),
            delta=net.delta,
            net_size_thm2=net.net_size,
            net_size_greedy=len(greedy),
            covering_radius=net.covering_radius,
            diam_rho=diam.value,
            diam_rho_exactness="exact" if diam.exact else "lower_bound",
            m_total=m.total,
            greedy_covering_radius=float(distance_to_set(sigma, greedy).max()),
            status=net.status,
        ))
    return rows


def total_boundedness_profile(family: ExhaustionFamily, measure_rule, epsilons: Sequence[float],
                              levels: Sequence[int], settings=DEFAULT_SETTINGS, threads=1) -> list[ProfileRow]:
    """Net sizes of both constructions for every ``(level, epsilon)``.

    Net sizes that settle as the level grows are consistent with total
    boundedness of the limit graph; sizes that keep growing point the other
    way.  Finite data cannot settle the question either way.
    """
    rule = get_measure_rule(measure_rule)
    if rule.total_bound is None:
        raise GraphError(f"measure rule {rule.name!r} declares no uniform bound on m(X); profiles need a finite measure")
    epsilons = [float(e) for e in epsilons]
    if not epsilons or min(epsilons) <= 0:
        raise GraphError("epsilons must be a nonempty list of positive numbers")
    if not levels:
        raise GraphError("levels must be nonempty")
    task = lambda lv: _profile_level(family, rule, lv, epsilons, settings)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            per_level = list(pool.map(task, levels))
    else:
        per_level = [task(lv) for lv in levels]
    return [row for rows in per_level for row in rows]
