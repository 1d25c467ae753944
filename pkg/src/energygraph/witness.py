"""Finite-energy functions whose squares have large energy.

For every index ``n >= 1`` with a node ``x_n`` at ``8**n < rho(x_n, o) <= 8**(n+1)``
take the energy minimizer ``f_n`` with ``f_n(o) = 0`` and ``f_n(x_n) = 4**n``.
Its energy is ``16**n / rho(x_n, o)**2 < 4**-n``, so ``f = sum f_n`` has
``Q(f) <= (sum_n 2**-n)**2 <= 1``.  Yet ``|g(x) - g(y)| <= Q(g)**0.5 rho(x, y)``
applied to ``g = f**2`` forces ``Q(f**2) >= f(x_n)**4 / rho(x_n, o)**2 >= 4**(n-3)``.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .energy import dirichlet_energy, energy_of_square
from .errors import GraphError, GuaranteeViolation, SolverError
from .graph import ExhaustionFamily, WeightedGraph
from .resistance import DEFAULT_SETTINGS, energy_minimizer, resistances_from, series_upper_bounds

__all__ = [
    "Anchor",
    "WitnessReport",
    "NoAnchorsError",
    "select_anchor_nodes",
    "build_witness",
    "algebra_gap_profile",
    "GapRow",
    "GAP_COLUMNS",
    "ENERGY_SLACK",
]

ENERGY_SLACK = 1e-6
_DOMINATION_RTOL = 1e-9


class NoAnchorsError(GraphError):
    """No node lies at rho-distance above 8 from the root."""


class Anchor(NamedTuple):
    index: int
    node: int
    rho: float
    resistance: float


def select_anchor_nodes(g: WeightedGraph, o, settings=DEFAULT_SETTINGS) -> list[Anchor]:
    """One node per realizable shell ``64**n < r(x, o) <= 64**(n+1)``, ``n >= 1``.

    Within a shell the node with the smallest resistance wins, ties to the
    smaller id.  Shells are compared in resistance ``r = rho**2`` so the
    thresholds ``64**n`` are exact.  Nodes whose series upper bound is at
    most 64 cannot qualify and are never solved for.
    """
    o = g.check_node(o)
    g.require_connected("anchor selection")
    ub = series_upper_bounds(g, o)
    candidates = np.flatnonzero(ub > 64.0)
    if candidates.size == 0:
        return []
    r = resistances_from(g, o, candidates, settings)
    anchors = []
    n = 1
    top = float(r.max())
    while 64.0**n < top:
        lo, hi = 64.0**n, 64.0 ** (n + 1)
        shell = np.flatnonzero((r > lo) & (r <= hi))
        if shell.size:
            pick = shell[np.lexsort((candidates[shell], r[shell]))[0]]
            anchors.append(Anchor(n, int(candidates[pick]), math.sqrt(float(r[pick])), float(r[pick])))
        n += 1
    return anchors


@dataclass(frozen=True)
class WitnessReport:
    root: int
    anchors: tuple[dict, ...]
    q_f: float
    q_fsq: float
    sqrt_energy_sum: float
    lower_bounds: tuple[dict, ...]
    realized_indices: tuple[int, ...]
    max_index: int
    certified_bound: float

    def as_dict(self):
        return {
            "root": self.root,
            "anchors": [dict(a) for a in self.anchors],
            "q_f": self.q_f,
            "q_fsq": self.q_fsq,
            "sqrt_energy_sum": self.sqrt_energy_sum,
            "lower_bounds": [dict(b) for b in self.lower_bounds],
            "realized_indices": list(self.realized_indices),
            "max_index": self.max_index,
            "certified_bound": self.certified_bound,
        }


def _anchor_minimizer(g, o, anchor, settings):
    top = 4.0**anchor.index
    fn, q = energy_minimizer(g, {o: 0.0, anchor.node: top}, clamp=(0.0, top), settings=settings)
    cap = 4.0 ** (-anchor.index)
    if q > cap * (1 + ENERGY_SLACK):
        raise SolverError(
            f"minimizer for index {anchor.index} has energy {q!r} > 4**-{anchor.index} = {cap!r}; "
            "the exact infimum is strictly smaller, so the solve is inaccurate"
        )
    return fn, q


def build_witness(g: WeightedGraph, o, settings=DEFAULT_SETTINGS, anchors=None, threads=1):
    """Assemble ``f = sum_n f_n`` and certify the growth of ``Q(f**2)``.

    Returns ``(f, WitnessReport)``.  Raises :class:`NoAnchorsError` when no
    index is realizable and :class:`GuaranteeViolation` if any inequality of
    the construction fails numerically.
    """
    o = g.check_node(o)
    if anchors is None:
        anchors = select_anchor_nodes(g, o, settings)
    if not anchors:
        raise NoAnchorsError(f"no node has rho-distance above 8 from node {o}; nothing to witness")
    task = lambda a: _anchor_minimizer(g, o, a, settings)  # noqa: E731
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(task, anchors))
    else:
        parts = [task(a) for a in anchors]

    f = np.zeros(g.node_count)
    anchor_rows = []
    sqrt_sum_terms = []
    for a, (fn, q) in zip(anchors, parts):
        f += fn
        sqrt_sum_terms.append(math.sqrt(q))
        anchor_rows.append({
            "n": a.index, "node": a.node, "rho": a.rho, "q_fn": q, "q_fn_cap": 4.0 ** (-a.index),
        })
    sqrt_sum = math.fsum(sqrt_sum_terms)
    q_f = dirichlet_energy(g, f)
    q_fsq = energy_of_square(g, f)

    tol = 1e-9
    if math.sqrt(q_f) > sqrt_sum * (1 + tol) + tol:
        raise GuaranteeViolation(f"sqrt Q(f) = {math.sqrt(q_f)!r} exceeds sum of sqrt Q(f_n) = {sqrt_sum!r}")
    if sqrt_sum > 1 + ENERGY_SLACK:
        raise GuaranteeViolation(f"sum of sqrt Q(f_n) = {sqrt_sum!r} exceeds 1")

    bounds = []
    for a in anchors:
        top = 4.0**a.index
        fx, fo = float(f[a.node]), float(f[o])
        if fo != 0.0 or fx < top:
            raise GuaranteeViolation(f"f(o) = {fo!r}, f(x_{a.index}) = {fx!r}; expected 0 and >= {top!r}")
        lower_bound = (fx * fx - fo * fo) ** 2 / a.resistance
        floor = 4.0 ** (a.index - 3)
        if lower_bound < floor:
            raise GuaranteeViolation(f"certified bound {lower_bound!r} below 4**({a.index}-3)")
        if q_fsq < lower_bound * (1 - _DOMINATION_RTOL):
            raise GuaranteeViolation(f"Q(f^2) = {q_fsq!r} below the certified bound {lower_bound!r}")
        bounds.append({"n": a.index, "lower_bound": lower_bound, "floor": floor})

    realized = tuple(a.index for a in anchors)
    report = WitnessReport(
        root=o,
        anchors=tuple(anchor_rows),
        q_f=q_f,
        q_fsq=q_fsq,
        sqrt_energy_sum=sqrt_sum,
        lower_bounds=tuple(bounds),
        realized_indices=realized,
        max_index=max(realized),
        certified_bound=4.0 ** (max(realized) - 3),
    )
    return f, report


GAP_COLUMNS = (
    "family", "level", "node_count", "status", "max_index", "realized_indices", "q_f", "q_fsq", "certified_bound",
)


@dataclass(frozen=True)
class GapRow:
    family: str
    level: int
    node_count: int
    status: str
    max_index: int | None
    realized_indices: str
    q_f: float | None
    q_fsq: float | None
    certified_bound: float | None

    def as_dict(self):
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def algebra_gap_profile(family: ExhaustionFamily, o=0, levels: Sequence[int] = (), settings=DEFAULT_SETTINGS,
                        threads=1) -> list[GapRow]:
    """Witness statistics per level.

    Levels without anchors are recorded as ``compactness-consistent``.  On
    families with unbounded rho the certified bound grows by a factor 4 with
    each new index.
    """
    if not levels:
        raise GraphError("levels must be nonempty")
    rows = []
    for level in levels:
        g = family.generate(level)
        anchors = select_anchor_nodes(g, o, settings)
        if not anchors:
            rows.append(GapRow(family.family_id, int(level), g.node_count, "compactness-consistent",
                               None, "", None, None, None))
            continue
        _, rep = build_witness(g, o, settings, anchors=anchors, threads=threads)
        rows.append(GapRow(
            family.family_id, int(level), g.node_count, "witness", rep.max_index,
            ";".join(str(i) for i in rep.realized_indices), rep.q_f, rep.q_fsq, rep.certified_bound,
        ))
    return rows
