"""Energy forms, resistance and intrinsic metrics on weighted graphs."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    DisconnectedGraphError,
    GraphError,
    GraphFormatError,
    GuaranteeViolation,
    NotIntrinsicError,
    SolverError,
)
from .graph import (  # noqa: E402
    ExhaustionFamily,
    Measure,
    WeightedGraph,
    connected_components,
    generate,
    load_graph,
    save_graph,
    weighted_degree,
)
from .energy import dirichlet_energy, energy_inner_product, energy_of_square, check_sqrt_triangle  # noqa: E402
from .resistance import (  # noqa: E402
    LaplacianSystem,
    SolveSettings,
    diameter_rho,
    effective_resistance,
    energy_minimizer,
    rho_metric,
)
from .intrinsic import (  # noqa: E402
    PseudoMetric,
    canonical_intrinsic_metric,
    covering_radius,
    diameter_sigma,
    distance_to_set,
    lemma1_check,
    verify_intrinsic,
)
from .compactness import epsilon_net_theorem2, greedy_net, total_boundedness_profile  # noqa: E402
from .witness import algebra_gap_profile, build_witness, select_anchor_nodes  # noqa: E402

__all__ = ["__version__",
    "DisconnectedGraphError",
    "GraphError",
    "GraphFormatError",
    "GuaranteeViolation",
    "NotIntrinsicError",
    "SolverError",
    "ExhaustionFamily",
    "Measure",
    "WeightedGraph",
    "connected_components",
    "generate",
    "load_graph",
    "save_graph",
    "weighted_degree",
    "dirichlet_energy",
    "energy_inner_product",
    "energy_of_square",
    "check_sqrt_triangle",
    "LaplacianSystem",
    "SolveSettings",
    "diameter_rho",
    "effective_resistance",
    "energy_minimizer",
    "rho_metric",
    "PseudoMetric",
    "canonical_intrinsic_metric",
    "covering_radius",
    "diameter_sigma",
    "distance_to_set",
    "lemma1_check",
    "verify_intrinsic",
    "epsilon_net_theorem2",
    "greedy_net",
    "total_boundedness_profile",
    "algebra_gap_profile",
    "build_witness",
    "select_anchor_nodes",
]
