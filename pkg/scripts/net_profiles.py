"""Net-size profiles for the 4^k tree and the unit path.

Runs both net constructions for each (family, measure rule, level, eps)
and prints one CSV block per configuration.

    python3 scripts/net_profiles.py
"""
import argparse
import sys
import time

from energygraph.compactness import PROFILE_COLUMNS, total_boundedness_profile
from energygraph.graph import ExhaustionFamily
from energygraph.reports import dumps_csv

COLUMNS = PROFILE_COLUMNS + ("greedy_covering_radius", "status")

CONFIGS = [
    ("spherically_symmetric_tree", {"branching_base": 4}, "geometric-by-generation", [1, 2, 3, 4]),
    ("spherically_symmetric_tree", {"branching_base": 4}, "uniform-total", [1, 2, 3, 4]),
    ("path", {}, "geometric-by-generation", [100, 1000]),
    ("path", {}, "inverse-square-by-generation", [100, 1000, 10000]),
]


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--epsilons", default="0.5,0.1")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    eps = [float(x) for x in args.epsilons.split(",")]
    for family, params, rule, levels in CONFIGS:
        t0 = time.perf_counter()
        rows = total_boundedness_profile(ExhaustionFamily(family, params), rule, eps, levels, threads=args.threads)
        meta = {"family": family, "params": params, "measure_rule": rule}
        sys.stdout.write(dumps_csv(rows, COLUMNS, meta) + "\n")
        print(f"# {family}/{rule}: {time.perf_counter() - t0:.1f}s", file=sys.stderr)


if __name__ == "__main__":
    main()
