"""Witness statistics on the unit path across levels.

Prints the per-level CSV (max realized index, Q(f), Q(f^2), certified
bound) followed by the anchor rows of the deepest level.

    python3 scripts/witness_profile.py --levels 1000,10000,100000,1000000
"""
import argparse
import sys
import time

from energygraph.graph import ExhaustionFamily
from energygraph.reports import dumps_csv
from energygraph.witness import GAP_COLUMNS, algebra_gap_profile, build_witness


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--family", default="path")
    ap.add_argument("--levels", default="1000,10000,100000,1000000")
    ap.add_argument("--threads", type=int, default=1)
    args = ap.parse_args(argv)
    levels = [int(x) for x in args.levels.split(",")]
    fam = ExhaustionFamily(args.family)

    t0 = time.perf_counter()
    rows = algebra_gap_profile(fam, 0, levels, threads=args.threads)
    sys.stdout.write(dumps_csv(rows, GAP_COLUMNS, {"family": args.family}))
    print(f"# profile took {time.perf_counter() - t0:.1f}s", file=sys.stderr)

    deepest = rows[-1]
    if deepest.status == "witness":
        _, rep = build_witness(fam.generate(levels[-1]), 0, threads=args.threads)
        print("\nn,node,rho,q_fn,q_fn_cap,lower_bound,floor")
        for a, b in zip(rep.anchors, rep.lower_bounds):
            print(f"{a['n']},{a['node']},{a['rho']:.12g},{a['q_fn']:.12g},{a['q_fn_cap']:.12g},"
                  f"{b['lower_bound']:.12g},{b['floor']:.12g}")


if __name__ == "__main__":
    main()
