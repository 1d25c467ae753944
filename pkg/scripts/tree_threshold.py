"""When can the measure-threshold net drop the deepest generation of the 4^k tree?

With unit weights and ``m(x) = 2**-gen(x) / |sphere|`` every node of
generation ``k`` carries the same mass, so ``U_delta`` is a union of whole
generations.  The deepest one (mass ``2**-L``) leaves the net exactly when
``2**-L < eps**2 / (2 D**2)``, where ``D**2 = 2 L`` is the leaf-to-leaf
series resistance.  This prints, per level, both sides of that inequality
and the predicted net size.  ``D`` is cross-checked against the library on
the levels that fit in memory.

    python3 scripts/tree_threshold.py --max-level 14
"""
import argparse
import math

from energygraph.compactness import MEASURE_RULES, epsilon_net_theorem2
from energygraph.graph import ExhaustionFamily
from energygraph.intrinsic import canonical_intrinsic_metric
from energygraph.resistance import diameter_rho

TREE = ExhaustionFamily("spherically_symmetric_tree", {"branching_base": 4})


def sphere_sizes(level):
    sizes, s = [1], 1
    for k in range(1, level + 1):
        s *= 4**k
        sizes.append(s)
    return sizes


def predicted(level, eps):
    """Net size of the construction from the closed-form quantities."""
    threshold = eps**2 / (2.0 * 2 * level)
    sizes = sphere_sizes(level)
    # drop generations from the deepest while their cumulative mass stays below threshold
    dropped, mass = 0, 0.0
    for k in range(level, 0, -1):
        if mass + 2.0**-k < threshold:
            mass += 2.0**-k
            dropped += 1
        else:
            break
    return threshold, sum(sizes[: level + 1 - dropped]), sum(sizes)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n")[0])
    ap.add_argument("--max-level", type=int, default=14)
    ap.add_argument("--epsilons", default="0.5,0.1")
    ap.add_argument("--check-levels", default="1,2,3,4")
    args = ap.parse_args(argv)
    eps_list = [float(x) for x in args.epsilons.split(",")]
    checks = {int(x) for x in args.check_levels.split(",") if x}

    print("level,epsilon,D,deepest_mass,threshold,drops_deepest,net_size_predicted,node_count,net_size_library")
    for level in range(1, args.max_level + 1):
        D = math.sqrt(2 * level)
        lib = {}
        if level in checks:
            g = TREE.generate(level)
            assert math.isclose(diameter_rho(g).value, D, rel_tol=1e-12)
            m = MEASURE_RULES["geometric-by-generation"](g)
            sigma = canonical_intrinsic_metric(g, m)
            lib = {eps: epsilon_net_theorem2(g, m, sigma, eps).net_size for eps in eps_list}
        for eps in eps_list:
            threshold, size, total = predicted(level, eps)
            drops = 2.0**-level < threshold
            if eps in lib:
                assert lib[eps] == size, (level, eps, lib[eps], size)
            print(f"{level},{eps},{D:.12g},{2.0**-level:.6g},{threshold:.6g},{drops},{size},{total},"
                  f"{lib.get(eps, '')}")


if __name__ == "__main__":
    main()
