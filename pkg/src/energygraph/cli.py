"""Command-line front end.

Usage examples::

    energygraph gen --family path --level 5 -o p.tsv
    energygraph resistance --graph p.tsv --diameter
    energygraph lemma1 --graph p.tsv --measure m.tsv --set u.tsv
    energygraph profile --family spherically_symmetric_tree --levels 3,4 \\
        --epsilons 0.5,0.1 --measure-rule geometric-by-generation
    energygraph witness-profile --family path --levels 1000,10000,100000

Exit codes: 0 success, 1 invalid input, 2 solver failure, 3 a guaranteed
inequality came out false.
"""
from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__
from .compactness import PROFILE_COLUMNS, epsilon_net_theorem2, greedy_net, total_boundedness_profile
from .energy import dirichlet_energy, energy_of_square
from .errors import GraphError, GuaranteeViolation, SolverError
from .graph import ExhaustionFamily, FAMILIES, load_function, load_graph, load_measure, load_node_set, save_graph
from .intrinsic import (
    canonical_intrinsic_metric,
    covering_radius,
    lemma1_check,
    load_metric,
    save_metric,
    verify_intrinsic,
)
from .reports import SCHEMA, dumps_csv, dumps_json, envelope, fmt_float
from .resistance import SolveSettings, diameter_rho, effective_resistance, resistance_matrix
from .witness import GAP_COLUMNS, algebra_gap_profile, build_witness

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_GUARANTEE = 0, 1, 2, 3


@dataclass
class RunConfig:
    """Validated command line: subcommand, input files, output target and solver settings."""

    command: str
    inputs: dict = field(default_factory=dict)
    output: Path | None = None
    settings: SolveSettings = field(default_factory=SolveSettings)
    seed: int = 0
    threads: int = 1

    @classmethod
    def from_args(cls, args):
        inputs = {}
        for key in ("graph", "measure", "function", "set", "pairs", "verify", "metric_in"):
            val = getattr(args, key, None)
            if val is not None:
                p = Path(val)
                if not p.is_file():
                    raise GraphError(f"--{key.replace('_in', '')}: no such file {val}")
                inputs[key] = p
        if args.threads < 1:
            raise GraphError("--threads must be at least 1")
        settings = SolveSettings(
            rel_tolerance=args.rel_tol,
            max_iterations=args.max_iter,
            method=args.solver,
            exact_cutoff=args.exact_cutoff,
        )
        out = Path(args.output) if getattr(args, "output", None) else None
        return cls(args.command, inputs, out, settings, args.seed, args.threads)

    def meta(self):
        return {"seed": self.seed, "threads": self.threads}


def _emit(cfg, text):
    if cfg.output is None:
        sys.stdout.write(text)
    else:
        cfg.output.write_text(text, encoding="utf-8")


def _parse_params(items):
    params = {}
    for item in items or []:
        if "=" not in item:
            raise GraphError(f"--params entries look like key=value, got {item!r}")
        key, raw = item.split("=", 1)
        if "," in raw:
            params[key] = [int(x) for x in raw.split(",") if x]
            continue
        try:
            params[key] = int(raw)
        except ValueError:
            try:
                params[key] = float(raw)
            except ValueError:
                params[key] = raw
    return params


def _int_list(text):
    try:
        vals = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _float_list(text):
    try:
        vals = [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _family(args):
    return ExhaustionFamily(args.family, _parse_params(args.params))


def _metric(cfg, g, m):
    if "metric_in" in cfg.inputs:
        return load_metric(cfg.inputs["metric_in"], g)
    return canonical_intrinsic_metric(g, m)


# ---------------------------------------------------------------------------
# subcommands


def cmd_gen(args, cfg):
    g = _family(args).generate(args.level)
    save_graph(g, cfg.output)
    print(f"wrote {g.node_count} nodes, {g.edge_count} edges to {cfg.output}", file=sys.stderr)


def cmd_energy(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    f = load_function(cfg.inputs["function"], g.node_count)
    lines = [fmt_float(dirichlet_energy(g, f))]
    if args.square:
        lines.append(fmt_float(energy_of_square(g, f)))
    _emit(cfg, "\n".join(lines) + "\n")


def _read_pairs(path, g):
    pairs = []
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) != 2:
                raise GraphError(f"{path}:{lineno}: expected 'x y'")
            pairs.append((g.check_node(int(parts[0])), g.check_node(int(parts[1]))))
    return pairs


def cmd_resistance(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    s = cfg.settings
    if args.diameter:
        if args.landmarks:
            d = diameter_rho(g, mode="landmark", landmarks=args.landmarks, settings=s)
        else:
            d = diameter_rho(g, mode="exact", settings=s)
        if args.json:
            body = {"rho_diameter": d.value, "exact": d.exact, "endpoints": list(d.endpoints)}
            _emit(cfg, dumps_json(envelope("rho_diameter", body, s, cfg.inputs, cfg.meta())))
        else:
            if not d.exact:
                print(f"lower bound from {args.landmarks} landmarks", file=sys.stderr)
            _emit(cfg, fmt_float(d.value) + "\n")
        return
    if args.all_pairs:
        R = resistance_matrix(g, s)
        pairs = [(x, y) for x in range(g.node_count) for y in range(x + 1, g.node_count)]
        values = [R[x, y] for x, y in pairs]
    else:
        pairs = _read_pairs(cfg.inputs["pairs"], g)
        values = [effective_resistance(g, x, y, s) for x, y in pairs]
    lines = ["x\ty\tr\trho"]
    lines += [f"{x}\t{y}\t{fmt_float(r)}\t{fmt_float(np.sqrt(r))}" for (x, y), r in zip(pairs, values)]
    _emit(cfg, "\n".join(lines) + "\n")


def cmd_intrinsic(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    m = load_measure(cfg.inputs["measure"], g.node_count)
    if "verify" in cfg.inputs:
        sigma = load_metric(cfg.inputs["verify"], g)
        source = "file"
    else:
        sigma = canonical_intrinsic_metric(g, m)
        source = "canonical"
    rep = verify_intrinsic(g, m, sigma)
    if args.metric:
        save_metric(sigma, args.metric)
    doc = envelope("intrinsic", {"metric": source, **rep.__dict__}, cfg.settings, cfg.inputs, cfg.meta())
    _emit(cfg, dumps_json(doc))
    if source == "canonical" and not rep.worst_ratio <= 0.5 + 1e-12:
        raise GuaranteeViolation(f"canonical metric has worst ratio {rep.worst_ratio!r} > 1/2")


def cmd_lemma1(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    m = load_measure(cfg.inputs["measure"], g.node_count)
    sigma = _metric(cfg, g, m)
    U = load_node_set(cfg.inputs["set"])
    rep = lemma1_check(g, m, sigma, U)
    verdict = "HOLDS" if rep.holds else "VIOLATED"
    _emit(cfg, f"energy {fmt_float(rep.energy)} bound {fmt_float(rep.bound)} {verdict}\n")
    if not rep.holds:
        raise GuaranteeViolation(f"Q(sigma_U) = {rep.energy!r} exceeds 2 m(X \\ U) = {rep.bound!r}")


def cmd_net(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    m = load_measure(cfg.inputs["measure"], g.node_count)
    sigma = _metric(cfg, g, m)
    diam = None
    if args.landmarks:
        diam = diameter_rho(g, mode="landmark", landmarks=args.landmarks, settings=cfg.settings)
    rep = epsilon_net_theorem2(g, m, sigma, args.epsilon, cfg.settings, diameter=diam)
    body = {"measure_threshold": rep.as_dict()}
    if args.greedy:
        net = greedy_net(sigma, args.epsilon)
        body["greedy"] = {"net": net, "net_size": len(net), "covering_radius": covering_radius(sigma, net)}
    _emit(cfg, dumps_json(envelope("net", body, cfg.settings, cfg.inputs, cfg.meta())))


def cmd_profile(args, cfg):
    rows = total_boundedness_profile(
        _family(args), args.measure_rule, args.epsilons, args.levels, cfg.settings, threads=cfg.threads
    )
    meta = {"schema": SCHEMA, "version": __version__, "settings": cfg.settings.as_dict(),
            "family": args.family, "params": _parse_params(args.params), "measure_rule": args.measure_rule}
    if args.json:
        _emit(cfg, dumps_json(envelope("profile", [r.as_dict() for r in rows], cfg.settings, cfg.inputs,
                                       {**cfg.meta(), "family": args.family, "measure_rule": args.measure_rule})))
    else:
        _emit(cfg, dumps_csv(rows, PROFILE_COLUMNS, meta))


def cmd_witness(args, cfg):
    g = load_graph(cfg.inputs["graph"])
    _, rep = build_witness(g, args.root, cfg.settings, threads=cfg.threads)
    _emit(cfg, dumps_json(envelope("witness", rep.as_dict(), cfg.settings, cfg.inputs, cfg.meta())))


def cmd_witness_profile(args, cfg):
    rows = algebra_gap_profile(_family(args), args.root, args.levels, cfg.settings, threads=cfg.threads)
    if args.json:
        _emit(cfg, dumps_json(envelope("witness_profile", [r.as_dict() for r in rows], cfg.settings,
                                       cfg.inputs, {**cfg.meta(), "family": args.family})))
    else:
        meta = {"schema": SCHEMA, "version": __version__, "settings": cfg.settings.as_dict(),
                "family": args.family, "params": _parse_params(args.params)}
        _emit(cfg, dumps_csv(rows, GAP_COLUMNS, meta))


# ---------------------------------------------------------------------------


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("-o", "--output", help="write the report here instead of stdout")
    common.add_argument("--rel-tol", type=float, default=1e-10, help="relative residual tolerance (default 1e-10)")
    common.add_argument("--max-iter", type=int, default=None, help="CG iteration cap (default 20 n)")
    common.add_argument("--solver", choices=("auto", "cg", "direct"), default="auto")
    common.add_argument("--exact-cutoff", type=int, default=2000, help="node limit for exact all-pairs work")
    common.add_argument("--threads", type=int, default=1, help="worker threads for independent solves")
    common.add_argument("--seed", type=int, default=0, help="recorded in reports")

    parser = argparse.ArgumentParser(prog="energygraph", description=__doc__.split("\n")[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="write a level of a graph family")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--level", required=True, type=int)
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.set_defaults(func=cmd_gen, needs_output=True)

    p = sub.add_parser("energy", parents=[common], help="Dirichlet energy of a function")
    p.add_argument("--graph", required=True)
    p.add_argument("--function", required=True)
    p.add_argument("--square", action="store_true", help="also print the energy of f**2")
    p.set_defaults(func=cmd_energy)

    p = sub.add_parser("resistance", parents=[common], help="effective resistance and rho diameter")
    p.add_argument("--graph", required=True)
    mode = p.add_mutually_exclusive_group(required=True)
    mode.add_argument("--pairs")
    mode.add_argument("--all-pairs", action="store_true")
    mode.add_argument("--diameter", action="store_true")
    p.add_argument("--landmarks", type=int, help="landmark count; diameter becomes a lower bound")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_resistance)

    p = sub.add_parser("intrinsic", parents=[common], help="canonical intrinsic metric and verification")
    p.add_argument("--graph", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--metric", help="write the metric to this file")
    p.add_argument("--verify", help="verify this metric file instead of the canonical one")
    p.set_defaults(func=cmd_intrinsic)

    p = sub.add_parser("lemma1", parents=[common], help="energy of a distance function against 2 m(X \\ U)")
    p.add_argument("--graph", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--set", required=True)
    p.add_argument("--metric", dest="metric_in", help="metric file (default: canonical metric)")
    p.set_defaults(func=cmd_lemma1)

    p = sub.add_parser("net", parents=[common], help="measure-threshold epsilon net")
    p.add_argument("--graph", required=True)
    p.add_argument("--measure", required=True)
    p.add_argument("--epsilon", required=True, type=float)
    p.add_argument("--greedy", action="store_true", help="add the farthest-point net")
    p.add_argument("--metric", dest="metric_in", help="metric file (default: canonical metric)")
    p.add_argument("--landmarks", type=int, help="use a landmark lower bound for the rho diameter")
    p.set_defaults(func=cmd_net)

    p = sub.add_parser("profile", parents=[common], help="net sizes across levels of a family")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.add_argument("--levels", required=True, type=_int_list)
    p.add_argument("--epsilons", required=True, type=_float_list)
    p.add_argument("--measure-rule", required=True)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_profile)

    p = sub.add_parser("witness", parents=[common], help="finite-energy function with a large-energy square")
    p.add_argument("--graph", required=True)
    p.add_argument("--root", type=int, default=0)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("witness-profile", parents=[common], help="witness statistics across levels")
    p.add_argument("--family", required=True, choices=FAMILIES)
    p.add_argument("--params", nargs="*", default=[], metavar="KEY=VALUE")
    p.add_argument("--levels", required=True, type=_int_list)
    p.add_argument("--root", type=int, default=0)
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_witness_profile)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = RunConfig.from_args(args)
        if getattr(args, "needs_output", False) and cfg.output is None:
            raise GraphError(f"{args.command} needs -o/--output")
        args.func(args, cfg)
    except GuaranteeViolation as exc:
        print(f"error: guaranteed inequality violated: {exc}", file=sys.stderr)
        return EXIT_GUARANTEE
    except SolverError as exc:
        print(f"error: solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except (GraphError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
