"""Command-line interface.

Exit codes: 0 when the run succeeded and its result is positive, 1 when the
run finished with a negative or partial result (types not distinct,
ambiguous assembly, no certificate, deck changed, per-sample errors), 2 on
invalid input.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict
from pathlib import Path

from . import assembly, cycle_structure, exploration, graph_core, harness, neighborhood, switch_lab


def _emit(obj, out: str | None) -> None:
    text = json.dumps(obj, indent=2, default=str) + "\n"
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_sample(a) -> int:
    if a.simple:
        g = graph_core.sample_simple(a.n, a.d, a.seed)
    else:
        g = graph_core.sample_configuration(a.n, a.d, a.seed)
    if a.out:
        graph_core.write_graph(g, a.out)
    else:
        sys.stdout.write(graph_core.dumps_graph(g))
    return 0


def cmd_explore(a) -> int:
    g = graph_core.read_graph(a.graph)
    dag = exploration.bfs_explore(g, a.source, a.radius)
    _emit(dag.to_json(), a.out)
    return 0


def cmd_deck(a) -> int:
    g = graph_core.read_graph(a.graph)
    if a.pieces:
        assembly.write_pieces(assembly.make_deck_pieces(g, a.radius), a.out, g.d)
        return 0
    deck = neighborhood.build_deck(g, a.radius)
    neighborhood.write_deck(deck, a.out)
    return 1 if deck.errors else 0


def cmd_types_distinct(a) -> int:
    g = graph_core.read_graph(a.graph)
    res = neighborhood.all_types_distinct(g, a.radius)
    _emit({"radius": a.radius, "distinct": res.distinct, "groups": res.groups}, None)
    return 0 if res.distinct else 1


def cmd_assemble(a) -> int:
    pieces, _, _ = assembly.read_pieces(a.deck)
    res = assembly.assemble(pieces)
    if not res.ok:
        _emit({"ok": False, **asdict(res.report)}, None)
        return 1
    graph_core.write_graph(res.graph, a.out)
    return 0


def cmd_cyclestruct(a) -> int:
    g = graph_core.read_graph(a.graph)
    c = cycle_structure.cycle_structure_of(g, a.source, a.radius)
    obj = c.to_json()
    obj["gamma"] = c.gamma
    _emit(obj, a.out)
    return 0


def cmd_structprob(a) -> int:
    c = cycle_structure.CycleStructure.from_json(json.loads(Path(a.struct).read_text()))
    d = a.d or c.d
    if a.exact:
        p = cycle_structure.structure_probability(c, None, a.n, d)
        _emit({"exact": True, "probability": f"{p.numerator}/{p.denominator}", "float": float(p)}, None)
    else:
        p = cycle_structure.approx_structure_probability(c, None, a.n, d)
        _emit({"exact": False, "probability": p, "labelings": cycle_structure.label_count(c, d)}, None)
    return 0


def cmd_plant(a) -> int:
    g = graph_core.read_graph(a.graph)
    G, w = switch_lab.plant_switch_structure(g, a.radius, a.seed)
    out = Path(a.out)
    graph_core.write_graph(G, out)
    switch_lab.write_witness(w, a.witness_out or out.with_suffix(".witness.json"))
    return 0


def cmd_switch(a) -> int:
    g = graph_core.read_graph(a.graph)
    w = switch_lab.read_witness(a.witness)
    gp = switch_lab.apply_switch(g, w)
    if a.out:
        graph_core.write_graph(gp, a.out)
    else:
        sys.stdout.write(graph_core.dumps_graph(gp))
    return 0


def cmd_verify_deck(a) -> int:
    g = graph_core.read_graph(a.g)
    gp = graph_core.read_graph(a.gprime)
    res = switch_lab.verify_deck_invariance(g, gp, a.radius)
    _emit({"radius": a.radius, "equal": res.equal, "first_differing": res.first_differing,
           "differing": res.differing}, None)
    return 0 if res.equal else 1


def cmd_certify_asym(a) -> int:
    g = graph_core.read_graph(a.graph)
    res = assembly.certify_asymmetric(g, a.radius)
    if isinstance(res, assembly.Certificate):
        _emit(res.to_json(), a.out)
        return 0
    _emit({"certified": False, **asdict(res)}, None)
    return 1


def cmd_certify_noniso(a) -> int:
    g = graph_core.read_graph(a.graph_g)
    h = graph_core.read_graph(a.graph_h)
    res = assembly.certify_nonisomorphic(g, h, a.radius)
    if isinstance(res, assembly.Certificate):
        _emit(res.to_json(), a.out)
        return 0
    _emit({"certified": False, **asdict(res)}, None)
    return 1


def _config(a, **extra) -> harness.ExperimentConfig:
    if a.config:
        return harness.ExperimentConfig.from_file(a.config)
    return harness.ExperimentConfig(
        n=a.n, d=a.d, r_policy=a.r_policy, radius=a.radius, delta=a.delta, samples=a.samples,
        seed_base=a.seed_base, workers=a.workers, r_max=a.r_max, **extra,
    )


def cmd_scan(a) -> int:
    cfg = _config(a)
    rows = harness.threshold_scan(cfg)
    if a.out:
        harness.write_csv(rows, a.out)
    else:
        sys.stdout.write(harness.rows_to_csv(rows))
    return 1 if any(r.error for r in rows) else 0


def cmd_collisions(a) -> int:
    cfg = _config(a, sources=a.sources)
    rows = harness.collision_stats(cfg, a.radii)
    if a.out:
        harness.write_csv(rows, a.out)
    else:
        sys.stdout.write(harness.rows_to_csv(rows))
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shotgun", description="Shotgun assembly of random regular graphs.")
    sub = p.add_subparsers(dest="command", required=True)

    s = sub.add_parser("sample", help="sample a configuration-model graph")
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--simple", action="store_true", help="reject until the graph is simple")
    s.add_argument("--out")
    s.set_defaults(func=cmd_sample)

    s = sub.add_parser("explore", help="BFS exploration DAG as JSON")
    s.add_argument("--graph", required=True)
    s.add_argument("--source", type=int, action="append", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_explore)

    s = sub.add_parser("deck", help="write the radius-R deck (type codes, or pieces with --pieces)")
    s.add_argument("--graph", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--pieces", action="store_true", help="write rooted balls for the assembler")
    s.set_defaults(func=cmd_deck)

    s = sub.add_parser("types-distinct", help="are all radius-R types distinct")
    s.add_argument("--graph", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.set_defaults(func=cmd_types_distinct)

    s = sub.add_parser("assemble", help="reassemble a graph from a deck-piece file")
    s.add_argument("--deck", required=True)
    s.add_argument("--out", required=True)
    s.set_defaults(func=cmd_assemble)

    s = sub.add_parser("cyclestruct", help="cycle structure of a source set as JSON")
    s.add_argument("--graph", required=True)
    s.add_argument("--source", type=int, action="append", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_cyclestruct)

    s = sub.add_parser("structprob", help="probability of a cycle structure")
    s.add_argument("--struct", required=True)
    s.add_argument("--n", type=int, required=True)
    s.add_argument("--d", type=int)
    m = s.add_mutually_exclusive_group()
    m.add_argument("--exact", action="store_true")
    m.add_argument("--approx", action="store_true")
    s.set_defaults(func=cmd_structprob)

    s = sub.add_parser("plant", help="plant a switch witness")
    s.add_argument("--graph", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", required=True, help="planted graph file")
    s.add_argument("--witness-out", help="witness JSON (default: next to --out)")
    s.set_defaults(func=cmd_plant)

    s = sub.add_parser("switch", help="apply the four-edge switch of a witness")
    s.add_argument("--graph", required=True)
    s.add_argument("--witness", required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_switch)

    s = sub.add_parser("verify-deck", help="compare two decks vertex by vertex")
    s.add_argument("--g", required=True)
    s.add_argument("--gprime", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.set_defaults(func=cmd_verify_deck)

    s = sub.add_parser("certify-asym", help="certificate of a trivial automorphism group")
    s.add_argument("--graph", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_certify_asym)

    s = sub.add_parser("certify-noniso", help="certificate that two graphs differ")
    s.add_argument("--graph-g", required=True)
    s.add_argument("--graph-h", required=True)
    s.add_argument("--radius", type=int, required=True)
    s.add_argument("--out")
    s.set_defaults(func=cmd_certify_noniso)

    for name, func, helptext in (("scan", cmd_scan, "threshold scan of r_distinct"),
                                 ("collisions", cmd_collisions, "cycle-count statistics")):
        s = sub.add_parser(name, help=helptext)
        s.add_argument("--config", help="JSON file with ExperimentConfig fields")
        s.add_argument("--n", type=int, nargs="+", default=[1000])
        s.add_argument("--d", type=int, nargs="+", default=[3])
        s.add_argument("--r-policy", default="absolute", choices=["absolute", "minus", "plus"])
        s.add_argument("--radius", type=int)
        s.add_argument("--delta", type=float, default=10.0)
        s.add_argument("--samples", type=int, default=10)
        s.add_argument("--seed-base", type=int, default=0)
        s.add_argument("--workers", type=int, default=1)
        s.add_argument("--r-max", type=int)
        s.add_argument("--out")
        if name == "collisions":
            s.add_argument("--sources", type=int, nargs="+", default=[1])
            s.add_argument("--radii", type=int, nargs="+")
        s.set_defaults(func=func)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    a = parser.parse_args(argv)
    if a.command in ("scan", "collisions") and not a.config and a.radius is None and a.r_max is None:
        a.r_policy = "plus" if a.r_policy == "absolute" else a.r_policy
    try:
        return a.func(a)
    except (ValueError, OSError, graph_core.GraphFormatError, assembly.MalformedDeck,
            switch_lab.InvalidWitness, switch_lab.PlantFailed, assembly.NoOmegaVertex) as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
