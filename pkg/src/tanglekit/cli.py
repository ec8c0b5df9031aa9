"""Command-line driver: one subcommand per analysis, JSON (or DOT) on stdout."""

from __future__ import annotations

import argparse
import json
import os
import sys
from typing import Any, Callable, Sequence

from . import __version__
from .checks import SWEEPS
from .errors import TanglekitError
from .invsys import (
    GammaIndex,
    delta_canonical,
    delta_violations,
    f_census,
    f_level,
    gamma_join,
    gamma_space,
)
from .multigraph import Multigraph, sort_ids
from .packing import aux_graph, classify_gaps, pack_pipeline, vstar
from .presentation import CATALOG, FLAG_NAMES, Presentation, family, load
from .structure import (
    component_report,
    compactness_predicates,
    directions,
    enumerate_crit,
    not_finitely_separable,
    quotient_points,
    strongly_linked,
)
from .tangles import enumerate_tangles_finite, in_S_prime, level_separation

DEFAULT_DEPTH_CAP = 60

SCHEMAS: dict[str, dict] = {
    "envelope": {
        "command": "string",
        "provenance": {"presentation": "object", "level": "int", "k": "int", "certified": "bool",
                       "source": "PAPER|DERIVED|custom", "version": "string"},
        "result": "command specific",
    },
    "families": [{"name": "string", "description": "string", "flags": "object", "source": "PAPER|DERIVED|TRIVIAL"}],
    "truncate": {"level": "int", "graph": {"vertices": ["id"], "edges": [["id", "u", "v"]]}, "frontier": ["id"]},
    "components": {"level": "int", "separator": ["id"], "closed": ["Comp"], "open": ["Comp"]},
    "crit": {"witnessed": [{"Y": ["id"], "count": "int", "certified": "bool"}], "certified": [["id"]]},
    "ends": {"directions": [{"end": "id|null", "thread": [{"X": ["id"], "component": "id"}]}], "certified": ["EndCert"]},
    "fpoints": {"level": "FLevel", "census": "optional Census"},
    "gamma": {"index": {"X": ["id"], "P": [["component key"]]}, "space": "Multigraph", "delta": "bool"},
    "tangles": {"count": "int", "tangles": [["Separation"]]},
    "sprime": {"separation": "Separation", "verdict": "Verdict"},
    "sim": {"finitely_separable": "Verdict", "strongly_linked": "Verdict", "quotient_points": ["class"]},
    "aux": {"end_edges": ["AuxEdge"], "crit_edges": ["AuxEdge"], "components": [["id"]]},
    "vstar": {"order": ["id"], "gaps": [{"pair": ["id", "id"], "kind": "EndGap|CritGap|Unknown"}]},
    "pack": {"levels": [{"F": ["edge id"], "trees": [["edge id"]]}], "limit_assignment": {"edge id": "int|null"},
             "aux_completion": [{"component": ["id"], "edges": ["aux edge id"]}]},
    "predicates": {"flags": {name: "bool" for name in FLAG_NAMES}, "checks": {"name": "Verdict"}},
    "check": {"check": "string", "trials": "int", "failures": ["object"], "ok": "bool"},
}


class UsageError(Exception):
    pass


def _ids(text: str | None) -> list[str]:
    if not text:
        return []
    return [t for t in (s.strip() for s in text.split(",")) if t]


def _classes(text: str | None) -> list[list[str]]:
    return [_ids(block) for block in (text or "").split("|") if _ids(block)]


def _presentation(args: argparse.Namespace) -> Presentation:
    if getattr(args, "spec", None):
        with open(args.spec, encoding="utf-8") as fh:
            return load(json.load(fh))
    if not getattr(args, "family", None):
        raise UsageError("give --family or --spec")
    params = json.loads(args.params) if args.params else {}
    return family(args.family, **params)


def _capped(value: int, name: str) -> int:
    cap = int(os.environ.get("TANGLEKIT_DEPTH_CAP", DEFAULT_DEPTH_CAP))
    if value < 0:
        raise UsageError(f"{name} must be non-negative")
    if value > cap:
        raise UsageError(f"{name} {value} exceeds TANGLEKIT_DEPTH_CAP={cap}")
    return value


def _depth(args: argparse.Namespace) -> int:
    return _capped(args.depth, "depth")


def _provenance(args: argparse.Namespace, p: Presentation | None) -> dict:
    out: dict[str, Any] = {"version": __version__, "k": getattr(args, "k", None), "seed": getattr(args, "seed", None)}
    if hasattr(args, "depth"):
        out["level"] = args.depth
    if p is not None:
        cert = p.certificate()
        out["presentation"] = p.spec()
        out["certified"] = cert is not None
        out["source"] = cert.provenance if cert is not None else "custom"
    return out


# ---------------------------------------------------------------------------
# commands; each returns (result, optional DOT text)


def cmd_families(args, p):
    out = []
    for name in sorted(CATALOG):
        q = family(name)
        cert = q.certificate()
        out.append({"name": name, "description": q.description,
                    "flags": dict(cert.flags) if cert else {}, "source": cert.provenance if cert else None})
    return out, None


def cmd_truncate(args, p):
    lg = p.truncate(_depth(args))
    return lg.to_json(), lg.graph.to_dot(f"{p.family}_{lg.level}")


def cmd_components(args, p):
    return component_report(p, _ids(args.X), _depth(args)).to_json(), None


def cmd_crit(args, p):
    n = _depth(args)
    found = enumerate_crit(p, args.size, n, args.k)
    cert = p.certificate()
    certified = cert.crit.within(p.truncate(n).graph.vertex_set) if cert else []
    return {
        "witnessed": [w.to_json() for w in found],
        "certified": [sort_ids(y) for y in certified] if cert and cert.crit.finite else None,
        "certified_description": cert.crit.description if cert else None,
    }, None


def cmd_ends(args, p):
    n = _depth(args)
    cert = p.certificate()
    return {
        "directions": [d.to_json() for d in directions(p, n)],
        "certified": [e.to_json() for e in cert.ends_at(n)] if cert else None,
        "enumerable": cert.ends_enumerable if cert else False,
    }, None


def cmd_fpoints(args, p):
    n = _depth(args)
    out: dict[str, Any] = {}
    if args.X is not None:
        out["level"] = f_level(p, _ids(args.X), n, args.k).to_json()
    if args.census or args.X is None:
        out["census"] = f_census(p, n).to_json()
    return out, None


def cmd_gamma(args, p):
    n = _depth(args)
    x = _ids(args.X)
    idx = GammaIndex.of(x, _classes(args.classes)) if args.classes else delta_canonical(p, x, n, args.k)
    if args.join_X is not None:
        other = GammaIndex.of(_ids(args.join_X), _classes(args.join_classes)) if args.join_classes \
            else delta_canonical(p, _ids(args.join_X), n, args.k)
        idx = gamma_join(p, idx, other, n)
    space = gamma_space(p, idx, n)
    problems = delta_violations(p, idx, n, args.k)
    return {"index": idx.to_json(), "space": space.to_json(), "delta": not problems, "delta_problems": problems}, \
        space.to_dot("gamma")


def cmd_tangles(args, p):
    if args.graph:
        with open(args.graph, encoding="utf-8") as fh:
            g = Multigraph.from_json(json.load(fh))
    else:
        g = p.truncate(_depth(args)).graph
    ts = enumerate_tangles_finite(g, args.k)
    return {"vertices": list(g.vertices), "k": args.k, "count": len(ts), "tangles": [t.to_json() for t in ts]}, None


def cmd_sprime(args, p):
    n = _depth(args)
    s = level_separation(p, _ids(args.X), _ids(args.side), n)
    return {"separation": s.to_json(), "verdict": in_S_prime(p, s, n).to_json()}, None


def cmd_sim(args, p):
    n = _depth(args)
    out: dict[str, Any] = {}
    if args.a and args.b:
        out["finitely_separable"] = not_finitely_separable(p, args.a, args.b, n).to_json()
        out["strongly_linked"] = strongly_linked(p, args.a, args.b, n).to_json()
    out["quotient_points"] = quotient_points(p, n)
    return out, None


def cmd_aux(args, p):
    aux = aux_graph(p, _depth(args), args.k)
    return aux.to_json(), aux.combined().to_dot("aux")


def cmd_vstar(args, p):
    n = _depth(args)
    vs = vstar(p, args.x, args.y, n)
    return {**vs.to_json(), "gaps": [g.to_json() for g in classify_gaps(p, vs, n)]}, None


def cmd_pack(args, p):
    n = _depth(args) if args.depth_given else None
    res = pack_pipeline(p, args.k, _capped(args.levels, "levels"), n, cap=args.cap)
    args.depth = res.level
    return res.to_json(), res.to_dot(p.truncate(res.level).graph)


def cmd_predicates(args, p):
    n = _depth(args)
    cert = p.certificate()
    return {
        "flags": dict(cert.flags) if cert else {},
        "checks": {name: v.to_json() for name, v in compactness_predicates(p, n).items()},
    }, None


def cmd_check(args, p):
    fn = SWEEPS[args.name]
    kwargs: dict[str, Any] = {}
    if args.name in ("bonding", "poset"):
        kwargs["seed"] = args.seed
    if args.name == "bonding" and args.count:
        kwargs["count"] = args.count
    return fn(**kwargs).to_json(), None


COMMANDS: dict[str, tuple[Callable, str, bool]] = {
    "families": (cmd_families, "list catalog families", False),
    "truncate": (cmd_truncate, "level graph of a presentation", True),
    "components": (cmd_components, "components of G - X at a level", True),
    "crit": (cmd_crit, "witnessed and certified critical sets", True),
    "ends": (cmd_ends, "direction threads and certified ends", True),
    "fpoints": (cmd_fpoints, "points of the filter system and thread census", True),
    "gamma": (cmd_gamma, "contraction spaces, joins and Δ membership", True),
    "tangles": (cmd_tangles, "finite tangle enumeration", False),
    "sprime": (cmd_sprime, "membership in the restricted separation system", True),
    "sim": (cmd_sim, "finite separability, strong linkage and quotient points", True),
    "aux": (cmd_aux, "auxiliary edges", True),
    "vstar": (cmd_vstar, "linear order on V* and its gaps", True),
    "pack": (cmd_pack, "limit tree-packing pipeline", True),
    "predicates": (cmd_predicates, "compactness predicates", True),
    "check": (cmd_check, "run a named invariant sweep", False),
}


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="tanglekit", description="Finite-stage analysis of finitely presented infinite graphs.")
    ap.add_argument("--schema", action="store_true", help="print the JSON output schemas and exit")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command")
    for name, (_, help_text, needs_p) in COMMANDS.items():
        sp = sub.add_parser(name, help=help_text)
        sp.add_argument("--format", choices=("json", "dot", "text"), default="json")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--k", type=int, default=2)
        if needs_p or name == "tangles":
            sp.add_argument("--family")
            sp.add_argument("--params", help="JSON object of family parameters")
            sp.add_argument("--spec", help="presentation JSON file")
            sp.add_argument("--depth", type=int, default=None)
        if name == "components":
            sp.add_argument("--X", default="")
        if name == "crit":
            sp.add_argument("--size", type=int, default=3)
        if name == "fpoints":
            sp.add_argument("--X", default=None)
            sp.add_argument("--census", action="store_true")
        if name == "gamma":
            sp.add_argument("--X", default="")
            sp.add_argument("--classes", help="component keys, classes separated by |")
            sp.add_argument("--join-X", dest="join_X", default=None)
            sp.add_argument("--join-classes", dest="join_classes", default=None)
        if name == "tangles":
            sp.add_argument("--graph", help="multigraph JSON file")
        if name == "sprime":
            sp.add_argument("--X", required=True)
            sp.add_argument("--side", default="")
        if name == "sim":
            sp.add_argument("--a")
            sp.add_argument("--b")
        if name == "vstar":
            sp.add_argument("--x", required=True)
            sp.add_argument("--y", required=True)
        if name == "pack":
            sp.add_argument("--levels", type=int, default=5)
            sp.add_argument("--cap", type=int, default=200)
        if name == "check":
            sp.add_argument("--name", choices=sorted(SWEEPS), required=True)
            sp.add_argument("--count", type=int, default=None)
    return ap


DEFAULT_DEPTHS = {"crit": 20, "ends": 10, "fpoints": 6, "vstar": 6, "pack": 8, "tangles": 3}


def _statuses(obj: Any) -> list[str]:
    if isinstance(obj, dict):
        out = [obj["status"]] if isinstance(obj.get("status"), str) else []
        for v in obj.values():
            out += _statuses(v)
        return out
    if isinstance(obj, list):
        return [s for v in obj for s in _statuses(v)]
    return []


def _text(obj: Any, indent: int = 0) -> str:
    pad = "  " * indent
    if isinstance(obj, dict):
        return "\n".join(f"{pad}{k}:" + ("\n" + _text(v, indent + 1) if isinstance(v, (dict, list)) else f" {v}")
                         for k, v in obj.items())
    if isinstance(obj, list):
        return "\n".join(_text(v, indent) if isinstance(v, (dict, list)) else f"{pad}- {v}" for v in obj)
    return f"{pad}{obj}"


def main(argv: Sequence[str] | None = None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    if args.schema:
        print(json.dumps(SCHEMAS, indent=2, sort_keys=True))
        return 0
    if not args.command:
        ap.print_usage(sys.stderr)
        return 1
    fn, _, needs_p = COMMANDS[args.command]
    try:
        p = None
        if hasattr(args, "depth"):
            args.depth_given = args.depth is not None
            if args.depth is None:
                args.depth = DEFAULT_DEPTHS.get(args.command, 10)
        if needs_p or (args.command == "tangles" and not args.graph):
            p = _presentation(args)
        result, dot = fn(args, p)
    except (TanglekitError, UsageError, ValueError) as err:
        payload = err.to_json() if isinstance(err, TanglekitError) else {"error": type(err).__name__, "message": str(err)}
        print(json.dumps(payload, indent=2, sort_keys=True, ensure_ascii=False), file=sys.stderr)
        return 1
    if args.format == "dot":
        if dot is None:
            print(f"{args.command} has no DOT output", file=sys.stderr)
            return 1
        print(dot)
        return 0
    envelope = {"command": args.command, "provenance": _provenance(args, p), "result": result}
    if args.format == "text":
        print(_text(envelope))
    else:
        print(json.dumps(envelope, indent=2, sort_keys=True, ensure_ascii=False, default=str))
    statuses = _statuses(result)
    unknown = sum(s.lower() == "unknown" for s in statuses)
    return 2 if statuses and 2 * unknown > len(statuses) else 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
