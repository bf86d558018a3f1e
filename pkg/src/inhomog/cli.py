"""Command-line front end: ``inhomog {dim,verify,render,generate,poincare}``."""

from __future__ import annotations

import argparse
import json
import math
import sys

from . import __version__
from .boxdim import CoverCount, dyadic_scales, fit_dimension, sweep
from .constructions import (
    BernoulliParams,
    CombParams,
    bernoulli_strip_count,
    comb_direct_count,
    comb_scales,
    interval_counts,
    kleinian_closed_form,
    parse_construction,
)
from .errors import InhomogError
from .hyperbolic import (
    GroupPresentation,
    MoebiusMap,
    axial_translation,
    load_group,
    poincare_exponent,
    poincare_series,
)
from .ifs_core import primitive_to_dict
from .orbital import orbital_to_depth
from .validation import DEFAULT_CELL_BUDGET

K_LIMIT = 22
DEFAULT_GROUP_DEPTH = {"cyclic": 200, "free": 8}
DEFAULT_K = {"ifs": (4, 10), "comb": (4, 12), "bernoulli": (6, 14), "kleinian": (3, 6)}


def parse_k_range(text: str):
    try:
        a, b = (int(v) for v in text.split(".."))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected <a>..<b>, got {text!r}") from None
    if not 0 <= a < b <= K_LIMIT:
        raise argparse.ArgumentTypeError(f"need 0 <= a < b <= {K_LIMIT}, got {text!r}")
    return a, b


def _bernoulli_params(con) -> BernoulliParams:
    return BernoulliParams(con.params["lambda"], con.params["source"])


def dimension_report(name: str, k_range=None, budget: int = DEFAULT_CELL_BUDGET) -> dict:
    """Counts, fitted slope and oracle gap for a named construction."""
    con = parse_construction(name)
    k_min, k_max = k_range or DEFAULT_K[con.kind]
    if con.kind == "comb":
        p = CombParams(con.params["n"])
        counts = [comb_direct_count(p, d) for d in comb_scales(p.n, k_min, k_max)]
    elif con.kind == "bernoulli":
        p = _bernoulli_params(con)
        counts = [CoverCount(d, bernoulli_strip_count(p, d), "strip")
                  for d in dyadic_scales(k_min, k_max)]
    elif con.kind == "kleinian":
        pts = kleinian_closed_form(con.params["M"], con.params["N"]).points
        counts = interval_counts(pts, dyadic_scales(k_min, k_max))
    else:
        counts = sweep(con.ifs, con.C, dyadic_scales(k_min, k_max), budget)
    fit = fit_dimension(counts)
    gap = None if con.oracle is None else abs(fit.slope - con.oracle)
    return {
        "construction": name,
        "method": counts[0].method,
        "slope": fit.slope,
        "per_step": list(fit.per_step_slopes),
        "r2": fit.r_squared,
        "scales": [c.delta for c in counts],
        "counts": [c.count for c in counts],
        "oracle": con.oracle,
        "gap": gap,
        "provenance": {
            "package": "inhomog",
            "version": __version__,
            "params": con.params,
            "k_range": [k_min, k_max],
            "budget": budget,
        },
    }


def _emit(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"


def cmd_dim(args) -> int:
    report = dimension_report(args.construction, args.k, args.budget)
    if args.format == "csv":
        rows = ["delta,count,method"]
        rows += [CoverCount(d, c, report["method"]).to_row()
                 for d, c in zip(report["scales"], report["counts"])]
        text = "\n".join(rows) + "\n"
    else:
        text = dumps(report)
    _emit(text, args.output)
    return 0


def cmd_verify(args) -> int:
    from .verify import format_table, run_suite

    results = run_suite(args.suite)
    print(format_table(results))
    failed = [r for r in results if not r.ok]
    print(f"{len(results) - len(failed)}/{len(results)} checks as expected")
    return 1 if failed else 0


def cmd_render(args) -> int:
    from .render import render_disk, render_items, scene_items

    con = parse_construction(args.construction)
    if con.kind == "kleinian":
        pts = kleinian_closed_form(con.params["M"], con.params["N"]).points
        render_disk(pts, args.output, size=min(args.width, args.height))
    else:
        items = scene_items(con.ifs, con.C, args.depth)
        render_items(items, args.output, args.width, args.height)
    return 0


def cmd_generate(args) -> int:
    con = parse_construction(args.construction)
    if con.kind == "kleinian":
        pts = kleinian_closed_form(con.params["M"], con.params["N"])
        if args.format == "json":
            text = dumps([{"re": z.real, "im": z.imag, "label": list(lab)}
                          for z, lab in zip(pts.points.tolist(), pts.labels)])
        else:
            text = pts.to_csv()
    else:
        approx = orbital_to_depth(con.ifs, con.C, args.depth, args.budget)
        if args.format == "json":
            text = dumps([{"word": list(pc.word), "primitive": primitive_to_dict(pc.primitive),
                           "lip": pc.lip} for pc in approx.pieces])
        else:
            text = approx.to_csv()
    _emit(text, args.output)
    return 0


def _group_from_args(args) -> GroupPresentation:
    if args.group:
        return load_group(args.group)
    if args.free is not None:
        a, b = math.cosh(args.free / 2), math.sinh(args.free / 2)
        return GroupPresentation((MoebiusMap(a + 0j, b + 0j), MoebiusMap(a + 0j, 1j * b)), "free")
    return GroupPresentation((axial_translation(args.alpha),))


def cmd_poincare(args) -> int:
    g = _group_from_args(args)
    depth = args.depth if args.depth is not None else DEFAULT_GROUP_DEPTH[g.kind]
    series_depth = args.series_depth if args.series_depth is not None else depth
    report = {
        "group": {"kind": g.kind, "generators": [m.to_dict() for m in g.generators]},
        "depth": depth,
        "series": {repr(s): poincare_series(g, s, series_depth) for s in args.s},
        "series_depth": series_depth,
        "exponent": poincare_exponent(g, depth).to_dict(),
        "provenance": {"package": "inhomog", "version": __version__},
    }
    _emit(dumps(report), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="inhomog", description=__doc__)
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("dim", help="box-counting dimension report")
    p.add_argument("construction")
    p.add_argument("--k", type=parse_k_range, default=None, help="scale exponents a..b")
    p.add_argument("--budget", type=int, default=DEFAULT_CELL_BUDGET)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.set_defaults(func=cmd_dim)

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", choices=("stopping", "moran", "garsia", "hyperbolic", "structure", "all"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("render", help="draw a construction to PNG or SVG")
    p.add_argument("construction")
    p.add_argument("-o", "--output", required=True)
    p.add_argument("--depth", type=int, default=5)
    p.add_argument("--width", type=int, default=800)
    p.add_argument("--height", type=int, default=800)
    p.set_defaults(func=cmd_render)

    p = sub.add_parser("generate", help="dump orbital pieces or orbit points")
    p.add_argument("construction")
    p.add_argument("--depth", type=int, default=4)
    p.add_argument("--budget", type=int, default=DEFAULT_CELL_BUDGET)
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--format", choices=("json", "csv"), default="csv")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("poincare", help="Poincaré series and exponent of a group")
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--alpha", type=float, default=2.0, help="cyclic group of the axial translation")
    grp.add_argument("--free", type=float, default=None, metavar="T",
                     help="free group on two perpendicular translations of length T")
    grp.add_argument("--group", default=None, help="JSON group description")
    p.add_argument("--depth", type=int, default=None,
                   help="word depth (default 200 for cyclic groups, 8 for free groups)")
    p.add_argument("--series-depth", type=int, default=None)
    p.add_argument("--s", type=float, nargs="+", default=[1.0])
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_poincare)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (InhomogError, OSError) as exc:
        print(f"inhomog: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
