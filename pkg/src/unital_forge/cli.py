"""Command-line front end: ``unital-forge <command> [action] [options]``.

Exit status: 0 success, 1 mathematical falsification (or a negative verdict
on a checked property), 2 usage error, 3 search budget exhausted.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

import numpy as np

from . import baer, caps, kernels, pipeline, slabels, unital
from .cache import get_abb
from .fields import FieldError, field_for_q, parse_poly_spec
from .io import FormatError, format_labeled, format_points, parse_labeled, parse_points
from .projective import ProjectiveSpace
from .report import SCHEMA, canonical_json, point_str, points_digest, render_text

EXIT_OK, EXIT_FALSIFIED, EXIT_USAGE, EXIT_BUDGET = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _common() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("global options")
    g.add_argument("--q", type=int, default=3, help="order of the subfield F_q (default 3)")
    g.add_argument("--poly", help="field polynomials 'f/g', coefficients leading first")
    g.add_argument("--cache-dir", help="cache directory (default $UNITAL_FORGE_CACHE)")
    g.add_argument("--no-cache", action="store_true", help="always rebuild the ABB model")
    g.add_argument("--threads", type=int, help="worker threads for the compiled kernels")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--format", choices=("json", "text"), default="json")
    g.add_argument("--output", help="also write the main artifact to this file")
    g.add_argument("-v", "--verbose", action="store_true")
    return p


def _source(p: argparse.ArgumentParser) -> None:
    p.add_argument("--standard", choices=("hermitian", "bm-eq", "bm-tits"), help="built-in unital")
    p.add_argument("--vertex", type=int, default=0, help="index of the BM vertex on T minus A")
    p.add_argument("--input", help="point-set file of a unital")


def build_parser() -> argparse.ArgumentParser:
    common = _common()
    ap = argparse.ArgumentParser(prog="unital-forge", description="Unitals, Baer secants and ovoidal BM reconstruction.")
    sub = ap.add_subparsers(dest="command", required=True)

    f = sub.add_parser("field", parents=[common], help="describe the field tower")
    f.add_argument("--element", help="an F_{q^2} element to describe")

    g = sub.add_parser("geom", parents=[common], help="sizes of PG(n, q) or PG(2, q^2)")
    g.add_argument("--n", type=int, default=2)
    g.add_argument("--big", action="store_true", help="use F_{q^2} instead of F_q")

    a = sub.add_parser("abb", parents=[common], help="dump the ABB model")
    a.add_argument("action", nargs="?", choices=("dump", "store"), default="dump")

    b = sub.add_parser("baer", parents=[common], help="Baer sublines and subplanes")
    b.add_argument("action", choices=("subline", "check", "subplane"))
    b.add_argument("--points", nargs="+", help="plane points as c0:c1:c2")
    b.add_argument("--input", help="point-set file")

    u = sub.add_parser("unital", parents=[common], help="construct and interrogate unitals")
    u.add_argument("action", choices=("hermitian", "bm", "load", "census", "onan", "classical"))
    _source(u)
    u.add_argument("--ovoid", choices=("elliptic-quadric", "suzuki-tits"), default="elliptic-quadric")
    u.add_argument("--point", default="auto", help="c0:c1:c2, 'auto' or 'all'")
    u.add_argument("--limit", type=int, default=20, help="O'Nan configurations to list")

    c = sub.add_parser("cap", parents=[common], help="caps and ovoids of PG(3, q)")
    c.add_argument("action", choices=("check", "extend", "ovoid"))
    c.add_argument("--input", help="point-set file in PG(3, q)")
    c.add_argument("--kind", choices=("elliptic-quadric", "suzuki-tits"), default="elliptic-quadric")
    c.add_argument("--max-nodes", type=int, default=2_000_000)
    c.add_argument("--max-results", type=int, default=10_000)

    s = sub.add_parser("slabels", parents=[common], help="labeled sets S(U)")
    s.add_argument("action", choices=("build", "check", "classify"))
    _source(s)
    s.add_argument("--point", default="auto")
    s.add_argument("--k", type=int)

    v = sub.add_parser("verify", parents=[common], help="reconstruction pipeline")
    v.add_argument("action", choices=("reconstruct", "corollary", "advisor", "recheck"))
    _source(v)
    v.add_argument("--point", default="auto")
    v.add_argument("--eps", type=int, default=0)
    v.add_argument("--certificate", help="certificate file for 'recheck'")
    v.add_argument("--max-nodes", type=int, default=2_000_000)
    return ap


# ---------------------------------------------------------------- helpers


def _ctx(args):
    polys = parse_poly_spec(args.poly) if args.poly else None
    return field_for_q(args.q, polys)


def _abb(args, ctx):
    return get_abb(ctx, args.cache_dir, use_cache=not args.no_cache)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as e:
        raise UsageError(f"cannot read {path}: {e}") from e


def _unital(args, ctx, abb) -> unital.Unital:
    if args.input:
        pts = parse_points(_read(args.input), ctx, abb.plane)
        return unital.validate_unital(ctx, abb.plane, pts, "file", {"source": Path(args.input).name})
    std = args.standard or "hermitian"
    if std == "hermitian":
        return unital.hermitian_unital(ctx, abb.plane)
    kind = "elliptic-quadric" if std == "bm-eq" else "suzuki-tits"
    if not 0 <= args.vertex < ctx.q:
        raise UsageError(f"--vertex must lie in 0..{ctx.q - 1}")
    return unital.standard_bm(abb, kind, args.vertex)


def _point(args, ctx, U) -> int:
    spec = args.point
    if spec in ("auto", "pinf"):
        sp = U.meta.get("special_point")
        if sp is not None:
            return int(sp)
        if spec == "pinf":
            return int(U.plane.ids([0, 0, 1]))
        return int(U.points[0])
    try:
        pid = int(U.plane.ids([[ctx.from_str(c.strip()) for c in spec.split(":")]])[0])
    except (FieldError, ValueError) as e:
        raise UsageError(f"bad point {spec!r}: {e}") from e
    return pid


def _emit(args, obj) -> None:
    text = canonical_json(obj) if args.format == "json" else render_text(obj)
    sys.stdout.write(text + "\n")


def _write(args, text: str) -> None:
    if args.output:
        Path(args.output).write_text(text)


# ---------------------------------------------------------------- commands


def cmd_field(args, ctx):
    out = {"q": ctx.q, "q2": ctx.q2, **ctx.key(), "omega": ctx.to_str(ctx.omega)}
    if args.element:
        x = ctx.from_str(args.element)
        out["element"] = {
            "value": args.element,
            "frobenius": ctx.to_str(int(ctx.frobenius(x))),
            "norm": ctx.to_str(int(ctx.norm(x)), "small"),
            "trace": ctx.to_str(int(ctx.trace(x)), "small"),
            "in_subfield": bool(ctx.in_subfield(x)),
        }
    _emit(args, out)
    return EXIT_OK


def cmd_geom(args, ctx):
    F = ctx.big if args.big else ctx.small
    sp = ProjectiveSpace(F, args.n)
    out = {"space": repr(sp), "points": sp.N}
    if args.n <= 3 and sp.N <= 5000:
        out["lines"] = len(sp.line_pts)
        out["points_per_line"] = F.order + 1
    _emit(args, out)
    return EXIT_OK


def cmd_abb(args, ctx):
    from .cache import abb_hash, store_abb

    abb = _abb(args, ctx)
    out = {
        "q": ctx.q,
        "field": ctx.key(),
        "plane_points": abb.plane.N,
        "space_points": abb.space.N,
        "content_sha256": abb_hash(abb),
        "T": [point_str(ctx, abb.space.coords[x], "small") for x in abb.T],
        "spread": {
            point_str(ctx, abb.plane.coords[pid]): [point_str(ctx, abb.space.coords[x], "small") for x in line]
            for pid, line in zip(abb.ell_inf, abb.spread)
        },
    }
    if args.action == "store":
        out["path"] = str(store_abb(abb, args.cache_dir))
    _emit(args, out)
    return EXIT_OK


def cmd_baer(args, ctx):
    abb = _abb(args, ctx)
    pl = abb.plane
    if args.input:
        pts = parse_points(_read(args.input), ctx, pl)
    elif args.points:
        pts = parse_points("\n".join(args.points), ctx, pl)
    else:
        raise UsageError("give --points or --input")
    if args.action == "subline":
        if len(pts) != 3:
            raise UsageError("subline needs exactly three points")
        B = baer.baer_subline_through(pl, *map(int, pts))
        _write(args, format_points(ctx, pl, B))
        _emit(args, {"subline": [point_str(ctx, pl.coords[x]) for x in B]})
        return EXIT_OK
    if args.action == "check":
        ok = baer.is_baer_subline(pl, pts)
        _emit(args, {"size": len(np.unique(pts)), "baer_subline": ok})
        return EXIT_OK if ok else EXIT_FALSIFIED
    q = ctx.q
    if len(pts) != 2 * q + 1:
        raise UsageError("subplane needs the 2q+1 points of two sublines sharing one point")
    # split into two lines through the shared point
    pts = np.unique(pts)
    best = None
    for P in pts:
        rest = pts[pts != P]
        groups: dict[int, list[int]] = {}
        for x in rest:
            groups.setdefault(pl.line_of(int(P), int(x)), []).append(int(x))
        if len(groups) == 2 and all(len(g) == q for g in groups.values()):
            best = [sorted(g + [int(P)]) for g in groups.values()]
            break
    if best is None:
        raise UsageError("points are not two sublines through a common point")
    sub = baer.baer_subplane_through(pl, best[0], best[1])
    _write(args, format_points(ctx, pl, sub))
    _emit(args, {"subplane": [point_str(ctx, pl.coords[x]) for x in sub]})
    return EXIT_OK


def _unital_summary(U) -> dict:
    return {
        "q": U.q,
        "provenance": U.provenance,
        "sizes": {"points": U.size, "secant_lines": len(U.secant_lines()), "tangent_lines": int((U.hits == 1).sum())},
        "points_sha256": points_digest(U.ctx, U.plane, U.points),
    }


def cmd_unital(args, ctx):
    abb = _abb(args, ctx)
    if args.action == "hermitian":
        args.standard = "hermitian"
    elif args.action == "bm":
        args.standard = "bm-eq" if args.ovoid == "elliptic-quadric" else "bm-tits"
    U = _unital(args, ctx, abb)
    out = {"schema": SCHEMA, "kind": "unital", **_unital_summary(U)}
    if args.action in ("hermitian", "bm", "load"):
        if "special_point" in U.meta:
            out["special_point"] = point_str(ctx, abb.plane.coords[U.meta["special_point"]])
        _write(args, format_points(ctx, abb.plane, U.points, comment=f"unital q={ctx.q} {U.provenance}"))
    elif args.action == "census":
        pts = U.points if args.point == "all" else [_point(args, ctx, U)]
        out["census"] = {point_str(ctx, abb.plane.coords[P]): unital.secant_census(U, int(P)).count for P in pts}
    elif args.action == "onan":
        P = _point(args, ctx, U)
        r = unital.onan_search(U, P, limit=args.limit)
        out["point"] = point_str(ctx, abb.plane.coords[P])
        out["onan_count"] = r["count"]
        out["configurations"] = [
            {"points": [point_str(ctx, abb.plane.coords[x]) for x in c["points"]]} for c in r["configurations"]
        ]
    else:
        H = unital.is_classical(U)
        out["classical"] = None if H is None else [[ctx.to_str(int(x)) for x in row] for row in H]
    _emit(args, out)
    return EXIT_OK


def cmd_cap(args, ctx):
    space = caps.pg3(ctx)
    if args.action == "ovoid":
        O = caps.standard_ovoid(args.kind, ctx, space).points
        _write(args, format_points(ctx, space, O, "small", comment=f"{args.kind} ovoid q={ctx.q}"))
        _emit(args, {"kind": args.kind, "size": len(O), "is_cap": caps.is_cap(space, O)[0],
                     "points": [point_str(ctx, space.coords[x], "small") for x in O]})
        return EXIT_OK
    if not args.input:
        raise UsageError("--input is required")
    K = parse_points(_read(args.input), ctx, space, "small")
    if args.action == "check":
        ok, wit = caps.is_cap(space, K)
        out = {"q": ctx.q, "size": len(np.unique(K)), "is_cap": ok,
               "violation": None if ok else [point_str(ctx, space.coords[x], "small") for x in wit]}
        if ok:
            out["complete"] = caps.is_complete(space, K)
        _emit(args, out)
        return EXIT_OK if ok else EXIT_FALSIFIED
    try:
        ext = caps.extend_cap(space, K, args.max_nodes, args.max_results)
    except caps.CapError as e:
        _emit(args, {"error": str(e)})
        return EXIT_FALSIFIED
    cert = caps.cap_certificate(space, K, ext)
    cert["completions"]["sets"] = [[point_str(ctx, space.coords[x], "small") for x in s] for s in ext.completions]
    cert["schema"] = SCHEMA
    _emit(args, cert)
    if ext.above_bound and not ext.unique:
        return EXIT_FALSIFIED
    return EXIT_OK


def cmd_slabels(args, ctx):
    if args.action == "build":
        abb = _abb(args, ctx)
        U = _unital(args, ctx, abb)
        P = _point(args, ctx, U)
        V, _ = pipeline.normalize_frame(U, P)
        c = unital.secant_census(V, abb.p_inf)
        L = [abb.transfer_subline(V.trace(l))["subspace"] for l in c.baer_secants]
        S = slabels.build_slabels(abb, L, args.k)
        text = format_labeled(ctx, S)
        _write(args, text)
        if args.format == "text":
            sys.stdout.write(text)
        else:
            _emit(args, {"q": S.q, "k": S.k, "size": S.size, "labels": sorted(set(S.labels.tolist())),
                         "points": [[int(x), int(y), int(v)] for (x, y), v in zip(S.points, S.labels)]})
        return EXIT_OK
    if not args.input:
        raise UsageError("--input is required")
    S = parse_labeled(_read(args.input), ctx)
    slabels.register_field(ctx.small)
    if args.k is not None:
        S.k = args.k
    if args.action == "check":
        ok, wit = slabels.check_closure(S)
        _emit(args, {"closure": ok, "witness": None if wit is None else {"Q": wit[0], "P1": wit[1], "P2": wit[2], "label": wit[3]}})
        return EXIT_OK if ok else EXIT_FALSIFIED
    rep = slabels.classify(S, warn=False)
    _emit(args, rep.to_dict())
    return EXIT_OK


def cmd_verify(args, ctx):
    if args.action == "advisor":
        _emit(args, pipeline.table1_advisor(ctx.q, args.eps))
        return EXIT_OK
    if args.action == "recheck":
        import json

        if not args.certificate:
            raise UsageError("--certificate is required")
        res = pipeline.recheck_certificate(json.loads(_read(args.certificate)))
        _emit(args, res)
        return EXIT_OK if res["ok"] else EXIT_FALSIFIED
    abb = _abb(args, ctx)
    U = _unital(args, ctx, abb)
    P = _point(args, ctx, U)
    if args.action == "reconstruct":
        cert = pipeline.reconstruct_bm(U, P, args.eps, args.seed, abb=abb, max_nodes=args.max_nodes)
        _write(args, canonical_json(cert) + "\n")
        _emit(args, cert)
        return EXIT_OK if cert["status"] == "ok" else EXIT_FALSIFIED
    res = pipeline.corollary_check(U, P, args.eps)
    _emit(args, res)
    return EXIT_FALSIFIED if res["verdict"] == "falsified" else EXIT_OK


COMMANDS = {
    "field": cmd_field,
    "geom": cmd_geom,
    "abb": cmd_abb,
    "baer": cmd_baer,
    "unital": cmd_unital,
    "cap": cmd_cap,
    "slabels": cmd_slabels,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        ctx = _ctx(args)
        kernels.set_threads(args.threads)
        return COMMANDS[args.command](args, ctx)
    except (FieldError, UsageError, FormatError) as e:
        sys.stderr.write(f"error: {e}\n")
        return EXIT_USAGE
    except (unital.UnitalError, unital.BMError, baer.BaerError, slabels.SlabelError) as e:
        sys.stderr.write(f"falsified: {e}\n")
        return EXIT_FALSIFIED
    except caps.BudgetExhausted as e:
        sys.stderr.write(f"budget exhausted: {e}\n")
        return EXIT_BUDGET


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
