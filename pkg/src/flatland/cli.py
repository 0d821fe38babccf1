"""Command line interface.

Exit status is 0 for success or a true answer, 1 for a false or refuted
answer and 2 for errors.  Surfaces are given as JSON files, ``-`` for stdin,
or ``builtin:`` URIs such as ``builtin:torus?v1=1,0&v2=0,2``.
"""

from __future__ import annotations

import argparse
import sys

from . import io
from .converge import (
    PrecheckFailed,
    certify_convergence,
    certify_convergence_marked,
    cluster_at_radius,
    compactness_probe,
)
from .develop import (
    Embedded,
    NonTermination,
    RadiusTooLarge,
    RegionTouchesPuncture,
    develop_disk,
    embedding_radius,
    embeds,
    er_compact,
    immerse,
    point_fiber,
)
from .geometry import Rect
from .predicates import MalformedSet, member, separating_certificate
from .surface import (
    InvalidPresentation,
    MarkAtPuncture,
    MarkedSurface,
    euler_characteristic,
    validate,
    vertex_links,
)
from .svg import render_svg
from .transform import (
    OrientationReversing,
    SingularMatrix,
    basepoint_change,
    fusion,
    gl2_act,
    is_affine_automorphism,
    iso_at_radius,
)

OK, FALSE, ERROR = 0, 1, 2


class UsageError(ValueError):
    pass


def _read(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    try:
        with open(path, "rb") as fh:
            return fh.read()
    except OSError as exc:
        raise UsageError("cannot read %s: %s" % (path, exc.strerror)) from None


def load_surface(arg: str, check: bool = True):
    if arg.startswith("builtin:"):
        return io.parse_builtin(arg)
    return io.parse_surface(_read(arg), check)


def _rat_arg(text: str, what: str):
    try:
        return io._rat(text, what)
    except io.ParseError as exc:
        raise UsageError(str(exc)) from None


def _emit(args, data, text: str, out_bytes: bytes | None = None) -> None:
    if out_bytes is not None and getattr(args, "out", None):
        with open(args.out, "wb") as fh:
            fh.write(out_bytes)
    if args.json:
        sys.stdout.write(io.dumps(data))
    else:
        sys.stdout.write(text.rstrip("\n") + "\n")


def _fmt(v) -> str:
    if isinstance(v, (list, tuple)):
        return "(" + ", ".join(_fmt(x) for x in v) + ")"
    if isinstance(v, io.mpq):
        return str(v)
    return str(io.encode(v))


# -- commands -------------------------------------------------------------------------


def cmd_validate(args) -> int:
    S = load_surface(args.surface, check=False)
    if not hasattr(S, "gluing_pairs"):
        _emit(args, {"ok": True, "violations": []}, "ok")
        return OK
    report = validate(S)
    data = {"ok": report.ok,
            "violations": [{"kind": v.kind, "where": v.where, "detail": v.detail} for v in report]}
    text = "ok" if report.ok else "\n".join("%s at %s %s" % (v.kind, _fmt(v.where), v.detail)
                                            for v in report)
    _emit(args, data, text)
    return OK if report.ok else FALSE


def cmd_links(args) -> int:
    S = load_surface(args.surface)
    links = vertex_links(S)
    data = {"vertex_classes": [{"corners": list(r.corners), "cone_order": r.cone_order}
                               for r in links],
            "euler_characteristic": euler_characteristic(S)}
    text = "\n".join("%s cone order %s" % (_fmt(r.corners), r.cone_order) for r in links)
    _emit(args, data, text + "\neuler characteristic %d" % data["euler_characteristic"])
    return OK


def cmd_develop(args) -> int:
    S = load_surface(args.surface)
    C = develop_disk(S, _rat_arg(args.r2, "r2"))
    if args.svg:
        fiber = point_fiber(immerse(C, S)).within(C.radius2) if args.fiber else ()
        with open(args.svg, "wb") as fh:
            fh.write(render_svg(C, fiber, title=getattr(S, "name", "")))
    _emit(args, io.complex_to_dict(C), "%d cells, %d singular marks %s" % (
        len(C.cells), len(C.singular_marks), _fmt(C.singular_marks)))
    return OK


def cmd_immerse(args) -> int:
    S = load_surface(args.surface)
    D = io.parse_disk(args.disk)
    im = immerse(D, S, order=args.order)
    data = io.immersion_to_dict(im)
    if im:
        text = "immerses: %d pieces on %d cells" % (len(im.pieces), len(D.cells))
    else:
        text = "no immersion: %s at %s" % (im.reason, _fmt(im.witness))
    _emit(args, data, text)
    return OK if im else FALSE


def cmd_embed(args) -> int:
    S = load_surface(args.surface)
    D = io.parse_disk(args.disk)
    res = embeds(D, S)
    data = io.embeds_to_dict(res)
    if isinstance(res, Embedded):
        text = "Embedded"
    elif data["verdict"] == "Overlap":
        text = "Overlap %s ~ %s" % (_fmt(res.x), _fmt(res.y))
    else:
        text = "NoImmersion: %s at %s" % (res.reason, _fmt(res.witness))
    _emit(args, data, text)
    return OK if res else FALSE


def _parse_region(text: str):
    try:
        pid, rest = text.split(":", 1)
        nums = rest.split(",")
        if len(nums) != 4:
            raise ValueError
        return int(pid), Rect.of(*(io._rat(x, "region") for x in nums))
    except io.ParseError:
        raise
    except ValueError:
        raise UsageError("region %r: expected pid:x0,y0,x1,y1" % text) from None


def cmd_er(args) -> int:
    S = load_surface(args.surface)
    if args.region:
        value = er_compact(S, [_parse_region(r) for r in args.region])
        _emit(args, {"er2": value}, "ER^2 min %s" % _fmt(value))
        return OK
    s = io.parse_point(args.point) if args.point else None
    er = embedding_radius(S, s)
    _emit(args, io.er_to_dict(er), "ER^2 %s (%s)" % (_fmt(er.value), ", ".join(er.event.kinds)))
    return OK


def cmd_predicate(args) -> int:
    S = load_surface(args.surface)
    try:
        data = io.json.loads(_read(args.set).decode("utf-8"))
    except ValueError as exc:
        raise io.ParseError("set file: %s" % exc) from None
    sub = io.set_from_dict(data)
    subject = MarkedSurface(S, io.parse_point(args.mark)) if args.mark else S
    m = member(sub, subject)
    _emit(args, io.membership_to_dict(m), "member" if m else "not a member")
    return OK if m else FALSE


def cmd_separate(args) -> int:
    S, T = load_surface(args.first), load_surface(args.second)
    cert = separating_certificate(S, T, _rat_arg(args.r2_max, "r2-max"),
                                  _rat_arg(args.step, "step"))
    data = io.certificate_to_dict(cert)
    if cert:
        text = "separated (%s) at %s" % (cert.reason, _fmt(cert.point))
    else:
        text = "not separated up to r^2 = %s" % _fmt(cert.radius2)
    _emit(args, data, text)
    return OK if cert else FALSE


def _write_surface(args, S) -> int:
    text = io.serialize_surface(S)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    sys.stdout.write(text)
    return OK


def cmd_act(args) -> int:
    return _write_surface(args, gl2_act(io.parse_matrix(args.matrix), load_surface(args.surface)))


def cmd_rebase(args) -> int:
    S = load_surface(args.surface)
    return _write_surface(args, basepoint_change(MarkedSurface(S, io.parse_point(args.point))))


def cmd_fuse(args) -> int:
    if len(args.disk) != 2:
        raise UsageError("fuse needs exactly two --disk arguments")
    F = fusion(io.parse_disk(args.disk[0]), io.parse_disk(args.disk[1]))
    if args.svg:
        with open(args.svg, "wb") as fh:
            fh.write(render_svg(F, title="fusion"))
    _emit(args, io.complex_to_dict(F), "%d cells%s" % (
        len(F.cells), ", planar" if F.region is not None else ""))
    return OK


def cmd_iso(args) -> int:
    S = load_surface(args.first)
    r2 = _rat_arg(args.r2, "r2")
    if args.matrix:
        s = io.parse_point(args.point) if args.point else S.basepoint
        v = is_affine_automorphism(S, io.parse_matrix(args.matrix), s, r2)
        _emit(args, io.automorphism_to_dict(v), v.name + (
            "" if v else " (%s at %s)" % (v.reason, _fmt(v.witness))))
        return OK if v else FALSE
    if not args.second:
        raise UsageError("iso needs a second surface or --matrix")
    res = iso_at_radius(S, load_surface(args.second), r2)
    _emit(args, io.iso_to_dict(res), "isomorphic at r^2 = %s" % _fmt(r2) if res else
          "not isomorphic (%s at %s)" % (res.reason, _fmt(res.witness)))
    return OK if res else FALSE


def _range(text: str):
    try:
        a, b = (int(x) for x in text.split(","))
    except ValueError:
        raise UsageError("range %r: expected a,b" % text) from None
    if not 1 <= a <= b:
        raise UsageError("range must satisfy 1 <= a <= b")
    return a, b


def cmd_converge(args) -> int:
    limit = load_surface(args.limit)
    n_range = _range(args.range)
    r2, delta = _rat_arg(args.r2, "r2"), _rat_arg(args.delta, "delta")
    if delta <= 0:
        raise UsageError("delta must be positive")
    if args.mark:
        limit = MarkedSurface(limit, io.parse_point(args.mark))
    seq = io.parse_sequence(args.seq, limit)
    if io.is_marked_sequence(seq):
        if not isinstance(limit, MarkedSurface):
            raise UsageError("a marked sequence needs --mark for the limit")
        rep = certify_convergence_marked(seq, limit, r2, delta, n_range, args.jobs)
    else:
        if isinstance(limit, MarkedSurface):
            limit = limit.surface
        rep = certify_convergence(seq, limit, r2, delta, n_range, args.jobs)
    if rep.verdict == "CertifiedAtRadius":
        text = "CertifiedAtRadius N=%d" % rep.threshold
    elif rep.verdict == "RefutedAtRadius":
        text = "RefutedAtRadius n=%d witness %s" % (rep.refuted_at, _fmt(rep.witness))
    else:
        text = "Inconclusive"
    _emit(args, io.convergence_to_dict(rep), text)
    return OK if rep else FALSE


def cmd_cluster(args) -> int:
    r2 = _rat_arg(args.r2, "r2")
    if args.seq:
        seq = io.parse_sequence(args.seq)
        p = compactness_probe(seq, _rat_arg(args.eps2, "eps2"), r2, args.count, jobs=args.jobs)
        _emit(args, io.probe_to_dict(p), "largest cluster %s" % _fmt(p.largest))
        return OK
    if not args.surfaces:
        raise UsageError("cluster needs surfaces or --seq")
    rep = cluster_at_radius([load_surface(a) for a in args.surfaces], r2, args.jobs)
    _emit(args, io.cluster_to_dict(rep), "\n".join(_fmt(c) for c in rep.clusters))
    return OK


def cmd_render(args) -> int:
    if args.disk:
        C, fiber, title = io.parse_disk(args.disk), (), ""
    else:
        if not (args.surface and args.r2):
            raise UsageError("render needs --disk, or a surface with --r2")
        S = load_surface(args.surface)
        C = develop_disk(S, _rat_arg(args.r2, "r2"))
        fiber = point_fiber(immerse(C, S)).within(C.radius2) if args.fiber else ()
        title = getattr(S, "name", "")
    svg = render_svg(C, fiber, title=title)
    if args.out:
        with open(args.out, "wb") as fh:
            fh.write(svg)
    if args.json:
        sys.stdout.write(io.dumps({"cells": len(C.cells), "marks": len(C.singular_marks),
                                   "out": args.out}))
    elif not args.out:
        sys.stdout.buffer.write(svg)
    return OK


# -- parser ------------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--json", action="store_true", help="machine-readable output")
    p = argparse.ArgumentParser(
        prog="flatland",
        description="Exact computations on translation surfaces given as polygon gluings.",
        epilog="Exit status: 0 success/true, 1 false/refuted, 2 error.  "
               "FLATLAND_CELL_CAP bounds the number of developed cells.",
    )
    sub = p.add_subparsers(dest="command", required=True, metavar="command")

    def add(name, fn, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(fn=fn)
        return sp

    surface_help = "surface JSON file, '-' for stdin, or builtin: URI"

    sp = add("validate", cmd_validate, "check a presentation and list every violation")
    sp.add_argument("surface", help=surface_help)

    sp = add("links", cmd_links, "vertex classes with their cone orders")
    sp.add_argument("surface", help=surface_help)

    sp = add("develop", cmd_develop, "develop the closed r-disk about the basepoint")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--r2", required=True, help="squared radius, p/q")
    sp.add_argument("--svg", help="also write an SVG picture here")
    sp.add_argument("--fiber", action="store_true", help="mark basepoint fiber points in the SVG")

    disk_help = "square:h, rects:x0,y0,x1,y1;... or a complex JSON file"
    sp = add("immerse", cmd_immerse, "immerse a disk complex into a surface")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--disk", required=True, help=disk_help)
    sp.add_argument("--order", choices=("forward", "reverse"), default="forward")

    sp = add("embed", cmd_embed, "decide whether a disk complex embeds")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--disk", required=True, help=disk_help)

    sp = add("er", cmd_er, "squared embedding radius at a point or over regions")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--point", help="pid:x,y (default: the basepoint)")
    sp.add_argument("--region", action="append", help="pid:x0,y0,x1,y1; repeatable")

    sp = add("predicate", cmd_predicate, "membership in a subbasis set")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--set", required=True, help="subbasis set JSON file")
    sp.add_argument("--mark", help="pid:x,y, for marked sets")

    sp = add("separate", cmd_separate, "find disjoint subbasis sets around two surfaces")
    sp.add_argument("first", help=surface_help)
    sp.add_argument("second", help=surface_help)
    sp.add_argument("--r2-max", required=True, help="largest squared half-width to try")
    sp.add_argument("--step", default="1/4", help="half-width increment (default 1/4)")

    sp = add("act", cmd_act, "apply a matrix of positive determinant to every chart")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--matrix", required=True, help="a,b,c,d for [[a,b],[c,d]]")
    sp.add_argument("--out", help="also write the surface JSON here")

    sp = add("rebase", cmd_rebase, "move the basepoint")
    sp.add_argument("surface", help=surface_help)
    sp.add_argument("--point", required=True, help="pid:x,y")
    sp.add_argument("--out", help="also write the surface JSON here")

    sp = add("fuse", cmd_fuse, "fusion of two planar rectangle complexes")
    sp.add_argument("--disk", action="append", required=True, help=disk_help + "; give twice")
    sp.add_argument("--svg", help="also write an SVG picture here")

    sp = add("iso", cmd_iso, "isomorphism of developed r-disks, or an affine automorphism check")
    sp.add_argument("first", help=surface_help)
    sp.add_argument("second", nargs="?", help=surface_help)
    sp.add_argument("--r2", "--radius2", dest="r2", required=True, help="squared radius")
    sp.add_argument("--matrix", help="check an affine automorphism with this derivative")
    sp.add_argument("--point", help="pid:x,y sent to the basepoint (with --matrix)")

    sp = add("converge", cmd_converge, "finite-radius convergence check of a sequence")
    sp.add_argument("--limit", required=True, help=surface_help)
    sp.add_argument("--seq", required=True,
                    help="builtin:tall-torus, alternating, torus-n, staircase, constant, "
                         "marked-shift or marked-alternating")
    sp.add_argument("--r2", required=True)
    sp.add_argument("--delta", required=True)
    sp.add_argument("--range", required=True, help="a,b")
    sp.add_argument("--mark", help="pid:x,y, mark of the limit for marked sequences")
    sp.add_argument("--jobs", type=int, default=1)

    sp = add("cluster", cmd_cluster, "cluster surfaces by isomorphism at a radius")
    sp.add_argument("surfaces", nargs="*", help=surface_help)
    sp.add_argument("--r2", required=True)
    sp.add_argument("--seq", help="run a compactness probe on this sequence instead")
    sp.add_argument("--count", type=int, default=20)
    sp.add_argument("--eps2", default="1/16")
    sp.add_argument("--jobs", type=int, default=1)

    sp = add("render", cmd_render, "SVG of a developed disk or a disk complex")
    sp.add_argument("surface", nargs="?", help=surface_help)
    sp.add_argument("--r2")
    sp.add_argument("--disk", help=disk_help)
    sp.add_argument("--fiber", action="store_true")
    sp.add_argument("--out")
    return p


_ERRORS = (io.ParseError, io.ValidationError, UsageError, NonTermination, RadiusTooLarge,
           RegionTouchesPuncture, MalformedSet, MarkAtPuncture, InvalidPresentation,
           SingularMatrix, OrientationReversing, PrecheckFailed, NotImplementedError,
           ValueError, TypeError, ZeroDivisionError)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args)
    except _ERRORS as exc:
        sys.stderr.write("flatland %s: %s: %s\n" % (args.command, type(exc).__name__, exc))
        return ERROR


if __name__ == "__main__":
    sys.exit(main())
