"""JSON formats, builtin URIs and sequence specs.

Rationals are always written as ``"p/q"`` strings.  Every object written here
is emitted with sorted keys so that equal inputs give byte-identical text.
"""

from __future__ import annotations

import json
import math
import re
from urllib.parse import parse_qsl, urlsplit

from gmpy2 import mpq

from . import families
from .converge import ClusterReport, ConvergenceReport, ProbeReport, SurfaceSequence
from .develop import (
    BasepointFiber,
    Cell,
    DevelopedComplex,
    Embedded,
    EmbeddingRadius,
    NoImmersion,
    Overlap,
)
from .geometry import Mat2, Rect, Vec, format_rational, rational, rect_union_normalize
from .predicates import (
    Certificate,
    Disjoint,
    EMinus,
    EmbedsSet,
    EPlus,
    Immerses,
    Membership,
    Minus,
    NotImmerses,
    NotSeparatedUpTo,
    Plus,
    Region,
)
from .surface import MarkedSurface, Plane, SurfacePresentation, TranslationSurface, validate
from .transform import AutomorphismVerdict, IsoResult


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


# -- rationals and points ----------------------------------------------------------


def _rat(value, where: str) -> mpq:
    if isinstance(value, bool) or isinstance(value, float):
        raise ParseError("%s: expected a rational string like \"p/q\", got %r" % (where, value))
    if not isinstance(value, (str, int)):
        raise ParseError("%s: expected a rational, got %r" % (where, value))
    try:
        return rational(value)
    except ZeroDivisionError:
        raise ParseError("%s: zero denominator in %r" % (where, value)) from None
    except (ValueError, TypeError):
        raise ParseError("%s: not a rational: %r" % (where, value)) from None


def _vec(value, where: str) -> Vec:
    if not isinstance(value, (list, tuple)) or len(value) != 2:
        raise ParseError("%s: expected a pair of rationals" % where)
    return Vec(_rat(value[0], where + "[0]"), _rat(value[1], where + "[1]"))


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ParseError("%s: expected an integer, got %r" % (where, value))
    return value


def rat_text(q) -> str:
    return format_rational(rational(q))


def encode(obj):
    """Plain JSON data for rationals, vectors, tuples and dataclass-like values."""
    if isinstance(obj, mpq):
        return format_rational(obj)
    if isinstance(obj, float):
        if math.isinf(obj):
            return "inf"
        raise TypeError("float %r in exact output" % obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, dict):
        return {str(encode(k)) if not isinstance(k, str) else k: encode(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [encode(v) for v in obj]
    raise TypeError("cannot encode %r" % (obj,))


def dumps(data) -> str:
    return json.dumps(encode(data), sort_keys=True, indent=2) + "\n"


# -- surfaces --------------------------------------------------------------------------


def parse_point(text: str):
    """``"pid:x,y"`` to ``(pid, Vec)``."""
    try:
        pid, xy = text.split(":", 1)
        x, y = xy.split(",")
        return int(pid), Vec(_rat(x, "point"), _rat(y, "point"))
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError("point %r: expected pid:x,y" % text) from None


def parse_builtin(uri: str):
    """``builtin:name?key=value&...`` to a surface."""
    parts = urlsplit(uri)
    if parts.scheme != "builtin":
        raise ParseError("expected a builtin: URI, got %r" % uri)
    name = parts.path
    params = dict(parse_qsl(parts.query, keep_blank_values=True))
    try:
        for key in ("v1", "v2"):
            if key in params:
                params[key] = families.vec_param(params[key])
        for key in ("h", "v"):
            if key in params:
                params[key] = families.parse_permutation(params[key])
        return families.builtin(name, **params)
    except families.UnknownName:
        raise ParseError("unknown builtin %r" % name) from None
    except ZeroDivisionError:
        raise ParseError("%s: zero denominator" % uri) from None
    except families.BadParams as exc:
        raise ParseError("%s: %s" % (uri, exc)) from None
    except (ValueError, TypeError) as exc:
        if isinstance(exc, ValidationError):
            raise
        if type(exc).__name__ == "InvalidPresentation":
            raise ValidationError(str(exc)) from None
        raise ParseError("%s: bad parameters (%s)" % (uri, exc)) from None


def surface_from_dict(data, check: bool = True) -> SurfacePresentation:
    if not isinstance(data, dict):
        raise ParseError("surface: expected an object")
    for key in ("polygons", "gluings", "basepoint"):
        if key not in data:
            raise ParseError("surface: missing field %r" % key)
    polys = {}
    if not isinstance(data["polygons"], list):
        raise ParseError("polygons: expected a list")
    for i, p in enumerate(data["polygons"]):
        where = "polygons[%d]" % i
        if not isinstance(p, dict) or "id" not in p or "vertices" not in p:
            raise ParseError("%s: expected {\"id\", \"vertices\"}" % where)
        pid = _int(p["id"], where + ".id")
        if pid in polys:
            raise ParseError("%s.id: duplicate polygon id %d" % (where, pid))
        if not isinstance(p["vertices"], list):
            raise ParseError("%s.vertices: expected a list" % where)
        polys[pid] = tuple(_vec(v, "%s.vertices[%d]" % (where, j))
                           for j, v in enumerate(p["vertices"]))
    gluings = []
    if not isinstance(data["gluings"], list):
        raise ParseError("gluings: expected a list")
    for i, g in enumerate(data["gluings"]):
        where = "gluings[%d]" % i
        if not isinstance(g, dict) or "left" not in g or "right" not in g:
            raise ParseError("%s: expected {\"left\", \"right\"}" % where)
        refs = []
        for side in ("left", "right"):
            ref = g[side]
            if not isinstance(ref, list) or len(ref) != 2:
                raise ParseError("%s.%s: expected [polygon, edge]" % (where, side))
            refs.append((_int(ref[0], "%s.%s[0]" % (where, side)),
                         _int(ref[1], "%s.%s[1]" % (where, side))))
        gluings.append(tuple(refs))
    bp = data["basepoint"]
    if not isinstance(bp, dict) or "polygon" not in bp or "coords" not in bp:
        raise ParseError("basepoint: expected {\"polygon\", \"coords\"}")
    base = (_int(bp["polygon"], "basepoint.polygon"), _vec(bp["coords"], "basepoint.coords"))
    name = data.get("name", "")
    if not isinstance(name, str):
        raise ParseError("name: expected a string")
    S = SurfacePresentation(polys, gluings, base, name)
    if check:
        report = validate(S)
        if not report.ok:
            raise ValidationError(
                "; ".join("%s at %s" % (v.kind, v.where) for v in report), report)
    return S


def parse_surface(source, check: bool = True):
    """Bytes or text holding surface JSON or a ``builtin:`` URI."""
    if isinstance(source, bytes):
        try:
            source = source.decode("utf-8")
        except UnicodeDecodeError as exc:
            raise ParseError("input is not UTF-8: %s" % exc) from None
    text = source.strip()
    if text.startswith("builtin:"):
        return parse_builtin(text)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError("line %d column %d: %s" % (exc.lineno, exc.colno, exc.msg)) from None
    return surface_from_dict(data, check)


def surface_to_dict(S) -> dict:
    if isinstance(S, Plane) or not isinstance(S, SurfacePresentation):
        raise TypeError("only finite presentations serialize; %r does not" % (S,))
    pid, pt = S.basepoint
    return {
        "polygons": [{"id": k, "vertices": [list(v) for v in vs]}
                     for k, vs in sorted(S.polygons.items())],
        "gluings": [{"left": list(a), "right": list(b)} for a, b in S.gluings()],
        "basepoint": {"polygon": pid, "coords": list(pt)},
        "name": S.name,
    }


def serialize_surface(S) -> str:
    return dumps(surface_to_dict(S))


# -- complexes ---------------------------------------------------------------------


_RATIONAL_TEXT = re.compile(r"-?\d+/\d+")


def _decode_id(v):
    # ids are written with rationals as "p/q" strings
    if isinstance(v, list):
        return tuple(_decode_id(x) for x in v)
    if isinstance(v, str) and _RATIONAL_TEXT.fullmatch(v):
        return _rat(v, "id")
    return v


def complex_to_dict(C: DevelopedComplex) -> dict:
    data = {
        "name": C.name,
        "basepoint_cell": C.basepoint_cell,
        "is_disk": C.is_disk,
        "radius2": C.radius2,
        "singular_marks": list(C.singular_marks),
        "cells": [
            {"id": c.id, "source": c.source, "placement": c.placement,
             "vertices": list(c.vertices), "marks": list(c.marks),
             "adjacent": [{"cell": o, "segment": list(s)} for o, s in C.neighbors(c.id)]}
            for c in C.cells
        ],
    }
    if C.region is not None:
        data["rects"] = [[r.min, r.max] for r in C.region.rects]
    return data


def complex_from_dict(data) -> DevelopedComplex:
    """Inverse of :func:`complex_to_dict`; also accepts ``{"rects": [...]}``
    (and ``{"square": h}``) for rectangle disks."""
    if not isinstance(data, dict):
        raise ParseError("complex: expected an object")
    if "square" in data:
        return DevelopedComplex.square_disk(_rat(data["square"], "square"))
    if "cells" not in data:
        if "rects" not in data:
            raise ParseError("complex: expected \"cells\", \"rects\" or \"square\"")
        rects = []
        for i, r in enumerate(data["rects"]):
            where = "rects[%d]" % i
            if not isinstance(r, list) or len(r) != 2:
                raise ParseError("%s: expected [[x0,y0],[x1,y1]]" % where)
            try:
                rects.append(Rect(_vec(r[0], where + "[0]"), _vec(r[1], where + "[1]")))
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError("%s: %s" % (where, exc)) from None
        try:
            return DevelopedComplex.from_rect_union(rect_union_normalize(rects), data.get("name", ""))
        except ValueError as exc:
            raise ParseError("rects: %s" % exc) from None
    cells, adj = [], {}
    for i, c in enumerate(data["cells"]):
        where = "cells[%d]" % i
        cid = _decode_id(c["id"])
        source = _decode_id(c.get("source"))
        cells.append(Cell(
            cid, source, _vec(c["placement"], where + ".placement"),
            tuple(_vec(v, "%s.vertices[%d]" % (where, j)) for j, v in enumerate(c["vertices"])),
            tuple(_vec(v, "%s.marks[%d]" % (where, j)) for j, v in enumerate(c.get("marks", []))),
        ))
        adj[cid] = tuple(
            (_decode_id(a["cell"]), (_vec(a["segment"][0], where), _vec(a["segment"][1], where)))
            for a in c.get("adjacent", [])
        )
    region = None
    if "rects" in data:
        region = rect_union_normalize(
            [Rect(_vec(a, "rects"), _vec(b, "rects")) for a, b in data["rects"]])
    r2 = data.get("radius2")
    return DevelopedComplex(
        tuple(cells), adj, _decode_id(data["basepoint_cell"]),
        None if r2 is None else _rat(r2, "radius2"),
        tuple(_vec(m, "singular_marks") for m in data.get("singular_marks", [])),
        region, bool(data.get("is_disk", True)), data.get("name", ""),
    )


def parse_disk(spec: str) -> DevelopedComplex:
    """``square:h``, ``rects:x0,y0,x1,y1;...`` or a path to complex JSON."""
    if spec.startswith("square:"):
        h = _rat(spec[len("square:"):], "square")
        if h <= 0:
            raise ParseError("square: half-width must be positive")
        return DevelopedComplex.square_disk(h)
    if spec.startswith("rects:"):
        rects = []
        for part in spec[len("rects:"):].split(";"):
            nums = [x for x in part.split(",")]
            if len(nums) != 4:
                raise ParseError("rects: each rectangle needs x0,y0,x1,y1")
            try:
                rects.append(Rect.of(*(_rat(x, "rects") for x in nums)))
            except ValueError as exc:
                if isinstance(exc, ParseError):
                    raise
                raise ParseError("rects: %s" % exc) from None
        try:
            return DevelopedComplex.from_rect_union(rect_union_normalize(rects))
        except ValueError as exc:
            raise ParseError("rects: %s" % exc) from None
    try:
        with open(spec, "rb") as fh:
            text = fh.read().decode("utf-8")
    except OSError as exc:
        raise ParseError("cannot read disk %r: %s" % (spec, exc.strerror)) from None
    try:
        return complex_from_dict(json.loads(text))
    except json.JSONDecodeError as exc:
        raise ParseError("line %d column %d: %s" % (exc.lineno, exc.colno, exc.msg)) from None


def parse_matrix(text: str) -> Mat2:
    parts = text.split(",")
    if len(parts) != 4:
        raise ParseError("matrix: expected a,b,c,d")
    return Mat2(*(_rat(p, "matrix") for p in parts))


# -- results ---------------------------------------------------------------------------


def immersion_to_dict(im) -> dict:
    if isinstance(im, NoImmersion):
        return {"immerses": False, "witness": im.witness, "reason": im.reason, "cell": im.cell}
    placements = im.placements
    return {
        "immerses": True,
        "placements": [{"cell": c, "targets": [{"polygon": k, "offset": a} for k, a in v]}
                       for c, v in sorted(placements.items(), key=lambda kv: repr(kv[0]))],
    }


def embeds_to_dict(res) -> dict:
    if isinstance(res, Embedded):
        return {"verdict": "Embedded", "immersion": immersion_to_dict(res.map)}
    if isinstance(res, Overlap):
        return {"verdict": "Overlap", "x": res.x, "y": res.y, "cells": list(res.cells)}
    return {"verdict": "NoImmersion", "immersion": immersion_to_dict(res)}


def er_to_dict(er) -> dict:
    if isinstance(er, EmbeddingRadius):
        ev = er.event
        return {"er2": er.value, "event": {"kinds": list(ev.kinds), "radius2": ev.radius2,
                                           "singularity": ev.singularity,
                                           "overlap": ev.overlap}}
    return {"er2": er}


def fiber_to_dict(f: BasepointFiber) -> dict:
    return {"points": [{"cell": c, "point": x} for c, x in f.points]}


def membership_to_dict(m: Membership) -> dict:
    out = {"member": m.value, "fiber": list(m.fiber)}
    w = m.witness
    if isinstance(w, NoImmersion):
        out["witness"] = immersion_to_dict(w)
    elif isinstance(w, (Embedded, Overlap)):
        out["witness"] = embeds_to_dict(w)
    elif isinstance(w, tuple):
        out["witness"] = list(w)
    return out


def iso_to_dict(r: IsoResult) -> dict:
    return {"iso": r.ok, "reason": r.reason, "witness": r.witness, "fiber": list(r.fiber)}


def automorphism_to_dict(v: AutomorphismVerdict) -> dict:
    return {"verdict": v.name, "radius2": v.radius2, "witness": v.witness, "reason": v.reason}


def convergence_to_dict(r: ConvergenceReport) -> dict:
    out = {"verdict": r.verdict, "radius2": r.radius2, "delta": r.delta}
    if r.verdict == "CertifiedAtRadius":
        out["threshold"] = r.threshold
    elif r.verdict == "RefutedAtRadius":
        out["refuted_at"] = r.refuted_at
        out["witness"] = r.witness
    out["checks"] = [
        {"n": c.n, "ok": c.ok, "reason": c.reason, "witness": c.witness,
         "matching": [list(p) for p in c.matching]}
        for c in r.checks
    ]
    return out


def cluster_to_dict(r: ClusterReport) -> dict:
    return {"radius2": r.radius2, "clusters": [list(c) for c in r.clusters],
            "representatives": list(r.representatives)}


def probe_to_dict(p: ProbeReport) -> dict:
    return {"terms": list(p.terms), "clusters": [[p.terms[i] for i in c] for c in p.clusters.clusters],
            "largest": list(p.largest), "density": list(p.density), "heuristic": p.heuristic}


# -- subbasis sets and certificates --------------------------------------------------


def region_to_dict(r: Region) -> dict:
    return {"open": r.open,
            "pieces": [{"cell": c, "rect": [rect.min, rect.max]} for c, rect in r.pieces]}


def region_from_dict(data, where="region") -> Region:
    try:
        pieces = tuple(
            (_decode_id(p.get("cell")),
             Rect(_vec(p["rect"][0], where), _vec(p["rect"][1], where)))
            for p in data["pieces"]
        )
    except (KeyError, TypeError, IndexError):
        raise ParseError("%s: expected {\"open\", \"pieces\": [{\"rect\"}]}" % where) from None
    except ValueError as exc:
        if isinstance(exc, ParseError):
            raise
        raise ParseError("%s: %s" % (where, exc)) from None
    return Region(pieces, bool(data.get("open", False)))


_SET_TYPES = {c.__name__: c for c in (Immerses, NotImmerses, Plus, Minus, EmbedsSet, Disjoint,
                                      EPlus, EMinus)}


def set_to_dict(s) -> dict:
    out = {"type": type(s).__name__}
    for f in s.__dataclass_fields__:
        v = getattr(s, f)
        out[f] = complex_to_dict(v) if isinstance(v, DevelopedComplex) else region_to_dict(v)
    return out


def set_from_dict(data):
    if not isinstance(data, dict) or data.get("type") not in _SET_TYPES:
        raise ParseError("set: \"type\" must be one of %s" % ", ".join(sorted(_SET_TYPES)))
    cls = _SET_TYPES[data["type"]]
    args = {}
    for f in cls.__dataclass_fields__:
        if f not in data:
            raise ParseError("set: missing field %r" % f)
        if f == "D" or (f == "U" and cls is NotImmerses):
            args[f] = complex_from_dict(data[f])
        else:
            args[f] = region_from_dict(data[f], f)
    return cls(**args)


def certificate_to_dict(c) -> dict:
    if isinstance(c, NotSeparatedUpTo):
        return {"verdict": "NotSeparatedUpTo", "radius2": c.radius2}
    return {"verdict": "Separated", "reason": c.reason, "point": c.point,
            "set_for_S": set_to_dict(c.set_for_S), "set_for_T": set_to_dict(c.set_for_T)}


def certificate_from_dict(data) -> Certificate:
    if data.get("verdict") != "Separated":
        raise ParseError("certificate: not a separating certificate")
    point = data.get("point")
    return Certificate(set_from_dict(data["set_for_S"]), set_from_dict(data["set_for_T"]),
                       data["reason"], None if point is None else _vec(point, "point"))


# -- sequences -------------------------------------------------------------------------


def _square():
    return families.square_torus()


def parse_sequence(spec: str, limit=None) -> SurfaceSequence:
    """Named sequences, as ``builtin:name`` or ``seq:name``.

    ``tall-torus``      n -> torus((1,0),(0,1+1/n))
    ``alternating``     square torus for odd n, torus((1,0),(0,2)) for even n
    ``torus-n``         n -> torus((1,0),(0,n))
    ``staircase``       n -> n-square staircase truncation
    ``constant``        the limit surface for every n
    ``marked-shift``    square torus marked at (1/2+1/n mod 1, 1/2)
    ``marked-alternating``  square torus marked at (1/4,1/4) / (3/4,3/4)
    """
    for prefix in ("builtin:", "seq:"):
        if spec.startswith(prefix):
            name = spec[len(prefix):]
            break
    else:
        raise ParseError("sequence %r: expected builtin:name or seq:name" % spec)
    half, quarter = mpq(1, 2), mpq(1, 4)
    if name == "tall-torus":
        return SurfaceSequence(lambda n: families.torus((1, 0), (0, 1 + mpq(1, n))), name)
    if name == "alternating":
        return SurfaceSequence(
            lambda n: _square() if n % 2 else families.torus((1, 0), (0, 2)), name)
    if name == "torus-n":
        return SurfaceSequence(lambda n: families.torus((1, 0), (0, n)), name)
    if name == "staircase":
        return SurfaceSequence(families.staircase, name)
    if name == "constant":
        if limit is None:
            raise ParseError("constant sequence needs a limit surface")
        base = limit.surface if isinstance(limit, MarkedSurface) else limit
        return SurfaceSequence(lambda n: limit if isinstance(limit, MarkedSurface) else base, name)
    if name == "marked-shift":
        def shifted(n):
            x = half + mpq(1, n)
            return MarkedSurface(_square(), (0, (x - (x.numerator // x.denominator), half)))
        return SurfaceSequence(shifted, name)
    if name == "marked-alternating":
        return SurfaceSequence(
            lambda n: MarkedSurface(_square(), (0, (quarter, quarter) if n % 2 else
                                                (3 * quarter, 3 * quarter))), name)
    raise ParseError("unknown sequence %r" % name)


def is_marked_sequence(seq: SurfaceSequence) -> bool:
    return isinstance(seq(1), MarkedSurface)


def surface_name(S) -> str:
    if isinstance(S, TranslationSurface):
        return getattr(S, "name", "") or repr(S)
    return repr(S)


__all__ = [
    "ParseError", "ValidationError", "parse_surface", "serialize_surface", "surface_to_dict",
    "surface_from_dict", "parse_builtin", "parse_point", "parse_disk", "parse_matrix",
    "complex_to_dict", "complex_from_dict", "parse_sequence", "set_to_dict", "set_from_dict",
    "certificate_to_dict", "certificate_from_dict", "dumps", "encode",
]
