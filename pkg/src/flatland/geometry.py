"""Exact rational plane geometry.

Everything here works over exact rationals (``gmpy2.mpq``).  There is no floating
point in any predicate; callers that need floats (rendering) convert at the
very end.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from gmpy2 import mpq
from typing import Iterable, NamedTuple, Optional, Sequence

import numpy as np
from scipy import ndimage


def rational(value) -> mpq:
    """Coerce ``value`` (int, rational, or a ``"p/q"`` string) to an ``mpq``."""
    if isinstance(value, mpq):
        return value
    if isinstance(value, str):
        text = value.strip()
        if "/" in text:
            num, den = text.split("/", 1)
            if int(den) == 0:
                raise ZeroDivisionError("zero denominator in %r" % value)
        return mpq(text)
    if isinstance(value, float):
        raise TypeError("floats are not accepted; pass a rational or a 'p/q' string")
    return mpq(value)


def format_rational(q: mpq) -> str:
    return "%d/%d" % (q.numerator, q.denominator)


class Vec(NamedTuple):
    """A point or vector of the plane with rational coordinates."""

    x: mpq
    y: mpq

    @classmethod
    def of(cls, x, y) -> "Vec":
        return cls(rational(x), rational(y))

    def __add__(self, other):  # type: ignore[override]
        return Vec(self.x + other[0], self.y + other[1])

    def __sub__(self, other):
        return Vec(self.x - other[0], self.y - other[1])

    def __neg__(self):
        return Vec(-self.x, -self.y)

    def __mul__(self, k):  # type: ignore[override]
        return Vec(self.x * k, self.y * k)

    __rmul__ = __mul__

    def __truediv__(self, k):
        return Vec(self.x / k, self.y / k)

    def norm2(self) -> mpq:
        return self.x * self.x + self.y * self.y

    def __repr__(self):
        return "(%s, %s)" % (self.x, self.y)


ZERO = Vec(mpq(0), mpq(0))


def cross(u, v) -> mpq:
    return u[0] * v[1] - u[1] * v[0]


def dot(u, v) -> mpq:
    return u[0] * v[0] + u[1] * v[1]


def dist2(p, q) -> mpq:
    dx = p[0] - q[0]
    dy = p[1] - q[1]
    return dx * dx + dy * dy


def in_ccw_arc(u, v, w) -> bool:
    """True iff direction ``w`` lies in the half-open counterclockwise arc
    ``(u, v]``; the arc must be shorter than a half turn."""
    cw = cross(w, v)
    if cw == 0:
        return dot(w, v) > 0
    return cross(u, w) > 0 and cw > 0


@dataclass(frozen=True)
class Mat2:
    a: mpq
    b: mpq
    c: mpq
    d: mpq

    @classmethod
    def of(cls, a, b, c, d) -> "Mat2":
        return cls(rational(a), rational(b), rational(c), rational(d))

    @classmethod
    def identity(cls) -> "Mat2":
        return cls.of(1, 0, 0, 1)

    def det(self) -> mpq:
        return self.a * self.d - self.b * self.c

    def __mul__(self, other: "Mat2") -> "Mat2":
        return Mat2(
            self.a * other.a + self.b * other.c,
            self.a * other.b + self.b * other.d,
            self.c * other.a + self.d * other.c,
            self.c * other.b + self.d * other.d,
        )

    def __call__(self, v) -> Vec:
        return Vec(self.a * v[0] + self.b * v[1], self.c * v[0] + self.d * v[1])

    def inverse(self) -> "Mat2":
        det = self.det()
        if det == 0:
            raise ZeroDivisionError("singular matrix")
        return Mat2(self.d / det, -self.b / det, -self.c / det, self.a / det)


# -- convex polygons ---------------------------------------------------------
#
# A polygon is a sequence of Vec in counterclockwise order.  Polygons produced
# by clipping may be degenerate (a segment or a single point); the helpers
# below accept those too.


def area2(poly: Sequence[Vec]) -> mpq:
    """Twice the signed area."""
    n = len(poly)
    return sum((cross(poly[i], poly[(i + 1) % n]) for i in range(n)), mpq(0))


def translate(poly: Iterable[Vec], t) -> tuple[Vec, ...]:
    return tuple(p + t for p in poly)


def is_convex_ccw(poly: Sequence[Vec]) -> bool:
    """Convex, counterclockwise, winding once.  Flat (collinear) vertices are
    allowed, repeated consecutive vertices are not."""
    n = len(poly)
    if n < 3:
        return False
    edges = [poly[(i + 1) % n] - poly[i] for i in range(n)]
    if any(e.x == 0 and e.y == 0 for e in edges):
        return False
    for i in range(n):
        c = cross(edges[i], edges[(i + 1) % n])
        if c < 0 or (c == 0 and dot(edges[i], edges[(i + 1) % n]) < 0):
            return False
    if area2(poly) <= 0:
        return False
    # total turning must be exactly one full turn; flat vertices do not turn
    ref = edges[0]
    turns = sum(
        1 for i in range(n)
        if cross(edges[i], edges[(i + 1) % n]) != 0
        and in_ccw_arc(edges[i], edges[(i + 1) % n], ref)
    )
    return turns == 1


def locate(poly: Sequence[Vec], p) -> tuple[str, Optional[int]]:
    """Classify ``p`` against a convex ccw polygon.

    Returns ``("vertex", i)``, ``("edge", i)``, ``("interior", None)`` or
    ``("outside", None)``.
    """
    n = len(poly)
    on_edge = None
    for i in range(n):
        c = cross(poly[(i + 1) % n] - poly[i], p - poly[i])
        if c < 0:
            return "outside", None
        if c == 0:
            on_edge = i if on_edge is None else on_edge
    for i, v in enumerate(poly):
        if v == p:
            return "vertex", i
    if on_edge is not None:
        return "edge", on_edge
    return "interior", None


def contains(poly: Sequence[Vec], p) -> bool:
    """Closed containment; works for degenerate polygons too."""
    n = len(poly)
    if n == 0:
        return False
    if n == 1:
        return poly[0] == p
    if n == 2 or area2(poly) == 0:
        return any(_on_segment(poly[i], poly[(i + 1) % n], p) for i in range(n))
    return all(cross(poly[(i + 1) % n] - poly[i], p - poly[i]) >= 0 for i in range(n))


def _on_segment(a, b, p) -> bool:
    if cross(b - a, p - a) != 0:
        return False
    return dot(p - a, p - b) <= 0


def _dedupe_cycle(points: list) -> tuple[Vec, ...]:
    out: list = []
    for p in points:
        if not out or out[-1] != p:
            out.append(p)
    while len(out) > 1 and out[0] == out[-1]:
        out.pop()
    # drop interior points of straight runs so degenerate results stay small
    changed = True
    while changed and len(out) > 2:
        changed = False
        for i in range(len(out)):
            a, b, c = out[i - 1], out[i], out[(i + 1) % len(out)]
            if cross(b - a, c - b) == 0 and dot(b - a, c - b) >= 0:
                del out[i]
                changed = True
                break
    return tuple(out)


def clip(subject: Sequence[Vec], window: Sequence[Vec]) -> tuple[Vec, ...]:
    """Closed intersection of two convex polygons (Sutherland-Hodgman).

    The result may be empty, a point, a segment, or a proper polygon.
    ``window`` must be a proper ccw convex polygon.
    """
    out = list(subject)
    n = len(window)
    for i in range(n):
        if not out:
            break
        a, b = window[i], window[(i + 1) % n]
        edge = b - a
        inp, out = out, []
        m = len(inp)
        for j in range(m):
            p, q = inp[j], inp[(j + 1) % m]
            sp, sq = cross(edge, p - a), cross(edge, q - a)
            if sp >= 0:
                out.append(p)
            if (sp > 0 and sq < 0) or (sp < 0 and sq > 0):
                t = sp / (sp - sq)
                out.append(p + (q - p) * t)
            if m == 1:
                break
    return _dedupe_cycle(out)


def clip_segment(p: Vec, q: Vec, poly: Sequence[Vec]) -> Optional[tuple[Vec, Vec]]:
    """The part of the closed segment pq inside the closed convex polygon."""
    lo, hi = mpq(0), mpq(1)
    d = q - p
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        edge = b - a
        num = cross(edge, p - a)
        den = cross(edge, d)
        # need num + t*den >= 0
        if den == 0:
            if num < 0:
                return None
        elif den > 0:
            lo = max(lo, -num / den)
        else:
            hi = min(hi, -num / den)
        if lo > hi:
            return None
    return p + d * lo, p + d * hi


def nearest_point(poly: Sequence[Vec], target) -> Vec:
    """Point of the closed convex (possibly degenerate) polygon nearest to
    ``target``."""
    target = Vec(target[0], target[1])
    if len(poly) >= 3 and area2(poly) > 0 and contains(poly, target):
        return target
    best = poly[0]
    best_d = dist2(best, target)
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        cand = project_to_segment(a, b, target)
        d = dist2(cand, target)
        if d < best_d:
            best, best_d = cand, d
    return best


def project_to_segment(a: Vec, b: Vec, p) -> Vec:
    d = b - a
    L = d.norm2()
    if L == 0:
        return a
    t = dot(Vec(p[0], p[1]) - a, d) / L
    if t <= 0:
        return a
    if t >= 1:
        return b
    return a + d * t


def segment_dist2(a: Vec, b: Vec, p=ZERO) -> mpq:
    return dist2(project_to_segment(a, b, p), p)


def convex_hull(points: Iterable[Vec]) -> tuple[Vec, ...]:
    pts = sorted(set(points))
    if len(pts) <= 2:
        return tuple(pts)
    lower: list = []
    for p in pts:
        while len(lower) >= 2 and cross(lower[-1] - lower[-2], p - lower[-1]) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and cross(upper[-1] - upper[-2], p - upper[-1]) <= 0:
            upper.pop()
        upper.append(p)
    return tuple(lower[:-1] + upper[:-1])


def minkowski_sum(p: Sequence[Vec], q: Sequence[Vec]) -> tuple[Vec, ...]:
    return convex_hull(a + b for a in p for b in q)


def balanced_point(poly: Sequence[Vec], c1: Vec, c2: Vec) -> tuple[mpq, Vec]:
    """Minimise ``max(|y-c1|^2, |y-c2|^2)`` over the closed convex polygon.

    Returns ``(value, argmin)``.  The minimiser of a max of two convex
    quadratics is either an unconstrained-in-one-branch nearest point or lies
    on the perpendicular bisector, so finitely many rational candidates cover
    it.
    """

    def value(y):
        return max(dist2(y, c1), dist2(y, c2))

    cands = []
    mid = (c1 + c2) / 2
    if contains(poly, mid):
        cands.append(mid)
    p1 = nearest_point(poly, c1)
    if dist2(p1, c2) <= dist2(p1, c1):
        cands.append(p1)
    p2 = nearest_point(poly, c2)
    if dist2(p2, c1) <= dist2(p2, c2):
        cands.append(p2)
    normal = c2 - c1
    rhs = (c2.norm2() - c1.norm2()) / 2
    n = len(poly)
    for i in range(n):
        a, b = poly[i], poly[(i + 1) % n]
        den = dot(b - a, normal)
        if den == 0:
            if dot(a, normal) == rhs:
                cands.extend([a, b])
            continue
        t = (rhs - dot(a, normal)) / den
        if 0 <= t <= 1:
            cands.append(a + (b - a) * t)
    cands.extend(poly)
    best = min(cands, key=lambda y: (value(y), y))
    return value(best), best


# -- ray exit ----------------------------------------------------------------


class Exit(NamedTuple):
    edge: int
    point: Vec
    t: mpq
    vertex: Optional[int]  # index of the vertex hit, or None for an edge interior


class StartOutside(ValueError):
    pass


class ZeroDirection(ValueError):
    pass


def exit_edge(vertices: Sequence[Vec], start, direction) -> Exit:
    """First boundary point hit by ``start + t*direction`` for ``t > 0``.

    Exits through a vertex are reported with ``vertex`` set; the ``edge`` is
    then the edge ending at that vertex's predecessor side (``vertex - 1``)
    when it is among the blocking edges, otherwise the blocking edge.
    """
    start = Vec(rational(start[0]), rational(start[1]))
    direction = Vec(rational(direction[0]), rational(direction[1]))
    if direction == ZERO:
        raise ZeroDirection("direction must be nonzero")
    if not contains(vertices, start):
        raise StartOutside("start %r is outside the polygon" % (start,))
    n = len(vertices)
    best_t = None
    best_edges: list[int] = []
    for i in range(n):
        a, b = vertices[i], vertices[(i + 1) % n]
        e = b - a
        outward = Vec(e.y, -e.x)
        den = dot(outward, direction)
        if den <= 0:
            continue
        t = dot(outward, a - start) / den
        if best_t is None or t < best_t:
            best_t, best_edges = t, [i]
        elif t == best_t:
            best_edges.append(i)
    if best_t is None or best_t <= 0:
        raise StartOutside("ray leaves the polygon immediately")
    point = start + direction * best_t
    vertex = None
    for i, v in enumerate(vertices):
        if v == point:
            vertex = i
    edge = best_edges[0]
    if vertex is not None and (vertex - 1) % n in best_edges:
        edge = (vertex - 1) % n
    return Exit(edge, point, best_t, vertex)


# -- rectangles --------------------------------------------------------------


@dataclass(frozen=True, order=True)
class Rect:
    min: Vec
    max: Vec

    def __post_init__(self):
        if not (self.min.x < self.max.x and self.min.y < self.max.y):
            raise ValueError("degenerate rectangle %r-%r" % (self.min, self.max))

    @classmethod
    def of(cls, x0, y0, x1, y1) -> "Rect":
        return cls(Vec.of(x0, y0), Vec.of(x1, y1))

    @classmethod
    def square(cls, center, half) -> "Rect":
        half = rational(half)
        c = Vec.of(center[0], center[1])
        return cls(c - Vec(half, half), c + Vec(half, half))

    def vertices(self) -> tuple[Vec, ...]:
        return (self.min, Vec(self.max.x, self.min.y), self.max, Vec(self.min.x, self.max.y))

    def contains(self, p) -> bool:
        return self.min.x <= p[0] <= self.max.x and self.min.y <= p[1] <= self.max.y

    def contains_open(self, p) -> bool:
        return self.min.x < p[0] < self.max.x and self.min.y < p[1] < self.max.y

    def translate(self, t) -> "Rect":
        return Rect(self.min + t, self.max + t)

    def intersects(self, other: "Rect") -> bool:
        return (self.min.x <= other.max.x and other.min.x <= self.max.x
                and self.min.y <= other.max.y and other.min.y <= self.max.y)


class EmptyInput(ValueError):
    pass


@dataclass(frozen=True)
class RectUnion:
    """Closed union of axis-parallel rational rectangles in canonical form.

    Build with :func:`rect_union_normalize`; equal point sets give equal
    values.
    """

    rects: tuple[Rect, ...]
    is_connected: bool = field(compare=False)
    is_disk: bool = field(compare=False)

    def contains(self, p) -> bool:
        return any(r.contains(p) for r in self.rects)

    def contains_interior(self, p) -> bool:
        """``p`` is in the topological interior of the union."""
        x, y = p[0], p[1]
        quadrants = [False] * 4
        for r in self.rects:
            if not r.contains(p):
                continue
            right = r.min.x <= x < r.max.x
            left = r.min.x < x <= r.max.x
            up = r.min.y <= y < r.max.y
            down = r.min.y < y <= r.max.y
            quadrants[0] |= right and up
            quadrants[1] |= left and up
            quadrants[2] |= left and down
            quadrants[3] |= right and down
        return all(quadrants)

    def translate(self, t) -> "RectUnion":
        return rect_union_normalize([r.translate(t) for r in self.rects])

    def bounds(self) -> Rect:
        return Rect(Vec(min(r.min.x for r in self.rects), min(r.min.y for r in self.rects)),
                    Vec(max(r.max.x for r in self.rects), max(r.max.y for r in self.rects)))


def _merge_intervals(intervals):
    out = []
    for a, b in sorted(intervals):
        if out and a <= out[-1][1]:
            out[-1][1] = max(out[-1][1], b)
        else:
            out.append([a, b])
    return [tuple(i) for i in out]


def _occupancy(rects: Sequence[Rect]):
    xs = sorted({r.min.x for r in rects} | {r.max.x for r in rects})
    ys = sorted({r.min.y for r in rects} | {r.max.y for r in rects})
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    grid = np.zeros((len(xs) - 1, len(ys) - 1), dtype=bool)
    for r in rects:
        grid[xi[r.min.x]:xi[r.max.x], yi[r.min.y]:yi[r.max.y]] = True
    return xs, ys, grid


def _topology(rects: Sequence[Rect]) -> tuple[bool, bool]:
    _, _, grid = _occupancy(rects)
    padded = np.pad(grid, 1)
    # closed cells touching at a corner are connected
    _, n8 = ndimage.label(padded, structure=np.ones((3, 3), dtype=int))
    connected = n8 == 1
    if not connected:
        return False, False
    _, n4 = ndimage.label(padded)
    _, holes = ndimage.label(~padded)
    a, b = padded[:-1, :-1], padded[1:, 1:]
    c, d = padded[1:, :-1], padded[:-1, 1:]
    pinched = ((a & b & ~c & ~d) | (c & d & ~a & ~b)).any()
    return True, bool(n4 == 1 and holes == 1 and not pinched)


def rect_union_normalize(rects: Iterable[Rect]) -> RectUnion:
    """Canonical maximal horizontal-slab decomposition of a closed union."""
    rects = list(rects)
    if not rects:
        raise EmptyInput("a rectangle union needs at least one rectangle")
    ys = sorted({r.min.y for r in rects} | {r.max.y for r in rects})
    slabs = []
    for y0, y1 in zip(ys, ys[1:]):
        covering = [(r.min.x, r.max.x) for r in rects if r.min.y <= y0 and r.max.y >= y1]
        slabs.append((y0, y1, _merge_intervals(covering)))
    out = []
    open_runs: dict = {}
    for y0, y1, intervals in slabs:
        next_runs = {}
        for iv in intervals:
            if iv in open_runs and open_runs[iv][1] == y0:
                next_runs[iv] = (open_runs.pop(iv)[0], y1)
            else:
                next_runs[iv] = (y0, y1)
        for iv, (a, b) in open_runs.items():
            out.append(Rect(Vec(iv[0], a), Vec(iv[1], b)))
        open_runs = next_runs
    for iv, (a, b) in open_runs.items():
        out.append(Rect(Vec(iv[0], a), Vec(iv[1], b)))
    canon = tuple(sorted(out, key=lambda r: (r.min.x, r.min.y, r.max.x, r.max.y)))
    connected, disk = _topology(canon)
    return RectUnion(canon, connected, disk)


def rect_union_is_disk(u: RectUnion) -> bool:
    return u.is_disk


def shared_segments(r: Rect, s: Rect) -> Optional[tuple[Vec, Vec]]:
    """Common boundary segment of positive length between two rectangles with
    disjoint interiors, if any."""
    if r.max.x == s.min.x or s.max.x == r.min.x:
        x = r.max.x if r.max.x == s.min.x else r.min.x
        lo, hi = max(r.min.y, s.min.y), min(r.max.y, s.max.y)
        if lo < hi:
            return Vec(x, lo), Vec(x, hi)
    if r.max.y == s.min.y or s.max.y == r.min.y:
        y = r.max.y if r.max.y == s.min.y else r.min.y
        lo, hi = max(r.min.x, s.min.x), min(r.max.x, s.max.x)
        if lo < hi:
            return Vec(lo, y), Vec(hi, y)
    return None
