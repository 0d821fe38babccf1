"""Builtin surfaces: tori, origamis, staircases and the plane."""

from __future__ import annotations

import re

from .geometry import Vec, cross, rational
from .surface import Plane, SurfacePresentation, SurfaceProvider, check


class UnknownName(ValueError):
    pass


class BadParams(ValueError):
    pass


def _vec(v) -> Vec:
    return Vec.of(v[0], v[1])


def torus(v1=(1, 0), v2=(0, 1), name: str = "") -> SurfacePresentation:
    """The torus R^2 / (Z v1 + Z v2) as one parallelogram, based at its center."""
    v1, v2 = _vec(v1), _vec(v2)
    det = cross(v1, v2)
    if det == 0:
        raise BadParams("torus lattice vectors are dependent")
    if det < 0:
        v1, v2 = v2, v1
    zero = Vec.of(0, 0)
    poly = (zero, v1, v1 + v2, v2)
    return check(SurfacePresentation(
        {0: poly}, [((0, 0), (0, 2)), ((0, 1), (0, 3))], (0, (v1 + v2) / 2),
        name or "torus(%s,%s)" % (v1, v2),
    ))


def torus_triangles(v1=(1, 0), v2=(0, 1), name: str = "") -> SurfacePresentation:
    """Same torus as :func:`torus`, cut along a diagonal into two triangles.

    The basepoint sits on the diagonal, at the center of the parallelogram.
    """
    v1, v2 = _vec(v1), _vec(v2)
    det = cross(v1, v2)
    if det == 0:
        raise BadParams("torus lattice vectors are dependent")
    if det < 0:
        v1, v2 = v2, v1
    zero = Vec.of(0, 0)
    polys = {0: (zero, v1, v1 + v2), 1: (zero, v1 + v2, v2)}
    gluings = [((0, 2), (1, 0)), ((0, 0), (1, 1)), ((0, 1), (1, 2))]
    return check(SurfacePresentation(polys, gluings, (0, (v1 + v2) / 2),
                                     name or "torus-triangles(%s,%s)" % (v1, v2)))


_SQUARE = ((0, 0), (1, 0), (1, 1), (0, 1))
_CENTER = Vec.of("1/2", "1/2")


def parse_permutation(perm, n: int | None = None) -> tuple[int, ...]:
    """Accept a sequence of 0-based images, or cycle notation with 1-based
    labels such as ``"(1 2 3)(4 5)"``; ``"()"`` or ``"id"`` is the identity."""
    if isinstance(perm, str):
        text = perm.strip()
        cycles = [] if text in ("", "()", "id") else re.findall(r"\(([^()]*)\)", text)
        if text not in ("", "()", "id") and not cycles:
            raise BadParams("cannot parse permutation %r" % perm)
        cycles = [[int(t) - 1 for t in re.split(r"[\s,]+", c.strip()) if t] for c in cycles]
        size = max([n or 0] + [x + 1 for c in cycles for x in c])
        images = list(range(size))
        for c in cycles:
            for a, b in zip(c, c[1:] + c[:1]):
                images[a] = b
        return tuple(images)
    images = tuple(int(i) for i in perm)
    if sorted(images) != list(range(len(images))):
        raise BadParams("not a permutation: %r" % (perm,))
    return images


def origami(h, v, name: str = "") -> SurfacePresentation:
    """Square-tiled surface: square ``i`` has right neighbour ``h[i]`` and top
    neighbour ``v[i]``.  Based at the center of square 0."""
    h = parse_permutation(h)
    v = parse_permutation(v)
    n = max(len(h), len(v))
    h = parse_permutation(h + tuple(range(len(h), n)))
    v = parse_permutation(v + tuple(range(len(v), n)))
    seen = {0}
    todo = [0]
    while todo:
        i = todo.pop()
        for j in (h[i], v[i]):
            if j not in seen:
                seen.add(j)
                todo.append(j)
    if len(seen) != n:
        raise BadParams("permutation group is not transitive")
    polys = {i: _SQUARE for i in range(n)}
    gluings = [((i, 1), (h[i], 3)) for i in range(n)] + [((i, 2), (v[i], 0)) for i in range(n)]
    return check(SurfacePresentation(polys, gluings, (0, _CENTER),
                                     name or "origami(%s,%s)" % (list(h), list(v))))


_L_CORNERS = {0: (0, 0), 1: (1, 0), 2: (0, 1)}


def l_origami() -> SurfacePresentation:
    """Three squares in an L: square 0 at the corner, 1 to its right, 2 above.

    Squares sit at their places in the L, so square 1 is ``[1,2] x [0,1]``.
    """
    o = origami((1, 0, 2), (2, 1, 0))
    polys = {i: tuple(v + _vec(_L_CORNERS[i]) for v in vs) for i, vs in o.polygons.items()}
    return check(SurfacePresentation(polys, o.gluing_pairs, (0, _CENTER), "L"))


def _staircase_right(i: int) -> int:
    return i + 1 if i % 2 == 0 else i - 1


def _staircase_up(i: int) -> int:
    return i + 1 if i % 2 else i - 1


def staircase(n: int | None = None):
    """The infinite staircase, or its ``n``-square truncation.

    Square ``2k`` sits at ``(k, k)`` and ``2k+1`` at ``(k+1, k)``.  Rows and
    columns hold two squares each; truncation closes the end rows/columns
    into single-square cylinders.  The truncations are origamis.
    """
    if n is None:
        return SurfaceProvider(_staircase_polygon, _staircase_opposite, (0, _CENTER),
                               "staircase")
    if n < 1:
        raise BadParams("staircase needs at least one square")
    h = [(_staircase_right(i) if 0 <= _staircase_right(i) < n else i) for i in range(n)]
    v = [(_staircase_up(i) if 0 <= _staircase_up(i) < n else i) for i in range(n)]
    return origami(h, v, name="staircase(%d)" % n)


def _staircase_opposite(i, e):
    if e == 1:
        return (_staircase_right(i), 3)
    if e == 3:
        return (_staircase_right(i), 1)
    if e == 2:
        return (_staircase_up(i), 0)
    return (_staircase_up(i), 2)


def _staircase_polygon(i):
    return _SQUARE


def plane() -> Plane:
    return Plane()


def builtin(name: str, **params):
    """Look up a builtin family by name."""
    try:
        if name == "torus":
            return torus(params.get("v1", (1, 0)), params.get("v2", (0, 1)))
        if name in ("torus-triangles", "torus_triangles"):
            return torus_triangles(params.get("v1", (1, 0)), params.get("v2", (0, 1)))
        if name == "origami":
            return origami(params["h"], params.get("v", "()"))
        if name == "L":
            return l_origami()
        if name == "staircase":
            n = params.get("n")
            return staircase(None if n is None else int(n))
        if name == "plane":
            return plane()
    except KeyError as exc:
        raise BadParams("missing parameter %s" % exc) from None
    raise UnknownName(name)


def square_torus() -> SurfacePresentation:
    return torus((1, 0), (0, 1))


def vec_param(text: str) -> Vec:
    x, y = text.split(",")
    return Vec(rational(x), rational(y))
