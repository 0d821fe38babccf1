"""Membership in the subbasis sets of the immersive topology, and
certificates separating two surfaces.

A set is described by a disk complex ``D`` plus rectangle regions inside
it.  Balls around a point are squares here: the open ball of half-width
``w`` is the open square ``(p - w, p + w)^2``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Union

from .develop import (
    DevelopedComplex,
    Embedded,
    ImmersionMap,
    Piece,
    coincidences,
    embeds,
    immerse,
    point_fiber,
    polar_key,
    target_adapter,
)
from .geometry import Rect, Vec, clip, rational
from .surface import MarkedSurface


class MalformedSet(ValueError):
    pass


@dataclass(frozen=True)
class Region:
    """Finite union of rectangles of a disk complex, open or closed.

    A piece with cell ``None`` applies to every cell under it.
    """

    pieces: tuple  # of (cell id or None, Rect)
    open: bool = False

    @classmethod
    def ball(cls, center, half, open: bool = True) -> "Region":
        return cls(((None, Rect.square(center, half)),), open)

    @classmethod
    def rects(cls, rects, open: bool = False) -> "Region":
        return cls(tuple((None, r) for r in rects), open)

    def closure(self) -> "Region":
        return Region(self.pieces, False)

    def contains(self, cell, x) -> bool:
        for c, r in self.pieces:
            if c is not None and c != cell:
                continue
            if (r.contains_open(x) if self.open else r.contains(x)):
                return True
        return False

    def inside(self, D: DevelopedComplex) -> bool:
        """Every piece lies in ``D``; open regions lie in its interior."""
        for _, r in self.pieces:
            for v in r.vertices():
                if not D.contains(v):
                    return False
            if self.open and D.region is not None:
                u = D.region
                if not all(u.contains(v) for v in r.vertices()):
                    return False
        return True


def _restrict(pieces, region: Region):
    """Pieces clipped to the closure of ``region``."""
    out = []
    for p in pieces:
        for c, r in region.pieces:
            if c is not None and c != p.cell:
                continue
            part = clip(p.region, r.vertices())
            if part:
                out.append(Piece(p.cell, p.target, p.offset, part))
    return out


# -- the sets --------------------------------------------------------------------


@dataclass(frozen=True)
class Immerses:
    D: DevelopedComplex


@dataclass(frozen=True)
class NotImmerses:
    """Surfaces into which the open disk ``U`` (given by its closure) does
    not immerse."""

    U: DevelopedComplex


@dataclass(frozen=True)
class Plus:
    D: DevelopedComplex
    U: Region


@dataclass(frozen=True)
class Minus:
    D: DevelopedComplex
    K: Region


@dataclass(frozen=True)
class EmbedsSet:
    D: DevelopedComplex


@dataclass(frozen=True)
class Disjoint:
    D: DevelopedComplex
    K1: Region
    K2: Region


@dataclass(frozen=True)
class EPlus:
    D: DevelopedComplex
    U: Region


@dataclass(frozen=True)
class EMinus:
    D: DevelopedComplex
    K: Region


SubbasisSet = Union[Immerses, NotImmerses, Plus, Minus, EmbedsSet, Disjoint, EPlus, EMinus]

_MARKED = (EPlus, EMinus)


@dataclass(frozen=True)
class Membership:
    value: bool
    witness: object = None
    fiber: tuple = ()

    def __bool__(self):
        return self.value


def _check(s) -> None:
    D = getattr(s, "D", None) if not isinstance(s, NotImmerses) else s.U
    if not isinstance(D, DevelopedComplex) or not D.is_disk:
        raise MalformedSet("the disk of %s must be a disk complex" % type(s).__name__)
    if isinstance(s, (Plus, EPlus)) and not (s.U.open and s.U.inside(D)):
        raise MalformedSet("U must be an open region inside D")
    if isinstance(s, (Minus, EMinus)) and (s.K.open or not s.K.inside(D)):
        raise MalformedSet("K must be a closed region inside D")
    if isinstance(s, Disjoint) and (s.K1.open or s.K2.open
                                    or not (s.K1.inside(D) and s.K2.inside(D))):
        raise MalformedSet("K1 and K2 must be closed regions inside D")


def member(s: SubbasisSet, subject) -> Membership:
    """Exact membership of a surface (or marked surface) in a subbasis set."""
    _check(s)
    if isinstance(s, _MARKED):
        if not isinstance(subject, MarkedSurface):
            raise MalformedSet("%s needs a marked surface" % type(s).__name__)
        S, target = subject.surface, subject.mark
    else:
        if isinstance(subject, MarkedSurface):
            subject = subject.surface
        S, target = subject, None

    if isinstance(s, NotImmerses):
        im = immerse(s.U, S, open_region=True)
        return Membership(not im, im)
    if isinstance(s, EmbedsSet):
        res = embeds(s.D, S)
        return Membership(isinstance(res, Embedded), res)

    im = immerse(s.D, S)
    if isinstance(s, Immerses):
        return Membership(bool(im), im)
    if not im:
        return Membership(False, im)
    if isinstance(s, Disjoint):
        return _disjoint(s, im, S)
    fiber = point_fiber(im, target).points
    region = s.U if isinstance(s, (Plus, EPlus)) else s.K
    inside = tuple(sorted((x for c, x in fiber if region.contains(c, x)), key=polar_key))
    if isinstance(s, (Plus, EPlus)):
        return Membership(bool(inside), im, inside)
    return Membership(not inside, im, inside)


def _disjoint(s: Disjoint, im: ImmersionMap, S) -> Membership:
    T = target_adapter(S)
    A = _restrict(im.pieces, s.K1)
    B = _restrict(im.pieces, s.K2)
    cands = coincidences(A, B, T, distinct=False)
    if not cands:
        return Membership(True, im)
    x, y, _, _ = min(cands, key=lambda c: ((c[1] - c[0]).norm2(), polar_key(c[0]), polar_key(c[1])))
    return Membership(False, (x, y))


# -- separation -------------------------------------------------------------------


@dataclass(frozen=True)
class Certificate:
    set_for_S: SubbasisSet
    set_for_T: SubbasisSet
    reason: str  # "PlusMinusPair" or "ImmersesNotImmerses"
    point: Optional[Vec] = None


@dataclass(frozen=True)
class NotSeparatedUpTo:
    radius2: object

    def __bool__(self):
        return False


def _dyadic_below(bound) -> object:
    """Largest ``1/2^j`` strictly below ``bound`` (capped at 1/4)."""
    w = rational("1/4")
    while w >= bound:
        w /= 2
    return w


def _chebyshev(p, q):
    return max(abs(p.x - q.x), abs(p.y - q.y))


def separating_certificate(S, T, r2_max, step="1/4"):
    """Find a pair of disjoint subbasis sets, one holding ``S`` and the other
    ``T``, using squares ``[-h, h]^2`` with ``h^2 <= r2_max``."""
    r2_max = rational(r2_max)
    step = rational(step)
    h = step
    while h * h <= r2_max:
        D = DevelopedComplex.square_disk(h)
        iS, iT = immerse(D, S), immerse(D, T)
        if iS and iT:
            cert = _fiber_certificate(D, h, iS, iT)
            if cert is not None:
                return cert
        elif bool(iS) != bool(iT):
            bad = iT if iS else iS
            if D.is_interior(bad.witness):
                pair = (Immerses(D), NotImmerses(D))
                sets = pair if iS else pair[::-1]
                return Certificate(sets[0], sets[1], "ImmersesNotImmerses", bad.witness)
        else:
            break
        h += step
    return NotSeparatedUpTo(r2_max)


def _fiber_certificate(D, h, iS, iT) -> Optional[Certificate]:
    FS = {x for _, x in point_fiber(iS).points}
    FT = {x for _, x in point_fiber(iT).points}
    for mine, other, s_side in ((FS - FT, FT, True), (FT - FS, FS, False)):
        for p in sorted(mine, key=polar_key):
            sep = min((_chebyshev(p, q) for q in other), default=rational(1))
            w = _dyadic_below(sep / 2)
            if max(abs(p.x), abs(p.y)) + w > h:
                continue
            U = Region.ball(p, w, open=True)
            plus, minus = Plus(D, U), Minus(D, U.closure())
            if s_side:
                return Certificate(plus, minus, "PlusMinusPair", p)
            return Certificate(minus, plus, "PlusMinusPair", p)
    return None


def verify_certificate(cert: Certificate, S, T) -> bool:
    """Re-check both memberships and the structural disjointness."""
    a, b = cert.set_for_S, cert.set_for_T
    if cert.reason == "PlusMinusPair":
        plus, minus = (a, b) if isinstance(a, Plus) else (b, a)
        if not (isinstance(plus, Plus) and isinstance(minus, Minus)):
            return False
        if not plus.D.same_as(minus.D) or plus.U.pieces != minus.K.pieces:
            return False
    else:
        kinds = {type(a), type(b)}
        if kinds != {Immerses, NotImmerses}:
            return False
    return bool(member(a, S)) and bool(member(b, T))
