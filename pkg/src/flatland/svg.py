"""Write-only SVG pictures of developed complexes."""

from __future__ import annotations

from .develop import DevelopedComplex
from .geometry import Vec, rational

DIGITS = 12


def decimal(q, digits: int = DIGITS) -> str:
    """``q`` rounded half away from zero to ``digits`` decimals, trailing
    zeros dropped."""
    q = rational(q)
    scale = 10 ** digits
    n, d = abs(q.numerator) * scale, q.denominator
    m = (2 * n + d) // (2 * d)
    whole, frac = divmod(m, scale)
    text = str(whole)
    if frac:
        text += "." + str(frac).rjust(digits, "0").rstrip("0")
    if q < 0 and m:
        text = "-" + text
    return text


def _pt(p) -> str:
    # y is flipped so that the picture has the usual orientation
    return "%s,%s" % (decimal(p[0]), decimal(-p[1]))


def render_svg(c: DevelopedComplex, fiber=(), *, size: int = 400, title: str = "") -> bytes:
    """Deterministic SVG: one ``path.cell`` per cell, a ``path.mark`` cross per
    singular mark, a ``circle.basepoint`` at the origin and a
    ``circle.fiber`` per extra fiber point."""
    pts = [v for cell in c.cells for v in cell.vertices] or [Vec.of(0, 0)]
    x0 = min(p.x for p in pts)
    x1 = max(p.x for p in pts)
    y0 = min(p.y for p in pts)
    y1 = max(p.y for p in pts)
    span = max(x1 - x0, y1 - y0, rational(1))
    pad = span / 20
    dot = span / 100
    box = (x0 - pad, -(y1 + pad), x1 - x0 + 2 * pad, y1 - y0 + 2 * pad)
    out = [
        '<svg xmlns="http://www.w3.org/2000/svg" width="%d" height="%d" viewBox="%s">'
        % (size, size, " ".join(decimal(v) for v in box)),
    ]
    if title:
        out.append("<title>%s</title>" % _escape(title))
    out.append('<g fill="none" stroke="black" stroke-width="%s">' % decimal(span / 400))
    for cell in c.cells:
        d = "M" + " L".join(_pt(v) for v in cell.vertices) + " Z"
        out.append('<path class="cell" data-id="%s" d="%s"/>' % (_escape(repr(cell.id)), d))
    out.append("</g>")
    marks = sorted(set(c.singular_marks) or {m for cell in c.cells for m in cell.marks})
    out.append('<g stroke="red" stroke-width="%s">' % decimal(span / 200))
    for m in marks:
        a, b = m + Vec(-dot, -dot), m + Vec(dot, dot)
        e, f = m + Vec(-dot, dot), m + Vec(dot, -dot)
        out.append('<path class="mark" d="M%s L%s M%s L%s"/>' % (_pt(a), _pt(b), _pt(e), _pt(f)))
    out.append("</g>")
    out.append('<circle class="basepoint" cx="0" cy="0" r="%s" fill="blue"/>' % decimal(dot))
    for p in sorted({Vec.of(*p) for p in fiber}):
        if p == (0, 0):
            continue
        out.append('<circle class="fiber" cx="%s" cy="%s" r="%s" fill="green"/>'
                   % (decimal(p[0]), decimal(-p[1]), decimal(dot)))
    out.append("</svg>")
    return ("\n".join(out) + "\n").encode("utf-8")


def _escape(text: str) -> str:
    return text.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;").replace('"', "&quot;")
