"""Embedding radii of a few surfaces, and a picture of the L developed
around its basepoint.

    python3 walkthroughs/embedding_radius.py [out.svg]
"""

import sys

from flatland import (
    MarkedSurface,
    basepoint_change,
    develop_disk,
    embedding_radius,
    l_origami,
    square_torus,
    staircase,
    torus,
)
from flatland.svg import render_svg


def show(label, S):
    er = embedding_radius(S)
    print("%-28s ER^2 = %-5s bound by %s" % (label, er.value, " and ".join(er.event.kinds)))


show("square torus", square_torus())
show("torus (1,0),(0,2)", torus((1, 0), (0, 2)))
show("L origami", l_origami())
show("L rebased at (3/2,1/2)", basepoint_change(MarkedSurface(l_origami(), (1, ("3/2", "1/2")))))
show("staircase", staircase())

C = develop_disk(l_origami(), 1)
print("L developed to r^2 = 1: %d cells, cone lifts at %s"
      % (len(C.cells), ", ".join("(%s,%s)" % m for m in C.singular_marks)))
if len(sys.argv) > 1:
    with open(sys.argv[1], "wb") as fh:
        fh.write(render_svg(C, title="L origami, r^2 = 1"))
