"""Certify that tall tori converge to the square torus, watch an
alternating sequence fail, and cluster the tori torus((1,0),(0,n)).

    python3 walkthroughs/convergence.py
"""

from gmpy2 import mpq

from flatland import certify_convergence, compactness_probe, square_torus
from flatland.io import parse_sequence

delta = mpq(1, 10)
rep = certify_convergence(parse_sequence("seq:tall-torus"), square_torus(), 4, delta, (1, 40))
print("tall tori:    %s, threshold N = %s" % (rep.verdict, rep.threshold))

rep = certify_convergence(parse_sequence("seq:alternating"), square_torus(), 4, delta, (1, 40))
print("alternating:  %s at n = %s, fiber point %s" % (rep.verdict, rep.refuted_at, rep.witness))

probe = compactness_probe(parse_sequence("seq:torus-n"), mpq(1, 16), 4, 20)
for members in probe.clusters.clusters:
    print("cluster:      n in %s" % [i + 1 for i in members])
