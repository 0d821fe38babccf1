"""Separate two tori by open sets and print the certificate as JSON.

    python3 walkthroughs/separation.py
"""

from flatland import separating_certificate, square_torus, torus, torus_triangles
from flatland.io import certificate_to_dict, dumps
from flatland.predicates import verify_certificate

S, T = square_torus(), torus((1, 0), (0, 2))
cert = separating_certificate(S, T, 4)
print("re-verified:", verify_certificate(cert, S, T))
print(dumps(certificate_to_dict(cert)), end="")

# one torus cut two ways cannot be separated at any radius
print(separating_certificate(S, torus_triangles(), 9))
