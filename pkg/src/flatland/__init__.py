"""Translation surfaces as polygon gluings, with exact rational arithmetic."""

from .geometry import Mat2, Rect, RectUnion, Vec, rational, rect_union_is_disk, rect_union_normalize
from .surface import (
    MarkedSurface,
    Plane,
    SurfacePresentation,
    SurfaceProvider,
    validate,
    vertex_links,
)
from .families import builtin, l_origami, origami, plane, square_torus, staircase, torus, torus_triangles
from .develop import (
    DevelopedComplex,
    Embedded,
    NoImmersion,
    NonTermination,
    Overlap,
    ball_embed,
    develop_disk,
    embedding_radius,
    embeds,
    er_compact,
    immerse,
    point_fiber,
    trace,
)
from .transform import basepoint_change, fusion, gl2_act, is_affine_automorphism, iso_at_radius
from .predicates import (
    Disjoint,
    EMinus,
    EmbedsSet,
    EPlus,
    Immerses,
    Minus,
    NotImmerses,
    Plus,
    Region,
    member,
    separating_certificate,
    verify_certificate,
)
from .converge import (
    SurfaceSequence,
    certify_convergence,
    certify_convergence_marked,
    cluster_at_radius,
    compactness_probe,
)

__version__ = "0.1.0"

__all__ = [
    "Mat2", "Rect", "RectUnion", "Vec", "rational", "rect_union_is_disk", "rect_union_normalize",
    "MarkedSurface", "Plane", "SurfacePresentation", "SurfaceProvider", "validate", "vertex_links",
    "builtin", "l_origami", "origami", "plane", "square_torus", "staircase", "torus",
    "torus_triangles",
    "DevelopedComplex", "Embedded", "NoImmersion", "NonTermination", "Overlap", "ball_embed",
    "develop_disk", "embedding_radius", "embeds", "er_compact", "immerse", "point_fiber", "trace",
    "basepoint_change", "fusion", "gl2_act", "is_affine_automorphism", "iso_at_radius",
    "Disjoint", "EMinus", "EmbedsSet", "EPlus", "Immerses", "Minus", "NotImmerses", "Plus",
    "Region", "member", "separating_certificate", "verify_certificate",
    "SurfaceSequence", "certify_convergence", "certify_convergence_marked", "cluster_at_radius",
    "compactness_probe",
]
