"""Framed flow categories of glued link diagrams, their cohomology, second
Steenrod squares and stable wedge decompositions."""

from .classify import BucketReport, WedgeDecomposition, bucket_report, classify
from .diagram import GluedDiagram, gen_pretzel, gen_torus_braid, jones_polynomial, parse_diagram
from .flowcat import FlowCategory

__version__ = "0.1.0"

__all__ = [
    "BucketReport",
    "FlowCategory",
    "GluedDiagram",
    "WedgeDecomposition",
    "bucket_report",
    "classify",
    "gen_pretzel",
    "gen_torus_braid",
    "jones_polynomial",
    "parse_diagram",
]
