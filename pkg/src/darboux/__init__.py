"""Darboux cyclides in the spherical model of Moebius geometry.

Classification, circle families, forward design, parametrization and
meshing of cyclides, plus hexagonal 3-webs of circles on them.
"""

from .cyclide import Cyclide, Pencil, classify, from_pencil, to_pencil
from .families import CircleFamily, extract_families, families_of
from .moebius import MCircle, MSphere
from .tolerance import DEFAULT, Tolerance

__version__ = "0.1.0"

__all__ = [
    "Cyclide",
    "Pencil",
    "classify",
    "from_pencil",
    "to_pencil",
    "CircleFamily",
    "extract_families",
    "families_of",
    "MCircle",
    "MSphere",
    "DEFAULT",
    "Tolerance",
]
