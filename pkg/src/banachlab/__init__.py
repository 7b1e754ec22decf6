"""Fourier decay on finite abelian groups, vector-valued norms, PGL_3 buildings and expanders."""

from . import building, expander, fourier, groups, harness, laurent, norms, residue
from .groups import FiniteAbelianGroup, SubgroupChain, maximal_chains
from .norms import CoefficientSpace
from .residue import LAURENT, PADIC, RingElem, RingSpec

__version__ = "0.1.0"

__all__ = [
    "building",
    "expander",
    "fourier",
    "groups",
    "harness",
    "laurent",
    "norms",
    "residue",
    "FiniteAbelianGroup",
    "SubgroupChain",
    "maximal_chains",
    "CoefficientSpace",
    "RingSpec",
    "RingElem",
    "PADIC",
    "LAURENT",
]
