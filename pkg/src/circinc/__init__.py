"""Circle tangency incidence counting and level-set experiments.

The most used names are re-exported here; the submodules hold the rest
(``circinc.counting``, ``circinc.estimates``, ``circinc.probab``, ``circinc.cli``).
"""
from .errors import (CircIncError, ConfigError, DegenerateInput, EmptyE, HypothesisViolated, NoValidSplit,
                     NotATriple, NotPrimitive, ToleranceRequired)
from .families import (BipartitePair, Box, CircleFamily, FamilyKind, band_split, bernoulli_thin,
                       bipartite_split, delta_net_family, knapp_family, lattice_family)
from .geom_core import Circle, TangencyRectangle, is_delta_tangent, pair_metrics
from .kernels import BACKEND
from .pyth import PythTriple, count_tangency_vectors, enumerate_primitive_triples, represent_triple
from .regions import RegionKind, RegionSpec

__version__ = "0.1.0"

__all__ = [
    "BACKEND", "BipartitePair", "Box", "CircIncError", "Circle", "CircleFamily", "ConfigError",
    "DegenerateInput", "EmptyE", "FamilyKind", "HypothesisViolated", "NoValidSplit", "NotATriple",
    "NotPrimitive", "PythTriple", "RegionKind", "RegionSpec", "TangencyRectangle", "ToleranceRequired",
    "band_split", "bernoulli_thin", "bipartite_split", "count_tangency_vectors", "delta_net_family",
    "enumerate_primitive_triples", "is_delta_tangent", "knapp_family", "lattice_family", "pair_metrics",
    "represent_triple",
]
