"""Rainbow matchings in edge-coloured multigraphs whose colour classes
are disjoint unions of non-trivial cliques."""
from __future__ import annotations

from .core import (
    ColourClass,
    Instance,
    InstanceError,
    Pair,
    RainbowMatching,
    canonical,
    dumps,
    edges_between,
    is_maximal,
    load,
    loads,
    normalize,
    pair,
    pair_multiplicity,
    validate,
    verify_rainbow,
)
from .kernel import BACKEND

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ColourClass",
    "Instance",
    "InstanceError",
    "Pair",
    "RainbowMatching",
    "canonical",
    "dumps",
    "edges_between",
    "is_maximal",
    "load",
    "loads",
    "normalize",
    "pair",
    "pair_multiplicity",
    "validate",
    "verify_rainbow",
]
