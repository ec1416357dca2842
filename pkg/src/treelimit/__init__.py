"""Harmonic maps into hyperbolic 3-space and the metric trees they degenerate to."""

from . import degeneration, group_rep, harmonic, hyperbolic, rtree
from .degeneration import (
    DegenerationRun,
    RescaledMetric,
    gromov_delta,
    induced_action,
    projective_compare,
    rescale,
    run_degeneration,
    tree_from_metric,
)
from .group_rep import Presentation, Representation, Word, diagonal_stretch, free_group, octagon_twist, surface_group
from .harmonic import TwistedGraph, minimize, pullback_metric, rose
from .rtree import SimplicialTree, TreeAction, TreeIsometry, TreePoint

__all__ = [
    "degeneration",
    "group_rep",
    "harmonic",
    "hyperbolic",
    "rtree",
    "DegenerationRun",
    "RescaledMetric",
    "gromov_delta",
    "induced_action",
    "projective_compare",
    "rescale",
    "run_degeneration",
    "tree_from_metric",
    "Presentation",
    "Representation",
    "Word",
    "diagonal_stretch",
    "free_group",
    "octagon_twist",
    "surface_group",
    "TwistedGraph",
    "minimize",
    "pullback_metric",
    "rose",
    "SimplicialTree",
    "TreeAction",
    "TreeIsometry",
    "TreePoint",
]
