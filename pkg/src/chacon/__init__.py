"""Chacon's weakly mixing, not strongly mixing automorphism of the two-torus.

Exact dyadic construction of the maps U_n, the movements that build them,
a piecewise rigid flow whose time-one map is U, and diagnostics for mixing
and for the regularity of the generating velocity field.
"""

from .dyadic import Dyadic, DyadicSquare, GridCell, TorusPoint
from .configuration import Configuration, chacon_v_sequence, apply_sequence
from .automorphism import (
    GridPermutation,
    PiecewiseTranslation,
    build_U1,
    build_Un_direct,
    build_Un_recursive,
    grid_permutation_of,
    to_grid_permutation,
)
from .flow import FlowSchedule, chacon_schedule, evaluate_flow
from .analysis import strong_mixing_witness, tv_estimate, weak_mixing_statistic

__version__ = "0.1.0"
