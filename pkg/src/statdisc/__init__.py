"""Stationary holomorphic discs on Levi non-degenerate hypersurfaces and 2-jet determination."""
from __future__ import annotations

__version__ = "0.1.0"

from .conormal_index import (
    CircleMatrixFunction,
    FibrationEquations,
    assemble_G,
    disc_maslov_index,
    fibration_residual,
    maslov_index,
    matrix_B,
    model_partial_indices,
    total_reality_check,
)
from .disc_core import (
    BoundaryJet1,
    HermitianForm,
    LiftedDisc,
    NormalFormSurface,
    eval_defining,
    holder_norm,
)
from .errors import DiscError, NumericalFailure
from .jet_determination import (
    determination_gap,
    pushforward_disc,
    pushforward_jet1,
    reconstruct_map,
)
from .maps import HolomorphicMap, MapJet2
from .normal_scaling import (
    c4_distance,
    dilate_defining,
    dilate_map,
    pushforward_decay_probe,
    to_normal_form,
)
from .polynomial import ComplexPolynomial, DefiningPolynomial
from .quadric_discs import (
    FullDiscParams,
    StarDiscParams,
    boundary_jet,
    build_disc_full,
    build_disc_star,
    center_of_star,
    invert_center,
    invert_jet,
    quadric_automorphism,
)
from .rh_solver import (
    DiscConstraint,
    SolveReport,
    SolverOptions,
    continuation_solve,
    family_scan,
    solve_disc,
)

__all__ = [name for name in dir() if not name.startswith("_") and name != "annotations"]
