"""Negativity and binegativity spectra of stabilizer Gibbs states.

The sector-table engine reduces every spectral quantity of
``rho ~ prod_i (1 + t_i theta_i)`` to a Walsh-Hadamard transform over the
``2**k`` sign sectors of the generators, where ``k`` is the number of
generators whose restrictions to region A fail to commute.
"""

from .dense import VerificationRecord, gibbs_dense, matrix_abs, partial_transpose, pauli_matrix, verify_model
from .errors import (
    ConfigError,
    DependentGeneratorsError,
    GuardError,
    ModelError,
    NonCommutingError,
    StabnegError,
    VerificationMismatch,
)
from .lattice import (
    BoundaryModel,
    LatticeGeometry,
    TorusModel,
    build_2d_torus,
    build_boundary_2d,
    build_boundary_3d,
    build_boundary_4d,
    css_couplings,
    interleaved_order,
)
from .pauli import (
    Bipartition,
    CommutationMatrix,
    PauliOperator,
    StabilizerModel,
    classify_generators,
    commutation_matrix,
    commutes,
    independence_rank,
    model_from_dict,
    model_from_json,
    model_to_dict,
    model_to_json,
    realize_from_c,
    restrict,
)
from .spectrum import (
    BoundaryReduction,
    PptReport,
    SectorTable,
    analyze,
    binegativity_fwht,
    binegativity_spectrum,
    boundary_reduced_spectrum,
    entanglement_negativity,
    fwht,
    model_tables,
    negativity_spectrum,
    ppt_report,
    psi_table,
    sign_psi,
    trace_norm,
)

__version__ = "0.1.0"

__all__ = [
    "Bipartition",
    "BoundaryModel",
    "BoundaryReduction",
    "CommutationMatrix",
    "ConfigError",
    "DependentGeneratorsError",
    "GuardError",
    "LatticeGeometry",
    "ModelError",
    "NonCommutingError",
    "PauliOperator",
    "PptReport",
    "SectorTable",
    "StabilizerModel",
    "StabnegError",
    "TorusModel",
    "VerificationMismatch",
    "VerificationRecord",
    "analyze",
    "binegativity_fwht",
    "binegativity_spectrum",
    "boundary_reduced_spectrum",
    "build_2d_torus",
    "build_boundary_2d",
    "build_boundary_3d",
    "build_boundary_4d",
    "classify_generators",
    "commutation_matrix",
    "commutes",
    "css_couplings",
    "entanglement_negativity",
    "fwht",
    "gibbs_dense",
    "independence_rank",
    "interleaved_order",
    "matrix_abs",
    "model_from_dict",
    "model_from_json",
    "model_tables",
    "model_to_dict",
    "model_to_json",
    "negativity_spectrum",
    "partial_transpose",
    "pauli_matrix",
    "ppt_report",
    "psi_table",
    "realize_from_c",
    "restrict",
    "sign_psi",
    "trace_norm",
    "verify_model",
]
