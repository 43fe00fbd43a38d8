"""Short-recurrence orthogonalization of block Krylov spaces of unitary matrices.

The package builds orthonormal bases of polynomial and extended block
Krylov spaces with the matrix Szegő recurrence (block isometric Arnoldi)
and the block CMV recurrence, next to full Gram-Schmidt references, and
assembles the structured projected matrices they induce.
"""
from . import diagnostics, experiments, krylov, linalg, matpoly, operators
from .diagnostics import (
    orthogonality_error,
    projection_error,
    ritz_distances,
    similarity_check,
    verify_verblunsky,
)
from .errors import (
    AdjointUnavailable,
    BlockSzegoError,
    ConvergenceFailure,
    DeflationError,
    DimensionMismatch,
    IndefiniteMatrix,
    InvalidInput,
    InvalidParameter,
    InvalidStart,
    InvalidVerblunsky,
    InverseUnavailable,
    NotHermitian,
    NotNormal,
    NumericalFailure,
    SingularMatrix,
    VerblunskyOverflow,
)
from .krylov import (
    BlockBasis,
    BlockHessenberg,
    CMVStructure,
    DeflationReport,
    VerblunskySequence,
    block_arnoldi,
    block_cmv_arnoldi,
    block_extended_arnoldi,
    block_isometric_arnoldi,
    cmv_cutoff,
    finalize_alpha_m,
    finalize_cmv,
    hessenberg_from_schur,
    schur_factors,
)
from .matpoly import (
    LaurentMatrixPolynomial,
    MatrixPolynomial,
    SpectralMeasure,
    cmv_basis,
    inner_product_action,
    inner_product_measure,
    laurent_action,
    poly_action,
    reversed_polynomial,
    spectral_measure_of,
    szego_polynomials,
)
from .operators import (
    DenseOperator,
    LinearOperator,
    SparseOperator,
    floquet_unitary,
    normal_with_spectrum,
    random_floquet,
    read_matrix_market,
    unitary_with_spectrum,
    write_matrix_market,
)

__version__ = "0.1.0"
