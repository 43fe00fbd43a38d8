"""Block Krylov orthogonalization drivers."""
from .arnoldi import (
    ArnoldiResult,
    ExtendedArnoldiResult,
    block_arnoldi,
    block_extended_arnoldi,
    finalize_arnoldi,
)
from .cmv import CMVResult, block_cmv_arnoldi, cmv_cutoff, finalize_cmv, lm_factors
from .io import format_counters, parse_counters, read_basis, write_basis
from .isometric import (
    IsometricResult,
    block_isometric_arnoldi,
    finalize_alpha_m,
    hessenberg_from_schur,
    reconstruct_aux,
    schur_factors,
    schur_product,
)
from .types import (
    EPS_DEFL,
    RANK_TOL,
    BlockBasis,
    BlockHessenberg,
    CMVStructure,
    Counters,
    DeflationReport,
    VerblunskySequence,
    cmv_pattern,
    start_block,
)

ALGORITHMS = ("arnoldi", "isometric", "laurent_gs", "cmv")
