# DMG Module
from .config import DMGConfig
from .errors import (
    DMGError,
    DimensionMismatchError,
    SingularMatrixError,
    SingularCoarseMatrixError,
    HierarchyExhaustedError,
    NonBiorthogonalBasisError,
    AliasingPatternError,
    NotAFilterError,
    InvalidConfigError,
)
from .core import SparseMatrix, OpCounter, spmv, spmm
from .partition import Color, RedBlackPartition, downsample, upsample, mirror
from .aliasing import BiorthogonalBasis, check_rbhap, check_surjective_form, check_multigrid_harmonic_basis
from .filterbank import FilterQuad, SymbolQuad, run_bank, check_vetterli, make_qmf_bank
from .twogrid import TwoGridConfig, build_coarse, cgc_matrix, cgc_symbols, check_direct_conditions
from .multigrid import (
    EvenOddHierarchy,
    TorusHierarchy,
    SolveReport,
    dmg_multiplicative,
    dmg_additive,
    dmg_additive_multichannel,
    solve,
    count_complexity,
)
from .problems import make_problem, make_source, SourceSpec
from .verify import CheckResult, run_suite

__all__ = [
    "DMGConfig",
    "DMGError",
    "DimensionMismatchError",
    "SingularMatrixError",
    "SingularCoarseMatrixError",
    "HierarchyExhaustedError",
    "NonBiorthogonalBasisError",
    "AliasingPatternError",
    "NotAFilterError",
    "InvalidConfigError",
    "SparseMatrix",
    "OpCounter",
    "spmv",
    "spmm",
    "Color",
    "RedBlackPartition",
    "downsample",
    "upsample",
    "mirror",
    "BiorthogonalBasis",
    "check_rbhap",
    "check_surjective_form",
    "check_multigrid_harmonic_basis",
    "FilterQuad",
    "SymbolQuad",
    "run_bank",
    "check_vetterli",
    "make_qmf_bank",
    "TwoGridConfig",
    "build_coarse",
    "cgc_matrix",
    "cgc_symbols",
    "check_direct_conditions",
    "EvenOddHierarchy",
    "TorusHierarchy",
    "SolveReport",
    "dmg_multiplicative",
    "dmg_additive",
    "dmg_additive_multichannel",
    "solve",
    "count_complexity",
    "make_problem",
    "make_source",
    "SourceSpec",
    "CheckResult",
    "run_suite",
]
