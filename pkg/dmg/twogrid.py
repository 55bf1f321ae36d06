"""
Configurations à deux grilles rouge-noir

Opérateurs grossiers de Galerkin, matrices de correction (CGC), leurs
symboles, et les solveurs directs à deux grilles (multiplicatif et additif).
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Dict, Optional, Tuple, Union

import numpy as np

from .aliasing import BiorthogonalBasis
from .config import DMGConfig
from .core import (
    DTYPE,
    OpCounter,
    SparseMatrix,
    as_vector,
    dense_inverse,
    dense_lu_solve,
    diagonal_solve,
    frobenius,
    spmm,
    spmv,
)
from .errors import DimensionMismatchError, DMGError, SingularCoarseMatrixError, SingularMatrixError
from .filterbank import SymbolQuad, extract_symbols, filter_from_symbols
from .partition import Color, ColorLike, RedBlackPartition, downsample, mirror, upsample

logger = logging.getLogger(__name__)


class FilterKind(str, Enum):
    """Filtres symboliques résolus contre la matrice du système"""
    IDENTITY = "identity"
    MIRROR = "mirror-of-A"


FilterSpec = Union[FilterKind, SparseMatrix]


class SolveMode(str, Enum):
    MULTIPLICATIVE = "multiplicative"
    ADDITIVE = "additive"


@dataclass(frozen=True)
class TwoGridConfig:
    """Partition et quatre filtres inter-grilles (F̄_R, F̄_I, F̃_R, F̃_I)"""
    partition: RedBlackPartition
    FR_red: FilterSpec = FilterKind.IDENTITY
    FI_red: FilterSpec = FilterKind.IDENTITY
    FR_black: FilterSpec = FilterKind.IDENTITY
    FI_black: FilterSpec = FilterKind.IDENTITY

    def __post_init__(self):
        n = self.partition.n
        for name in ("FR_red", "FI_red", "FR_black", "FI_black"):
            spec = getattr(self, name)
            if isinstance(spec, SparseMatrix) and spec.shape != (n, n):
                raise DimensionMismatchError(f"{name}: forme {spec.shape}, attendu ({n}, {n})")

    @classmethod
    def multiplicative_standard(cls, P: RedBlackPartition) -> "TwoGridConfig":
        """F̄_R = F̄_I = F̃_R = I, F̃_I = A*"""
        return cls(P, FI_black=FilterKind.MIRROR)

    @classmethod
    def additive_standard(cls, P: RedBlackPartition) -> "TwoGridConfig":
        """F̄_I = F̃_I = A*, restrictions identité"""
        return cls(P, FI_red=FilterKind.MIRROR, FI_black=FilterKind.MIRROR)

    def restriction(self, color: ColorLike) -> FilterSpec:
        return self.FR_red if Color.parse(color) is Color.RED else self.FR_black

    def interpolation(self, color: ColorLike) -> FilterSpec:
        return self.FI_red if Color.parse(color) is Color.RED else self.FI_black

    def describe(self) -> Dict[str, str]:
        def tag(spec):
            return spec.value if isinstance(spec, FilterKind) else f"explicit(nnz={spec.nnz})"
        return {name: tag(getattr(self, name)) for name in ("FR_red", "FI_red", "FR_black", "FI_black")}


def resolve_filter(spec: FilterSpec, A: SparseMatrix, P: RedBlackPartition) -> Optional[SparseMatrix]:
    """Matrice du filtre, ou None pour l'identité symbolique"""
    if isinstance(spec, SparseMatrix):
        return spec
    if spec is FilterKind.IDENTITY:
        return None
    if spec is FilterKind.MIRROR:
        return mirror(P, A)
    raise DMGError(f"Filtre inconnu: {spec}")


def filter_symbols(
    spec: FilterSpec, lambdas: Tuple[np.ndarray, np.ndarray], basis: BiorthogonalBasis
) -> Tuple[np.ndarray, np.ndarray]:
    """Symboles (L, H) d'un filtre; le miroir de A échange Λ_L et Λ_H"""
    lam_L, lam_H = lambdas
    if isinstance(spec, SparseMatrix):
        return extract_symbols(spec, basis)
    if spec is FilterKind.IDENTITY:
        return np.ones_like(lam_L), np.ones_like(lam_H)
    return lam_H.copy(), lam_L.copy()


# ==================== OPÉRATEURS GROSSIERS ====================

@dataclass
class CoarseOperators:
    """Restriction D_c F_R, interpolation F_I U_c et matrice grossière de Galerkin"""
    color: Color
    partition: RedBlackPartition
    restriction_filter: Optional[SparseMatrix]
    interpolation_filter: Optional[SparseMatrix]
    coarse_matrix: SparseMatrix

    @property
    def indices(self) -> np.ndarray:
        return self.partition.indices(self.color)

    def restrict(self, x, counter: Optional[OpCounter] = None) -> np.ndarray:
        if self.restriction_filter is not None:
            x = spmv(self.restriction_filter, x, counter)
        return downsample(self.partition, self.color, x)

    def interpolate(self, y, counter: Optional[OpCounter] = None) -> np.ndarray:
        if self.interpolation_filter is None:
            return upsample(self.partition, self.color, y)
        columns = SparseMatrix(self.interpolation_filter.csr[:, self.indices])
        return spmv(columns, y, counter)

    def restriction_matrix(self) -> np.ndarray:
        """D_c F_R dense (n/2 × n)"""
        n = self.partition.n
        F = np.eye(n, dtype=DTYPE) if self.restriction_filter is None else self.restriction_filter.to_dense()
        return F[self.indices]

    def interpolation_matrix(self) -> np.ndarray:
        """F_I U_c dense (n × n/2)"""
        n = self.partition.n
        F = np.eye(n, dtype=DTYPE) if self.interpolation_filter is None else self.interpolation_filter.to_dense()
        return F[:, self.indices]


def build_coarse(
    A: SparseMatrix,
    config: TwoGridConfig,
    color: ColorLike,
    dmg_config: Optional[DMGConfig] = None,
    counter: Optional[OpCounter] = None,
) -> CoarseOperators:
    """
    Matrice grossière de Galerkin D_c F_R A F_I U_c

    Les filtres identité sont traités par sélection d'indices; le produit est
    vérifié densément jusqu'à galerkin_check_limit.
    """
    dmg_config = dmg_config or DMGConfig()
    P = config.partition
    color = Color.parse(color)
    if A.shape != (P.n, P.n):
        raise DimensionMismatchError(f"build_coarse: matrice {A.shape} pour n={P.n}")
    idx = P.indices(color)
    F_R = resolve_filter(config.restriction(color), A, P)
    F_I = resolve_filter(config.interpolation(color), A, P)

    if F_R is None:
        RA = SparseMatrix(A.csr[idx])
    else:
        RA = spmm(SparseMatrix(F_R.csr[idx]), A, counter, dmg_config)
    if F_I is None:
        coarse = SparseMatrix(RA.csr[:, idx])
    else:
        coarse = spmm(RA, SparseMatrix(F_I.csr[:, idx]), counter, dmg_config)

    ops = CoarseOperators(color, P, F_R, F_I, coarse)
    if P.n <= dmg_config.galerkin_check_limit:
        reference = ops.restriction_matrix() @ A.to_dense() @ ops.interpolation_matrix()
        gap = float(np.abs(reference - coarse.to_dense()).max())
        if gap > 1e-12 * max(float(np.abs(reference).max()), 1.0):
            raise DMGError(f"Condition de Galerkin violée ({color.value}): écart {gap:.3e}")
    logger.debug("Matrice grossière %s: n=%d, nnz=%d", color.value, coarse.nrows, coarse.nnz)
    return ops


def coarse_inverse(ops: CoarseOperators, dmg_config: Optional[DMGConfig] = None, level: int = 1) -> np.ndarray:
    try:
        return dense_inverse(ops.coarse_matrix, dmg_config)
    except SingularMatrixError as e:
        raise SingularCoarseMatrixError(level, ops.color.tag, ops.color.value, e.pivot) from e


def cgc_matrix(A: SparseMatrix, ops: CoarseOperators, dmg_config: Optional[DMGConfig] = None) -> np.ndarray:
    """K = I - I_I A_c⁻¹ I_R A (dense, échelle de vérification)"""
    inv = coarse_inverse(ops, dmg_config)
    n = ops.partition.n
    return np.eye(n, dtype=DTYPE) - ops.interpolation_matrix() @ inv @ ops.restriction_matrix() @ A.to_dense()


# ==================== SYMBOLES ====================

@dataclass
class DeltaSymbols:
    delta_red: np.ndarray
    delta_black: np.ndarray


@dataclass
class CgcSymbols:
    """Blocs diagonaux de V^H K W: Γ_{L→L}, Γ_{H→L}, Γ_{L→H}, Γ_{H→H}"""
    LL: np.ndarray
    HL: np.ndarray
    LH: np.ndarray
    HH: np.ndarray

    def as_matrix(self) -> np.ndarray:
        """[[Γ_LL, Γ_HL], [Γ_LH, Γ_HH]] dans l'ordre (L, H)"""
        return np.block([[np.diag(self.LL), np.diag(self.HL)], [np.diag(self.LH), np.diag(self.HH)]])


def system_symbols(A: SparseMatrix, basis: BiorthogonalBasis) -> Tuple[np.ndarray, np.ndarray]:
    """(Λ_L, Λ_H) de A dans la base"""
    return extract_symbols(A, basis)


def config_symbols(A: SparseMatrix, config: TwoGridConfig, basis: BiorthogonalBasis) -> SymbolQuad:
    lambdas = system_symbols(A, basis)
    return SymbolQuad(
        *filter_symbols(config.FR_red, lambdas, basis),
        *filter_symbols(config.FI_red, lambdas, basis),
        *filter_symbols(config.FR_black, lambdas, basis),
        *filter_symbols(config.FI_black, lambdas, basis),
    )


def _delta(R_L, R_H, I_L, I_H, lam_L, lam_H) -> np.ndarray:
    return R_L * lam_L * I_L + R_H * lam_H * I_H


def delta_symbols(A: SparseMatrix, config: TwoGridConfig, basis: BiorthogonalBasis) -> DeltaSymbols:
    """Δ̄ = Π̄_RL Λ_L Π̄_IL + Π̄_RH Λ_H Π̄_IH, et Δ̃ de même"""
    lam_L, lam_H = system_symbols(A, basis)
    s = config_symbols(A, config, basis)
    return DeltaSymbols(
        delta_red=_delta(s.R_red_L, s.R_red_H, s.I_red_L, s.I_red_H, lam_L, lam_H),
        delta_black=_delta(s.R_black_L, s.R_black_H, s.I_black_L, s.I_black_H, lam_L, lam_H),
    )


def _checked_delta(delta: np.ndarray, color: Color, dmg_config: DMGConfig) -> np.ndarray:
    scale = float(np.abs(delta).max()) if delta.size else 0.0
    if scale == 0.0 or np.any(np.abs(delta) < dmg_config.singular_pivot * scale):
        raise SingularCoarseMatrixError(1, color.tag, color.value, pivot=float(np.abs(delta).min()))
    return delta


def cgc_symbols(
    A: SparseMatrix,
    config: TwoGridConfig,
    color: ColorLike,
    basis: BiorthogonalBasis,
    dmg_config: Optional[DMGConfig] = None,
) -> CgcSymbols:
    """
    Blocs Γ analytiques:

        rouge: Γ_LL = I - Π_IL Δ⁻¹ Π_RL Λ_L   Γ_HL = -Π_IL Δ⁻¹ Π_RH Λ_H
               Γ_LH = -Π_IH Δ⁻¹ Π_RL Λ_L     Γ_HH = I - Π_IH Δ⁻¹ Π_RH Λ_H
        noir:  termes croisés de signe +
    """
    dmg_config = dmg_config or DMGConfig()
    color = Color.parse(color)
    lam_L, lam_H = system_symbols(A, basis)
    s = config_symbols(A, config, basis)
    if color is Color.RED:
        R_L, R_H, I_L, I_H, sign = s.R_red_L, s.R_red_H, s.I_red_L, s.I_red_H, -1.0
    else:
        R_L, R_H, I_L, I_H, sign = s.R_black_L, s.R_black_H, s.I_black_L, s.I_black_H, 1.0
    inv = 1.0 / _checked_delta(_delta(R_L, R_H, I_L, I_H, lam_L, lam_H), color, dmg_config)
    return CgcSymbols(
        LL=1.0 - I_L * inv * R_L * lam_L,
        HL=sign * I_L * inv * R_H * lam_H,
        LH=sign * I_H * inv * R_L * lam_L,
        HH=1.0 - I_H * inv * R_H * lam_H,
    )


def galerkin_inverse_check(
    A: SparseMatrix,
    config: TwoGridConfig,
    color: ColorLike,
    basis: BiorthogonalBasis,
    tol: float = 1e-10,
    dmg_config: Optional[DMGConfig] = None,
) -> Tuple[bool, float]:
    """
    Compare A_c⁻¹ = 4 (D_c W_L) Δ⁻¹ (D_c V_L)^H à l'inversion dense

    Returns:
        (succès, écart de Frobenius relatif)
    """
    dmg_config = dmg_config or DMGConfig()
    color = Color.parse(color)
    P = config.partition
    deltas = delta_symbols(A, config, basis)
    delta = deltas.delta_red if color is Color.RED else deltas.delta_black
    delta = _checked_delta(delta, color, dmg_config)
    idx = P.indices(color)
    formula = 4.0 * (basis.W_L[idx] / delta[None, :]) @ basis.V_L[idx].conj().T
    ops = build_coarse(A, config, color, dmg_config)
    dense = coarse_inverse(ops, dmg_config)
    residual = float(np.linalg.norm(formula - dense) / max(np.linalg.norm(dense), 1e-300))
    return residual <= tol, residual


def _relative_gap(lhs: np.ndarray, rhs: np.ndarray) -> float:
    scale = max(float(np.abs(lhs).max()), float(np.abs(rhs).max()), 1e-300)
    return float(np.abs(lhs - rhs).max()) / scale


@dataclass
class DirectConditionReport:
    passes: bool
    residuals: Dict[str, float]
    tolerance: float

    def to_dict(self) -> dict:
        return {"passes": self.passes, "residuals": self.residuals, "tolerance": self.tolerance}


def check_direct_conditions(
    symbols: SymbolQuad,
    lambdas: Tuple[np.ndarray, np.ndarray],
    mode: Union[SolveMode, str],
    tol: float = 1e-10,
) -> DirectConditionReport:
    """
    Conditions de solveur direct dans l'espace des symboles

    multiplicatif: Π̄_RL Λ_L Π̃_IL = Π̄_RH Λ_H Π̃_IH (équivaut à K̃K̄ = 0),
    avec Δ̄ et Δ̃ non nuls.
    additif: conditions polynomiales de K̄ + K̃ = I (dénominateurs chassés), écarts
    relatifs; les formes normalisées par Δ restent en diagnostic.
    """
    mode = SolveMode(mode)
    s = symbols
    lam_L = np.asarray(lambdas[0], dtype=DTYPE)
    lam_H = np.asarray(lambdas[1], dtype=DTYPE)
    d_red = _delta(s.R_red_L, s.R_red_H, s.I_red_L, s.I_red_H, lam_L, lam_H)
    d_black = _delta(s.R_black_L, s.R_black_H, s.I_black_L, s.I_black_H, lam_L, lam_H)
    scale = max(float(np.abs(d_red).max()), float(np.abs(d_black).max()), 1e-300)
    guard = min(float(np.abs(d_red).min()), float(np.abs(d_black).min())) / scale
    residuals: Dict[str, float] = {"delta_min_relative": guard}

    if mode is SolveMode.MULTIPLICATIVE:
        gap = s.R_red_L * lam_L * s.I_black_L - s.R_red_H * lam_H * s.I_black_H
        residuals["red_black_product"] = float(np.abs(gap).max())
        checked = ["red_black_product"]
    else:
        rL, rH, iL, iH = s.R_red_L, s.R_red_H, s.I_red_L, s.I_red_H
        bL, bH, jL, jH = s.R_black_L, s.R_black_H, s.I_black_L, s.I_black_H
        # K̄ + K̃ = I, dénominateurs Δ̄Δ̃ chassés: blocs diagonaux puis croisés
        residuals["poly_diagonal"] = _relative_gap(
            rL * bL * lam_L ** 2 * iL * jL,
            rH * bH * lam_H ** 2 * iH * jH,
        )
        residuals["poly_HL"] = _relative_gap(
            rH * bL * lam_L * iL * jL + rH * bH * lam_H * iL * jH,
            rL * bH * lam_L * iL * jL + rH * bH * lam_H * iH * jL,
        )
        residuals["poly_LH"] = _relative_gap(
            rL * bL * lam_L * iH * jL + rL * bH * lam_H * iH * jH,
            rL * bL * lam_L * iL * jH + rH * bL * lam_H * iH * jH,
        )
        checked = ["poly_diagonal", "poly_HL", "poly_LH"]

        # formes normalisées par Δ (diagnostic)
        with np.errstate(divide="ignore", invalid="ignore"):
            residuals["normalised_LL"] = float(np.abs(iL * rL * lam_L / d_red + jL * bL * lam_L / d_black - 1).max())
            residuals["normalised_HH"] = float(np.abs(iH * rH * lam_H / d_red + jH * bH * lam_H / d_black - 1).max())
            residuals["normalised_HL"] = float(np.abs(iL * rH / d_red - jL * bH / d_black).max())
            residuals["normalised_LH"] = float(np.abs(iH * rL / d_red - jH * bL / d_black).max())

    worst = max(residuals[k] for k in checked)
    residuals["max"] = worst
    passes = bool(np.isfinite(worst) and worst <= tol and guard > 1e-13)
    return DirectConditionReport(passes=passes, residuals=residuals, tolerance=tol)


# ==================== FACTORISATIONS (VÉRIFICATION) ====================

@dataclass
class ErrorOperators:
    K_red: np.ndarray
    K_black: np.ndarray
    product_norm: float
    sum_norm: float


def error_operators(
    A: SparseMatrix, config: TwoGridConfig, dmg_config: Optional[DMGConfig] = None
) -> ErrorOperators:
    """K̄, K̃, ‖K̃K̄‖_F et ‖K̄ + K̃ - I‖_F"""
    K_red = cgc_matrix(A, build_coarse(A, config, Color.RED, dmg_config), dmg_config)
    K_black = cgc_matrix(A, build_coarse(A, config, Color.BLACK, dmg_config), dmg_config)
    n = config.partition.n
    return ErrorOperators(
        K_red=K_red,
        K_black=K_black,
        product_norm=frobenius(K_black @ K_red),
        sum_norm=frobenius(K_red + K_black - np.eye(n)),
    )


def _channel_operator(A: SparseMatrix, config: TwoGridConfig, color: Color, dmg_config) -> Tuple[np.ndarray, np.ndarray]:
    ops = build_coarse(A, config, color, dmg_config)
    return ops.interpolation_matrix() @ coarse_inverse(ops, dmg_config) @ ops.restriction_matrix(), ops.interpolation_matrix()


def multiplicative_factorization(
    A: SparseMatrix, config: TwoGridConfig, dmg_config: Optional[DMGConfig] = None
) -> np.ndarray:
    """
    Opérateur du cycle multiplicatif, dans l'ordre d'exécution (rouge puis noir):
    Ī_IĀ⁻¹Ī_R + Ĩ_IÃ⁻¹Ĩ_R - Ĩ_IÃ⁻¹(Ĩ_R A Ī_I)Ā⁻¹Ī_R
    """
    red, _ = _channel_operator(A, config, Color.RED, dmg_config)
    black, _ = _channel_operator(A, config, Color.BLACK, dmg_config)
    return red + black - black @ A.to_dense() @ red


def additive_factorization(
    A: SparseMatrix, config: TwoGridConfig, dmg_config: Optional[DMGConfig] = None
) -> np.ndarray:
    """Ī_IĀ⁻¹Ī_R + Ĩ_IÃ⁻¹Ĩ_R"""
    red, _ = _channel_operator(A, config, Color.RED, dmg_config)
    black, _ = _channel_operator(A, config, Color.BLACK, dmg_config)
    return red + black


def perturb_config(
    config: TwoGridConfig,
    A: SparseMatrix,
    basis: BiorthogonalBasis,
    eps: float,
) -> TwoGridConfig:
    """
    Injection de faute: remplace F̃_I par un filtre explicite dont le premier
    symbole L est décalé de eps
    """
    lambdas = system_symbols(A, basis)
    E_L, E_H = filter_symbols(config.FI_black, lambdas, basis)
    E_L = E_L.copy()
    E_L[0] += eps
    return replace(config, FI_black=filter_from_symbols(basis, E_L, E_H))


# ==================== SOLVEURS À DEUX GRILLES ====================

@dataclass
class TwoGridResult:
    """Solution et intermédiaires (v0, r, e0 ou v_red, v_black)"""
    v: np.ndarray
    intermediates: Dict[str, np.ndarray] = field(default_factory=dict)
    multiplications: int = 0


def _coarse_solve(
    ops: CoarseOperators,
    rhs: np.ndarray,
    mode: SolveMode,
    dmg_config: DMGConfig,
    counter: OpCounter,
    hierarchy=None,
    nodes: Optional[np.ndarray] = None,
) -> np.ndarray:
    Ac = ops.coarse_matrix
    try:
        if Ac.is_diagonal(dmg_config.diagonal_tolerance):
            return diagonal_solve(Ac, rhs, counter, dmg_config)
        if Ac.nrows <= dmg_config.dense_crossover:
            return dense_lu_solve(Ac, rhs, counter, dmg_config)
    except SingularMatrixError as e:
        raise SingularCoarseMatrixError(1, ops.color.tag, ops.color.value, e.pivot) from e

    from .multigrid import EvenOddHierarchy, solve_subsystem

    hierarchy = hierarchy or EvenOddHierarchy(n0=dmg_config.n0)
    if nodes is None:
        nodes = hierarchy.root(ops.partition.n)
    logger.debug("Solve grossier %s récursif (n=%d > %d)", ops.color.value, Ac.nrows, dmg_config.dense_crossover)
    return solve_subsystem(
        Ac, rhs, hierarchy, nodes[ops.indices], depth=1, path=ops.color.tag,
        mode=mode.value, config=dmg_config, counter=counter,
    )


def solve_multiplicative_2g(
    A: SparseMatrix,
    config: TwoGridConfig,
    f,
    dmg_config: Optional[DMGConfig] = None,
    hierarchy=None,
    counter: Optional[OpCounter] = None,
) -> TwoGridResult:
    """
    Cycle multiplicatif: itération emboîtée rouge puis correction noire

        v0 = Ī_I Ā⁻¹ D̄F̄_R f ; r = f - A v0 ; e0 = Ĩ_I Ã⁻¹ D̃F̃_R r ; v = v0 + e0
    """
    dmg_config = dmg_config or DMGConfig()
    counter = counter or OpCounter()
    f = as_vector(f, config.partition.n)
    nodes = hierarchy.root(config.partition.n) if hierarchy is not None else None

    red = build_coarse(A, config, Color.RED, dmg_config, counter)
    v_red = _coarse_solve(red, red.restrict(f, counter), SolveMode.MULTIPLICATIVE, dmg_config, counter, hierarchy, nodes)
    v0 = red.interpolate(v_red, counter)

    r = f - spmv(A, v0, counter)

    black = build_coarse(A, config, Color.BLACK, dmg_config, counter)
    v_black = _coarse_solve(black, black.restrict(r, counter), SolveMode.MULTIPLICATIVE, dmg_config, counter, hierarchy, nodes)
    e0 = black.interpolate(v_black, counter)

    return TwoGridResult(v=v0 + e0, intermediates={"v0": v0, "r": r, "e0": e0}, multiplications=counter.multiplications)


def solve_additive_2g(
    A: SparseMatrix,
    config: TwoGridConfig,
    f,
    dmg_config: Optional[DMGConfig] = None,
    hierarchy=None,
    counter: Optional[OpCounter] = None,
) -> TwoGridResult:
    """
    Cycle additif: v = Ī_I Ā⁻¹ D̄F̄_R f + Ĩ_I Ã⁻¹ D̃F̃_R f

    Les deux canaux sont indépendants; ils tournent en parallèle si threads > 1.
    """
    dmg_config = dmg_config or DMGConfig()
    counter = counter or OpCounter()
    f = as_vector(f, config.partition.n)
    nodes = hierarchy.root(config.partition.n) if hierarchy is not None else None

    def channel(color: Color) -> np.ndarray:
        ops = build_coarse(A, config, color, dmg_config, counter)
        v_c = _coarse_solve(ops, ops.restrict(f, counter), SolveMode.ADDITIVE, dmg_config, counter, hierarchy, nodes)
        return ops.interpolate(v_c, counter)

    if dmg_config.threads > 1:
        with ThreadPoolExecutor(max_workers=2) as executor:
            futures = [executor.submit(channel, c) for c in (Color.RED, Color.BLACK)]
            v_red, v_black = (fut.result() for fut in futures)
    else:
        v_red, v_black = channel(Color.RED), channel(Color.BLACK)

    return TwoGridResult(
        v=v_red + v_black,
        intermediates={"v_red": v_red, "v_black": v_black},
        multiplications=counter.multiplications,
    )
