"""
Banc de filtres fini à deux canaux rouge/noir

Conditions de reconstruction parfaite dans l'espace des symboles et bancs
miroirs en quadrature. Les filtres sont assemblés densément (échelle de
vérification).
"""
import logging
from dataclasses import dataclass
from typing import Dict, Tuple, Union

import numpy as np

from .aliasing import BiorthogonalBasis, check_rbhap
from .core import DTYPE, SparseMatrix, as_vector, frobenius, spmv
from .errors import AliasingPatternError, DimensionMismatchError, NotAFilterError
from .partition import Color, RedBlackPartition, downsample, mirror, upsample

logger = logging.getLogger(__name__)

LEAKAGE_TOL = 1e-8


@dataclass(frozen=True)
class FilterQuad:
    """Filtres de restriction (FR) et d'interpolation (FI) des deux canaux"""
    FR_red: SparseMatrix
    FI_red: SparseMatrix
    FR_black: SparseMatrix
    FI_black: SparseMatrix
    partition: RedBlackPartition

    def __post_init__(self):
        n = self.partition.n
        for name in ("FR_red", "FI_red", "FR_black", "FI_black"):
            if getattr(self, name).shape != (n, n):
                raise DimensionMismatchError(f"{name}: forme {getattr(self, name).shape}, attendu ({n}, {n})")

    @classmethod
    def identity(cls, P: RedBlackPartition, gain: complex = 1.0) -> "FilterQuad":
        eye = SparseMatrix.identity(P.n).scale(gain)
        return cls(eye, eye, eye, eye, P)


@dataclass
class SymbolQuad:
    """Symboles (blocs L et H) des quatre filtres, chacun de longueur n/2"""
    R_red_L: np.ndarray
    R_red_H: np.ndarray
    I_red_L: np.ndarray
    I_red_H: np.ndarray
    R_black_L: np.ndarray
    R_black_H: np.ndarray
    I_black_L: np.ndarray
    I_black_H: np.ndarray

    def __post_init__(self):
        sizes = {np.asarray(v).size for v in self.__dict__.values()}
        if len(sizes) != 1:
            raise DimensionMismatchError(f"SymbolQuad: longueurs incohérentes {sorted(sizes)}")
        for key, value in list(self.__dict__.items()):
            setattr(self, key, np.asarray(value, dtype=DTYPE).reshape(-1))

    @classmethod
    def constant(cls, half: int, value: complex) -> "SymbolQuad":
        return cls(*[np.full(half, value, dtype=DTYPE) for _ in range(8)])


@dataclass
class VetterliReport:
    passes: bool
    residuals: Dict[str, float]
    tolerance: float

    def to_dict(self) -> dict:
        return {"passes": self.passes, "residuals": self.residuals, "tolerance": self.tolerance}


# ==================== BANC ====================

def run_bank(quad: FilterQuad, s) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """
    Analyse puis synthèse d'un signal

    Returns:
        (t, s_red, s_black) avec s_red = D̄ F̄_R s, s_black = D̃ F̃_R s et
        t = F̄_I Ū s_red + F̃_I Ũ s_black
    """
    P = quad.partition
    s = as_vector(s, P.n)
    s_red = downsample(P, Color.RED, spmv(quad.FR_red, s))
    s_black = downsample(P, Color.BLACK, spmv(quad.FR_black, s))
    t = spmv(quad.FI_red, upsample(P, Color.RED, s_red)) + spmv(quad.FI_black, upsample(P, Color.BLACK, s_black))
    return t, s_red, s_black


# ==================== SYMBOLES ====================

def extract_symbols(F: SparseMatrix, basis: BiorthogonalBasis) -> Tuple[np.ndarray, np.ndarray]:
    """
    Symboles (E_L, E_H) = diag(V^H F W) restreint à L puis H

    Raises:
        NotAFilterError: si la fuite hors-diagonale dépasse 1e-8·‖F‖_F
    """
    if F.shape != (basis.n, basis.n):
        raise DimensionMismatchError(f"Filtre {F.shape} pour une base de taille {basis.n}")
    S = basis.V.conj().T @ F.to_dense() @ basis.W
    diag = np.diag(S).copy()
    leakage = float(np.abs(S - np.diag(diag)).max()) if basis.n > 1 else 0.0
    if leakage > LEAKAGE_TOL * max(frobenius(F), 1e-300):
        raise NotAFilterError(f"Fuite hors-diagonale {leakage:.3e}: la matrice n'est pas un filtre dans cette base")
    return diag[basis.L], diag[basis.H]


def filter_from_symbols(basis: BiorthogonalBasis, E_L, E_H) -> SparseMatrix:
    """F = W diag(E) V^H avec E_L sur les colonnes L et E_H sur les colonnes H"""
    E = np.zeros(basis.n, dtype=DTYPE)
    E[basis.L] = E_L
    E[basis.H] = E_H
    dense = (basis.W * E[None, :]) @ basis.V.conj().T
    scale = float(np.abs(dense).max())
    return SparseMatrix.from_dense(dense, drop_tolerance=1e-15 * scale)


def symbols_of_quad(quad: FilterQuad, basis: BiorthogonalBasis) -> SymbolQuad:
    R_red = extract_symbols(quad.FR_red, basis)
    I_red = extract_symbols(quad.FI_red, basis)
    R_black = extract_symbols(quad.FR_black, basis)
    I_black = extract_symbols(quad.FI_black, basis)
    return SymbolQuad(*R_red, *I_red, *R_black, *I_black)


def check_vetterli(symbols: SymbolQuad, tol: float = 1e-10) -> VetterliReport:
    """
    Conditions de reconstruction parfaite (motifs d'aliasing de facteur ½)

        ½(Π̄_I Π̄_R + Π̃_I Π̃_R) = I            (blocs L et H)
        ½(Π̄_{I,L} Π̄_{R,H} - Π̃_{I,L} Π̃_{R,H}) = 0
        ½(Π̄_{I,H} Π̄_{R,L} - Π̃_{I,H} Π̃_{R,L}) = 0
    """
    s = symbols
    residuals = {
        "reconstruction_L": float(np.abs(0.5 * (s.I_red_L * s.R_red_L + s.I_black_L * s.R_black_L) - 1).max()),
        "reconstruction_H": float(np.abs(0.5 * (s.I_red_H * s.R_red_H + s.I_black_H * s.R_black_H) - 1).max()),
        "aliasing_LH": float(np.abs(0.5 * (s.I_red_L * s.R_red_H - s.I_black_L * s.R_black_H)).max()),
        "aliasing_HL": float(np.abs(0.5 * (s.I_red_H * s.R_red_L - s.I_black_H * s.R_black_L)).max()),
    }
    worst = max(residuals.values())
    residuals["max"] = worst
    return VetterliReport(passes=bool(worst <= tol), residuals=residuals, tolerance=tol)


def check_frequency_inversion(
    F: SparseMatrix, P: RedBlackPartition, basis: BiorthogonalBasis, tol: float = 1e-10
) -> float:
    """
    Écart entre les symboles de F* et ceux de F échangés (E_H, E_L)

    Returns:
        Écart maximal (≤ tol attendu)
    """
    E_L, E_H = extract_symbols(F, basis)
    M_L, M_H = extract_symbols(mirror(P, F), basis)
    residual = float(max(np.abs(M_L - E_H).max(), np.abs(M_H - E_L).max()))
    if residual > tol:
        logger.debug("Inversion fréquentielle: écart %.3e > %.0e", residual, tol)
    return residual


# ==================== QMF ====================

def make_qmf_bank(
    basis: BiorthogonalBasis,
    P: RedBlackPartition,
    theta: Union[float, np.ndarray],
    break_mirror: bool = False,
    tol: float = 1e-10,
) -> FilterQuad:
    """
    Banc miroir en quadrature: F̄_I de symboles √2·cos θ (L) et √2·sin θ (H),
    F̄_R = F̄_I, F̃_I = F̃_R = F̄_I*

    Args:
        basis: Base vérifiée (rbHAP)
        P: Partition
        theta: n/2 angles (ou un scalaire)
        break_mirror: Utilise cos θ sur les deux blocs (viole la condition miroir)
        tol: Tolérance de la vérification rbHAP

    Raises:
        AliasingPatternError: si la base ne vérifie pas le motif d'aliasing
    """
    report = check_rbhap(basis, P, tol)
    if not report.passes:
        raise AliasingPatternError(
            f"La base ne vérifie pas le motif rouge-noir (écarts {report.max_deviation_red:.2e}, "
            f"{report.max_deviation_black:.2e})"
        )
    theta = np.broadcast_to(np.asarray(theta, dtype=float), (P.half,))
    E_L = np.sqrt(2.0) * np.cos(theta)
    E_H = np.sqrt(2.0) * (np.cos(theta) if break_mirror else np.sin(theta))
    FI_red = filter_from_symbols(basis, E_L, E_H)
    FI_black = mirror(P, FI_red)
    return FilterQuad(FR_red=FI_red, FI_red=FI_red, FR_black=FI_black, FI_black=FI_black, partition=P)
