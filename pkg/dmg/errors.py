"""
Exceptions typées du module DMG
"""
from typing import Optional


class DMGError(Exception):
    """Erreur de base du module"""


class DimensionMismatchError(DMGError, ValueError):
    """Tailles incompatibles entre opérandes"""


class InvalidConfigError(DMGError, ValueError):
    """Configuration ou paramètres invalides"""


class SingularMatrixError(DMGError):
    """Pivot trop petit: l'hypothèse d'inversibilité est violée"""

    def __init__(self, message: str, pivot: Optional[float] = None):
        super().__init__(message)
        self.pivot = pivot


class SingularCoarseMatrixError(SingularMatrixError):
    """Matrice grossière singulière, localisée par niveau et chemin de couleurs"""

    def __init__(self, level: int, path: str, color: Optional[str] = None, pivot: Optional[float] = None):
        self.level = level
        self.path = path
        self.color = color
        where = path or "(fin)"
        super().__init__(
            f"Matrice grossière singulière au niveau {level}, chemin '{where}'",
            pivot=pivot,
        )


class HierarchyExhaustedError(DMGError):
    """La hiérarchie ne sait plus partitionner avant d'atteindre n0"""


class NonBiorthogonalBasisError(DMGError):
    """V^H W s'écarte de l'identité au-delà de la tolérance"""


class AliasingPatternError(DMGError):
    """Aucun appariement L/H ne réalise le motif d'aliasing rouge-noir"""


class NotAFilterError(DMGError):
    """La matrice n'est pas diagonale dans la base donnée (fuite hors-diagonale)"""
