"""
Configuration pour le module DMG (solveurs multigrilles directs)
"""
import os
from dataclasses import dataclass, field
from dotenv import load_dotenv

load_dotenv()


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


@dataclass
class DMGConfig:
    """Configuration centralisée pour les solveurs et la vérification"""

    # Taille du cas de base de la récursion (n0 = O(1))
    n0: int = field(default_factory=lambda: _env_int("DMG_N0", 16))

    # Canonicalisation des matrices creuses (0 = tout garder)
    drop_tolerance: float = field(default_factory=lambda: _env_float("DMG_DROP_TOL", 0.0))

    # Pivot relatif en dessous duquel la matrice est déclarée singulière
    singular_pivot: float = 1e-13

    # Magnitude hors-diagonale sous laquelle une matrice grossière est diagonale
    diagonal_tolerance: float = 1e-14

    # Seuil de succès du résidu relatif (CLI)
    residual_threshold: float = field(default_factory=lambda: _env_float("DMG_RESIDUAL_THRESHOLD", 1e-9))

    # Au-delà de cette taille, les solves grossiers à deux grilles passent en DMG récursif
    dense_crossover: int = field(default_factory=lambda: _env_int("DMG_DENSE_CROSSOVER", 512))

    # Vérification dense de la condition de Galerkin à la construction
    galerkin_check_limit: int = 64

    # Les générateurs de problèmes vérifient l'inversibilité par LU jusqu'à cette taille
    invertibility_check_limit: int = field(default_factory=lambda: _env_int("DMG_INVERTIBILITY_LIMIT", 4096))

    # Base propre multi-grille vérifiée sur toute la hiérarchie jusqu'à cette taille (bases denses)
    harmonic_check_limit: int = field(default_factory=lambda: _env_int("DMG_HARMONIC_LIMIT", 1024))

    # Nombre max de threads pour les canaux additifs indépendants
    threads: int = field(default_factory=lambda: _env_int("DMG_THREADS", 1))

    # Dossier de sortie par défaut (rapports JSON, champs CSV)
    output_dir: str = field(default_factory=lambda: os.getenv("DMG_OUTPUT_DIR", "./data/dmg_runs"))

    @classmethod
    def from_env(cls) -> "DMGConfig":
        """Crée une configuration à partir des variables d'environnement"""
        return cls()

    def with_overrides(self, **overrides) -> "DMGConfig":
        """Copie de la configuration avec quelques champs remplacés (None ignoré)"""
        values = dict(self.__dict__)
        values.update({k: v for k, v in overrides.items() if v is not None})
        return DMGConfig(**values)
