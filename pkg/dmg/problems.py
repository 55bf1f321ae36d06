"""
Générateurs de problèmes: Helmholtz périodique 1D/2D, Laplacien de Dirichlet,
sources, et chargement de systèmes externes
"""
import logging
import os
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Dict, List, Optional, Tuple, Union

import numpy as np

from .aliasing import (
    BiorthogonalBasis,
    LevelReport,
    build_dft_basis_1d,
    build_dft_basis_2d,
    build_sine_basis,
    check_multigrid_harmonic_basis,
)
from .config import DMGConfig
from .core import DTYPE, SparseMatrix, dense_lu_factor
from .errors import DimensionMismatchError, HierarchyExhaustedError, InvalidConfigError, NonBiorthogonalBasisError
from .matrix_io import read_matrix_market, read_vector_csv
from .multigrid import EvenOddHierarchy, PartitionHierarchy, TorusHierarchy

logger = logging.getLogger(__name__)

# nombre d'onde de référence, en double précision
K_PI_OVER_3 = np.pi / 3

_WAVENUMBER = re.compile(r"^\s*([-+]?[0-9]*\.?[0-9]*(?:[eE][-+]?[0-9]+)?)\s*\*?\s*pi\s*(?:/\s*([0-9]*\.?[0-9]+))?\s*$")


def parse_wavenumber(token: Union[str, float, int]) -> float:
    """
    Accepte un décimal ou une forme symbolique: "pi/3", "2pi/3", "2*pi", "0.5*pi/2"
    """
    if isinstance(token, (int, float)):
        return float(token)
    text = str(token).strip().lower().replace("π", "pi")
    match = _WAVENUMBER.match(text)
    if match:
        coeff = match.group(1)
        if coeff in ("", "+"):
            value = 1.0
        elif coeff == "-":
            value = -1.0
        else:
            value = float(coeff)
        value *= np.pi
        if match.group(2):
            value /= float(match.group(2))
        return value
    try:
        return float(text)
    except ValueError as e:
        raise InvalidConfigError(f"Nombre d'onde invalide: '{token}'") from e


@dataclass
class Geometry:
    """Anneau 1D, intervalle de Dirichlet, tore N×N ou système externe"""
    kind: str
    shape: Tuple[int, ...]

    @property
    def size(self) -> int:
        return int(np.prod(self.shape))


@dataclass
class ProblemInstance:
    """Système A, géométrie, hiérarchie de partitions et base propre connue"""
    name: str
    A: SparseMatrix
    geometry: Geometry
    hierarchy: PartitionHierarchy
    basis_factory: Optional[Callable[[], BiorthogonalBasis]] = None
    params: Dict[str, Any] = field(default_factory=dict)

    @property
    def size(self) -> int:
        return self.A.nrows

    def basis(self) -> Optional[BiorthogonalBasis]:
        return self.basis_factory() if self.basis_factory is not None else None

    def assert_invertible(self, config: Optional[DMGConfig] = None) -> None:
        """Oracle LU jusqu'à invertibility_check_limit; SingularMatrixError sinon"""
        config = config or DMGConfig()
        if self.size > config.invertibility_check_limit:
            logger.info("%s: n=%d, vérification d'inversibilité sautée", self.name, self.size)
            return
        dense_lu_factor(self.A, config=config)

    def assert_harmonic_basis(self, config: Optional[DMGConfig] = None) -> List[LevelReport]:
        """
        Vérifie la base propre multi-grille sur toute la profondeur de la hiérarchie

        Args:
            config: Configuration (harmonic_check_limit)

        Returns:
            Un LevelReport par niveau ([] sans base connue ou au-delà de la limite)

        Raises:
            InvalidConfigError: si un niveau perd sa structure d'aliasing
        """
        config = config or DMGConfig()
        if self.basis_factory is None:
            return []
        if self.size > config.harmonic_check_limit:
            logger.info("%s: n=%d, vérification de base harmonique sautée", self.name, self.size)
            return []
        levels = self.hierarchy.levels_for(self.size)
        try:
            reports = check_multigrid_harmonic_basis(self.basis(), self.hierarchy, levels)
        except (NonBiorthogonalBasisError, HierarchyExhaustedError) as e:
            raise InvalidConfigError(f"{self.name} (n={self.size}): {e}") from e
        for report in reports:
            if not report.passes:
                detail = report.detail or "motifs d'aliasing non respectés"
                raise InvalidConfigError(
                    f"{self.name} (n={self.size}): base harmonique invalide au niveau "
                    f"{report.level} (taille {report.size}): {detail}"
                )
        logger.debug("%s: base harmonique valide sur %d niveaux", self.name, levels)
        return reports

    def describe(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "size": self.size,
            "geometry": self.geometry.kind,
            "shape": list(self.geometry.shape),
            "nnz": self.A.nnz,
            "params": self.params,
        }


def _finish(problem: ProblemInstance, config: DMGConfig, check_invertible: bool, check_basis: bool) -> ProblemInstance:
    if check_invertible:
        problem.assert_invertible(config)
    if check_basis:
        problem.assert_harmonic_basis(config)
    logger.debug("Problème %s généré (n=%d, nnz=%d)", problem.name, problem.size, problem.A.nnz)
    return problem


# ==================== FAMILLES ====================

def helmholtz_periodic_1d(
    n: int,
    k: float = K_PI_OVER_3,
    config: Optional[DMGConfig] = None,
    check_invertible: bool = True,
    check_basis: bool = True,
) -> ProblemInstance:
    """Anneau de n nœuds: diagonale 2 - k², voisins -1 à ±1 (mod n)"""
    config = config or DMGConfig()
    if n < 2 or n % 2:
        raise InvalidConfigError(f"Helmholtz 1D: n={n} doit être pair")
    i = np.arange(n)
    rows = np.concatenate([i, i, i])
    cols = np.concatenate([i, (i - 1) % n, (i + 1) % n])
    vals = np.concatenate([np.full(n, 2.0 - k * k), -np.ones(n), -np.ones(n)])
    A = SparseMatrix.from_triplets((n, n), rows, cols, vals)
    problem = ProblemInstance(
        name="helmholtz1d",
        A=A,
        geometry=Geometry("ring", (n,)),
        hierarchy=EvenOddHierarchy(n0=config.n0),
        basis_factory=lambda: build_dft_basis_1d(n),
        params={"n": n, "k": k},
    )
    return _finish(problem, config, check_invertible, check_basis)


def helmholtz_periodic_2d(
    N: int,
    k: float = K_PI_OVER_3,
    config: Optional[DMGConfig] = None,
    check_invertible: bool = True,
    check_basis: bool = True,
) -> ProblemInstance:
    """Tore N×N, stencil 5 points [-1; -1, 4 - k², -1; -1], nœud (i, j) -> i*N + j"""
    config = config or DMGConfig()
    if N < 2 or N % 2:
        raise InvalidConfigError(f"Helmholtz 2D: N={N} doit être pair")
    n = N * N
    i, j = np.divmod(np.arange(n), N)
    node = np.arange(n)
    neighbours = [((i + 1) % N) * N + j, ((i - 1) % N) * N + j, i * N + (j + 1) % N, i * N + (j - 1) % N]
    rows = np.concatenate([node] * 5)
    cols = np.concatenate([node] + neighbours)
    vals = np.concatenate([np.full(n, 4.0 - k * k)] + [-np.ones(n)] * 4)
    A = SparseMatrix.from_triplets((n, n), rows, cols, vals)
    problem = ProblemInstance(
        name="helmholtz2d",
        A=A,
        geometry=Geometry("torus", (N, N)),
        hierarchy=TorusHierarchy(N, n0=config.n0),
        basis_factory=lambda: build_dft_basis_2d(N),
        params={"N": N, "k": k},
    )
    return _finish(problem, config, check_invertible, check_basis)


def dirichlet_laplacian_1d(
    n: int = 8,
    config: Optional[DMGConfig] = None,
    check_invertible: bool = True,
    check_basis: bool = True,
) -> ProblemInstance:
    """Tridiagonale {-1, 2, -1} sans bouclage; base sinus, rouge = positions impaires, une seule division"""
    config = config or DMGConfig()
    if n < 2 or n % 2:
        raise InvalidConfigError(f"Laplacien de Dirichlet: n={n} doit être pair")
    i = np.arange(n)
    rows = np.concatenate([i, i[1:], i[:-1]])
    cols = np.concatenate([i, i[:-1], i[1:]])
    vals = np.concatenate([np.full(n, 2.0), -np.ones(n - 1), -np.ones(n - 1)])
    # la base sinus ne survit qu'à une division: cas de base à n/2 au plus
    problem = ProblemInstance(
        name="dirichlet1d",
        A=SparseMatrix.from_triplets((n, n), rows, cols, vals),
        geometry=Geometry("interval", (n,)),
        hierarchy=EvenOddHierarchy(n0=max(config.n0, n // 2)),
        basis_factory=lambda: build_sine_basis(n),
        params={"n": n},
    )
    return _finish(problem, config, check_invertible, check_basis)


def load_problem(path: Union[str, os.PathLike], config: Optional[DMGConfig] = None) -> ProblemInstance:
    """Système externe Matrix Market, hiérarchie pair/impair, sans garantie de solveur direct"""
    config = config or DMGConfig()
    A = read_matrix_market(path)
    if not A.is_square:
        raise DimensionMismatchError(f"Matrice externe non carrée {A.shape}")
    return ProblemInstance(
        name="external",
        A=A,
        geometry=Geometry("external", (A.nrows,)),
        hierarchy=EvenOddHierarchy(n0=config.n0),
        params={"path": os.fspath(path)},
    )


PROBLEMS: Dict[str, Callable[..., ProblemInstance]] = {
    "helmholtz1d": helmholtz_periodic_1d,
    "helmholtz2d": helmholtz_periodic_2d,
    "dirichlet1d": dirichlet_laplacian_1d,
}


def make_problem(
    name: str,
    n: Optional[int] = None,
    N: Optional[int] = None,
    k: Union[str, float, None] = None,
    config: Optional[DMGConfig] = None,
    check_invertible: bool = True,
    check_basis: bool = True,
) -> ProblemInstance:
    """
    Construit un problème nommé

    Args:
        name: helmholtz1d | helmholtz2d | dirichlet1d
        n: Taille (familles 1D)
        N: Côté du tore (helmholtz2d)
        k: Nombre d'onde (décimal ou symbolique, π/3 par défaut)
        config: Configuration
        check_invertible: Lance l'oracle LU à la génération
        check_basis: Vérifie la base harmonique sur toute la hiérarchie
    """
    if name not in PROBLEMS:
        raise InvalidConfigError(f"Problème inconnu: {name} (disponibles: {', '.join(PROBLEMS)})")
    wavenumber = K_PI_OVER_3 if k is None else parse_wavenumber(k)
    if name == "helmholtz1d":
        return helmholtz_periodic_1d(n or 32, wavenumber, config, check_invertible, check_basis)
    if name == "helmholtz2d":
        return helmholtz_periodic_2d(N or 32, wavenumber, config, check_invertible, check_basis)
    return dirichlet_laplacian_1d(n or 8, config, check_invertible, check_basis)


# ==================== SOURCES ====================

class SourceKind(str, Enum):
    TWO_FREQUENCY = "two-frequency"
    POINT_PATCH = "point-patch"
    UNIT_IMPULSE = "unit-impulse"
    FILE = "file"

    @classmethod
    def parse(cls, value: Union[str, "SourceKind"]) -> "SourceKind":
        if isinstance(value, SourceKind):
            return value
        try:
            return cls(str(value).lower().replace("_", "-"))
        except ValueError as e:
            raise InvalidConfigError(f"Source inconnue: {value}") from e


@dataclass
class SourceSpec:
    kind: SourceKind = SourceKind.UNIT_IMPULSE
    path: Optional[str] = None

    def __post_init__(self):
        self.kind = SourceKind.parse(self.kind)
        if self.kind is SourceKind.FILE and not self.path:
            raise InvalidConfigError("Source 'file': chemin manquant")


def make_source(spec: SourceSpec, problem: ProblemInstance) -> np.ndarray:
    """
    two-frequency: f(i,j) = sin(2πi/N)sin(2πj/N) + sin(iπ/2)sin(jπ/2) (sin(iπ/16)... pour N = 32)
    point-patch: 1 sur les nœuds (N/2-1..N/2) × (N/2-1..N/2)
    unit-impulse: e₀
    file: vecteur CSV (re,im)
    """
    n = problem.size
    if spec.kind is SourceKind.UNIT_IMPULSE:
        f = np.zeros(n, dtype=DTYPE)
        f[0] = 1.0
        return f
    if spec.kind is SourceKind.FILE:
        f = read_vector_csv(spec.path)
        if f.size != n:
            raise DimensionMismatchError(f"Source de taille {f.size} pour un problème de taille {n}")
        return f
    if problem.geometry.kind != "torus":
        raise InvalidConfigError(f"Source {spec.kind.value}: géométrie torique requise ({problem.geometry.kind})")

    N = problem.geometry.shape[0]
    i, j = np.divmod(np.arange(n), N)
    if spec.kind is SourceKind.TWO_FREQUENCY:
        f = np.sin(2 * np.pi * i / N) * np.sin(2 * np.pi * j / N) + np.sin(i * np.pi / 2) * np.sin(j * np.pi / 2)
        return f.astype(DTYPE)
    centre = (N // 2 - 1, N // 2)
    patch = np.isin(i, centre) & np.isin(j, centre)
    return patch.astype(DTYPE)
