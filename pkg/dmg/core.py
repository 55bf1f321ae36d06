"""
Noyau d'algèbre linéaire complexe
Matrices creuses (CSR complexe), produits, LU dense de référence
"""
import logging
import math
import threading
import warnings
from dataclasses import dataclass, field
from typing import Iterable, Optional, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .config import DMGConfig
from .errors import DimensionMismatchError, InvalidConfigError, SingularMatrixError

logger = logging.getLogger(__name__)

DTYPE = np.complex128


@dataclass
class OpCounter:
    """Compteur de multiplications scalaires (une multiplication complexe = 1)"""
    multiplications: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    def add(self, count: int) -> None:
        with self._lock:
            self.multiplications += int(count)


def _count(counter: Optional[OpCounter], amount: int) -> None:
    if counter is not None:
        counter.add(amount)


def as_vector(x, length: Optional[int] = None) -> np.ndarray:
    """
    Convertit une entrée en vecteur dense complexe

    Args:
        x: Séquence ou tableau numpy
        length: Taille attendue (optionnelle)

    Returns:
        Tableau 1D complex128
    """
    vec = np.asarray(x, dtype=DTYPE).reshape(-1)
    if vec.size == 0:
        raise DimensionMismatchError("Vecteur vide")
    if length is not None and vec.size != length:
        raise DimensionMismatchError(f"Vecteur de taille {vec.size}, attendu {length}")
    if not np.all(np.isfinite(vec)):
        raise InvalidConfigError("Le vecteur contient des valeurs non finies")
    return vec


def as_dense(M) -> np.ndarray:
    """Matrice dense complexe (accepte SparseMatrix, scipy.sparse ou tableau)"""
    if isinstance(M, SparseMatrix):
        return M.to_dense()
    if sp.issparse(M):
        return np.asarray(M.toarray(), dtype=DTYPE)
    return np.asarray(M, dtype=DTYPE)


class SparseMatrix:
    """
    Matrice creuse complexe immuable en forme canonique

    Stockage CSR trié par (ligne, colonne), sans doublons ni zéros explicites.
    """

    __slots__ = ("_csr",)

    def __init__(self, matrix: sp.spmatrix, drop_tolerance: float = 0.0):
        csr = sp.csr_matrix(matrix, dtype=DTYPE, copy=True)
        if not np.all(np.isfinite(csr.data)):
            raise InvalidConfigError("La matrice contient des valeurs non finies")
        csr.sum_duplicates()
        if drop_tolerance > 0:
            csr.data[np.abs(csr.data) < drop_tolerance] = 0
        csr.eliminate_zeros()
        csr.sort_indices()
        self._csr = csr

    # ==================== CONSTRUCTEURS ====================

    @classmethod
    def identity(cls, n: int) -> "SparseMatrix":
        return cls(sp.identity(n, dtype=DTYPE, format="csr"))

    @classmethod
    def zeros(cls, nrows: int, ncols: Optional[int] = None) -> "SparseMatrix":
        return cls(sp.csr_matrix((nrows, ncols if ncols is not None else nrows), dtype=DTYPE))

    @classmethod
    def from_dense(cls, dense, drop_tolerance: float = 0.0) -> "SparseMatrix":
        return cls(sp.csr_matrix(np.asarray(dense, dtype=DTYPE)), drop_tolerance)

    @classmethod
    def from_scipy(cls, matrix: sp.spmatrix, drop_tolerance: float = 0.0) -> "SparseMatrix":
        return cls(matrix, drop_tolerance)

    @classmethod
    def from_triplets(
        cls,
        shape: Tuple[int, int],
        rows: Iterable[int],
        cols: Iterable[int],
        values: Iterable[complex],
    ) -> "SparseMatrix":
        """Construit depuis des triplets (i, j, z); les doublons sont sommés"""
        rows = np.asarray(list(rows), dtype=np.int64)
        cols = np.asarray(list(cols), dtype=np.int64)
        values = np.asarray(list(values), dtype=DTYPE)
        if rows.size and (rows.min() < 0 or rows.max() >= shape[0] or cols.min() < 0 or cols.max() >= shape[1]):
            raise DimensionMismatchError(f"Indices hors bornes pour une matrice {shape}")
        return cls(sp.coo_matrix((values, (rows, cols)), shape=shape))

    # ==================== ACCÈS ====================

    @property
    def csr(self) -> sp.csr_matrix:
        return self._csr

    @property
    def shape(self) -> Tuple[int, int]:
        return self._csr.shape

    @property
    def nrows(self) -> int:
        return self._csr.shape[0]

    @property
    def ncols(self) -> int:
        return self._csr.shape[1]

    @property
    def nnz(self) -> int:
        return int(self._csr.nnz)

    @property
    def is_square(self) -> bool:
        return self.nrows == self.ncols

    def nnz_per_row(self) -> np.ndarray:
        return np.diff(self._csr.indptr)

    def nnz_per_col(self) -> np.ndarray:
        return np.bincount(self._csr.indices, minlength=self.ncols)

    def to_dense(self) -> np.ndarray:
        return np.asarray(self._csr.toarray(), dtype=DTYPE)

    def triplets(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        coo = self._csr.tocoo()
        return coo.row, coo.col, coo.data

    def diagonal(self) -> np.ndarray:
        return np.asarray(self._csr.diagonal(), dtype=DTYPE)

    def max_abs(self) -> float:
        return float(np.abs(self._csr.data).max()) if self.nnz else 0.0

    def is_diagonal(self, tol: float = 1e-14) -> bool:
        """Vrai si toutes les entrées hors-diagonale sont < tol en module"""
        row, col, data = self.triplets()
        off = row != col
        return not np.any(np.abs(data[off]) >= tol)

    # ==================== ARITHMÉTIQUE ====================

    def scale(self, alpha: complex, counter: Optional[OpCounter] = None) -> "SparseMatrix":
        _count(counter, self.nnz)
        return SparseMatrix(self._csr * alpha)

    def __add__(self, other: "SparseMatrix") -> "SparseMatrix":
        _check_same_shape(self, other)
        return SparseMatrix(self._csr + other._csr)

    def __sub__(self, other: "SparseMatrix") -> "SparseMatrix":
        _check_same_shape(self, other)
        return SparseMatrix(self._csr - other._csr)

    def __neg__(self) -> "SparseMatrix":
        return SparseMatrix(-self._csr)

    def __eq__(self, other) -> bool:
        if not isinstance(other, SparseMatrix) or other.shape != self.shape:
            return False
        a, b = self._csr, other._csr
        return (
            np.array_equal(a.indptr, b.indptr)
            and np.array_equal(a.indices, b.indices)
            and np.array_equal(a.data, b.data)
        )

    __hash__ = None

    def __repr__(self) -> str:
        return f"SparseMatrix(shape={self.shape}, nnz={self.nnz})"


def _check_same_shape(A: SparseMatrix, B: SparseMatrix) -> None:
    if A.shape != B.shape:
        raise DimensionMismatchError(f"Formes incompatibles {A.shape} et {B.shape}")


MatrixLike = Union[SparseMatrix, np.ndarray]


# ==================== PRODUITS ====================

def spmv(A: SparseMatrix, x, counter: Optional[OpCounter] = None) -> np.ndarray:
    """
    Produit matrice creuse - vecteur exact

    Args:
        A: Matrice creuse
        x: Vecteur de taille A.ncols
        counter: Compteur de multiplications (nnz(A) ajoutées)

    Returns:
        Vecteur A·x
    """
    x = np.asarray(x, dtype=DTYPE).reshape(-1)
    if x.size != A.ncols:
        raise DimensionMismatchError(f"spmv: matrice {A.shape}, vecteur de taille {x.size}")
    _count(counter, A.nnz)
    return np.asarray(A.csr @ x, dtype=DTYPE)


def spmm(
    A: SparseMatrix,
    B: SparseMatrix,
    counter: Optional[OpCounter] = None,
    config: Optional[DMGConfig] = None,
) -> SparseMatrix:
    """
    Produit creux exact A·B, canonicalisé

    Args:
        A, B: Matrices creuses avec A.ncols == B.nrows
        counter: Compteur (Σ_k nnz(A[:,k])·nnz(B[k,:]) multiplications)
        config: Fournit la tolérance de troncature (0 par défaut)

    Returns:
        SparseMatrix du produit
    """
    if A.ncols != B.nrows:
        raise DimensionMismatchError(f"spmm: {A.shape} · {B.shape}")
    config = config or DMGConfig()
    if counter is not None:
        counter.add(int(np.dot(A.nnz_per_col(), B.nnz_per_row())))
    return SparseMatrix(A.csr @ B.csr, drop_tolerance=config.drop_tolerance)


def conj_transpose(A: SparseMatrix) -> SparseMatrix:
    """(i, j, z) ↦ (j, i, conj(z))"""
    return SparseMatrix(A.csr.conj().T)


# ==================== LU DENSE (ORACLE) ====================

@dataclass
class LUFactor:
    """Factorisation LU à pivot partiel d'une matrice dense"""
    lu: np.ndarray
    piv: np.ndarray
    n: int

    def solve(self, f, counter: Optional[OpCounter] = None) -> np.ndarray:
        f = as_vector(f, self.n)
        _count(counter, self.n * self.n)
        return scipy.linalg.lu_solve((self.lu, self.piv), f)


def dense_lu_factor(
    A: MatrixLike,
    counter: Optional[OpCounter] = None,
    config: Optional[DMGConfig] = None,
) -> LUFactor:
    """
    Factorise A (pivot partiel) et détecte la singularité

    Raises:
        SingularMatrixError: si un pivot < singular_pivot · max|A|
    """
    config = config or DMGConfig()
    dense = as_dense(A)
    if dense.ndim != 2 or dense.shape[0] != dense.shape[1]:
        raise DimensionMismatchError(f"LU: matrice non carrée {dense.shape}")
    n = dense.shape[0]
    scale = float(np.abs(dense).max()) if dense.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError("Matrice nulle", pivot=0.0)

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = scipy.linalg.lu_factor(dense, check_finite=True)

    pivot = float(np.abs(np.diag(lu)).min())
    if pivot < config.singular_pivot * scale:
        logger.debug("LU: pivot %.3e sous le seuil relatif (échelle %.3e)", pivot, scale)
        raise SingularMatrixError(
            f"Matrice singulière: pivot {pivot:.3e} < {config.singular_pivot:.0e}·{scale:.3e}",
            pivot=pivot,
        )
    _count(counter, math.ceil(n ** 3 / 3))
    return LUFactor(lu=lu, piv=piv, n=n)


def dense_lu_solve(
    A: MatrixLike,
    f,
    counter: Optional[OpCounter] = None,
    config: Optional[DMGConfig] = None,
) -> np.ndarray:
    """
    Résout A x = f par LU dense (oracle de vérification et cas de base)

    Args:
        A: Matrice carrée (dense ou creuse)
        f: Second membre
        counter: Compteur (⌈n³/3⌉ + n² multiplications)
        config: Seuil de pivot

    Returns:
        Solution x
    """
    dense = as_dense(A)
    f = np.asarray(f, dtype=DTYPE).reshape(-1)
    if dense.ndim != 2 or f.size != dense.shape[0]:
        raise DimensionMismatchError(f"LU: matrice {dense.shape}, second membre de taille {f.size}")
    factor = dense_lu_factor(dense, counter=counter, config=config)
    return factor.solve(f, counter=counter)


def dense_inverse(A: MatrixLike, config: Optional[DMGConfig] = None) -> np.ndarray:
    """Inverse dense via LU (vérification uniquement)"""
    factor = dense_lu_factor(A, config=config)
    return scipy.linalg.lu_solve((factor.lu, factor.piv), np.eye(factor.n, dtype=DTYPE))


def diagonal_solve(
    A: SparseMatrix,
    f,
    counter: Optional[OpCounter] = None,
    config: Optional[DMGConfig] = None,
) -> np.ndarray:
    """Résout un système diagonal en O(n)"""
    config = config or DMGConfig()
    d = A.diagonal()
    scale = A.max_abs()
    small = np.abs(d) < config.singular_pivot * scale if scale > 0 else np.ones(d.size, dtype=bool)
    if np.any(small):
        raise SingularMatrixError("Matrice diagonale singulière", pivot=float(np.abs(d).min()))
    _count(counter, d.size)
    return np.asarray(f, dtype=DTYPE) / d


# ==================== NORMES ====================

def norms(x) -> Tuple[float, float]:
    """Retourne (‖x‖₂, ‖x‖∞)"""
    x = np.asarray(x, dtype=DTYPE).reshape(-1)
    if x.size == 0:
        return 0.0, 0.0
    return float(np.linalg.norm(x)), float(np.abs(x).max())


def frobenius(M: MatrixLike) -> float:
    """Norme de Frobenius (dense ou creuse)"""
    if isinstance(M, SparseMatrix):
        return float(np.linalg.norm(M.csr.data))
    return float(np.linalg.norm(np.asarray(M)))


def relative_residual(A: SparseMatrix, v, f) -> float:
    """‖f − A v‖₂ / ‖f‖₂ (‖f − Av‖₂ si f = 0)"""
    f = np.asarray(f, dtype=DTYPE).reshape(-1)
    r = f - spmv(A, v)
    nf = np.linalg.norm(f)
    return float(np.linalg.norm(r) / nf) if nf > 0 else float(np.linalg.norm(r))
