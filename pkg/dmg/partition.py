"""
Partitions rouge-noir, sous/sur-échantillonnage et matrice miroir
"""
import json
from enum import Enum
from typing import Iterable, Union

import numpy as np
import scipy.sparse as sp

from .core import DTYPE, SparseMatrix
from .errors import DimensionMismatchError, InvalidConfigError


class Color(str, Enum):
    RED = "red"
    BLACK = "black"

    @property
    def tag(self) -> str:
        return "r" if self is Color.RED else "b"

    @property
    def other(self) -> "Color":
        return Color.BLACK if self is Color.RED else Color.RED

    @classmethod
    def parse(cls, value: Union[str, "Color"]) -> "Color":
        if isinstance(value, Color):
            return value
        value = str(value).lower()
        if value in ("r", "red", "rouge"):
            return cls.RED
        if value in ("b", "black", "noir"):
            return cls.BLACK
        raise InvalidConfigError(f"Couleur inconnue: {value}")


ColorLike = Union[Color, str]


class RedBlackPartition:
    """
    Partition disjointe de {0..n-1} en deux moitiés égales

    Les listes rouge et noire sont strictement croissantes; la noire est
    toujours déduite de la rouge.
    """

    __slots__ = ("n", "red", "black", "_sign")

    def __init__(self, n: int, red: Iterable[int]):
        n = int(n)
        red = np.asarray(sorted(int(i) for i in red), dtype=np.int64)
        if n <= 0 or n % 2:
            raise InvalidConfigError(f"Partition: n={n} doit être pair et positif")
        if red.size != n // 2:
            raise InvalidConfigError(f"Partition: {red.size} nœuds rouges pour n={n} (attendu {n // 2})")
        if np.any(np.diff(red) == 0) or red[0] < 0 or red[-1] >= n:
            raise InvalidConfigError("Partition: indices rouges dupliqués ou hors bornes")
        mask = np.zeros(n, dtype=bool)
        mask[red] = True
        self.n = n
        self.red = red
        self.black = np.flatnonzero(~mask)
        self._sign = np.where(mask, 1.0, -1.0)

    @classmethod
    def from_red(cls, n: int, red: Iterable[int]) -> "RedBlackPartition":
        return cls(n, red)

    @classmethod
    def from_mask(cls, is_red: np.ndarray) -> "RedBlackPartition":
        is_red = np.asarray(is_red, dtype=bool)
        return cls(is_red.size, np.flatnonzero(is_red))

    @classmethod
    def even_odd(cls, n: int) -> "RedBlackPartition":
        """Rouge = positions paires"""
        return cls(n, range(0, n, 2))

    # ==================== SÉRIALISATION ====================

    def to_dict(self) -> dict:
        return {"n": self.n, "red": self.red.tolist()}

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, payload: Union[str, dict]) -> "RedBlackPartition":
        data = json.loads(payload) if isinstance(payload, str) else payload
        try:
            return cls(data["n"], data["red"])
        except KeyError as e:
            raise InvalidConfigError(f"Partition JSON: champ manquant {e}") from e

    # ==================== ACCÈS ====================

    @property
    def half(self) -> int:
        return self.n // 2

    def indices(self, color: ColorLike) -> np.ndarray:
        return self.red if Color.parse(color) is Color.RED else self.black

    def sign_vector(self) -> np.ndarray:
        """+1 sur les rouges, -1 sur les noirs"""
        return self._sign.copy()

    def materialize(self, color: ColorLike) -> SparseMatrix:
        """Matrice 0/1 de sous-échantillonnage D (n/2 × n), pour la vérification"""
        idx = self.indices(color)
        data = np.ones(idx.size, dtype=DTYPE)
        return SparseMatrix(sp.csr_matrix((data, (np.arange(idx.size), idx)), shape=(idx.size, self.n)))

    def __eq__(self, other) -> bool:
        return isinstance(other, RedBlackPartition) and other.n == self.n and np.array_equal(other.red, self.red)

    __hash__ = None

    def __repr__(self) -> str:
        return f"RedBlackPartition(n={self.n})"


# ==================== OPÉRATEURS ====================

def _check_length(P: RedBlackPartition, size: int, expected: int, what: str) -> None:
    if size != expected:
        raise DimensionMismatchError(f"{what}: taille {size}, attendu {expected} (n={P.n})")


def downsample(P: RedBlackPartition, color: ColorLike, x) -> np.ndarray:
    """D_c x: restriction aux indices de la couleur, dans leur ordre"""
    x = np.asarray(x, dtype=DTYPE)
    _check_length(P, x.shape[0], P.n, "downsample")
    return x[P.indices(color)]


def upsample(P: RedBlackPartition, color: ColorLike, y) -> np.ndarray:
    """U_c y = D_cᵀ y: dispersion sur les indices de la couleur, zéros ailleurs"""
    y = np.asarray(y, dtype=DTYPE)
    _check_length(P, y.shape[0], P.half, "upsample")
    out = np.zeros((P.n,) + y.shape[1:], dtype=DTYPE)
    out[P.indices(color)] = y
    return out


def mirror(P: RedBlackPartition, M: SparseMatrix) -> SparseMatrix:
    """
    M*_ij = s_i M_ij s_j (changements de signe, jamais de triple produit)
    """
    if M.shape != (P.n, P.n):
        raise DimensionMismatchError(f"mirror: matrice {M.shape} pour n={P.n}")
    csr = M.csr
    rows = np.repeat(np.arange(P.n), np.diff(csr.indptr))
    signs = P._sign[rows] * P._sign[csr.indices]
    return SparseMatrix(sp.csr_matrix((csr.data * signs, csr.indices, csr.indptr), shape=csr.shape))


def mirror_dense(P: RedBlackPartition, M: np.ndarray) -> np.ndarray:
    """Miroir d'une matrice dense (chemins de vérification)"""
    M = np.asarray(M, dtype=DTYPE)
    if M.shape != (P.n, P.n):
        raise DimensionMismatchError(f"mirror: matrice {M.shape} pour n={P.n}")
    return P._sign[:, None] * M * P._sign[None, :]


def submatrix(P: RedBlackPartition, rowcolor: ColorLike, colcolor: ColorLike, M: SparseMatrix) -> SparseMatrix:
    """Bloc (indices rowcolor) × (indices colcolor) de M, soit D_r M U_c"""
    if M.shape != (P.n, P.n):
        raise DimensionMismatchError(f"submatrix: matrice {M.shape} pour n={P.n}")
    rows = P.indices(rowcolor)
    cols = P.indices(colcolor)
    return SparseMatrix(M.csr[rows][:, cols])
