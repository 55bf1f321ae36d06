"""
Entrées/sorties: Matrix Market pour les matrices, CSV pour les vecteurs et champs
"""
import logging
import os
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.io import mmread, mmwrite

from .core import DTYPE, SparseMatrix, as_vector
from .errors import DimensionMismatchError

logger = logging.getLogger(__name__)

PathLike = Union[str, os.PathLike]


def _ensure_parent(path: PathLike) -> None:
    parent = os.path.dirname(os.fspath(path))
    if parent:
        os.makedirs(parent, exist_ok=True)


def read_matrix_market(path: PathLike) -> SparseMatrix:
    """
    Lit une matrice au format Matrix Market (coordinate, réel ou complexe)

    Raises:
        OSError: fichier illisible
        ValueError: contenu invalide
    """
    with open(os.fspath(path), "rb") as fh:
        raw = mmread(fh)
    matrix = sp.csr_matrix(raw) if sp.issparse(raw) else sp.csr_matrix(np.asarray(raw))
    logger.debug("Matrix Market lu: %s (%dx%d, nnz=%d)", path, *matrix.shape, matrix.nnz)
    return SparseMatrix.from_scipy(matrix)


def write_matrix_market(path: PathLike, A: SparseMatrix, comment: str = "") -> None:
    """Écrit A en coordinate; variante réelle si toutes les parties imaginaires sont nulles"""
    _ensure_parent(path)
    csr = A.csr
    if not np.any(csr.data.imag):
        csr = sp.csr_matrix((csr.data.real, csr.indices, csr.indptr), shape=csr.shape)
    mmwrite(os.fspath(path), sp.coo_matrix(csr), comment=comment)


def read_vector_csv(path: PathLike) -> np.ndarray:
    """Lit un vecteur CSV (re,im par ligne; une seule colonne = réel)"""
    data = np.loadtxt(os.fspath(path), delimiter=",", ndmin=2, dtype=float)
    if data.shape[1] == 1:
        return as_vector(data[:, 0])
    if data.shape[1] != 2:
        raise ValueError(f"CSV vecteur: 1 ou 2 colonnes attendues, {data.shape[1]} trouvées")
    return as_vector(data[:, 0] + 1j * data[:, 1])


def write_vector_csv(path: PathLike, x) -> None:
    """Écrit un vecteur complexe, une ligne re,im par entrée"""
    _ensure_parent(path)
    x = np.asarray(x, dtype=DTYPE).reshape(-1)
    np.savetxt(os.fspath(path), np.column_stack([x.real, x.imag]), delimiter=",", fmt="%.17g")


def write_field_csv(path: PathLike, x, shape: Sequence[int]) -> None:
    """
    Écrit un champ nodal prêt à tracer

    Args:
        path: Fichier de sortie
        x: Vecteur de taille prod(shape)
        shape: (n,) pour un anneau 1D, (N, N) pour un tore 2D (ordre ligne)
    """
    x = np.asarray(x, dtype=DTYPE).reshape(-1)
    if x.size != int(np.prod(shape)):
        raise DimensionMismatchError(f"Champ de taille {x.size} pour une géométrie {tuple(shape)}")
    _ensure_parent(path)
    if len(shape) == 1:
        columns = [np.arange(x.size), x.real, x.imag]
        header = "i,re,im"
        fmt = ["%d", "%.17g", "%.17g"]
    elif len(shape) == 2:
        ii, jj = np.divmod(np.arange(x.size), shape[1])
        columns = [ii, jj, x.real, x.imag]
        header = "i,j,re,im"
        fmt = ["%d", "%d", "%.17g", "%.17g"]
    else:
        raise DimensionMismatchError(f"Géométrie non supportée: {tuple(shape)}")
    np.savetxt(os.fspath(path), np.column_stack(columns), delimiter=",", header=header, comments="", fmt=fmt)
