"""
Bases biorthogonales et motifs d'aliasing harmonique rouge-noir

Vérification uniquement: les solveurs ne manipulent jamais de vecteurs propres.
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np

from .core import DTYPE
from .errors import AliasingPatternError, DimensionMismatchError, InvalidConfigError, NonBiorthogonalBasisError
from .partition import Color, RedBlackPartition

logger = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10


@dataclass
class BiorthogonalBasis:
    """
    Vecteurs propres à droite W et à gauche V (en colonnes), avec V^H W = I

    L[j] et H[j] sont les colonnes appariées par l'aliasing.
    """
    W: np.ndarray
    V: np.ndarray
    L: np.ndarray
    H: np.ndarray
    name: str = ""

    def __post_init__(self):
        self.W = np.asarray(self.W, dtype=DTYPE)
        self.V = np.asarray(self.V, dtype=DTYPE)
        self.L = np.asarray(self.L, dtype=np.int64)
        self.H = np.asarray(self.H, dtype=np.int64)
        n = self.W.shape[0]
        if self.W.shape != (n, n) or self.V.shape != (n, n):
            raise DimensionMismatchError(f"Base: W {self.W.shape}, V {self.V.shape}")
        if self.L.size != n // 2 or self.H.size != n // 2:
            raise DimensionMismatchError("Base: L et H doivent contenir n/2 colonnes chacun")
        cover = np.sort(np.concatenate([self.L, self.H]))
        if not np.array_equal(cover, np.arange(n)):
            raise InvalidConfigError("Base: L et H doivent partitionner les colonnes")

    @property
    def n(self) -> int:
        return self.W.shape[0]

    @property
    def order(self) -> np.ndarray:
        return np.concatenate([self.L, self.H])

    @property
    def W_L(self) -> np.ndarray:
        return self.W[:, self.L]

    @property
    def W_H(self) -> np.ndarray:
        return self.W[:, self.H]

    @property
    def V_L(self) -> np.ndarray:
        return self.V[:, self.L]

    @property
    def V_H(self) -> np.ndarray:
        return self.V[:, self.H]

    def symbols_of(self, M: np.ndarray) -> np.ndarray:
        """V^H M W dans l'ordre (L, H)"""
        Wo = self.W[:, self.order]
        Vo = self.V[:, self.order]
        return Vo.conj().T @ np.asarray(M, dtype=DTYPE) @ Wo


@dataclass
class AliasCheckReport:
    """Résultat de la vérification des motifs d'aliasing rouge et noir"""
    pattern_red: np.ndarray
    pattern_black: np.ndarray
    max_deviation_red: float
    max_deviation_black: float
    complement_deviation: float
    tolerance: float
    passes: bool = field(init=False)

    def __post_init__(self):
        self.passes = bool(
            self.max_deviation_red <= self.tolerance
            and self.max_deviation_black <= self.tolerance
            and self.complement_deviation <= self.tolerance
        )

    def to_dict(self) -> dict:
        return {
            "max_deviation_red": self.max_deviation_red,
            "max_deviation_black": self.max_deviation_black,
            "complement_deviation": self.complement_deviation,
            "tolerance": self.tolerance,
            "passes": self.passes,
        }


@dataclass
class LevelReport:
    """Vérification d'un niveau de base harmonique multi-grille"""
    level: int
    size: int
    passes: bool
    biorthogonality: float
    report: Optional[AliasCheckReport] = None
    detail: str = ""

    def to_dict(self) -> dict:
        data = {
            "level": self.level,
            "size": self.size,
            "passes": self.passes,
            "biorthogonality": self.biorthogonality,
            "detail": self.detail,
        }
        if self.report is not None:
            data.update({k: v for k, v in self.report.to_dict().items() if k != "passes"})
        return data


# ==================== MOTIFS ====================

def aliasing_patterns(half: int):
    """Retourne (N̄, Ñ) = ½[[I, I], [I, I]], ½[[I, -I], [-I, I]]"""
    eye = np.eye(half)
    red = 0.5 * np.block([[eye, eye], [eye, eye]])
    black = 0.5 * np.block([[eye, -eye], [-eye, eye]])
    return red.astype(DTYPE), black.astype(DTYPE)


def _check_sizes(basis: BiorthogonalBasis, P: RedBlackPartition) -> None:
    if basis.n != P.n:
        raise DimensionMismatchError(f"Base de taille {basis.n}, partition de taille {P.n}")


def check_biorthogonality(basis: BiorthogonalBasis) -> float:
    """max |V^H W - I|"""
    return float(np.abs(basis.V.conj().T @ basis.W - np.eye(basis.n)).max())


def _require_biorthogonal(basis: BiorthogonalBasis, tol: float) -> float:
    deviation = check_biorthogonality(basis)
    if deviation > tol:
        raise NonBiorthogonalBasisError(f"V^H W s'écarte de I de {deviation:.3e} (tol {tol:.0e})")
    return deviation


def check_rbhap(basis: BiorthogonalBasis, P: RedBlackPartition, tol: float = DEFAULT_TOL) -> AliasCheckReport:
    """
    Compare V^H Ū D̄ W et V^H Ũ D̃ W (ordre L, H) aux motifs N̄ et Ñ

    Args:
        basis: Base biorthogonale appariée
        P: Partition rouge-noir
        tol: Tolérance absolue sur les motifs

    Returns:
        AliasCheckReport (passes si les deux motifs sont respectés)
    """
    _check_sizes(basis, P)
    _require_biorthogonal(basis, tol)
    Wo = basis.W[:, basis.order]
    Vo = basis.V[:, basis.order]
    pattern_red = Vo[P.red].conj().T @ Wo[P.red]
    pattern_black = Vo[P.black].conj().T @ Wo[P.black]
    target_red, target_black = aliasing_patterns(P.half)
    report = AliasCheckReport(
        pattern_red=pattern_red,
        pattern_black=pattern_black,
        max_deviation_red=float(np.abs(pattern_red - target_red).max()),
        max_deviation_black=float(np.abs(pattern_black - target_black).max()),
        complement_deviation=float(np.abs(pattern_red + pattern_black - np.eye(P.n)).max()),
        tolerance=tol,
    )
    logger.debug(
        "rbHAP n=%d: écart rouge %.2e, noir %.2e", P.n, report.max_deviation_red, report.max_deviation_black
    )
    return report


def check_surjective_form(basis: BiorthogonalBasis, P: RedBlackPartition, tol: float = DEFAULT_TOL) -> bool:
    """
    D̄W_L = D̄W_H et D̃W_L = -D̃W_H, de même pour V, colonne par colonne
    """
    _check_sizes(basis, P)
    _require_biorthogonal(basis, tol)
    for M in (basis.W, basis.V):
        scale = max(float(np.linalg.norm(M, axis=0).max()), 1.0)
        ML, MH = M[:, basis.L], M[:, basis.H]
        red_gap = np.abs(ML[P.red] - MH[P.red]).max()
        black_gap = np.abs(ML[P.black] + MH[P.black]).max()
        if max(red_gap, black_gap) > tol * scale:
            return False
    return True


def check_biorthogonal_relationships(
    basis: BiorthogonalBasis, P: RedBlackPartition, tol: float = DEFAULT_TOL
) -> Dict[str, float]:
    """
    Relations grossières (D_c V_X)^H (D_c W_Y) = ±½ I pour les deux couleurs

    Returns:
        Écarts par relation, plus "max" et "passes"
    """
    _check_sizes(basis, P)
    half = np.eye(P.half) / 2
    deviations: Dict[str, float] = {}
    for color in (Color.RED, Color.BLACK):
        idx = P.indices(color)
        sign = 1.0 if color is Color.RED else -1.0
        WL, WH = basis.W_L[idx], basis.W_H[idx]
        VL, VH = basis.V_L[idx], basis.V_H[idx]
        deviations[f"{color.tag}_LL"] = float(np.abs(VL.conj().T @ WL - half).max())
        deviations[f"{color.tag}_HH"] = float(np.abs(VH.conj().T @ WH - half).max())
        deviations[f"{color.tag}_LH"] = float(np.abs(VL.conj().T @ WH - sign * half).max())
        deviations[f"{color.tag}_HL"] = float(np.abs(VH.conj().T @ WL - sign * half).max())
    worst = max(deviations.values())
    deviations["max"] = worst
    deviations["passes"] = float(worst <= tol)
    return deviations


# ==================== CONSTRUCTION DE BASES ====================

def build_dft_basis_1d(n: int) -> BiorthogonalBasis:
    """W_ij = exp(2πi·ij/n), V = W/n; appariement j ↔ j + n/2"""
    if n <= 0 or n % 2:
        raise InvalidConfigError(f"Base DFT 1D: n={n} doit être pair")
    idx = np.arange(n)
    W = np.exp(2j * np.pi * np.outer(idx, idx) / n)
    L = np.arange(n // 2)
    return BiorthogonalBasis(W=W, V=W / n, L=L, H=L + n // 2, name=f"dft1d-{n}")


def build_dft_basis_2d(N: int) -> BiorthogonalBasis:
    """
    Base de Fourier du tore N×N (indices aplatis i*N + j)

    Appariement (p, q) ↔ (p + N/2, q + N/2) mod N; L reçoit le membre de plus
    petite distance circulaire min(p, N-p) + min(q, N-q), puis le plus petit
    en ordre lexicographique.
    """
    if N <= 0 or N % 2:
        raise InvalidConfigError(f"Base DFT 2D: N={N} doit être pair")
    k = np.arange(N)
    F = np.exp(2j * np.pi * np.outer(k, k) / N)
    W = np.kron(F, F)
    n = N * N

    p, q = np.divmod(np.arange(n), N)
    partner = ((p + N // 2) % N) * N + (q + N // 2) % N
    dist = np.minimum(p, N - p) + np.minimum(q, N - q)
    in_low = (dist < dist[partner]) | ((dist == dist[partner]) & (np.arange(n) < partner))
    L = np.flatnonzero(in_low)
    return BiorthogonalBasis(W=W, V=W / n, L=L, H=partner[L], name=f"dft2d-{N}")


def build_sine_basis(n: int = 8) -> BiorthogonalBasis:
    """
    Base sinus de Dirichlet: (w_j)_i = 2/(n+1) · sin(ijπ/(n+1)), i, j = 1..n

    Dual V = (n+1)/2 · W; appariement k ↔ n+1-k, L = {1..n/2}.
    Les nœuds rouges sont les positions impaires (indices de stockage pairs).
    """
    if n <= 0 or n % 2:
        raise InvalidConfigError(f"Base sinus: n={n} doit être pair")
    idx = np.arange(1, n + 1)
    W = (2.0 / (n + 1)) * np.sin(np.outer(idx, idx) * np.pi / (n + 1))
    L = np.arange(n // 2)
    H = n - 1 - L
    return BiorthogonalBasis(W=W, V=(n + 1) / 2.0 * W, L=L, H=H, name=f"sine-{n}")


def random_basis(n: int, rng: Optional[np.random.Generator] = None) -> BiorthogonalBasis:
    """Base inversible générique, V = (W^H)^-1 (contre-exemples)"""
    rng = rng or np.random.default_rng(0)
    W = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    V = np.linalg.inv(W).conj().T
    L = np.arange(n // 2)
    return BiorthogonalBasis(W=W, V=V, L=L, H=L + n // 2, name=f"random-{n}")


def pair_aliases(
    W: np.ndarray, V: np.ndarray, P: RedBlackPartition, tol: float = DEFAULT_TOL, name: str = ""
) -> BiorthogonalBasis:
    """
    Trouve l'appariement L/H: colonnes égales sur les rouges, opposées sur les noirs

    Raises:
        AliasingPatternError: si une colonne n'a pas de partenaire unique
    """
    W = np.asarray(W, dtype=DTYPE)
    n = W.shape[0]
    if n != P.n:
        raise DimensionMismatchError(f"pair_aliases: base {n}, partition {P.n}")
    scale = max(float(np.linalg.norm(W, axis=0).max()), 1.0)
    Wr, Wb = W[P.red], W[P.black]
    partner = np.full(n, -1, dtype=np.int64)
    for j in range(n):
        gap = np.abs(Wr - Wr[:, [j]]).max(axis=0)
        gap = np.maximum(gap, np.abs(Wb + Wb[:, [j]]).max(axis=0))
        gap[j] = np.inf
        matches = np.flatnonzero(gap <= tol * scale)
        if matches.size != 1:
            raise AliasingPatternError(f"Colonne {j}: {matches.size} partenaires d'aliasing trouvés")
        partner[j] = matches[0]
    if not np.array_equal(partner[partner], np.arange(n)):
        raise AliasingPatternError("Appariement non symétrique")
    L = np.flatnonzero(np.arange(n) < partner)
    return BiorthogonalBasis(W=W, V=V, L=L, H=partner[L], name=name)


def next_level_basis(basis: BiorthogonalBasis, P: RedBlackPartition) -> tuple:
    """W' = D̄W_L, V' = 2·D̄V_L (non appariés)"""
    return basis.W_L[P.red], 2.0 * basis.V_L[P.red]


def check_multigrid_harmonic_basis(
    basis: BiorthogonalBasis,
    hierarchy,
    levels: int,
    tol: float = DEFAULT_TOL,
) -> List[LevelReport]:
    """
    Vérifie récursivement la structure d'aliasing le long de la branche rouge

    Args:
        basis: Base du niveau fin, appariée pour la première partition
        hierarchy: Fournisseur de partitions (root / partition(depth, nodes))
        levels: Nombre de niveaux à vérifier (0 = vide, toujours valide)
        tol: Tolérance

    Returns:
        Un LevelReport par niveau vérifié
    """
    reports: List[LevelReport] = []
    nodes = hierarchy.root(basis.n)
    current = basis
    W, V = basis.W, basis.V
    for depth in range(levels):
        deviation = float(np.abs(V.conj().T @ W - np.eye(W.shape[0])).max())
        if deviation > tol:
            raise NonBiorthogonalBasisError(
                f"Niveau {depth}: V^H W s'écarte de I de {deviation:.3e} après sous-échantillonnage"
            )
        if W.shape[0] % 2:
            reports.append(LevelReport(depth, W.shape[0], False, deviation, detail="taille impaire"))
            break
        P = hierarchy.partition(depth, nodes)
        if depth > 0:
            try:
                current = pair_aliases(W, V, P, tol, name=f"{basis.name}@{depth}")
            except AliasingPatternError as e:
                reports.append(LevelReport(depth, W.shape[0], False, deviation, detail=str(e)))
                break
        report = check_rbhap(current, P, tol)
        reports.append(LevelReport(depth, current.n, report.passes, deviation, report))
        logger.debug("Base harmonique niveau %d (n=%d): %s", depth, current.n, report.passes)
        W, V = next_level_basis(current, P)
        nodes = nodes[P.red]
    return reports
