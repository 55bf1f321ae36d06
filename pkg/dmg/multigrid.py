"""
Solveurs multigrilles directs récursifs

- multiplicatif (cycle W qui dégénère en V quand les matrices rouges sont diagonales)
- additif (arbre binaire de canaux indépendants)
- additif multi-canal (source envoyée directement aux grilles les plus grossières)
- comptage des multiplications
"""
import itertools
import logging
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np

from .config import DMGConfig
from .core import (
    DTYPE,
    OpCounter,
    SparseMatrix,
    as_vector,
    dense_lu_solve,
    diagonal_solve,
    relative_residual,
    spmm,
    spmv,
)
from .errors import (
    DimensionMismatchError,
    HierarchyExhaustedError,
    InvalidConfigError,
    SingularCoarseMatrixError,
    SingularMatrixError,
)
from .partition import Color, RedBlackPartition, mirror, submatrix

logger = logging.getLogger(__name__)

METHODS = ("multiplicative", "additive", "additive-multichannel", "dense")


# ==================== HIÉRARCHIES ====================

class PartitionHierarchy:
    """
    Fournit la partition de chaque niveau

    Les nœuds d'un niveau sont décrits par leurs indices sur la grille fine.
    """

    def __init__(self, n0: int = 16, max_levels: Optional[int] = None):
        if n0 < 1:
            raise InvalidConfigError(f"n0={n0} doit être >= 1")
        self.n0 = n0
        self.max_levels = max_levels

    def root(self, n: int) -> np.ndarray:
        return np.arange(n)

    def partition(self, depth: int, nodes: np.ndarray) -> RedBlackPartition:
        if self.max_levels is not None and depth >= self.max_levels:
            raise HierarchyExhaustedError(f"Profondeur {depth} au-delà de max_levels={self.max_levels}")
        nodes = np.asarray(nodes)
        if nodes.size < 2 or nodes.size % 2:
            raise HierarchyExhaustedError(f"Impossible de partitionner {nodes.size} nœuds (niveau {depth})")
        try:
            return RedBlackPartition.from_mask(self.red_mask(depth, nodes))
        except InvalidConfigError as e:
            raise HierarchyExhaustedError(f"Partition invalide au niveau {depth}: {e}") from e

    def red_mask(self, depth: int, nodes: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def levels_for(self, n: int) -> int:
        """Nombre de divisions avant d'atteindre n0"""
        levels = 0
        while n > self.n0 and n % 2 == 0:
            n //= 2
            levels += 1
        return levels if self.max_levels is None else min(levels, self.max_levels)


class EvenOddHierarchy(PartitionHierarchy):
    """Anneaux 1D et matrices externes: positions locales paires en rouge"""

    def red_mask(self, depth: int, nodes: np.ndarray) -> np.ndarray:
        return np.arange(nodes.size) % 2 == 0


class TorusHierarchy(PartitionHierarchy):
    """
    Tore N×N: damier aux profondeurs paires, parité de ligne sur la grille
    tournée aux profondeurs impaires
    """

    def __init__(self, N: int, n0: int = 16, max_levels: Optional[int] = None):
        super().__init__(n0, max_levels)
        if N <= 0 or N % 2:
            raise InvalidConfigError(f"Tore: N={N} doit être pair")
        self.N = N

    def root(self, n: int) -> np.ndarray:
        if n != self.N * self.N:
            raise DimensionMismatchError(f"Tore {self.N}x{self.N} pour un système de taille {n}")
        return np.arange(n)

    def red_mask(self, depth: int, nodes: np.ndarray) -> np.ndarray:
        i, j = np.divmod(nodes, self.N)
        if depth % 2 == 0:
            s = 2 ** (depth // 2)
            return (i // s + j // s) % 2 == 0
        s = 2 ** ((depth - 1) // 2)
        return (i // s) % 2 == 0


# ==================== RAPPORTS ====================

@dataclass
class LevelVisit:
    level: int
    path: str
    size: int
    was_diagonal: bool

    def to_dict(self) -> dict:
        return {"level": self.level, "path": self.path, "size": self.size, "was_diagonal": self.was_diagonal}


@dataclass
class ChannelReport:
    """Canal du schéma multi-canal: source restreinte et champ interpolé"""
    path: str
    size: int
    zero_source: bool
    field: np.ndarray

    def to_dict(self) -> dict:
        return {"path": self.path, "size": self.size, "zero_source": self.zero_source}


def _complex_pairs(x: np.ndarray) -> List[List[float]]:
    return [[float(z.real), float(z.imag)] for z in np.asarray(x).reshape(-1)]


@dataclass
class SolveReport:
    """Résultat d'un solve: solution, coût, niveaux visités, résidu"""
    solution: np.ndarray
    method: str
    multiplications: int
    relative_residual: float
    wall_time: float
    levels_visited: List[LevelVisit] = field(default_factory=list)
    stencil_growth: List[Dict] = field(default_factory=list)
    splits: int = 0
    channels: Dict[str, ChannelReport] = field(default_factory=dict)

    @property
    def vcycle_fraction(self) -> float:
        """Part des divisions dont une branche a été résolue par le raccourci diagonal"""
        if self.splits == 0:
            return 0.0
        shortcuts = sum(1 for v in self.levels_visited if v.level > 0 and v.was_diagonal)
        return min(1.0, shortcuts / self.splits)

    def to_dict(self, include_solution: bool = True) -> dict:
        data = {
            "method": self.method,
            "n": int(self.solution.size),
            "multiplications": self.multiplications,
            "relative_residual": self.relative_residual,
            "wall_time": self.wall_time,
            "vcycle_fraction": self.vcycle_fraction,
            "levels_visited": [v.to_dict() for v in self.levels_visited],
            "stencil_growth": self.stencil_growth,
        }
        if self.channels:
            data["channels"] = [c.to_dict() for c in self.channels.values()]
        if include_solution:
            data["solution"] = _complex_pairs(self.solution)
        return data


class _Context:
    """État partagé d'une résolution (compteur, journal des niveaux)"""

    def __init__(self, hierarchy: PartitionHierarchy, config: DMGConfig, counter: OpCounter):
        self.hierarchy = hierarchy
        self.config = config
        self.counter = counter
        self.visits: List[LevelVisit] = []
        self.stencils: List[Dict] = []
        self.splits = 0
        self._lock = threading.Lock()

    def visit(self, depth: int, path: str, A: SparseMatrix, diagonal: bool) -> None:
        with self._lock:
            self.visits.append(LevelVisit(depth, path, A.nrows, diagonal))
            widths = A.nnz_per_row()
            self.stencils.append({"level": depth, "path": path, "max_nnz_per_row": int(widths.max()) if widths.size else 0})

    def split(self) -> None:
        with self._lock:
            self.splits += 1


# ==================== RÉCURSION ====================

def _leaf(A: SparseMatrix, f: np.ndarray, depth: int, path: str, ctx: _Context) -> Optional[np.ndarray]:
    """Cas de base (n <= n0) et raccourci diagonal; None si la récursion continue"""
    diagonal = A.is_diagonal(ctx.config.diagonal_tolerance)
    if not diagonal and A.nrows > ctx.hierarchy.n0:
        ctx.visit(depth, path, A, False)
        return None
    ctx.visit(depth, path, A, diagonal)
    logger.debug("Niveau %d '%s': n=%d, %s", depth, path, A.nrows, "diagonal" if diagonal else "LU dense")
    try:
        if diagonal:
            return diagonal_solve(A, f, ctx.counter, ctx.config)
        return dense_lu_solve(A, f, ctx.counter, ctx.config)
    except SingularMatrixError as e:
        if depth == 0:
            raise
        raise SingularCoarseMatrixError(depth, path, Color.parse(path[-1]).value, e.pivot) from e


def _multiplicative(A: SparseMatrix, f: np.ndarray, nodes: np.ndarray, depth: int, path: str, ctx: _Context) -> np.ndarray:
    leaf = _leaf(A, f, depth, path, ctx)
    if leaf is not None:
        return leaf
    P = ctx.hierarchy.partition(depth, nodes)
    ctx.split()
    counter = ctx.counter

    # f̄ = D̄f ; Ā = D̄AŪ ; v0 = Ū v̄
    A_red = submatrix(P, Color.RED, Color.RED, A)
    v_red = _multiplicative(A_red, f[P.red], nodes[P.red], depth + 1, path + "r", ctx)
    v0 = np.zeros(P.n, dtype=DTYPE)
    v0[P.red] = v_red

    # r̃ = D̃(f - A v0) ; Ĩ_I = A*Ũ ; Ã = D̃AĨ_I ; e0 = Ĩ_I ṽ
    r = f - spmv(A, v0, counter)
    interp = SparseMatrix(mirror(P, A).csr[:, P.black])
    A_black = spmm(SparseMatrix(A.csr[P.black]), interp, counter, ctx.config)
    v_black = _multiplicative(A_black, r[P.black], nodes[P.black], depth + 1, path + "b", ctx)
    return v0 + spmv(interp, v_black, counter)


def _additive(A: SparseMatrix, f: np.ndarray, nodes: np.ndarray, depth: int, path: str, ctx: _Context,
              executor: Optional[ThreadPoolExecutor] = None) -> np.ndarray:
    leaf = _leaf(A, f, depth, path, ctx)
    if leaf is not None:
        return leaf
    P = ctx.hierarchy.partition(depth, nodes)
    ctx.split()
    A_star = mirror(P, A)

    def branch(color: Color) -> np.ndarray:
        idx = P.indices(color)
        interp = SparseMatrix(A_star.csr[:, idx])
        A_c = spmm(SparseMatrix(A.csr[idx]), interp, ctx.counter, ctx.config)
        v_c = _additive(A_c, f[idx], nodes[idx], depth + 1, path + color.tag, ctx)
        return spmv(interp, v_c, ctx.counter)

    if executor is not None:
        futures = [executor.submit(branch, c) for c in (Color.RED, Color.BLACK)]
        u_red, u_black = (fut.result() for fut in futures)
    else:
        u_red, u_black = branch(Color.RED), branch(Color.BLACK)
    return u_red + u_black


def solve_subsystem(
    A: SparseMatrix,
    f,
    hierarchy: PartitionHierarchy,
    nodes: np.ndarray,
    depth: int,
    path: str,
    mode: str,
    config: Optional[DMGConfig] = None,
    counter: Optional[OpCounter] = None,
) -> np.ndarray:
    """Résout un système grossier en reprenant la hiérarchie à la profondeur donnée"""
    ctx = _Context(hierarchy, config or DMGConfig(), counter or OpCounter())
    f = as_vector(f, A.nrows)
    if mode == "multiplicative":
        return _multiplicative(A, f, np.asarray(nodes), depth, path, ctx)
    return _additive(A, f, np.asarray(nodes), depth, path, ctx)


def _prepare(A: SparseMatrix, f, hierarchy: Optional[PartitionHierarchy], config: Optional[DMGConfig]):
    config = config or DMGConfig()
    if not A.is_square:
        raise DimensionMismatchError(f"Système non carré {A.shape}")
    f = as_vector(f, A.nrows)
    hierarchy = hierarchy or EvenOddHierarchy(n0=config.n0)
    return f, hierarchy, config


def _report(A, f, v, method, ctx: _Context, start: float, channels=None) -> SolveReport:
    report = SolveReport(
        solution=v,
        method=method,
        multiplications=ctx.counter.multiplications,
        relative_residual=relative_residual(A, v, f),
        wall_time=time.perf_counter() - start,
        levels_visited=list(ctx.visits),
        stencil_growth=list(ctx.stencils),
        splits=ctx.splits,
        channels=channels or {},
    )
    logger.info(
        "%s: n=%d, %d multiplications, résidu relatif %.2e (%.3fs)",
        method, A.nrows, report.multiplications, report.relative_residual, report.wall_time,
    )
    return report


def dmg_multiplicative(
    A: SparseMatrix,
    f,
    hierarchy: Optional[PartitionHierarchy] = None,
    config: Optional[DMGConfig] = None,
) -> SolveReport:
    """
    DMG multiplicatif

    Args:
        A: Système (n = 2^l · n0 le long de la hiérarchie)
        f: Second membre
        hierarchy: Partitions par niveau (pair/impair par défaut)
        config: Configuration (n0 de la hiérarchie par défaut, tolérances)

    Returns:
        SolveReport

    Raises:
        SingularCoarseMatrixError: matrice grossière singulière (niveau, chemin)
        HierarchyExhaustedError: partition impossible avant n <= n0
    """
    f, hierarchy, config = _prepare(A, f, hierarchy, config)
    ctx = _Context(hierarchy, config, OpCounter())
    start = time.perf_counter()
    v = _multiplicative(A, f, hierarchy.root(A.nrows), 0, "", ctx)
    return _report(A, f, v, "multiplicative", ctx, start)


def dmg_additive(
    A: SparseMatrix,
    f,
    hierarchy: Optional[PartitionHierarchy] = None,
    config: Optional[DMGConfig] = None,
) -> SolveReport:
    """DMG additif: u = Ī_I v̄ + Ĩ_I ṽ à chaque niveau, Ī_I = A*Ū, Ĩ_I = A*Ũ"""
    f, hierarchy, config = _prepare(A, f, hierarchy, config)
    ctx = _Context(hierarchy, config, OpCounter())
    start = time.perf_counter()
    if config.threads > 1:
        # seul le premier niveau est parallélisé
        with ThreadPoolExecutor(max_workers=2) as executor:
            v = _additive(A, f, hierarchy.root(A.nrows), 0, "", ctx, executor)
    else:
        v = _additive(A, f, hierarchy.root(A.nrows), 0, "", ctx)
    return _report(A, f, v, "additive", ctx, start)


# ==================== MULTI-CANAL ====================

@dataclass
class _Channel:
    path: str
    matrix: SparseMatrix
    source_index: np.ndarray
    interpolation: Optional[SparseMatrix]
    nodes: np.ndarray


def _build_channels(A: SparseMatrix, hierarchy: PartitionHierarchy, depth: int, ctx: _Context) -> List[_Channel]:
    """Descend `depth` niveaux et compose R_c (indices) et P_c (produits A*·U_c)"""
    n = A.nrows
    frontier = [_Channel("", A, np.arange(n), None, hierarchy.root(n))]
    for level in range(depth):
        next_frontier = []
        for ch in frontier:
            ctx.visit(level, ch.path, ch.matrix, ch.matrix.is_diagonal(ctx.config.diagonal_tolerance))
            P = hierarchy.partition(level, ch.nodes)
            ctx.split()
            A_star = mirror(P, ch.matrix)
            for color in (Color.RED, Color.BLACK):
                idx = P.indices(color)
                interp = SparseMatrix(A_star.csr[:, idx])
                coarse = spmm(SparseMatrix(ch.matrix.csr[idx]), interp, ctx.counter, ctx.config)
                composed = interp if ch.interpolation is None else spmm(ch.interpolation, interp, ctx.counter, ctx.config)
                next_frontier.append(_Channel(ch.path + color.tag, coarse, ch.source_index[idx], composed, ch.nodes[idx]))
        frontier = next_frontier
    return frontier


def dmg_additive_multichannel(
    A: SparseMatrix,
    f,
    hierarchy: Optional[PartitionHierarchy] = None,
    depth: int = 1,
    config: Optional[DMGConfig] = None,
) -> SolveReport:
    """
    Schéma additif aplati: u = Σ_c P_c · solve_c(R_c f)

    Les canaux sont parcourus dans l'ordre produit (r avant b à chaque niveau);
    un canal dont la source restreinte est nulle est sauté.
    """
    f, hierarchy, config = _prepare(A, f, hierarchy, config)
    if depth < 1:
        raise InvalidConfigError(f"Profondeur multi-canal {depth} < 1")
    if hierarchy.max_levels is not None and depth > hierarchy.max_levels:
        raise InvalidConfigError(f"Profondeur {depth} > max_levels={hierarchy.max_levels}")
    if A.nrows % (2 ** depth):
        raise HierarchyExhaustedError(f"n={A.nrows} non divisible par 2^{depth}")

    ctx = _Context(hierarchy, config, OpCounter())
    start = time.perf_counter()
    channels = _build_channels(A, hierarchy, depth, ctx)

    def run(ch: _Channel) -> ChannelReport:
        rhs = f[ch.source_index]
        if not np.any(rhs):
            logger.debug("Canal '%s': source restreinte nulle", ch.path)
            return ChannelReport(ch.path, ch.matrix.nrows, True, np.zeros(A.nrows, dtype=DTYPE))
        v_c = _additive(ch.matrix, rhs, ch.nodes, depth, ch.path, ctx)
        return ChannelReport(ch.path, ch.matrix.nrows, False, spmv(ch.interpolation, v_c, ctx.counter))

    if config.threads > 1:
        with ThreadPoolExecutor(max_workers=config.threads) as executor:
            results = list(executor.map(run, channels))
    else:
        results = [run(ch) for ch in channels]

    u = np.zeros(A.nrows, dtype=DTYPE)
    for result in results:
        u = u + result.field
    return _report(A, f, u, "additive-multichannel", ctx, start, {r.path: r for r in results})


def channel_paths(depth: int) -> List[str]:
    """Chemins de canaux dans l'ordre de sommation"""
    return ["".join(c.tag for c in combo) for combo in itertools.product((Color.RED, Color.BLACK), repeat=depth)]


# ==================== DISPATCH ====================

def dense_solve(A: SparseMatrix, f, config: Optional[DMGConfig] = None) -> SolveReport:
    """LU dense de référence emballé dans un SolveReport"""
    config = config or DMGConfig()
    f = as_vector(f, A.nrows)
    ctx = _Context(EvenOddHierarchy(n0=max(A.nrows, 1)), config, OpCounter())
    start = time.perf_counter()
    v = dense_lu_solve(A, f, ctx.counter, config)
    ctx.visit(0, "", A, A.is_diagonal(config.diagonal_tolerance))
    return _report(A, f, v, "dense", ctx, start)


def solve(
    A: SparseMatrix,
    f,
    hierarchy: Optional[PartitionHierarchy] = None,
    method: str = "multiplicative",
    config: Optional[DMGConfig] = None,
    depth: Optional[int] = None,
) -> SolveReport:
    """Point d'entrée unique: multiplicative | additive | additive-multichannel | dense"""
    if method == "multiplicative":
        return dmg_multiplicative(A, f, hierarchy, config)
    if method == "additive":
        return dmg_additive(A, f, hierarchy, config)
    if method == "additive-multichannel":
        if depth is None:
            hierarchy_ = hierarchy or EvenOddHierarchy(n0=(config or DMGConfig()).n0)
            depth = max(1, hierarchy_.levels_for(A.nrows))
        return dmg_additive_multichannel(A, f, hierarchy, depth, config)
    if method == "dense":
        return dense_solve(A, f, config)
    raise InvalidConfigError(f"Méthode inconnue: {method} (attendu {', '.join(METHODS)})")


# ==================== COMPLEXITÉ ====================

@dataclass
class ComplexityRow:
    n: int
    multiplications: int
    wall_time: float
    vcycle_fraction: float
    ratio: Optional[float] = None

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "multiplications": self.multiplications,
            "wall_time": self.wall_time,
            "vcycle_fraction": self.vcycle_fraction,
            "ratio": self.ratio,
        }


@dataclass
class ComplexityTable:
    method: str
    rows: List[ComplexityRow]
    ratio_bound: float

    @property
    def passes(self) -> bool:
        """m(2n)/m(n) <= ratio_bound pour chaque doublement mesuré"""
        return all(r.ratio is None or r.ratio <= self.ratio_bound for r in self.rows)


def count_complexity(
    sizes: Sequence[int],
    method: str = "multiplicative",
    factory: Optional[Callable] = None,
    config: Optional[DMGConfig] = None,
    ratio_bound: float = 2.5,
) -> ComplexityTable:
    """
    Mesure les multiplications sur une série de tailles

    Args:
        sizes: Tailles de problème
        method: Méthode de résolution
        factory: n -> ProblemInstance (Helmholtz 1D, k = π/3 par défaut)
        config: Configuration
        ratio_bound: Borne sur m(2n)/m(n) entre tailles consécutives doublées

    Returns:
        ComplexityTable (ratio renseigné quand la taille précédente vaut n/2)
    """
    config = config or DMGConfig()
    if factory is None:
        from .problems import K_PI_OVER_3, helmholtz_periodic_1d

        def factory(n):
            return helmholtz_periodic_1d(n, K_PI_OVER_3, config=config, check_invertible=False, check_basis=False)

    rows: List[ComplexityRow] = []
    for n in sizes:
        problem = factory(n)
        f = np.zeros(problem.size, dtype=DTYPE)
        f[0] = 1.0
        report = solve(problem.A, f, problem.hierarchy, method, config)
        rows.append(ComplexityRow(n, report.multiplications, report.wall_time, report.vcycle_fraction))
        if len(rows) > 1 and rows[-2].n * 2 == n and rows[-2].multiplications > 0:
            rows[-1].ratio = rows[-1].multiplications / rows[-2].multiplications
    table = ComplexityTable(method, rows, ratio_bound)
    if not table.passes:
        logger.warning("Complexité %s: rapport m(2n)/m(n) au-delà de %.2f", method, ratio_bound)
    return table
