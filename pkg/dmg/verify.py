"""
Batterie de vérification numérique partagée par la CLI et l'API
"""
import logging
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from .aliasing import (
    build_dft_basis_1d,
    build_dft_basis_2d,
    build_sine_basis,
    check_biorthogonal_relationships,
    check_multigrid_harmonic_basis,
    check_rbhap,
    check_surjective_form,
    random_basis,
)
from .config import DMGConfig
from .core import DTYPE, dense_inverse, frobenius
from .errors import DMGError, InvalidConfigError
from .filterbank import (
    FilterQuad,
    check_frequency_inversion,
    check_vetterli,
    filter_from_symbols,
    make_qmf_bank,
    run_bank,
    symbols_of_quad,
)
from .multigrid import EvenOddHierarchy, TorusHierarchy, count_complexity, solve
from .partition import Color, RedBlackPartition
from .problems import K_PI_OVER_3, SourceKind, SourceSpec, helmholtz_periodic_1d, helmholtz_periodic_2d, make_source
from .twogrid import (
    SolveMode,
    TwoGridConfig,
    additive_factorization,
    build_coarse,
    cgc_matrix,
    cgc_symbols,
    check_direct_conditions,
    config_symbols,
    error_operators,
    galerkin_inverse_check,
    multiplicative_factorization,
    perturb_config,
    system_symbols,
)

logger = logging.getLogger(__name__)

SUITES = ("aliasing", "filterbank", "twogrid", "multigrid", "all")
BASES = ("dft", "dft2d", "sine8")


@dataclass
class CheckResult:
    name: str
    passed: bool
    residual: float
    tolerance: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": self.passed,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "detail": self.detail,
        }


def _bounded(name: str, residual: float, tol: float, detail: str = "") -> CheckResult:
    return CheckResult(name, bool(np.isfinite(residual) and residual <= tol), float(residual), tol, detail)


def _guarded(name: str, tol: float, check: Callable[[], CheckResult]) -> CheckResult:
    """Une erreur typée devient un échec de vérification, jamais une exception"""
    try:
        return check()
    except DMGError as e:
        logger.debug("Vérification %s: %s", name, e)
        return CheckResult(name, False, float("inf"), tol, f"{type(e).__name__}: {e}")


# ==================== ALIASING ====================

def _aliasing_suite(n: int, basis_name: Optional[str]) -> List[CheckResult]:
    tol = 1e-10
    results: List[CheckResult] = []
    cases = []
    if basis_name in (None, "dft"):
        cases.append((build_dft_basis_1d(n), RedBlackPartition.even_odd(n)))
    if basis_name in (None, "dft2d"):
        N = 8
        cases.append((build_dft_basis_2d(N), TorusHierarchy(N).partition(0, np.arange(N * N))))
    if basis_name in (None, "sine8"):
        cases.append((build_sine_basis(8), RedBlackPartition.even_odd(8)))

    for basis, P in cases:
        def rbhap(basis=basis, P=P):
            report = check_rbhap(basis, P, tol)
            worst = max(report.max_deviation_red, report.max_deviation_black)
            return _bounded(f"rbhap[{basis.name}]", worst, tol)

        def surjective(basis=basis, P=P):
            ok = check_surjective_form(basis, P, tol)
            return CheckResult(f"surjective_form[{basis.name}]", ok, 0.0 if ok else 1.0, tol)

        def complement(basis=basis, P=P):
            report = check_rbhap(basis, P, tol)
            return _bounded(f"red_black_complement[{basis.name}]", report.complement_deviation, tol)

        def relationships(basis=basis, P=P):
            deviations = check_biorthogonal_relationships(basis, P, tol)
            return _bounded(f"coarse_relationships[{basis.name}]", deviations["max"], tol)

        for name, check in (("rbhap", rbhap), ("surjective", surjective), ("complement", complement),
                            ("relationships", relationships)):
            results.append(_guarded(f"{name}[{basis.name}]", tol, check))

    def multigrid_1d():
        reports = check_multigrid_harmonic_basis(build_dft_basis_1d(n), EvenOddHierarchy(), levels=3, tol=tol)
        failing = [r.level for r in reports if not r.passes]
        worst = max((max(r.report.max_deviation_red, r.report.max_deviation_black) for r in reports if r.report), default=0.0)
        return CheckResult("multigrid_basis[dft1d]", not failing and len(reports) == 3, worst, tol,
                           f"niveaux en échec: {failing}" if failing else "")

    def multigrid_2d():
        reports = check_multigrid_harmonic_basis(build_dft_basis_2d(8), TorusHierarchy(8), levels=2, tol=tol)
        failing = [r.level for r in reports if not r.passes]
        return CheckResult("multigrid_basis[dft2d-8]", not failing and len(reports) == 2, 0.0 if not failing else 1.0, tol)

    if basis_name in (None, "dft"):
        results.append(_guarded("multigrid_basis[dft1d]", tol, multigrid_1d))
    if basis_name in (None, "dft2d"):
        results.append(_guarded("multigrid_basis[dft2d-8]", tol, multigrid_2d))

    def counterexamples():
        rng = np.random.default_rng(1234)
        P = RedBlackPartition.even_odd(n)
        disagreements = 0
        passing = 0
        for _ in range(20):
            basis = random_basis(n, rng)
            a = check_rbhap(basis, P, tol).passes
            b = check_surjective_form(basis, P, tol)
            disagreements += int(a != b)
            passing += int(a or b)
        return CheckResult("random_bases_fail_both", disagreements == 0 and passing == 0, float(disagreements + passing), 0.0)

    results.append(_guarded("random_bases_fail_both", 0.0, counterexamples))
    return results


# ==================== BANC DE FILTRES ====================

def _filterbank_suite(n: int) -> List[CheckResult]:
    results: List[CheckResult] = []
    basis = build_dft_basis_1d(n)
    P = RedBlackPartition.even_odd(n)
    rng = np.random.default_rng(42)
    signals = [rng.standard_normal(n) + 1j * rng.standard_normal(n) for _ in range(10)]

    def worst_reconstruction(quad: FilterQuad) -> float:
        return max(np.linalg.norm(run_bank(quad, s)[0] - s) / np.linalg.norm(s) for s in signals)

    def identity_bank():
        return _bounded("identity_bank", worst_reconstruction(FilterQuad.identity(P)), 1e-14)

    def qmf_bank():
        theta = 0.3 * np.arange(P.half)
        quad = make_qmf_bank(basis, P, theta)
        recon = worst_reconstruction(quad)
        report = check_vetterli(symbols_of_quad(quad, basis), 1e-10)
        return CheckResult("qmf_perfect_reconstruction", bool(recon <= 1e-12 and report.passes),
                           float(recon), 1e-12, f"résidu symbolique {report.residuals['max']:.2e}")

    def broken_qmf():
        quad = make_qmf_bank(basis, P, 0.3 * np.arange(P.half), break_mirror=True)
        report = check_vetterli(symbols_of_quad(quad, basis), 1e-10)
        recon = worst_reconstruction(quad)
        detected = (not report.passes) and report.residuals["max"] >= 1e-4 and recon > 1e-4
        return CheckResult("broken_mirror_detected", bool(detected), report.residuals["max"], 1e-4)

    def half_gain_bank():
        quad = FilterQuad.identity(P, gain=1 / np.sqrt(2))
        gap = max(np.linalg.norm(run_bank(quad, s)[0] - s / 2) for s in signals)
        report = check_vetterli(symbols_of_quad(quad, basis), 1e-10)
        return CheckResult("scaled_identity_bank_halves", bool(gap <= 1e-13 and not report.passes), float(gap), 1e-13)

    def frequency_inversion():
        E_L = rng.standard_normal(P.half) + 1j * rng.standard_normal(P.half)
        E_H = rng.standard_normal(P.half) + 1j * rng.standard_normal(P.half)
        F = filter_from_symbols(basis, E_L, E_H)
        return _bounded("mirror_swaps_symbols", check_frequency_inversion(F, P, basis), 1e-10)

    for name, check in (("identity_bank", identity_bank), ("qmf_perfect_reconstruction", qmf_bank),
                        ("broken_mirror_detected", broken_qmf), ("scaled_identity_bank_halves", half_gain_bank),
                        ("mirror_swaps_symbols", frequency_inversion)):
        results.append(_guarded(name, 1e-10, check))
    return results


# ==================== DEUX GRILLES ====================

def _twogrid_checks(label: str, problem, basis, break_symbol: Optional[float], config: DMGConfig) -> List[CheckResult]:
    A = problem.A
    P = problem.hierarchy.partition(0, problem.hierarchy.root(problem.size))
    mult = TwoGridConfig.multiplicative_standard(P)
    add = TwoGridConfig.additive_standard(P)
    if break_symbol:
        mult = perturb_config(mult, A, basis, break_symbol)
        add = perturb_config(add, A, basis, break_symbol)
    results: List[CheckResult] = []
    n = problem.size
    scale = max(frobenius(A), 1.0)

    def product():
        ops = error_operators(A, mult, config)
        return _bounded(f"multiplicative_product[{label}]", ops.product_norm / scale, 1e-10)

    def additive_sum():
        ops = error_operators(A, add, config)
        return _bounded(f"additive_sum[{label}]", ops.sum_norm / scale, 1e-10)

    def idempotent():
        ops = error_operators(A, mult, config)
        worst = max(frobenius(K @ K - K) / max(frobenius(K), 1.0) for K in (ops.K_red, ops.K_black))
        return _bounded(f"cgc_idempotent[{label}]", worst, 1e-10)

    def factorization(kind: str):
        def check():
            build = multiplicative_factorization if kind == "multiplicative" else additive_factorization
            cfg = mult if kind == "multiplicative" else add
            reference = dense_inverse(A, config)
            gap = frobenius(build(A, cfg, config) - reference) / frobenius(reference)
            return _bounded(f"{kind}_factorization[{label}]", gap, 1e-9)
        return check

    def symbols_match(cfg: TwoGridConfig, tag: str):
        def check():
            worst = 0.0
            for color in (Color.RED, Color.BLACK):
                K = cgc_matrix(A, build_coarse(A, cfg, color, config), config)
                analytic = cgc_symbols(A, cfg, color, basis, config).as_matrix()
                worst = max(worst, float(np.abs(basis.symbols_of(K) - analytic).max()))
            return _bounded(f"cgc_symbols_{tag}[{label}]", worst, 1e-9)
        return check

    def galerkin_inverse(cfg: TwoGridConfig, tag: str):
        def check():
            worst = 0.0
            for color in (Color.RED, Color.BLACK):
                _, residual = galerkin_inverse_check(A, cfg, color, basis, 1e-10, config)
                worst = max(worst, residual)
            return _bounded(f"galerkin_inverse_{tag}[{label}]", worst, 1e-10)
        return check

    def conditions(cfg: TwoGridConfig, mode: SolveMode):
        def check():
            report = check_direct_conditions(config_symbols(A, cfg, basis), system_symbols(A, basis), mode, 1e-10)
            return CheckResult(f"direct_conditions_{mode.value}[{label}]", report.passes, report.residuals["max"], 1e-10)
        return check

    checks = [
        ("product", product), ("additive_sum", additive_sum), ("idempotent", idempotent),
        ("mult_factorization", factorization("multiplicative")), ("add_factorization", factorization("additive")),
        ("symbols_mult", symbols_match(mult, "multiplicative")), ("symbols_add", symbols_match(add, "additive")),
        ("galerkin_mult", galerkin_inverse(mult, "multiplicative")), ("galerkin_add", galerkin_inverse(add, "additive")),
        ("cond_mult", conditions(mult, SolveMode.MULTIPLICATIVE)), ("cond_add", conditions(add, SolveMode.ADDITIVE)),
    ]
    if n > 64:
        checks = [c for c in checks if c[0].startswith("cond")]
    for name, check in checks:
        results.append(_guarded(f"{name}[{label}]", 1e-9, check))
    return results


def _random_idempotency(n: int, config: DMGConfig, count: int = 12) -> CheckResult:
    """K² = K pour des configurations aléatoires (filtres de symboles aléatoires)"""
    rng = np.random.default_rng(7)
    problem = helmholtz_periodic_1d(n, K_PI_OVER_3, config=config, check_invertible=False)
    basis = build_dft_basis_1d(n)
    P = RedBlackPartition.even_odd(n)
    worst = 0.0
    for _ in range(count):
        filters = [
            filter_from_symbols(basis, *(rng.standard_normal((2, n // 2)) + 1j * rng.standard_normal((2, n // 2))))
            for _ in range(4)
        ]
        cfg = TwoGridConfig(P, *filters)
        for color in (Color.RED, Color.BLACK):
            K = cgc_matrix(problem.A, build_coarse(problem.A, cfg, color, config), config)
            worst = max(worst, frobenius(K @ K - K) / max(frobenius(K), 1.0))
    return _bounded("cgc_idempotent_random", worst, 1e-9)


def _twogrid_suite(n: int, break_symbol: Optional[float], config: DMGConfig) -> List[CheckResult]:
    results = _twogrid_checks(
        f"helmholtz1d-{n}", helmholtz_periodic_1d(n, K_PI_OVER_3, config=config), build_dft_basis_1d(n),
        break_symbol, config,
    )
    results += _twogrid_checks(
        "helmholtz2d-4", helmholtz_periodic_2d(4, K_PI_OVER_3, config=config), build_dft_basis_2d(4),
        break_symbol, config,
    )
    results.append(_guarded("cgc_idempotent_random", 1e-9, lambda: _random_idempotency(min(n, 32), config)))
    return results


# ==================== MULTIGRILLE ====================

def _multigrid_suite(n: int, config: DMGConfig) -> List[CheckResult]:
    results: List[CheckResult] = []
    n1 = max(n, 4 * config.n0)
    problems = [
        (helmholtz_periodic_1d(n1, K_PI_OVER_3, config=config), SourceSpec(SourceKind.UNIT_IMPULSE)),
        (helmholtz_periodic_2d(16, K_PI_OVER_3, config=config), SourceSpec(SourceKind.POINT_PATCH)),
    ]
    for problem, source in problems:
        label = f"{problem.name}-{problem.size}"
        f = make_source(source, problem)

        def oracle(problem=problem, f=f, label=label):
            reference = solve(problem.A, f, problem.hierarchy, "dense", config).solution
            worst = 0.0
            for method in ("multiplicative", "additive", "additive-multichannel"):
                v = solve(problem.A, f, problem.hierarchy, method, config).solution
                worst = max(worst, float(np.linalg.norm(v - reference) / np.linalg.norm(reference)))
            return _bounded(f"oracle_equivalence[{label}]", worst, 1e-9)

        results.append(_guarded(f"oracle_equivalence[{label}]", 1e-9, oracle))

    def vcycle():
        problem = problems[0][0]
        f = make_source(problems[0][1], problem)
        report = solve(problem.A, f, problem.hierarchy, "multiplicative", config)
        red = [v for v in report.levels_visited if v.path.endswith("r")]
        ok = bool(red) and all(v.was_diagonal for v in red)
        return CheckResult("red_coarse_diagonal[helmholtz1d]", ok, report.vcycle_fraction, 1.0)

    def complexity():
        sizes = [s for s in (64, 128, 256, 512) if s >= 2 * config.n0]
        mult = count_complexity(sizes, "multiplicative", config=config)
        add = count_complexity(sizes, "additive", config=config)
        worst = max((r.ratio for r in mult.rows + add.rows if r.ratio is not None), default=0.0)
        dominated = all(a.multiplications >= m.multiplications for a, m in zip(add.rows, mult.rows))
        return CheckResult("complexity_doubling", bool(mult.passes and add.passes and dominated), float(worst), 2.5)

    results.append(_guarded("red_coarse_diagonal[helmholtz1d]", 1.0, vcycle))
    results.append(_guarded("complexity_doubling", 2.5, complexity))
    return results


# ==================== POINT D'ENTRÉE ====================

def run_suite(
    name: str = "all",
    n: int = 16,
    basis: Optional[str] = None,
    break_symbol: Optional[float] = None,
    config: Optional[DMGConfig] = None,
) -> List[CheckResult]:
    """
    Exécute une suite de vérification

    Args:
        name: aliasing | filterbank | twogrid | multigrid | all
        n: Taille des problèmes 1D (paire)
        basis: Restreint la suite aliasing à une base (dft, dft2d, sine8)
        break_symbol: Perturbation injectée dans F̃_I (suite twogrid)
        config: Configuration

    Returns:
        Liste de CheckResult
    """
    config = config or DMGConfig()
    if name not in SUITES:
        raise InvalidConfigError(f"Suite inconnue: {name} (attendu {', '.join(SUITES)})")
    if basis is not None and basis not in BASES:
        raise InvalidConfigError(f"Base inconnue: {basis} (attendu {', '.join(BASES)})")
    if n < 4 or n % 4:
        raise InvalidConfigError(f"n={n} doit être un multiple de 4")

    results: List[CheckResult] = []
    if name in ("aliasing", "all"):
        results += _aliasing_suite(n, basis)
    if name in ("filterbank", "all"):
        results += _filterbank_suite(n)
    if name in ("twogrid", "all"):
        results += _twogrid_suite(n, break_symbol, config)
    if name in ("multigrid", "all"):
        results += _multigrid_suite(n, config)
    passed = sum(r.passed for r in results)
    logger.info("Suite %s: %d/%d vérifications réussies", name, passed, len(results))
    return results
