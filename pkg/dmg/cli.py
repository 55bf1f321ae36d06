"""
Interface en ligne de commande: solve, verify, bench

    python -m dmg solve --problem helmholtz2d --N 32 --k pi/3 --source two-frequency
    python -m dmg verify --suite all --n 16
    python -m dmg bench --method additive --sizes 64 128 256

Codes de sortie: 0 succès, 1 échec de vérification ou résidu trop grand,
2 système singulier, 3 erreur d'entrée/sortie, 4 configuration invalide.
"""
import argparse
import csv
import json
import logging
import os
import sys
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, Field, ValidationError, field_validator, model_validator

from .config import DMGConfig
from .errors import (
    DimensionMismatchError,
    DMGError,
    HierarchyExhaustedError,
    InvalidConfigError,
    SingularMatrixError,
)
from .matrix_io import write_field_csv
from .multigrid import METHODS, count_complexity, solve
from .problems import PROBLEMS, ProblemInstance, SourceKind, SourceSpec, load_problem, make_problem, make_source, parse_wavenumber
from .twogrid import TwoGridConfig, solve_additive_2g, solve_multiplicative_2g
from .verify import BASES, SUITES, run_suite

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_SINGULAR = 2
EXIT_IO = 3
EXIT_INVALID_CONFIG = 4

DEFAULT_SIZES = [64, 128, 256, 512, 1024, 2048]


# ==================== CONFIGURATION ====================

class RunConfig(BaseModel):
    """Paramètres d'une exécution, issus des options ou d'un fichier JSON"""
    command: Literal["solve", "verify", "bench"]
    problem: Optional[str] = None
    n: Optional[int] = Field(None, gt=0)
    N: Optional[int] = Field(None, gt=0)
    k: Optional[float] = None
    matrix: Optional[str] = None
    method: str = "multiplicative"
    source: str = SourceKind.UNIT_IMPULSE.value
    source_file: Optional[str] = None
    depth: Optional[int] = Field(None, ge=1)
    dump_fields: bool = False
    suite: str = "all"
    basis: Optional[str] = None
    break_symbol: Optional[float] = None
    sizes: List[int] = Field(default_factory=lambda: list(DEFAULT_SIZES))
    n0: Optional[int] = Field(None, ge=1)
    threads: Optional[int] = Field(None, ge=1)
    residual_threshold: Optional[float] = Field(None, gt=0)
    output: Optional[str] = None
    verbose: bool = False

    @field_validator("k", mode="before")
    @classmethod
    def _wavenumber(cls, value):
        return None if value is None else parse_wavenumber(value)

    @field_validator("problem")
    @classmethod
    def _problem(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in PROBLEMS:
            raise ValueError(f"problème inconnu '{value}' (disponibles: {', '.join(PROBLEMS)})")
        return value

    @field_validator("method")
    @classmethod
    def _method(cls, value: str) -> str:
        if value not in METHODS:
            raise ValueError(f"méthode inconnue '{value}' (attendu {', '.join(METHODS)})")
        return value

    @field_validator("source")
    @classmethod
    def _source(cls, value: str) -> str:
        return SourceKind.parse(value).value

    @field_validator("suite")
    @classmethod
    def _suite(cls, value: str) -> str:
        if value not in SUITES:
            raise ValueError(f"suite inconnue '{value}' (attendu {', '.join(SUITES)})")
        return value

    @field_validator("basis")
    @classmethod
    def _basis(cls, value: Optional[str]) -> Optional[str]:
        if value is not None and value not in BASES:
            raise ValueError(f"base inconnue '{value}' (attendu {', '.join(BASES)})")
        return value

    @field_validator("sizes")
    @classmethod
    def _sizes(cls, value: List[int]) -> List[int]:
        if not value or any(s <= 0 for s in value):
            raise ValueError("les tailles doivent être strictement positives")
        return value

    @model_validator(mode="after")
    def _defaults(self) -> "RunConfig":
        if self.problem is None:
            # bench balaie des tailles 1D, solve vise le tore
            self.problem = "helmholtz1d" if self.command == "bench" else "helmholtz2d"
        if self.source == SourceKind.FILE.value and not self.source_file:
            raise ValueError("--source file exige --source-file")
        return self

    def dmg_config(self) -> DMGConfig:
        return DMGConfig.from_env().with_overrides(
            n0=self.n0, threads=self.threads, residual_threshold=self.residual_threshold
        )


# ==================== SORTIES ====================

def _json_default(value: Any):
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, np.ndarray):
        return value.tolist()
    raise TypeError(f"Type non sérialisable: {type(value).__name__}")


def _write_json(path: str, payload: Dict[str, Any]) -> None:
    os.makedirs(os.path.dirname(path) or ".", exist_ok=True)
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, ensure_ascii=False, default=_json_default)


def _output_dir(run: RunConfig, config: DMGConfig) -> str:
    return run.output or config.output_dir


def _problem(run: RunConfig, config: DMGConfig) -> ProblemInstance:
    if run.matrix:
        return load_problem(run.matrix, config)
    return make_problem(run.problem, n=run.n, N=run.N, k=run.k, config=config)


def _dump_fields(run: RunConfig, problem: ProblemInstance, f: np.ndarray, solution: np.ndarray,
                 channels: Dict, config: DMGConfig, out: str) -> List[str]:
    """Champs intermédiaires du premier niveau (v0, e0 ou canaux) en CSV"""
    shape = problem.geometry.shape
    fields: Dict[str, np.ndarray] = {"source": f, "solution": solution}
    hierarchy = problem.hierarchy
    if run.method in ("multiplicative", "additive"):
        P = hierarchy.partition(0, hierarchy.root(problem.size))
        if run.method == "multiplicative":
            result = solve_multiplicative_2g(problem.A, TwoGridConfig.multiplicative_standard(P), f, config, hierarchy)
            fields.update({"v0": result.intermediates["v0"], "e0": result.intermediates["e0"]})
        else:
            result = solve_additive_2g(problem.A, TwoGridConfig.additive_standard(P), f, config, hierarchy)
            fields.update(result.intermediates)
    for path, channel in channels.items():
        fields[f"channel_{path}"] = channel.field

    written = []
    for name, values in fields.items():
        target = os.path.join(out, f"field_{name}.csv")
        write_field_csv(target, values, shape)
        written.append(target)
    return written


# ==================== COMMANDES ====================

def cmd_solve(run: RunConfig, config: Optional[DMGConfig] = None) -> int:
    config = config or run.dmg_config()
    problem = _problem(run, config)
    f = make_source(SourceSpec(run.source, run.source_file), problem)
    print(f"🔍 Problème {problem.name}: n={problem.size}, nnz={problem.A.nnz}, méthode {run.method}")

    report = solve(problem.A, f, problem.hierarchy, run.method, config, run.depth)
    out = _output_dir(run, config)
    report_path = os.path.join(out, "solve_report.json")
    _write_json(report_path, {"problem": problem.describe(), "run": run.model_dump(), **report.to_dict()})
    print(f"📊 {report.multiplications} multiplications, {report.wall_time:.3f}s, résidu relatif {report.relative_residual:.2e}")
    print(f"📤 Rapport écrit dans {report_path}")

    if run.dump_fields:
        written = _dump_fields(run, problem, f, report.solution, report.channels, config, out)
        print(f"📤 {len(written)} champs écrits dans {out}")

    if report.relative_residual <= config.residual_threshold:
        print("✅ Résolution directe réussie")
        return EXIT_OK
    print(f"❌ Résidu {report.relative_residual:.2e} au-delà du seuil {config.residual_threshold:.0e}")
    return EXIT_CHECK_FAILED


def cmd_verify(run: RunConfig, config: Optional[DMGConfig] = None) -> int:
    config = config or run.dmg_config()
    print(f"🔍 Suite {run.suite} (n={run.n or 16})")
    results = run_suite(run.suite, run.n or 16, run.basis, run.break_symbol, config)
    for r in results:
        mark = "✅" if r.passed else "❌"
        detail = f" ({r.detail})" if r.detail else ""
        print(f"{mark} {r.name}: résidu {r.residual:.2e} / tolérance {r.tolerance:.0e}{detail}")

    failed = [r for r in results if not r.passed]
    out = _output_dir(run, config)
    _write_json(os.path.join(out, "verify_report.json"), {
        "suite": run.suite,
        "n": run.n or 16,
        "break_symbol": run.break_symbol,
        "checks": [r.to_dict() for r in results],
    })
    print(f"📊 {len(results) - len(failed)}/{len(results)} vérifications réussies")
    return EXIT_CHECK_FAILED if failed else EXIT_OK


def cmd_bench(run: RunConfig, config: Optional[DMGConfig] = None) -> int:
    config = config or run.dmg_config()
    one_dimensional = run.problem != "helmholtz2d"

    def factory(size: int) -> ProblemInstance:
        return make_problem(
            run.problem, n=size, N=size, k=run.k, config=config, check_invertible=False, check_basis=False
        )

    # en 2D les tailles désignent le côté N; le rapport m(2N)/m(N) n'est pas borné par 2.5
    ratio_bound = 2.5 if one_dimensional else float("inf")
    table = count_complexity(run.sizes, run.method, factory, config, ratio_bound)

    out = _output_dir(run, config)
    os.makedirs(out, exist_ok=True)
    path = os.path.join(out, f"bench_{run.problem}_{run.method}.csv")
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n", "multiplications", "wall_time", "was_vcycle_fraction"])
        for row in table.rows:
            writer.writerow([row.n, row.multiplications, f"{row.wall_time:.6f}", f"{row.vcycle_fraction:.4f}"])
            ratio = f", rapport {row.ratio:.3f}" if row.ratio is not None else ""
            print(f"📊 n={row.n}: {row.multiplications} multiplications{ratio}")
    print(f"📤 CSV écrit dans {path}")

    if table.passes:
        print("✅ Croissance conforme")
        return EXIT_OK
    print(f"❌ Rapport m(2n)/m(n) au-delà de {ratio_bound}")
    return EXIT_CHECK_FAILED


COMMANDS = {"solve": cmd_solve, "verify": cmd_verify, "bench": cmd_bench}


# ==================== PARSEUR ====================

class _Parser(argparse.ArgumentParser):
    """Une option invalide est une configuration invalide (code 4)"""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INVALID_CONFIG, f"{self.prog}: erreur: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False, argument_default=argparse.SUPPRESS)
    common.add_argument("--config", help="Fichier JSON équivalent aux options")
    common.add_argument("--problem", help=f"Famille de problèmes ({', '.join(PROBLEMS)})")
    common.add_argument("--n", type=int, help="Taille des problèmes 1D")
    common.add_argument("--N", type=int, help="Côté du tore (helmholtz2d)")
    common.add_argument("--k", help="Nombre d'onde, décimal ou symbolique (pi/3)")
    common.add_argument("--matrix", help="Système externe au format Matrix Market")
    common.add_argument("--n0", type=int, help="Taille du cas de base")
    common.add_argument("--threads", type=int, help="Nombre max de threads (canaux additifs)")
    common.add_argument("--residual-threshold", dest="residual_threshold", type=float)
    common.add_argument("--output", help="Dossier de sortie (DMG_OUTPUT_DIR par défaut)")
    common.add_argument("--verbose", action="store_true", help="Logs DEBUG")

    parser = _Parser(prog="dmg", description="Solveurs multigrilles directs rouge-noir")
    sub = parser.add_subparsers(dest="command", required=True)

    solve_p = sub.add_parser("solve", parents=[common], argument_default=argparse.SUPPRESS, help="Résout un système")
    solve_p.add_argument("--method", help=", ".join(METHODS))
    solve_p.add_argument("--source", help=", ".join(k.value for k in SourceKind))
    solve_p.add_argument("--source-file", dest="source_file")
    solve_p.add_argument("--depth", type=int, help="Profondeur du schéma multi-canal")
    solve_p.add_argument("--dump-fields", dest="dump_fields", action="store_true")

    verify_p = sub.add_parser("verify", parents=[common], argument_default=argparse.SUPPRESS, help="Batterie de vérification")
    verify_p.add_argument("--suite", help=", ".join(SUITES))
    verify_p.add_argument("--basis", help=", ".join(BASES))
    verify_p.add_argument("--break-symbol", dest="break_symbol", type=float, help="Perturbation injectée dans F̃_I")

    bench_p = sub.add_parser("bench", parents=[common], argument_default=argparse.SUPPRESS, help="Comptage de complexité")
    bench_p.add_argument("--method", help=", ".join(METHODS))
    bench_p.add_argument("--sizes", type=int, nargs="+")
    return parser


def load_run_config(args: argparse.Namespace) -> RunConfig:
    """Fusionne le fichier --config (base) et les options explicites (prioritaires)"""
    values = vars(args).copy()
    config_path = values.pop("config", None)
    merged: Dict[str, Any] = {}
    if config_path:
        with open(config_path, "r", encoding="utf-8") as fh:
            try:
                merged.update(json.load(fh))
            except json.JSONDecodeError as e:
                raise InvalidConfigError(f"Fichier de configuration invalide {config_path}: {e}") from e
        merged.pop("command", None)
    merged.update(values)
    return RunConfig(**merged)


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        run = load_run_config(args)
    except (ValidationError, InvalidConfigError) as e:
        print(f"❌ Configuration invalide: {e}")
        return EXIT_INVALID_CONFIG
    except OSError as e:
        print(f"❌ Lecture de la configuration impossible: {e}")
        return EXIT_IO

    logging.basicConfig(
        level=logging.DEBUG if run.verbose else logging.WARNING,
        format="%(asctime)s %(name)s %(levelname)s %(message)s",
    )

    try:
        return COMMANDS[run.command](run)
    except SingularMatrixError as e:
        print(f"❌ Système singulier: {e}")
        return EXIT_SINGULAR
    except (InvalidConfigError, DimensionMismatchError, HierarchyExhaustedError) as e:
        print(f"❌ Configuration invalide: {e}")
        return EXIT_INVALID_CONFIG
    except DMGError as e:
        print(f"❌ Vérification en échec: {e}")
        return EXIT_CHECK_FAILED
    except (OSError, ValueError) as e:
        print(f"❌ Erreur d'entrée/sortie: {e}")
        return EXIT_IO
