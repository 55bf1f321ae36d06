"""
Endpoints API pour le module DMG
"""
import os
import tempfile
from typing import Any, Dict, List, Optional, Union

from fastapi import APIRouter, File, Form, HTTPException, UploadFile
from pydantic import BaseModel

from .config import DMGConfig
from .errors import (
    DimensionMismatchError,
    DMGError,
    HierarchyExhaustedError,
    InvalidConfigError,
    SingularMatrixError,
)
from .multigrid import METHODS, solve
from .problems import PROBLEMS, SourceSpec, load_problem, make_problem, make_source
from .verify import SUITES, run_suite

router = APIRouter(prefix="/dmg", tags=["DMG"])

# Configuration globale (lazy loading)
_config: Optional[DMGConfig] = None


def get_config() -> DMGConfig:
    """Retourne la configuration du module (lue une fois depuis l'environnement)"""
    global _config
    if _config is None:
        _config = DMGConfig.from_env()
    return _config


def _http_error(e: Exception, action: str) -> HTTPException:
    if isinstance(e, SingularMatrixError):
        return HTTPException(status_code=409, detail=f"Système singulier: {str(e)}")
    if isinstance(e, (InvalidConfigError, DimensionMismatchError, HierarchyExhaustedError)):
        return HTTPException(status_code=422, detail=f"Paramètres invalides: {str(e)}")
    return HTTPException(status_code=500, detail=f"Erreur lors {action}: {str(e)}")


# ==================== MODELS ====================

class SolveRequest(BaseModel):
    problem: str = "helmholtz1d"
    n: Optional[int] = None
    N: Optional[int] = None
    k: Optional[Union[float, str]] = None
    method: str = "multiplicative"
    source: str = "unit-impulse"
    depth: Optional[int] = None
    n0: Optional[int] = None
    include_solution: bool = False


class SolveResponse(BaseModel):
    problem: Dict[str, Any]
    method: str
    success: bool
    multiplications: int
    relative_residual: float
    wall_time: float
    vcycle_fraction: float
    report: Dict[str, Any]


class VerifyRequest(BaseModel):
    suite: str = "all"
    n: int = 16
    basis: Optional[str] = None
    break_symbol: Optional[float] = None


class VerifyResponse(BaseModel):
    suite: str
    passed: bool
    checks: List[Dict[str, Any]]


def _response(problem, report, include_solution: bool, config: DMGConfig) -> SolveResponse:
    return SolveResponse(
        problem=problem.describe(),
        method=report.method,
        success=report.relative_residual <= config.residual_threshold,
        multiplications=report.multiplications,
        relative_residual=report.relative_residual,
        wall_time=report.wall_time,
        vcycle_fraction=report.vcycle_fraction,
        report=report.to_dict(include_solution=include_solution),
    )


# ==================== ENDPOINTS ====================

@router.post("/solve", response_model=SolveResponse)
def solve_problem(request: SolveRequest):
    """
    Résout un problème nommé

    - Génère le système et la source
    - Applique la méthode demandée
    - Retourne le rapport (compte de multiplications, résidu, niveaux)
    """
    try:
        config = get_config().with_overrides(n0=request.n0)
        problem = make_problem(request.problem, n=request.n, N=request.N, k=request.k, config=config)
        f = make_source(SourceSpec(request.source), problem)
        report = solve(problem.A, f, problem.hierarchy, request.method, config, request.depth)
        return _response(problem, report, request.include_solution, config)
    except DMGError as e:
        raise _http_error(e, "de la résolution")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Erreur lors de la résolution: {str(e)}")


@router.post("/solve/upload", response_model=SolveResponse)
async def solve_upload(
    file: UploadFile = File(...),
    rhs: Optional[UploadFile] = File(None),
    method: str = Form("multiplicative"),
    include_solution: bool = Form(False),
):
    """
    Résout un système Matrix Market envoyé par l'utilisateur
    Second membre: CSV (re,im) optionnel, e₀ sinon
    """
    paths = []
    try:
        # Sauvegarder les fichiers temporairement
        with tempfile.NamedTemporaryFile(delete=False, suffix=".mtx") as tmp:
            tmp.write(await file.read())
            paths.append(tmp.name)
        source = SourceSpec()
        if rhs is not None:
            with tempfile.NamedTemporaryFile(delete=False, suffix=".csv") as tmp:
                tmp.write(await rhs.read())
                paths.append(tmp.name)
            source = SourceSpec("file", paths[-1])

        config = get_config()
        problem = load_problem(paths[0], config)
        problem.params["path"] = file.filename
        f = make_source(source, problem)
        report = solve(problem.A, f, problem.hierarchy, method, config)
        return _response(problem, report, include_solution, config)
    except DMGError as e:
        raise _http_error(e, "de l'upload")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Erreur lors de l'upload: {str(e)}")
    finally:
        # Nettoyer les fichiers temporaires
        for path in paths:
            os.unlink(path)


@router.post("/verify", response_model=VerifyResponse)
def verify(request: VerifyRequest):
    """
    Exécute une suite de vérification
    """
    try:
        results = run_suite(request.suite, request.n, request.basis, request.break_symbol, get_config())
        return VerifyResponse(
            suite=request.suite,
            passed=all(r.passed for r in results),
            checks=[r.to_dict() for r in results],
        )
    except DMGError as e:
        raise _http_error(e, "de la vérification")
    except Exception as e:
        raise HTTPException(status_code=500, detail=f"Erreur lors de la vérification: {str(e)}")


@router.get("/problems")
def list_problems():
    """
    Liste les familles de problèmes, méthodes et suites disponibles
    """
    return {
        "problems": list(PROBLEMS),
        "methods": list(METHODS),
        "suites": list(SUITES),
    }


@router.get("/health")
def health_check():
    """
    Vérifie que le module DMG est opérationnel
    """
    try:
        config = get_config()
        return {
            "status": "healthy",
            "n0": config.n0,
            "residual_threshold": config.residual_threshold,
            "threads": config.threads,
            "output_dir": config.output_dir,
        }
    except Exception as e:
        raise HTTPException(status_code=503, detail=f"DMG non disponible: {str(e)}")
