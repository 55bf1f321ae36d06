import numpy as np
import pytest

from dmg.config import DMGConfig
from dmg.core import SparseMatrix
from dmg.errors import DimensionMismatchError, InvalidConfigError, SingularMatrixError
from dmg.matrix_io import write_matrix_market, write_vector_csv
from dmg.multigrid import EvenOddHierarchy, TorusHierarchy, solve
from dmg.problems import (
    K_PI_OVER_3,
    SourceKind,
    SourceSpec,
    dirichlet_laplacian_1d,
    helmholtz_periodic_1d,
    helmholtz_periodic_2d,
    load_problem,
    make_problem,
    make_source,
    parse_wavenumber,
)


@pytest.mark.parametrize(
    "token, expected",
    [
        ("pi/3", np.pi / 3),
        ("2pi/3", 2 * np.pi / 3),
        ("2*pi", 2 * np.pi),
        ("π/3", np.pi / 3),
        ("PI", np.pi),
        ("-pi/2", -np.pi / 2),
        ("0.5", 0.5),
        (1.25, 1.25),
    ],
)
def test_parse_wavenumber(token, expected):
    assert parse_wavenumber(token) == pytest.approx(expected)


def test_parse_wavenumber_invalid():
    with pytest.raises(InvalidConfigError):
        parse_wavenumber("trois")


def test_helmholtz_1d_two_nodes():
    # les deux voisins coïncident: -1 s'additionne deux fois
    A = helmholtz_periodic_1d(2, K_PI_OVER_3).A.to_dense()
    d = 2 - K_PI_OVER_3 ** 2
    assert np.allclose(A, [[d, -2], [-2, d]])


def test_helmholtz_1d_stencil():
    problem = helmholtz_periodic_1d(8)
    A = problem.A.to_dense()
    assert problem.A.nnz == 24
    assert A[0, 7] == -1 and A[0, 1] == -1
    assert np.allclose(np.diag(A), 2 - K_PI_OVER_3 ** 2)
    assert isinstance(problem.hierarchy, EvenOddHierarchy)
    assert problem.geometry.kind == "ring"


def test_helmholtz_2d_stencil():
    N = 4
    problem = helmholtz_periodic_2d(N)
    A = problem.A.to_dense()
    assert np.allclose(A, A.T)
    assert np.allclose(A.sum(axis=1), -K_PI_OVER_3 ** 2)
    # nœud (1, 2) -> 6: voisins 2, 10, 5, 7
    assert sorted(np.flatnonzero(A[6]).tolist()) == [2, 5, 6, 7, 10]
    assert isinstance(problem.hierarchy, TorusHierarchy)
    assert problem.geometry.shape == (N, N)


def test_helmholtz_rejects_odd_sizes():
    with pytest.raises(InvalidConfigError):
        helmholtz_periodic_1d(7)
    with pytest.raises(InvalidConfigError):
        helmholtz_periodic_2d(5)


def test_zero_wavenumber_torus_is_singular():
    with pytest.raises(SingularMatrixError):
        helmholtz_periodic_2d(8, 0.0)


def test_zero_wavenumber_without_check():
    problem = helmholtz_periodic_2d(8, 0.0, check_invertible=False)
    assert problem.size == 64


def test_dirichlet_laplacian():
    problem = dirichlet_laplacian_1d(8)
    A = problem.A.to_dense()
    assert A[0, 7] == 0
    assert np.allclose(np.diag(A), 2)
    assert problem.basis().W.shape == (8, 8)


def test_problem_hierarchy_uses_config_n0():
    problem = helmholtz_periodic_1d(32, config=DMGConfig(n0=4))
    assert problem.hierarchy.n0 == 4
    assert problem.hierarchy.levels_for(32) == 3


def test_make_problem_defaults():
    problem = make_problem("helmholtz1d")
    assert problem.size == 32
    assert problem.params["k"] == pytest.approx(np.pi / 3)
    assert make_problem("helmholtz2d", N=8, k="2pi/3").params["k"] == pytest.approx(2 * np.pi / 3)
    assert make_problem("dirichlet1d").size == 8


def test_make_problem_unknown():
    with pytest.raises(InvalidConfigError):
        make_problem("poisson3d")


def test_describe():
    info = helmholtz_periodic_2d(4).describe()
    assert info["name"] == "helmholtz2d"
    assert info["shape"] == [4, 4]
    assert info["nnz"] == 80


def test_unit_impulse():
    f = make_source(SourceSpec(), helmholtz_periodic_1d(8))
    assert f.tolist() == [1, 0, 0, 0, 0, 0, 0, 0]


def test_two_frequency_source():
    N = 8
    f = make_source(SourceSpec("two-frequency"), helmholtz_periodic_2d(N)).reshape(N, N)
    i = np.arange(N)[:, None]
    j = np.arange(N)[None, :]
    expected = np.sin(2 * np.pi * i / N) * np.sin(2 * np.pi * j / N) + np.sin(i * np.pi / 2) * np.sin(j * np.pi / 2)
    assert np.allclose(f, expected)


def test_point_patch_source():
    N = 8
    f = make_source(SourceSpec(SourceKind.POINT_PATCH), helmholtz_periodic_2d(N)).reshape(N, N)
    assert f.sum() == 4
    assert np.all(f[3:5, 3:5] == 1)


def test_torus_sources_need_torus():
    with pytest.raises(InvalidConfigError):
        make_source(SourceSpec("point-patch"), helmholtz_periodic_1d(8))


def test_source_kind_parse():
    assert SourceKind.parse("unit_impulse") is SourceKind.UNIT_IMPULSE
    with pytest.raises(InvalidConfigError):
        SourceKind.parse("gaussienne")
    with pytest.raises(InvalidConfigError):
        SourceSpec("file")


def test_file_source(tmp_path):
    path = tmp_path / "rhs.csv"
    write_vector_csv(path, np.arange(8) + 1j)
    f = make_source(SourceSpec("file", str(path)), helmholtz_periodic_1d(8))
    assert np.allclose(f, np.arange(8) + 1j)
    with pytest.raises(DimensionMismatchError):
        make_source(SourceSpec("file", str(path)), helmholtz_periodic_1d(16))


def test_load_problem(tmp_path):
    path = tmp_path / "A.mtx"
    write_matrix_market(path, helmholtz_periodic_1d(16).A)
    problem = load_problem(path)
    assert problem.name == "external"
    assert problem.size == 16
    assert problem.basis() is None
    assert np.allclose(problem.A.to_dense(), helmholtz_periodic_1d(16).A.to_dense(), rtol=1e-15)


def test_load_problem_rejects_rectangular(tmp_path):
    path = tmp_path / "R.mtx"
    write_matrix_market(path, SparseMatrix.from_dense(np.ones((2, 3))))
    with pytest.raises(DimensionMismatchError):
        load_problem(path)


@pytest.mark.parametrize(
    "name, size",
    [("helmholtz1d", n) for n in (8, 16, 32, 64, 128, 256)]
    + [("helmholtz2d", N) for N in (4, 8, 16, 32)]
    + [("dirichlet1d", n) for n in (8, 16, 32, 64, 128, 256)],
)
def test_generated_basis_holds_through_hierarchy(name, size):
    problem = make_problem(name, n=size, N=size, check_basis=False)
    reports = problem.assert_harmonic_basis()
    assert len(reports) == problem.hierarchy.levels_for(problem.size)
    assert all(r.passes for r in reports)


def test_dirichlet_hierarchy_stops_after_one_split():
    problem = dirichlet_laplacian_1d(64)
    assert problem.hierarchy.n0 == 32
    assert problem.hierarchy.levels_for(64) == 1
    assert dirichlet_laplacian_1d(8).hierarchy.levels_for(8) == 0


@pytest.mark.parametrize("method", ["multiplicative", "additive", "additive-multichannel"])
def test_dirichlet_interval_solves_exactly(method):
    problem = make_problem("dirichlet1d", n=64)
    f = make_source(SourceSpec(), problem)
    report = solve(problem.A, f, problem.hierarchy, method)
    assert report.relative_residual <= 1e-9


def test_deep_sine_hierarchy_is_rejected():
    problem = dirichlet_laplacian_1d(64)
    problem.hierarchy = EvenOddHierarchy(n0=16)
    with pytest.raises(InvalidConfigError, match="niveau 1"):
        problem.assert_harmonic_basis()


def test_harmonic_gate_skipped_above_limit():
    config = DMGConfig(harmonic_check_limit=32)
    problem = helmholtz_periodic_1d(64, config=config)
    assert problem.assert_harmonic_basis(config) == []


def test_external_problem_has_no_gate(tmp_path):
    path = tmp_path / "A.mtx"
    write_matrix_market(path, helmholtz_periodic_1d(16).A)
    assert load_problem(path).assert_harmonic_basis() == []
