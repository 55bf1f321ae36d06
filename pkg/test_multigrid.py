import numpy as np
import pytest

from dmg.config import DMGConfig
from dmg.core import SparseMatrix, dense_lu_solve
from dmg.errors import HierarchyExhaustedError, InvalidConfigError, SingularCoarseMatrixError, SingularMatrixError
from dmg.multigrid import (
    EvenOddHierarchy,
    TorusHierarchy,
    channel_paths,
    count_complexity,
    dmg_additive,
    dmg_additive_multichannel,
    dmg_multiplicative,
    solve,
)
from dmg.problems import K_PI_OVER_3, SourceKind, SourceSpec, helmholtz_periodic_1d, helmholtz_periodic_2d, make_source


@pytest.fixture(scope="module")
def ring():
    return helmholtz_periodic_1d(64, K_PI_OVER_3)


@pytest.fixture(scope="module")
def torus():
    return helmholtz_periodic_2d(16, K_PI_OVER_3)


@pytest.fixture(scope="module")
def large_torus():
    return helmholtz_periodic_2d(32, K_PI_OVER_3)


def impulse(n, at=0):
    f = np.zeros(n, dtype=complex)
    f[at] = 1.0
    return f


@pytest.mark.parametrize("method", ["multiplicative", "additive", "additive-multichannel"])
def test_matches_lu_oracle_1d(ring, method):
    rng = np.random.default_rng(4)
    f = rng.standard_normal(ring.size) + 1j * rng.standard_normal(ring.size)
    report = solve(ring.A, f, ring.hierarchy, method)
    reference = dense_lu_solve(ring.A, f)
    assert np.linalg.norm(report.solution - reference) <= 1e-9 * np.linalg.norm(reference)
    assert report.relative_residual <= 1e-9


@pytest.mark.parametrize("method", ["multiplicative", "additive", "additive-multichannel"])
@pytest.mark.parametrize("kind", [SourceKind.TWO_FREQUENCY, SourceKind.POINT_PATCH])
def test_matches_lu_oracle_2d(torus, method, kind):
    f = make_source(SourceSpec(kind), torus)
    report = solve(torus.A, f, torus.hierarchy, method)
    reference = dense_lu_solve(torus.A, f)
    assert np.linalg.norm(report.solution - reference) <= 1e-9 * np.linalg.norm(reference)


@pytest.mark.parametrize("method", ["multiplicative", "additive", "additive-multichannel"])
@pytest.mark.parametrize("kind", [SourceKind.TWO_FREQUENCY, SourceKind.POINT_PATCH])
def test_matches_lu_oracle_on_32_torus(large_torus, method, kind):
    f = make_source(SourceSpec(kind), large_torus)
    report = solve(large_torus.A, f, large_torus.hierarchy, method)
    reference = dense_lu_solve(large_torus.A, f)
    assert np.linalg.norm(report.solution - reference) <= 1e-9 * np.linalg.norm(reference)
    assert report.relative_residual <= 1e-9


@pytest.mark.parametrize("method", ["multiplicative", "additive"])
def test_long_ring_solves_exactly(method):
    problem = helmholtz_periodic_1d(4096, K_PI_OVER_3, check_invertible=False, check_basis=False)
    report = solve(problem.A, impulse(problem.size), problem.hierarchy, method)
    assert report.relative_residual <= 1e-9


def test_dense_method(ring):
    f = impulse(ring.size)
    report = solve(ring.A, f, method="dense")
    assert report.method == "dense"
    assert report.relative_residual < 1e-12


def test_unknown_method(ring):
    with pytest.raises(InvalidConfigError):
        solve(ring.A, impulse(ring.size), method="jacobi")


def test_base_case_count():
    problem = helmholtz_periodic_1d(16, K_PI_OVER_3)
    report = dmg_multiplicative(problem.A, impulse(16), EvenOddHierarchy(n0=16))
    assert report.multiplications == 1366 + 256
    assert report.splits == 0


def test_red_coarse_matrices_are_diagonal_in_1d(ring):
    report = dmg_multiplicative(ring.A, impulse(ring.size), ring.hierarchy)
    red = [v for v in report.levels_visited if v.path.endswith("r")]
    assert red
    assert all(v.was_diagonal for v in red)
    assert report.vcycle_fraction == 1.0


def test_additive_parallel_is_deterministic(ring):
    f = impulse(ring.size, 3)
    serial = dmg_additive(ring.A, f, ring.hierarchy)
    parallel = dmg_additive(ring.A, f, ring.hierarchy, DMGConfig(threads=2))
    assert np.array_equal(serial.solution, parallel.solution)
    assert serial.multiplications == parallel.multiplications


def test_multichannel_depth_one_equals_additive(ring):
    f = impulse(ring.size, 7)
    additive = dmg_additive(ring.A, f, ring.hierarchy)
    flat = dmg_additive_multichannel(ring.A, f, ring.hierarchy, depth=1)
    assert np.allclose(additive.solution, flat.solution, atol=1e-12)
    assert list(flat.channels) == ["r", "b"]


def test_point_patch_skips_zero_channels(torus):
    f = make_source(SourceSpec("point-patch"), torus)
    report = dmg_additive_multichannel(torus.A, f, torus.hierarchy, depth=3)
    assert list(report.channels) == channel_paths(3)
    active = sorted(path for path, ch in report.channels.items() if not ch.zero_source)
    assert active == ["bbb", "brb", "rbr", "rrr"]
    assert np.allclose(report.solution, dense_lu_solve(torus.A, f), atol=1e-9)


def test_channel_paths_order():
    assert channel_paths(2) == ["rr", "rb", "br", "bb"]


def test_black_stencil_grows_to_nine_points():
    problem = helmholtz_periodic_2d(8, K_PI_OVER_3)
    report = dmg_multiplicative(problem.A, impulse(64), problem.hierarchy)
    widths = {s["path"]: s["max_nnz_per_row"] for s in report.stencil_growth}
    assert widths[""] == 5
    assert widths["b"] == 9


def test_singular_coarse_matrix_is_located():
    n = 6
    i = np.arange(n)
    A = SparseMatrix.from_triplets((n, n), np.concatenate([i, i]), np.concatenate([(i + 1) % n, (i - 1) % n]), -np.ones(2 * n))
    with pytest.raises(SingularCoarseMatrixError) as exc:
        dmg_multiplicative(A, np.ones(n), EvenOddHierarchy(n0=2))
    assert exc.value.level == 1
    assert exc.value.path == "r"


def test_singular_fine_matrix_is_not_a_coarse_error():
    A = SparseMatrix.from_dense(np.ones((4, 4)))
    with pytest.raises(SingularMatrixError) as exc:
        dmg_multiplicative(A, np.ones(4))
    assert not isinstance(exc.value, SingularCoarseMatrixError)


def test_hierarchy_exhausted_on_odd_size():
    problem = helmholtz_periodic_1d(24, K_PI_OVER_3)
    with pytest.raises(HierarchyExhaustedError):
        dmg_multiplicative(problem.A, impulse(24), EvenOddHierarchy(n0=2))


def test_max_levels():
    hierarchy = TorusHierarchy(8, max_levels=1)
    hierarchy.partition(0, np.arange(64))
    with pytest.raises(HierarchyExhaustedError):
        hierarchy.partition(1, np.arange(32))


def test_torus_hierarchy_alternates():
    h = TorusHierarchy(4)
    P0 = h.partition(0, np.arange(16))
    assert P0.red.tolist() == [0, 2, 5, 7, 8, 10, 13, 15]
    P1 = h.partition(1, P0.red)
    # parité de ligne sur les nœuds rouges: lignes 0 et 2
    assert P0.red[P1.red].tolist() == [0, 2, 8, 10]


@pytest.mark.parametrize("method", ["multiplicative", "additive"])
def test_complexity_doubling(method):
    table = count_complexity([64, 128, 256, 512, 1024, 2048], method)
    assert table.passes
    assert all(r.ratio <= 2.5 for r in table.rows[1:])
    counts = [r.multiplications for r in table.rows]
    assert counts == sorted(counts)


def test_additive_costs_more_than_multiplicative():
    mult = count_complexity([64, 128, 256], "multiplicative")
    add = count_complexity([64, 128, 256], "additive")
    for m, a in zip(mult.rows, add.rows):
        assert a.multiplications >= m.multiplications


def test_single_size_gives_one_row():
    table = count_complexity([128], "multiplicative")
    assert len(table.rows) == 1
    assert table.rows[0].ratio is None


def test_report_serialisation(ring):
    report = dmg_multiplicative(ring.A, impulse(ring.size), ring.hierarchy)
    data = report.to_dict()
    assert len(data["solution"]) == ring.size
    assert data["method"] == "multiplicative"
    assert "solution" not in report.to_dict(include_solution=False)
