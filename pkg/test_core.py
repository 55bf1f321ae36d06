import math

import numpy as np
import pytest

from dmg.config import DMGConfig
from dmg.core import (
    OpCounter,
    SparseMatrix,
    as_vector,
    conj_transpose,
    dense_inverse,
    dense_lu_factor,
    dense_lu_solve,
    diagonal_solve,
    norms,
    relative_residual,
    spmm,
    spmv,
)
from dmg.errors import DimensionMismatchError, InvalidConfigError, SingularMatrixError
from dmg.matrix_io import read_matrix_market, read_vector_csv, write_field_csv, write_matrix_market, write_vector_csv


@pytest.fixture
def rng():
    return np.random.default_rng(2024)


def random_sparse(rng, n, density=0.3):
    mask = rng.random((n, n)) < density
    dense = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) * mask
    return SparseMatrix.from_dense(dense)


def test_from_triplets_sums_duplicates():
    A = SparseMatrix.from_triplets((2, 2), [0, 0, 1], [1, 1, 0], [1.0, 2.0, 3.0])
    assert A.nnz == 2
    assert A.to_dense()[0, 1] == 3.0


def test_from_triplets_rejects_out_of_bounds():
    with pytest.raises(DimensionMismatchError):
        SparseMatrix.from_triplets((2, 2), [0, 2], [0, 0], [1.0, 1.0])


def test_canonical_form_drops_explicit_zeros():
    A = SparseMatrix.from_triplets((2, 2), [0, 1], [0, 1], [1.0, 0.0])
    assert A.nnz == 1
    assert A == SparseMatrix.from_dense(np.diag([1.0, 0.0]))


def test_drop_tolerance():
    A = SparseMatrix.from_dense(np.array([[1.0, 1e-20], [0.0, 1.0]]), drop_tolerance=1e-15)
    assert A.is_diagonal()
    assert A.nnz == 2


def test_non_finite_entries_rejected():
    with pytest.raises(InvalidConfigError):
        SparseMatrix.from_dense(np.array([[np.nan, 0.0], [0.0, 1.0]]))


def test_spmv_matches_dense_and_counts(rng):
    A = random_sparse(rng, 12)
    x = rng.standard_normal(12) + 1j * rng.standard_normal(12)
    counter = OpCounter()
    y = spmv(A, x, counter)
    assert np.allclose(y, A.to_dense() @ x, atol=1e-12)
    assert counter.multiplications == A.nnz


def test_spmv_dimension_mismatch():
    with pytest.raises(DimensionMismatchError):
        spmv(SparseMatrix.identity(3), np.ones(4))


def test_spmm_matches_dense_and_counts(rng):
    A = random_sparse(rng, 10)
    B = random_sparse(rng, 10)
    counter = OpCounter()
    C = spmm(A, B, counter)
    assert np.allclose(C.to_dense(), A.to_dense() @ B.to_dense(), atol=1e-12)
    expected = int(np.dot(A.nnz_per_col(), B.nnz_per_row()))
    assert counter.multiplications == expected


def random_rectangular(rng, m, n, density):
    mask = rng.random((m, n)) < density
    dense = (rng.standard_normal((m, n)) + 1j * rng.standard_normal((m, n))) * mask
    return SparseMatrix.from_dense(dense)


def product_count(A, B):
    """Σ_k nnz(A[:, k])·nnz(B[k, :]) calculé sur les motifs denses"""
    cols = (A.to_dense() != 0).sum(axis=0)
    rows = (B.to_dense() != 0).sum(axis=1)
    return int(sum(int(c) * int(r) for c, r in zip(cols, rows)))


@pytest.mark.parametrize(
    "seed, shape, density",
    [
        (1, (7, 12, 5, 9), 0.2),
        (2, (30, 30, 30, 30), 0.05),
        (3, (64, 16, 40, 8), 0.3),
        (4, (20, 50, 20, 50), 0.1),
    ],
)
def test_spmm_associative_with_exact_counts(seed, shape, density):
    rng = np.random.default_rng(seed)
    m, k, p, q = shape
    A = random_rectangular(rng, m, k, density)
    B = random_rectangular(rng, k, p, density)
    C = random_rectangular(rng, p, q, density)

    left_ab, left = OpCounter(), OpCounter()
    AB = spmm(A, B, left_ab)
    ABC = spmm(AB, C, left)
    right_bc, right = OpCounter(), OpCounter()
    BC = spmm(B, C, right_bc)
    A_BC = spmm(A, BC, right)

    assert np.allclose(ABC.to_dense(), A_BC.to_dense(), rtol=1e-12, atol=1e-12)
    assert np.allclose(ABC.to_dense(), A.to_dense() @ B.to_dense() @ C.to_dense(), rtol=1e-12, atol=1e-12)
    assert left_ab.multiplications == product_count(A, B)
    assert left.multiplications == product_count(AB, C)
    assert right_bc.multiplications == product_count(B, C)
    assert right.multiplications == product_count(A, BC)


def test_spmm_identity_is_neutral(rng):
    A = random_sparse(rng, 8)
    assert spmm(A, SparseMatrix.identity(8)) == A


def test_conj_transpose(rng):
    A = random_sparse(rng, 6)
    assert np.allclose(conj_transpose(A).to_dense(), A.to_dense().conj().T)


def test_arithmetic(rng):
    A = random_sparse(rng, 6)
    B = random_sparse(rng, 6)
    assert np.allclose((A + B).to_dense(), A.to_dense() + B.to_dense())
    assert np.allclose((A - B).to_dense(), A.to_dense() - B.to_dense())
    assert (A - A).nnz == 0
    assert np.allclose((-A).to_dense(), -A.to_dense())
    assert np.allclose(A.scale(2j).to_dense(), 2j * A.to_dense())


def test_dense_lu_solve(rng):
    n = 20
    M = rng.standard_normal((n, n)) + n * np.eye(n)
    f = rng.standard_normal(n)
    counter = OpCounter()
    x = dense_lu_solve(M, f, counter)
    assert np.allclose(M @ x, f, atol=1e-10)
    assert counter.multiplications == math.ceil(n ** 3 / 3) + n * n


@pytest.mark.parametrize("n", [64, 128, 256])
def test_dense_lu_well_conditioned(n):
    rng = np.random.default_rng(n)
    M = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n)) + n * np.eye(n)
    f = rng.standard_normal(n) + 1j * rng.standard_normal(n)
    counter = OpCounter()
    x = dense_lu_solve(M, f, counter)
    assert np.linalg.norm(M @ x - f) / np.linalg.norm(f) <= 1e-12
    assert np.linalg.norm(x - np.linalg.solve(M, f)) / np.linalg.norm(x) <= 1e-12
    assert counter.multiplications == math.ceil(n ** 3 / 3) + n * n


def test_dense_lu_detects_singularity():
    M = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError) as exc:
        dense_lu_factor(M)
    assert exc.value.pivot is not None


def test_zero_matrix_is_singular():
    with pytest.raises(SingularMatrixError):
        dense_lu_factor(SparseMatrix.zeros(3))


def test_dense_inverse(rng):
    M = rng.standard_normal((6, 6)) + 6 * np.eye(6)
    assert np.allclose(dense_inverse(M) @ M, np.eye(6), atol=1e-10)


def test_diagonal_solve():
    A = SparseMatrix.from_dense(np.diag([2.0, 4.0, -1.0]))
    counter = OpCounter()
    x = diagonal_solve(A, [2.0, 2.0, 3.0], counter)
    assert np.allclose(x, [1.0, 0.5, -3.0])
    assert counter.multiplications == 3


def test_diagonal_solve_singular():
    A = SparseMatrix.from_dense(np.diag([2.0, 0.0]))
    with pytest.raises(SingularMatrixError):
        diagonal_solve(A, [1.0, 1.0])


def test_singular_pivot_from_config():
    M = np.diag([1.0, 1e-8])
    dense_lu_factor(M)
    with pytest.raises(SingularMatrixError):
        dense_lu_factor(M, config=DMGConfig(singular_pivot=1e-6))


def test_as_vector_validation():
    with pytest.raises(DimensionMismatchError):
        as_vector([])
    with pytest.raises(DimensionMismatchError):
        as_vector([1.0, 2.0], length=3)
    with pytest.raises(InvalidConfigError):
        as_vector([1.0, np.inf])


def test_norms_and_residual():
    assert norms([3.0, -4.0]) == (5.0, 4.0)
    A = SparseMatrix.identity(3)
    assert relative_residual(A, [1.0, 2.0, 3.0], [1.0, 2.0, 3.0]) == 0.0


def test_matrix_market_roundtrip(tmp_path, rng):
    A = random_sparse(rng, 8)
    path = tmp_path / "A.mtx"
    write_matrix_market(path, A)
    B = read_matrix_market(path)
    assert np.allclose(B.to_dense(), A.to_dense(), atol=1e-14)


def test_matrix_market_real_variant(tmp_path):
    A = SparseMatrix.from_dense(np.array([[2.0, -1.0], [-1.0, 2.0]]))
    path = tmp_path / "real.mtx"
    write_matrix_market(path, A)
    assert "real" in path.read_text().splitlines()[0]
    assert read_matrix_market(path) == A


def test_vector_csv(tmp_path):
    x = np.array([1 + 2j, -3.5, 0.25j])
    path = tmp_path / "x.csv"
    write_vector_csv(path, x)
    assert np.array_equal(read_vector_csv(path), x)

    real = tmp_path / "real.csv"
    real.write_text("1.0\n2.0\n")
    assert np.array_equal(read_vector_csv(real), np.array([1.0, 2.0], dtype=complex))


def test_field_csv_layouts(tmp_path):
    write_field_csv(tmp_path / "ring.csv", np.arange(4), (4,))
    lines = (tmp_path / "ring.csv").read_text().splitlines()
    assert lines[0] == "i,re,im"
    assert len(lines) == 5

    write_field_csv(tmp_path / "torus.csv", np.arange(4) * 1j, (2, 2))
    lines = (tmp_path / "torus.csv").read_text().splitlines()
    assert lines[0] == "i,j,re,im"
    assert lines[3].split(",")[:2] == ["1", "0"]

    with pytest.raises(DimensionMismatchError):
        write_field_csv(tmp_path / "bad.csv", np.arange(5), (2, 2))
