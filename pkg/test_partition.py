import numpy as np
import pytest

from dmg.core import SparseMatrix
from dmg.errors import DimensionMismatchError, InvalidConfigError
from dmg.partition import Color, RedBlackPartition, downsample, mirror, mirror_dense, submatrix, upsample


@pytest.fixture
def P():
    return RedBlackPartition.from_red(6, [0, 3, 4])


def test_black_is_complement(P):
    assert P.black.tolist() == [1, 2, 5]
    assert P.half == 3


@pytest.mark.parametrize("n, red", [(5, [0, 1]), (4, [0]), (4, [0, 0]), (4, [0, 4]), (0, [])])
def test_invalid_partitions(n, red):
    with pytest.raises(InvalidConfigError):
        RedBlackPartition.from_red(n, red)


def test_color_parse():
    assert Color.parse("r") is Color.RED
    assert Color.parse("noir") is Color.BLACK
    assert Color.RED.other is Color.BLACK
    assert Color.BLACK.tag == "b"
    with pytest.raises(InvalidConfigError):
        Color.parse("vert")


def test_downsample_upsample(P):
    x = np.arange(6) + 1j
    assert np.array_equal(downsample(P, Color.RED, x), x[[0, 3, 4]])
    y = np.array([1.0, 2.0, 3.0])
    u = upsample(P, Color.BLACK, y)
    assert np.array_equal(u, [0, 1, 2, 0, 0, 3])
    # D U = I
    assert np.array_equal(downsample(P, Color.BLACK, u), y)


def test_upsample_size_check(P):
    with pytest.raises(DimensionMismatchError):
        upsample(P, Color.RED, np.ones(4))
    with pytest.raises(DimensionMismatchError):
        downsample(P, Color.RED, np.ones(5))


def test_materialize_matches_downsample(P):
    x = np.arange(6, dtype=complex)
    D = P.materialize(Color.RED)
    assert D.shape == (3, 6)
    assert np.array_equal(D.to_dense() @ x, downsample(P, "red", x))


def test_mirror_signs_and_involution(P):
    rng = np.random.default_rng(3)
    M = SparseMatrix.from_dense(rng.standard_normal((6, 6)))
    Ms = mirror(P, M)
    s = P.sign_vector()
    assert np.allclose(Ms.to_dense(), s[:, None] * M.to_dense() * s[None, :])
    assert mirror(P, Ms) == M
    assert np.allclose(mirror_dense(P, M.to_dense()), Ms.to_dense())


def test_mirror_keeps_same_color_blocks(P):
    M = SparseMatrix.from_dense(np.ones((6, 6)))
    Ms = mirror(P, M)
    assert submatrix(P, "r", "r", Ms) == submatrix(P, "r", "r", M)
    assert submatrix(P, "r", "b", Ms) == -submatrix(P, "r", "b", M)


def test_json_roundtrip(P):
    assert RedBlackPartition.from_json(P.to_json()) == P
    with pytest.raises(InvalidConfigError):
        RedBlackPartition.from_json({"n": 4})


def test_even_odd():
    P = RedBlackPartition.even_odd(8)
    assert P.red.tolist() == [0, 2, 4, 6]
    assert P.indices("b").tolist() == [1, 3, 5, 7]
