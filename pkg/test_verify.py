import pytest

from dmg.config import DMGConfig
from dmg.errors import InvalidConfigError
from dmg.verify import BASES, CheckResult, run_suite


def failures(results):
    return [r.name for r in results if not r.passed]


def test_aliasing_suite_passes():
    results = run_suite("aliasing", n=16)
    assert results
    assert failures(results) == []
    names = {r.name for r in results}
    assert "rbhap[dft1d-16]" in names
    assert "random_bases_fail_both" in names


@pytest.mark.parametrize("basis", BASES)
def test_aliasing_suite_single_basis(basis):
    results = run_suite("aliasing", n=16, basis=basis)
    assert failures(results) == []


def test_sine_basis_checks():
    names = [r.name for r in run_suite("aliasing", n=8, basis="sine8")]
    assert "rbhap[sine-8]" in names
    assert "surjective_form[sine-8]" in names


def test_filterbank_suite_passes():
    results = run_suite("filterbank", n=8)
    assert failures(results) == []
    assert {r.name for r in results} == {
        "identity_bank",
        "qmf_perfect_reconstruction",
        "broken_mirror_detected",
        "scaled_identity_bank_halves",
        "mirror_swaps_symbols",
    }


def test_twogrid_suite_passes():
    results = run_suite("twogrid", n=16)
    assert failures(results) == []
    assert any(r.name == "additive_sum[helmholtz2d-4]" for r in results)


def test_broken_symbol_is_reported():
    failed = failures(run_suite("twogrid", n=16, break_symbol=1e-3))
    assert "multiplicative_product[helmholtz1d-16]" in failed
    assert "direct_conditions_multiplicative[helmholtz1d-16]" in failed


def test_multigrid_suite_passes():
    results = run_suite("multigrid", n=16, config=DMGConfig(n0=16))
    assert failures(results) == []
    assert "complexity_doubling" in {r.name for r in results}


@pytest.mark.parametrize(
    "kwargs",
    [
        {"name": "spectral"},
        {"name": "aliasing", "basis": "wavelet"},
        {"name": "aliasing", "n": 10},
        {"name": "aliasing", "n": 0},
    ],
)
def test_invalid_arguments(kwargs):
    with pytest.raises(InvalidConfigError):
        run_suite(**kwargs)


def test_check_result_serialisation():
    data = CheckResult("x", True, 1e-15, 1e-10).to_dict()
    assert data == {"name": "x", "passed": True, "residual": 1e-15, "tolerance": 1e-10, "detail": ""}
