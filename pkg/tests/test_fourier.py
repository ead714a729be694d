import numpy as np
import pytest
from hypothesis import given, strategies as st

from skewscope.cube import Subcube, deposit, popcount
from skewscope.fourier import (
    coeff_estimate,
    hypercontractive_bound,
    inverse_wht,
    level_weight,
    level_weight_excl,
    restricted_coeff,
    skew_from_spectrum,
    wht,
)
from skewscope.measure import ExplicitMeasure, SampleSet, inner_cube, restrict, skew

from test_measure import measure_and_cube, measures


def direct_coeffs(psi):
    """O(4^n) oracle: psihat(S) = 2^-n sum_x psi(x) chi_S(x)."""
    N = 1 << psi.n
    out = np.zeros(N)
    for S in range(N):
        out[S] = sum(psi.density[x] * (-1) ** popcount(S & x) for x in range(N)) / N
    return out


@given(measures(max_n=6))
def test_wht_matches_direct_sum(psi):
    np.testing.assert_allclose(wht(psi).coeffs, direct_coeffs(psi), atol=1e-12)


@given(measures())
def test_inverse_and_parseval(psi):
    spec = wht(psi)
    assert spec[0] == pytest.approx(1.0)
    np.testing.assert_allclose(inverse_wht(spec), psi.density, atol=1e-10)
    assert float(np.sum(spec.coeffs ** 2)) == pytest.approx(float(np.mean(psi.density ** 2)))


@given(measure_and_cube())
def test_skew_from_spectrum(pc):
    psi, C = pc
    assert skew_from_spectrum(wht(psi), C) == pytest.approx(skew(psi, C), abs=1e-10)


@given(measure_and_cube())
def test_restricted_coeff_matches_restriction(pc):
    psi, C = pc
    ip = inner_cube(psi, C)
    if ip == 0:
        return
    spec = wht(psi)
    local = wht(restrict(psi, C))
    for S in range(1 << local.n):
        got = restricted_coeff(spec, C, deposit(S, C.free_mask), ip)
        assert got == pytest.approx(local[S], abs=1e-10)


def test_dump_lines_order_and_filter():
    psi = ExplicitMeasure.point_mass(2, 0b01)
    lines = wht(psi).dump_lines()
    assert lines == ["0x0 1", "0x1 -1", "0x2 1", "0x3 -1"]
    assert wht(ExplicitMeasure.uniform(3)).dump_lines(0.5) == ["0x0 1"]


def test_level_weights():
    psi = ExplicitMeasure.point_mass(3, 0)
    spec = wht(psi)
    # every coefficient is 1: W^{<=k} = sum_{j<=k} C(3, j)
    assert [level_weight(spec, k) for k in range(4)] == [1, 4, 7, 8]
    # at most one coordinate outside {0}: {}, {0}, {1}, {2}, {0,1}, {0,2}
    assert level_weight_excl(spec, 1, 0b001) == 6


@given(measures(), st.integers(0, 4), st.data())
def test_level_k_inequalities(psi, k, data):
    spec = wht(psi)
    k = min(k, psi.n)
    t = float(psi.density.max())
    bound = hypercontractive_bound(t, max(k, 1))
    assert level_weight(spec, k) <= bound * (1 + 1e-12)
    J = data.draw(st.integers(0, (1 << psi.n) - 1))
    assert level_weight_excl(spec, k, J) <= 2 ** popcount(J) * bound * (1 + 1e-12)


def test_hypercontractive_bound_values():
    assert hypercontractive_bound(1.0, 3) == pytest.approx(np.e ** 2)
    assert hypercontractive_bound(np.e, 2) == pytest.approx(4 * np.e ** 2)
    with pytest.raises(ValueError):
        hypercontractive_bound(0.5, 1)


def test_coeff_estimate_on_enumerated_sample():
    s = SampleSet(3, np.arange(8, dtype=np.uint64))
    e = coeff_estimate(s, 0b101, k=2)
    assert e.value == 0 and e.source == "sampled"
    # range-2 variables: sqrt(2 ln(2/delta)/m) with delta = 3^-4
    assert e.sample_error == pytest.approx(np.sqrt(2 * np.log(2 * 81) / 8))
