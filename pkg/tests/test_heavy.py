import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewscope.cube import Subcube, deposit, enumerate_subcubes, popcount
from skewscope.fourier import restricted_coeff, wht
from skewscope.generators import gen_noisy_parity, gen_random_sparse, sample_explicit
from skewscope.heavy import (
    BudgetExceeded,
    FfcParams,
    GlPlan,
    blocked_inner,
    deduce_subcube_coeffs,
    ffc,
    ffc_raw,
    find_corr,
    find_heavy_exact,
    goldreich_levin,
    pack_signs,
    packed_inner,
    preprocess,
)
from skewscope.measure import ExplicitMeasure, QueryOracle, inner_cube, restrict

from test_fourier import direct_coeffs
from test_measure import measures


def planted(n, A, B, C):
    x = np.arange(1 << n)
    chi = lambda S: 1.0 - 2.0 * (np.bitwise_count(x & S) & 1)  # noqa: E731
    return ExplicitMeasure(n, (1 + 0.9 * chi(A)) * (1 + 0.5 * chi(B)) * (1 + 0.3 * chi(C)))


@given(measures(max_n=6), st.integers(0, 3), st.sampled_from([0.05, 0.2, 0.5]))
def test_find_heavy_exact_matches_direct(psi, k, rho):
    k = min(k, psi.n)
    coeffs = direct_coeffs(psi)
    want = {S for S in range(1 << psi.n) if popcount(S) <= k and abs(coeffs[S]) >= rho - 1e-12}
    assert find_heavy_exact(psi, k, rho).masks == want


@given(st.integers(1, 6), st.integers(1, 6), st.integers(1, 150), st.integers(0, 2 ** 32 - 1))
def test_inner_product_backends(r1, r2, d, seed):
    rng = np.random.default_rng(seed)
    V1 = rng.choice([-1, 1], size=(r1, d)).astype(np.int8)
    V2 = rng.choice([-1, 1], size=(r2, d)).astype(np.int8)
    want = V1.astype(np.int64) @ V2.T.astype(np.int64)
    assert np.array_equal(packed_inner(pack_signs(V1), pack_signs(V2), d), want)
    assert np.array_equal(blocked_inner(V1, V2, block=7), want)


def test_find_corr_thresholds():
    V1 = np.array([[1, 1, 1, 1], [1, -1, 1, -1]])
    V2 = np.array([[1, 1, 1, -1], [-1, -1, -1, -1]])
    # inner products: [[2, -4], [2, 0]]
    assert find_corr(V1, V2, 0.5) == [(0, 0, 0.5), (1, 0, 0.5)]
    assert find_corr(V1, V2, 0.5, absolute=True) == [(0, 0, 0.5), (0, 1, -1.0), (1, 0, 0.5)]
    assert find_corr(V1, V2, 0.5, backend="blocked") == find_corr(V1, V2, 0.5)
    with pytest.raises(ValueError):
        find_corr(V1, V2, 0.1, tau=0.2)


def test_ffc_params_sizes():
    p = FfcParams(13, 4, 0.5)
    # tau = (rho/2)^(1/lambda) = 0.0625; d = ceil(32*4*ln 13/tau^2); rounds = ceil(16*8*ln 13)
    assert p.tau == 0.0625
    assert p.d == int(np.ceil(32 * 4 * np.log(13) / 0.0625 ** 2)) == 84049
    assert p.rounds == int(np.ceil(128 * np.log(13))) == 329
    with pytest.raises(ValueError):
        FfcParams(13, 4, 1.5)


def test_ffc_finds_small_parity():
    gp = gen_noisy_parity(8, [1, 4], 0.1)
    p = FfcParams(gp.n, 3, 0.5, seed=3, rounds=40)
    s = gp.samples(p.d + 5000, 3)
    L = ffc(s, p)
    assert gp.support_mask in L
    assert all(abs(e.value) >= 0.375 - 1e-9 for e in L)
    assert ffc_raw(s, p, workers=2) == ffc_raw(s, p, workers=1)
    assert ffc_raw(s, p, backend="blocked") == ffc_raw(s, p)


def test_ffc_needs_enough_samples():
    gp = gen_noisy_parity(6, [0], 0.1)
    p = FfcParams(gp.n, 2, 0.5)
    with pytest.raises(ValueError):
        ffc_raw(gp.samples(10, 0), p)


def test_preprocess_edges():
    psi = gen_random_sparse(6, 5, 1)
    L = find_heavy_exact(psi, 3, 0.2)
    G = preprocess(L)
    assert G.edges == sum(1 << e.degree for e in L)
    for S in L.masks:
        assert S in G.out[0][popcount(S)]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(5, 7), st.sampled_from([4, 8, 16]))
def test_deduce_equals_restriction_exact(seed, n, support):
    psi = gen_random_sparse(n, support, seed)
    spec = wht(psi)
    tau, k = 0.1, 3
    G = preprocess(find_heavy_exact(psi, k, tau / 4 ** k, spec))
    for C in enumerate_subcubes(n, 2):
        if inner_cube(psi, C) <= 1e-12:
            continue
        r = restrict(psi, C)
        want = {deposit(e.mask, C.free_mask) for e in find_heavy_exact(r, k - C.codim, tau)}
        got = deduce_subcube_coeffs(G, C, tau, psi, spec)
        assert got.masks == want
        for e in got:
            assert e.value == pytest.approx(restricted_coeff(spec, C, e.mask, inner_cube(psi, C)))


def test_deduce_with_spectrum_access_matches_measure_access():
    psi = gen_random_sparse(6, 8, 2)
    spec = wht(psi)
    G = preprocess(find_heavy_exact(psi, 3, 0.1 / 64, spec))
    C = Subcube(6, 0b11, 0b01)
    if inner_cube(psi, C) > 0:
        assert deduce_subcube_coeffs(G, C, 0.1, spec).masks == deduce_subcube_coeffs(G, C, 0.1, psi).masks


def test_gl_plan_budget():
    p = GlPlan.make(10, 0.4, 3.705, 0.01)
    per = 0.01 / (4 * 10 * 3.705 ** 2 / 0.16)
    assert p.bucket_samples == int(np.ceil((2 * 3.705 ** 2) ** 2 * np.log(2 / per) / (2 * 0.04 ** 2)))
    assert p.budget == 20 * p.bucket_samples + p.leaf_samples
    assert isinstance(p.t, float)
    with pytest.raises(ValueError):
        GlPlan.make(10, 0.4, 0.5, 0.01)


def test_gl_exact_mode_returns_heavy_sets():
    psi = planted(8, 0b11, 0b1100, 0b110000)
    L = goldreich_levin(QueryOracle.from_explicit(psi), 0.4, float(psi.density.max()),
                        exact_spectrum=wht(psi))
    # coefficients 0.9 (A), 0.5 (B), 0.45 (AB) and 1 (empty set) reach 0.4
    assert L.masks == {0, 0b11, 0b1100, 0b1111}


def test_gl_sampled_small_instance():
    psi = planted(6, 0b11, 0b100, 0b11000)
    o = QueryOracle.from_explicit(psi)
    t = float(psi.density.max())
    L = goldreich_levin(o, 0.4, t, seed=1)
    spec = wht(psi)
    heavy = {S for S in range(64) if abs(spec[S]) >= 0.4}
    half = {S for S in range(64) if abs(spec[S]) >= 0.2}
    assert heavy <= L.masks <= half
    assert o.queries <= GlPlan.make(6, 0.4, t, 0.01).budget


def test_gl_budget_cap():
    psi = planted(6, 0b11, 0b100, 0b11000)
    with pytest.raises(BudgetExceeded) as info:
        goldreich_levin(QueryOracle.from_explicit(psi), 0.4, 3.705, max_queries=100)
    assert len(info.value.partial) == 0
