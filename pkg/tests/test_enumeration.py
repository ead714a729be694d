import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewscope.cube import Subcube, enumerate_subcubes, parents
from skewscope.enumeration import (
    ExactProvider,
    FfcProvider,
    SampledProvider,
    SkewQuery,
    SkewTable,
    brute_force_minimal,
    brute_force_skewed,
    fsn,
    fsr,
    is_minimal,
    search,
)
from skewscope.generators import gen_noisy_parity, gen_random_sparse, gen_subcube_uniform, gen_tribes
from skewscope.measure import ExplicitMeasure

from test_measure import direct_skew, measures

GAMMAS = [0.25, 0.5, 1.0, 3.0]
EPSS = [0.25, 0.5, 1.0]


def naive_minimal(psi, k, gamma, eps, sign, two_sided=False):
    """Every cube of codim 1..k, skews summed point by point, parents checked one by one."""
    d = 1 if sign == "positive" else -1
    cap = (1 - eps) * gamma
    out = set()
    for C in enumerate_subcubes(psi.n, k):
        if C.codim == 0 or d * direct_skew(psi, C) < gamma - 1e-9:
            continue
        ok = True
        for D in parents(C):
            s = direct_skew(psi, D)
            if (abs(s) if two_sided else d * s) > cap + 1e-9:
                ok = False
                break
        if ok:
            out.add(C)
    return out


@st.composite
def queries(draw, n):
    k = draw(st.integers(1, min(3, n)))
    sign = draw(st.sampled_from(["positive", "negative"]))
    gamma = draw(st.sampled_from([g for g in GAMMAS if sign == "positive" and g <= 2 ** k - 1
                                  or sign == "negative" and g <= 1]))
    return SkewQuery(k, gamma, draw(st.sampled_from(EPSS)), sign)


@settings(max_examples=60, deadline=None)
@given(measures(max_n=5), st.data())
def test_brute_force_matches_naive(psi, data):
    q = data.draw(queries(psi.n))
    got = {r.subcube for r in brute_force_minimal(psi, q)}
    assert got == naive_minimal(psi, q.k, q.gamma, q.eps, q.sign)


@settings(max_examples=80, deadline=None)
@given(measures(max_n=6), st.data())
def test_search_matches_brute_force(psi, data):
    q = data.draw(queries(psi.n))
    want = [r.subcube for r in brute_force_minimal(psi, q)]
    got = [r.subcube for r in search(ExactProvider(psi), q).reports]
    assert got == want


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.sampled_from([8, 16, 64]), st.data())
def test_search_matches_brute_force_sparse(seed, support, data):
    psi = gen_random_sparse(8, support, seed)
    q = data.draw(queries(8))
    want = {r.subcube for r in brute_force_minimal(psi, q)}
    assert {r.subcube for r in search(ExactProvider(psi), q).reports} == want


@settings(max_examples=30, deadline=None)
@given(measures(max_n=5), st.data())
def test_two_sided_rule(psi, data):
    q = data.draw(queries(psi.n))
    q2 = SkewQuery(q.k, q.gamma, q.eps, q.sign, parent_rule="two-sided")
    two = {r.subcube for r in brute_force_minimal(psi, q2)}
    assert two == naive_minimal(psi, q.k, q.gamma, q.eps, q.sign, two_sided=True)
    assert two <= {r.subcube for r in brute_force_minimal(psi, q)}
    assert {r.subcube for r in search(ExactProvider(psi), q2).reports} == two


@settings(max_examples=40, deadline=None)
@given(measures(max_n=5), st.data())
def test_is_minimal_agrees_with_brute_force(psi, data):
    q = data.draw(queries(psi.n))
    for r in brute_force_skewed(psi, q.k, q.gamma, q.sign):
        assert is_minimal(psi, r.subcube, q.gamma, q.eps, q.sign) == \
            (r.subcube in naive_minimal(psi, q.k, q.gamma, q.eps, q.sign))


def test_reports_are_sorted_and_flagged():
    psi = gen_subcube_uniform(6, Subcube.from_string("++****"))
    rs = fsr(psi, SkewQuery(2, 3.0, 0.5))
    assert [str(r.subcube) for r in rs] == ["++****"]
    assert rs[0].skew == 3 and rs[0].minimal and not rs[0].estimated


def test_sign_checked():
    psi = ExplicitMeasure.uniform(3)
    with pytest.raises(ValueError):
        fsr(psi, SkewQuery(1, 0.5, 1, "negative"))
    with pytest.raises(ValueError):
        fsn(psi, SkewQuery(1, 0.5, 1, "positive"))


@pytest.mark.parametrize("kwargs", [dict(k=2, gamma=4.0, eps=0.5), dict(k=2, gamma=1.5, eps=0.5, sign="negative"),
                                    dict(k=1, gamma=0.5, eps=0.0), dict(k=1, gamma=0.5, eps=1, parent_rule="x")])
def test_query_validation(kwargs):
    with pytest.raises(ValueError):
        SkewQuery(**kwargs)


def test_coefficient_cutoffs():
    q = SkewQuery(3, 1.0, 0.5)
    # sound rule: eps gamma / (1 + (1 - eps) gamma) = 1/3, then / (k_t C(k_t, s))
    assert q.coeff_thresholds(3)[1:] == pytest.approx([1 / 27, 1 / 27, 1 / 9])
    assert SkewQuery(3, 1.0, 0.5, "negative").coeff_base == 0.5
    assert SkewQuery(3, 1.0, 0.5, threshold_rule="sqrt").coeff_base == 0.5


def test_sqrt_rule_can_miss_a_cube():
    # psi = 1 + 0.25 chi_{0}: the cube x_0 = +1 has skew 0.25 and its only coefficient is 0.25
    x = np.arange(4)
    psi = ExplicitMeasure(2, 1 + 0.25 * (1 - 2 * (x & 1)))
    sound = SkewQuery(1, 0.25, 1.0)
    loose = SkewQuery(1, 0.25, 1.0, threshold_rule="sqrt")
    want = {r.subcube for r in brute_force_minimal(psi, sound)}
    assert want == {Subcube.from_string("+*")}
    assert {r.subcube for r in fsr(psi, sound)} == want
    assert fsr(psi, loose) == []


def test_tribes_certificates():
    tr = gen_tribes(2, 3)
    psi = tr.measure()
    got = {r.subcube for r in fsn(psi, SkewQuery(2, 1.0, 0.5, "negative"))}
    assert got == set(tr.certificates())


def test_skew_table_matches_direct():
    psi = gen_random_sparse(6, 9, 4)
    t = SkewTable(psi, 3)
    for C in enumerate_subcubes(6, 3):
        assert t.skew(C) == pytest.approx(direct_skew(psi, C), abs=1e-12)


def test_sampled_provider_recovers_parity():
    gp = gen_noisy_parity(6, [1, 3], 0.1)
    s = gp.samples(20000, 1)
    prov = SampledProvider(s)
    pos, neg = gp.skewed_cubes()
    got_p = {r.subcube for r in search(prov, SkewQuery(3, 0.5, 1, "positive")).reports}
    got_n = {r.subcube for r in search(prov, SkewQuery(3, 0.5, 1, "negative")).reports}
    assert got_p == set(pos) and got_n == set(neg)
    assert all(r.estimated and r.est_error > 0 for r in search(prov, SkewQuery(3, 0.5, 1)).reports)


def test_ffc_provider_recovers_parity():
    gp = gen_noisy_parity(6, [1, 3], 0.1)
    psi = gp.measure()
    prov = FfcProvider(gp.samples(60000, 2), psi, rho=0.5, seed=2)
    pos, neg = gp.skewed_cubes()
    assert {r.subcube for r in search(prov, SkewQuery(3, 0.5, 1, "positive")).reports} == set(pos)
    assert {r.subcube for r in search(prov, SkewQuery(3, 0.5, 1, "negative")).reports} == set(neg)
