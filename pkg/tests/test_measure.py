import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewscope.cube import Subcube, deposit, enumerate_subcubes, partition_children
from skewscope.measure import (
    ExplicitMeasure,
    QueryOracle,
    SampleSet,
    SkewReport,
    ZeroMassError,
    estimate_skew,
    extend,
    hoeffding_halfwidth,
    inner_cube,
    inner_table,
    inorm,
    inorm_report,
    marginal,
    restrict,
    skew,
)


@st.composite
def measures(draw, max_n=7):
    n = draw(st.integers(1, max_n))
    w = draw(st.lists(st.integers(0, 5), min_size=1 << n, max_size=1 << n).filter(any))
    return ExplicitMeasure.from_weights(n, w)


@st.composite
def measure_and_cube(draw, max_n=7):
    psi = draw(measures(max_n))
    mask = draw(st.integers(0, (1 << psi.n) - 1))
    a = draw(st.integers(0, (1 << psi.n) - 1)) & mask
    return psi, Subcube(psi.n, mask, a)


def direct_skew(psi, C):
    pr = psi.probabilities()
    mass = sum(pr[x] for x in range(1 << psi.n) if C.contains(x))
    return 2 ** C.codim * mass - 1


def test_normalization_enforced():
    with pytest.raises(ValueError):
        ExplicitMeasure(2, [1, 1, 1, 2])
    with pytest.raises(ValueError):
        ExplicitMeasure(2, [2, 2, -1, 1])
    with pytest.raises(ValueError):
        ExplicitMeasure(2, [1, 1, 1])
    psi = ExplicitMeasure(2, [1, 1, 1, 2], renormalize=True)
    assert psi.density.mean() == pytest.approx(1.0)


def test_density_is_read_only():
    psi = ExplicitMeasure.uniform(3)
    with pytest.raises(ValueError):
        psi.density[0] = 5


def test_point_mass_skews():
    psi = ExplicitMeasure.point_mass(4, 0b0101)
    assert skew(psi, Subcube.from_string("-+-+")) == 15
    assert skew(psi, Subcube.from_string("-***")) == 1
    assert skew(psi, Subcube.from_string("+***")) == -1
    assert inorm(psi) == 16


@given(measure_and_cube())
def test_skew_matches_direct_count(pc):
    psi, C = pc
    assert skew(psi, C) == pytest.approx(direct_skew(psi, C), abs=1e-12)


@given(measure_and_cube())
def test_skew_range(pc):
    psi, C = pc
    s = skew(psi, C)
    assert -1 - 1e-12 <= s <= 2 ** C.codim - 1 + 1e-12


@given(measures(), st.data())
def test_zero_sum_over_assignments(psi, data):
    mask = data.draw(st.integers(0, (1 << psi.n) - 1))
    assert float((inner_table(psi, mask) - 1).sum()) == pytest.approx(0.0, abs=1e-10)


@given(measure_and_cube(), st.data())
def test_partition_averaging(pc, data):
    psi, C = pc
    L = data.draw(st.integers(0, (1 << psi.n) - 1)) & C.free_mask
    kids = partition_children(C, L)
    assert np.mean([skew(psi, D) for D in kids]) == pytest.approx(skew(psi, C), abs=1e-10)


@given(measure_and_cube(), st.data())
def test_product_rule(pc, data):
    psi, C = pc
    if inner_cube(psi, C) == 0:
        with pytest.raises(ZeroMassError):
            restrict(psi, C)
        return
    r = restrict(psi, C)
    if r.n == 0:
        return
    L = data.draw(st.integers(0, (1 << r.n) - 1))
    a = data.draw(st.integers(0, (1 << r.n) - 1)) & L
    local = Subcube(r.n, L, a)
    child = C.extend(deposit(L, C.free_mask), deposit(a, C.free_mask))
    assert inner_cube(psi, child) == pytest.approx(inner_cube(psi, C) * inner_cube(r, local), abs=1e-10)


def test_restrict_records_coordinates():
    psi = ExplicitMeasure.uniform(5)
    r = restrict(psi, Subcube.from_string("*+**-"))
    assert r.n == 3 and list(r.coords) == [0, 2, 3]


@given(measures(), st.data())
def test_marginal_extend_roundtrip(psi, data):
    mask = data.draw(st.integers(0, (1 << psi.n) - 1))
    m = marginal(psi, mask)
    e = extend(m, psi.n, mask)
    for C in enumerate_subcubes(psi.n, psi.n):
        if C.mask & ~mask == 0:
            assert skew(e, C) == pytest.approx(skew(psi, C), abs=1e-10)


def test_sample_set_validation():
    with pytest.raises(ValueError):
        SampleSet(3, np.array([8], dtype=np.uint64))
    with pytest.raises(ValueError):
        SampleSet(3, np.array([], dtype=np.uint64))
    a, b = SampleSet(3, np.arange(8, dtype=np.uint64)).split(3)
    assert a.m == 3 and b.m == 5


def test_estimate_skew_exact_on_enumerated_sample():
    psi = ExplicitMeasure.uniform(4)
    s = SampleSet(4, np.arange(16, dtype=np.uint64))
    C = Subcube.from_string("+-**")
    est, err = estimate_skew(s, C)
    assert est == pytest.approx(skew(psi, C)) == 0
    assert err == pytest.approx(4 * hoeffding_halfwidth(16, 0.01))


def test_hoeffding_halfwidth_formula():
    # sqrt(ln(2/0.05) / (2 * 100)) computed by hand: ln 40 = 3.68888
    assert hoeffding_halfwidth(100, 0.05) == pytest.approx(0.135810, abs=1e-6)
    assert hoeffding_halfwidth(100, 0.05, 2.0) == pytest.approx(0.271620, abs=1e-6)


def test_inorm_report_flags_empirical():
    s = SampleSet(2, np.array([0, 0, 1, 3], dtype=np.uint64))
    assert inorm_report(s) == (2.0, True)
    assert inorm_report(ExplicitMeasure.uniform(2)) == (1.0, False)


def test_query_oracle_counts_and_rejects_negative():
    psi = ExplicitMeasure.point_mass(3, 5)
    o = QueryOracle.from_explicit(psi)
    assert o.query([5, 0]).tolist() == [8.0, 0.0]
    assert o.queries == 2
    bad = QueryOracle(2, lambda p: -np.ones(len(p)))
    with pytest.raises(ValueError):
        bad.query([0])
    pts = o.sample(10, np.random.default_rng(0))
    assert set(pts.tolist()) == {5}


def test_skew_report_validation():
    C = Subcube.from_string("+-")
    assert SkewReport(C, 0.5, "positive", True).line() == "+- skew=0.5 codim=2 minimal=true"
    with pytest.raises(ValueError):
        SkewReport(C, 3.5, "positive", True)
    with pytest.raises(ValueError):
        SkewReport(C, -0.5, "positive", True)
