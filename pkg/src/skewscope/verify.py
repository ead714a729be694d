"""Property suites run by `skewscope verify <suite>`.

Each suite returns a list of Check records; a suite passes when every check does.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from math import sqrt

import numpy as np

from .cube import Subcube, bits_of, enumerate_subcubes, masks_up_to, parents, partition_children
from .enumeration import SkewQuery, SkewTable, brute_force_minimal, ExactProvider, search
from .fourier import hypercontractive_bound, level_weight, level_weight_excl, wht
from .generators import (
    GF2m,
    corpus,
    gen_dual_bch,
    gen_noisy_parity,
    gen_random_sparse,
    gen_tribes,
    span,
)
from .heavy import FfcParams, ffc
from .measure import ExplicitMeasure, inner_table, inorm, restrict, inner_cube, skew

IDENTITY_TOL = 1e-10


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'} {self.name}" + (f" ({self.detail})" if self.detail else "")


def _worst(values) -> float:
    return max(values, default=0.0)


def identity_checks(name: str, psi: ExplicitMeasure, k: int = 3, rng=None) -> list[Check]:
    """Product rule, zero-sum, partition averaging, range and conditional-skew bounds."""
    rng = rng or np.random.default_rng(0)
    k = min(k, psi.n)
    tables = {m: inner_table(psi, m) for m in masks_up_to(psi.n, k)}
    zero_sum = _worst(abs(float((t - 1).sum())) for t in tables.values())
    lo = min(float(t.min()) - 1 for t in tables.values())
    hi_viol = _worst(float(t.max()) - len(t) for t in tables.values())
    prod_err = avg_err = 0.0
    cubes = list(enumerate_subcubes(psi.n, k))
    for idx in rng.choice(len(cubes), size=min(60, len(cubes)), replace=False):
        C = cubes[idx]
        free = bits_of(C.free_mask)
        if free:
            extra = rng.choice(free, size=min(len(free), int(rng.integers(1, 3))), replace=False)
            L = sum(1 << int(i) for i in extra)
            kids = partition_children(C, L)
            avg = sum(skew(psi, D) for D in kids) / len(kids)
            avg_err = max(avg_err, abs(avg - skew(psi, C)))
            ipc = inner_cube(psi, C)
            if ipc > 0:
                r = restrict(psi, C)
                for D in kids:
                    local = Subcube(r.n, 0, 0)
                    for j, g in enumerate(r.coords):
                        if (L >> g) & 1:
                            local = local.extend(1 << j, ((D.assignment >> g) & 1) << j)
                    prod_err = max(prod_err, abs(inner_cube(psi, D) - ipc * inner_cube(r, local)))
    checks = [
        Check(f"{name}: product rule", prod_err <= IDENTITY_TOL, f"max err {prod_err:.2e}"),
        Check(f"{name}: zero-sum over assignments", zero_sum <= IDENTITY_TOL, f"max err {zero_sum:.2e}"),
        Check(f"{name}: partition averaging", avg_err <= IDENTITY_TOL, f"max err {avg_err:.2e}"),
        Check(f"{name}: skew range", lo >= -1 - IDENTITY_TOL and hi_viol <= IDENTITY_TOL,
              f"min skew {lo:.3g}"),
    ]
    checks.extend(conditional_skew_checks(name, psi, k))
    return checks


def conditional_skew_worst(psi: ExplicitMeasure, k: int, gammas=(0.25, 0.5, 1, 3),
                           epss=(0.25, 0.5, 1)) -> dict[str, float]:
    """Smallest margin of each conditional-skew bound over all minimal cubes and parents.

    'stated' is eps sqrt(gamma)/2 (positive), 'tight' is eps gamma/(1+(1-eps)gamma)
    (positive) and 'negative' is -eps gamma.  A negative margin is a violation.
    """
    table = SkewTable(psi, k)
    margin = {"stated": np.inf, "tight": np.inf, "negative": np.inf}
    for kk, g, ep in itertools.product(range(1, k + 1), gammas, epss):
        for sign in ("positive", "negative"):
            try:
                q = SkewQuery(kk, g, ep, sign)
            except ValueError:
                continue
            for r in brute_force_minimal(psi, q, table):
                for D in parents(r.subcube):
                    ipd = 1 + table.skew(D)
                    rs = (1 + r.skew) / ipd - 1
                    if sign == "positive":
                        margin["stated"] = min(margin["stated"], rs - ep * sqrt(g) / 2)
                        margin["tight"] = min(margin["tight"], rs - ep * g / (1 + (1 - ep) * g))
                    else:
                        margin["negative"] = min(margin["negative"], -ep * g - rs)
    return margin


def conditional_skew_checks(name: str, psi: ExplicitMeasure, k: int) -> list[Check]:
    m = conditional_skew_worst(psi, k)
    return [
        Check(f"{name}: conditional skew >= eps*sqrt(gamma)/2", m["stated"] >= -IDENTITY_TOL,
              f"worst margin {m['stated']:.3g}"),
        Check(f"{name}: conditional skew >= eps*gamma/(1+(1-eps)gamma)", m["tight"] >= -IDENTITY_TOL,
              f"worst margin {m['tight']:.3g}"),
        Check(f"{name}: conditional skew <= -eps*gamma", m["negative"] >= -IDENTITY_TOL,
              f"worst margin {m['negative']:.3g}"),
    ]


def suite_identities(measures: dict[str, ExplicitMeasure] | None = None, k: int = 3) -> list[Check]:
    measures = measures if measures is not None else corpus(max_n=12)
    out = []
    for name, psi in measures.items():
        out.extend(identity_checks(name, psi, k))
    return out


def suite_level_k(measures: dict[str, ExplicitMeasure] | None = None, trials: int = 20,
                  seed: int = 0) -> list[Check]:
    measures = measures if measures is not None else corpus(max_n=15)
    rng = np.random.default_rng(seed)
    out = []
    for name, psi in measures.items():
        spec = wht(psi)
        t = inorm(psi)
        parseval = abs(float(np.sum(spec.coeffs ** 2)) - float(np.mean(psi.density ** 2)))
        ok = True
        for k in range(1, 5):
            bound = hypercontractive_bound(t, k)
            ok &= level_weight(spec, min(k, psi.n)) <= bound * (1 + 1e-12)
            for _ in range(trials):
                J = int(rng.integers(0, 1 << psi.n))
                ok &= level_weight_excl(spec, min(k, psi.n), J) <= 2 ** bin(J).count("1") * bound * (1 + 1e-12)
        out.append(Check(f"{name}: level-k bounds k=1..4", bool(ok), f"inorm {t:g}"))
        out.append(Check(f"{name}: Parseval", parseval <= 1e-9, f"err {parseval:.2e}"))
    return out


def suite_generators(seed: int = 0) -> list[Check]:
    out = []
    F_ok = True
    for l in range(2, 9):
        F = GF2m(l)
        F_ok &= F.order(2) == F.size - 1
        for a in range(1, F.size):
            F_ok &= F.mul(a, F.inv(a)) == 1
    out.append(Check("GF(2^l) inverses and primitive alpha, l=2..8", bool(F_ok)))
    bch = gen_dual_bch(4, 1)
    spec = wht(bch.measure())
    vals = set(np.round(spec.coeffs, 9).tolist())
    support = {int(s) for s in np.flatnonzero(spec.coeffs > 0.5)}
    code = {int(w) for w in span(bch.spec.null_basis)}
    out.append(Check("dual-BCH spectrum is 0/1 on the code", vals <= {0.0, 1.0} and support == code))
    tr = gen_tribes(3, 4)
    psi = tr.measure()
    worst = 0.0
    for C in tr.certificates():
        for D in parents(C):
            worst = max(worst, abs(skew(psi, D) + D.codim / 3))
    out.append(Check("tribes parents have skew -l/k", worst <= 1e-12, f"max err {worst:.1e}"))
    rng = np.random.default_rng(seed)
    for name, gen in [("tribes", gen_tribes(2, 4)), ("parity", gen_noisy_parity(7, [0, 2], 0.2)),
                      ("dual-bch", gen_dual_bch(3, 1))]:
        psi = gen.measure()
        s = gen.samples(100_000, seed)
        bad = 0
        for _ in range(100):
            mask = int(rng.integers(0, 1 << psi.n))
            a = int(rng.integers(0, 1 << psi.n)) & mask
            C = Subcube(psi.n, mask, a)
            p = inner_cube(psi, C) / 2 ** C.codim
            f = float(np.count_nonzero(C.contains_array(s.points))) / s.m
            bad += abs(f - p) > 3 * sqrt(p * (1 - p) / s.m) + 1e-12
        out.append(Check(f"{name}: sampler matches explicit", bad <= 2, f"{bad}/100 outside 3 sigma"))
    return out


def suite_oracle_equivalence(n: int = 10, k: int = 3, trials: int = 20, seed: int = 0) -> list[Check]:
    out = []
    mism = 0
    runs = 0
    for i in range(trials):
        psi = gen_random_sparse(n, [8, 32, 256][i % 3] if n >= 8 else 1 << (n - 1), seed + i)
        table = SkewTable(psi, k)
        prov = ExactProvider(psi)
        for g, ep, sign in itertools.product((0.25, 0.5, 1, 3), (0.25, 0.5, 1), ("positive", "negative")):
            try:
                q = SkewQuery(k, g, ep, sign)
            except ValueError:
                continue
            runs += 1
            want = {r.subcube for r in brute_force_minimal(psi, q, table)}
            got = {r.subcube for r in search(prov, q).reports}
            mism += got != want
    out.append(Check(f"fsr/fsn equal brute force (n={n}, k={k}, {trials} measures)", mism == 0,
                     f"{mism}/{runs} mismatches"))
    return out


def suite_ffc_stat(trials: int = 20, seed: int = 0) -> list[Check]:
    gp = gen_noisy_parity(12, [0, 3, 7], 0.1)
    hits = 0
    sound = True
    for i in range(trials):
        p = FfcParams(gp.n, 4, 0.5, 0.5, seed + i)
        s = gp.samples(p.d + 20_000, seed + i)
        L = ffc(s, p)
        hits += gp.support_mask in L
        sound &= all(abs(e_.value) >= 0.75 * p.rho - 1e-9 for e_ in L)
    return [Check("ffc recall of S*+label", hits >= 0.95 * trials, f"{hits}/{trials}"),
            Check("ffc entries pass re-estimation", bool(sound))]


SUITES = {
    "identities": suite_identities,
    "generators": suite_generators,
    "oracle-equivalence": suite_oracle_equivalence,
    "level-k": suite_level_k,
    "ffc-stat": suite_ffc_stat,
}
