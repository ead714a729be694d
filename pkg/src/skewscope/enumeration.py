"""Listing minimal skewed subcubes.

A subcube C is (gamma, eps)-minimal when skew(C) >= gamma and every proper
parent D has skew(D) <= (1 - eps) gamma; the negative case mirrors both
inequalities.  `brute_force_minimal` checks every cube of codimension <= k and
is the ground truth.  `fsr` / `fsn` grow cubes from the full cube by fixing the
coordinates of a heavy low-degree coefficient of the current restriction, so
they only visit cubes reachable through heavy coefficients.

Coefficient cut-offs at a node with remaining budget k_t, for |S| = s:

* negative search: eps gamma / (k_t C(k_t, s));
* positive search: beta / (k_t C(k_t, s)) with
  beta = eps gamma / (1 + (1 - eps) gamma), the least skew a minimal cube
  keeps after conditioning on any parent.  `threshold_rule="sqrt"` swaps beta
  for eps sqrt(gamma), which is larger whenever 2 sqrt(gamma) < 1 + (1-eps) gamma
  and can then miss cubes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from itertools import combinations
from math import comb, sqrt

import numpy as np

from .cube import (
    Subcube,
    count_subcubes,
    deposit_array,
    extract_array,
    mask_of,
    masks_up_to,
    parents,
    popcount,
    sign_array,
    bits_of,
    submasks,
)
from .fourier import _butterfly
from .heavy import CoeffGraph, FfcParams, deduce_subcube_coeffs, ffc, preprocess
from .measure import (
    NEGATIVE,
    POSITIVE,
    ExplicitMeasure,
    SampleSet,
    SkewReport,
    ZeroMassError,
    hoeffding_halfwidth,
    inner_table,
    skew as exact_skew,
)

TOL = 1e-9
ONE_SIDED = "one-sided"
TWO_SIDED = "two-sided"


@dataclass(frozen=True)
class SkewQuery:
    k: int
    gamma: float
    eps: float
    sign: str = POSITIVE
    parent_rule: str = ONE_SIDED
    threshold_rule: str = "sound"

    def __post_init__(self):
        if self.k < 0:
            raise ValueError("k must be non-negative")
        if self.sign not in (POSITIVE, NEGATIVE):
            raise ValueError(f"sign must be {POSITIVE!r} or {NEGATIVE!r}")
        cap = (1 << self.k) - 1 if self.sign == POSITIVE else 1.0
        if not 0 < self.gamma <= cap + TOL:
            raise ValueError(f"gamma={self.gamma} outside (0, {cap}] for a {self.sign} query")
        if not 0 < self.eps <= 1:
            raise ValueError(f"eps={self.eps} outside (0, 1]")
        if self.parent_rule not in (ONE_SIDED, TWO_SIDED):
            raise ValueError(f"unknown parent rule {self.parent_rule!r}")
        if self.threshold_rule not in ("sound", "sqrt"):
            raise ValueError(f"unknown threshold rule {self.threshold_rule!r}")

    @property
    def direction(self) -> int:
        return 1 if self.sign == POSITIVE else -1

    @property
    def parent_cap(self) -> float:
        return (1 - self.eps) * self.gamma

    @property
    def coeff_base(self) -> float:
        if self.sign == NEGATIVE:
            return self.eps * self.gamma
        if self.threshold_rule == "sqrt":
            return self.eps * sqrt(self.gamma)
        return self.eps * self.gamma / (1 + self.parent_cap)

    def coeff_thresholds(self, kt: int) -> list[float]:
        """Cut-off per degree s = 0..kt at a node with kt coordinates left."""
        return [float("inf")] + [self.coeff_base / (kt * comb(kt, s)) for s in range(1, kt + 1)]

    def with_sign(self, sign: str) -> "SkewQuery":
        return SkewQuery(self.k, self.gamma, self.eps, sign, self.parent_rule, self.threshold_rule)


@dataclass(frozen=True)
class RecursionState:
    """A node of the search: the cube D_t and the number of coordinates still allowed."""

    cube: Subcube
    remaining: int


# --- providers ------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _candidate_masks(free: int, kt: int) -> tuple[np.ndarray, np.ndarray]:
    coords = bits_of(free)
    masks = [mask_of(c) for s in range(1, kt + 1) for c in combinations(coords, s)]
    arr = np.array(masks, dtype=np.uint64)
    return arr, np.bitwise_count(arr).astype(np.int64)


class PointCloudProvider:
    """Weighted points (an exact support or the distinct samples) answering node queries.

    Subclasses set `slack_*` to widen decisions by sampling error.
    """

    estimated = False

    def __init__(self, n: int, points: np.ndarray, weights: np.ndarray):
        self.n = n
        self.points = np.asarray(points, dtype=np.uint64)
        self.weights = np.asarray(weights, dtype=np.float64) / float(np.sum(weights))
        self._tables: dict[int, np.ndarray] = {}

    def prepare(self, query: SkewQuery) -> None:
        """Hook run once before a search."""

    def inner(self, C: Subcube) -> float:
        table = self._tables.get(C.mask)
        if table is None:
            keys = extract_array(self.points, C.mask).astype(np.int64)
            table = np.bincount(keys, weights=self.weights, minlength=1 << C.codim)
            table *= float(1 << C.codim)
            self._tables[C.mask] = table
        key = 0
        for j, pos in enumerate(bits_of(C.mask)):
            key |= ((C.assignment >> pos) & 1) << j
        return float(table[key])

    def skew_slack(self, C: Subcube) -> float:
        return 0.0

    def coeff_slack(self, C: Subcube, count: int) -> float:
        return 0.0

    def heavy(self, C: Subcube, query: SkewQuery, kt: int) -> list[tuple[int, float]]:
        """Sets S outside C's fixed coordinates, 1 <= |S| <= kt, meeting the node cut-offs."""
        inside = C.contains_array(self.points)
        pts = self.points[inside]
        if pts.size == 0:
            return []
        w = self.weights[inside]
        mass = float(w.sum())
        free = ((1 << self.n) - 1) & ~C.mask
        masks, degs = _candidate_masks(free, kt)
        if masks.size == 0:
            return []
        nfree = popcount(free)
        if nfree <= 22 and pts.size * masks.size > nfree * (1 << nfree) * 4:
            local = extract_array(pts, free).astype(np.int64)
            dense = np.bincount(local, weights=w, minlength=1 << nfree)
            spec = _butterfly(dense, nfree)
            coeffs = spec[extract_array(masks, free).astype(np.int64)] / mass
        else:
            coeffs = (w @ sign_array(pts[:, None] & masks[None, :])) / mass
        thr = np.array(query.coeff_thresholds(kt))[degs] - self.coeff_slack(C, int(pts.size))
        keep = np.flatnonzero(np.abs(coeffs) >= thr - TOL)
        return [(int(masks[i]), float(coeffs[i])) for i in keep]


class ExactProvider(PointCloudProvider):
    """Exact coefficients of every restriction of an explicit measure."""

    def __init__(self, psi: ExplicitMeasure):
        super().__init__(psi.n, psi.support_points, psi.support_probs)


class SampledProvider(PointCloudProvider):
    """The empirical measure of a sample set, with Hoeffding slack on every decision.

    `delta` is the total failure probability, split evenly over all cubes of
    codimension <= k (skews) and over all (cube, set) pairs (coefficients).
    """

    estimated = True

    def __init__(self, samples: SampleSet, delta: float = 0.05):
        pts, counts = np.unique(samples.points, return_counts=True)
        super().__init__(samples.n, pts, counts.astype(np.float64))
        self.m = samples.m
        self.delta = delta
        self._cube_delta = delta
        self._coef_delta = delta

    def prepare(self, query: SkewQuery) -> None:
        cubes = count_subcubes(self.n, query.k)
        sets = sum(comb(self.n, s) for s in range(query.k + 1))
        self._cube_delta = self.delta / cubes
        self._coef_delta = self.delta / (cubes * sets)

    def skew_slack(self, C: Subcube) -> float:
        return float(1 << C.codim) * hoeffding_halfwidth(self.m, self._cube_delta)

    def coeff_slack(self, C: Subcube, count: int) -> float:
        # distinct points inside C undercount samples; use the sample count instead
        inside = self.m * self.inner(C) / float(1 << C.codim)
        if inside < 1:
            return 0.0
        return hoeffding_halfwidth(max(int(round(inside)), 1), self._coef_delta, 2.0)


class FfcProvider(PointCloudProvider):
    """One top-level FFC run, then per-node coefficients deduced from the superset graph.

    `access` answers the per-node coefficient checks and skews: an explicit
    measure (exact) or a sample set.  `rho` overrides the top-level FFC
    threshold (default: the smallest node cut-off divided by 4^k).
    """

    def __init__(self, ffc_samples: SampleSet, access: ExplicitMeasure | SampleSet,
                 lam: float = 0.5, rho: float | None = None, seed: int = 0, workers: int = 1):
        if isinstance(access, ExplicitMeasure):
            super().__init__(access.n, access.support_points, access.support_probs)
        else:
            pts, counts = np.unique(access.points, return_counts=True)
            super().__init__(access.n, pts, counts.astype(np.float64))
        self.ffc_samples = ffc_samples
        self.access = access
        self.lam = lam
        self.rho = rho
        self.seed = seed
        self.workers = workers
        self.graph: CoeffGraph | None = None
        self.params: FfcParams | None = None

    def top_threshold(self, query: SkewQuery) -> float:
        if self.rho is not None:
            return self.rho
        smallest = min(query.coeff_thresholds(query.k)[1:]) if query.k else 1.0
        return min(1.0, smallest / 4 ** query.k)

    def prepare(self, query: SkewQuery) -> None:
        rho = self.top_threshold(query)
        self.params = FfcParams(self.n, max(query.k, 1), rho, self.lam, self.seed)
        L = ffc(self.ffc_samples, self.params, workers=self.workers)
        self.graph = preprocess(L)

    def heavy(self, C: Subcube, query: SkewQuery, kt: int) -> list[tuple[int, float]]:
        thr = query.coeff_thresholds(kt)
        try:
            found = deduce_subcube_coeffs(self.graph, C, min(thr[1:]), self.access)
        except ZeroMassError:
            return []
        return [(e.mask, e.value) for e in found
                if 1 <= e.degree <= kt and abs(e.value) >= thr[e.degree] - TOL]


def make_provider(source, kind: str = "auto", **kw) -> PointCloudProvider:
    if kind == "auto":
        kind = "exact" if isinstance(source, ExplicitMeasure) else "sampled"
    if kind == "exact":
        if not isinstance(source, ExplicitMeasure):
            raise TypeError("the exact provider needs an explicit measure")
        return ExactProvider(source)
    if kind == "sampled":
        if not isinstance(source, SampleSet):
            raise TypeError("the sampled provider needs a sample set")
        return SampledProvider(source, **kw)
    raise ValueError(f"unknown provider {kind!r}")


# --- brute force ----------------------------------------------------------------

class SkewTable:
    """Skew of every cube of codimension <= k, from one marginal table per fixed set."""

    def __init__(self, source: ExplicitMeasure | SampleSet, k: int):
        self.n = source.n
        self.k = k
        self.tables = {m: inner_table(source, m) - 1.0 for m in masks_up_to(source.n, k)}

    def skew(self, C: Subcube) -> float:
        key = 0
        for j, pos in enumerate(bits_of(C.mask)):
            key |= ((C.assignment >> pos) & 1) << j
        return float(self.tables[C.mask][key])

    def cubes(self, gamma: float, sign: str):
        """(cube, skew) for every cube of codimension 1..k at or beyond gamma."""
        for mask, tab in self.tables.items():
            if mask == 0:
                continue
            vals = tab if sign == POSITIVE else -tab
            hits = np.flatnonzero(vals >= gamma - TOL)
            if hits.size == 0:
                continue
            ys = deposit_array(hits.astype(np.uint64), mask)
            for h, y in zip(hits, ys):
                yield Subcube(self.n, mask, int(y)), float(tab[h])


def _parent_ok(s: float, query: SkewQuery, slack: float = 0.0) -> bool:
    cap = query.parent_cap + slack + TOL
    if query.parent_rule == TWO_SIDED:
        return abs(s) <= cap
    return query.direction * s <= cap


def is_minimal(psi: ExplicitMeasure, C: Subcube, gamma: float, eps: float,
               sign: str = POSITIVE, parent_rule: str = ONE_SIDED) -> bool:
    """Every proper parent of C stays within (1 - eps) gamma in C's direction."""
    cap = (1 - eps) * gamma + TOL
    direction = 1 if sign == POSITIVE else -1
    for D in parents(C):
        s = exact_skew(psi, D)
        if parent_rule == TWO_SIDED:
            if abs(s) > cap:
                return False
        elif direction * s > cap:
            return False
    return True


def brute_force_skewed(psi: ExplicitMeasure, k: int, gamma: float, sign: str = POSITIVE,
                       table: SkewTable | None = None) -> list[SkewReport]:
    """Every cube of codimension 1..k with skew >= gamma (or <= -gamma)."""
    table = table or SkewTable(psi, k)
    out = [SkewReport(C, s, sign, minimal=False) for C, s in table.cubes(gamma, sign)
           if C.codim <= k]
    return sorted(out, key=lambda r: r.subcube.key())


def brute_force_minimal(psi: ExplicitMeasure, query: SkewQuery,
                        table: SkewTable | None = None) -> list[SkewReport]:
    """Ground truth: every (gamma, eps)-minimal cube of codimension <= k."""
    if table is None or table.k < query.k:
        table = SkewTable(psi, query.k)
    out = []
    for C, s in table.cubes(query.gamma, query.sign):
        if C.codim > query.k:
            continue
        if all(_parent_ok(table.skew(D), query) for D in parents(C)):
            out.append(SkewReport(C, s, query.sign, minimal=True))
    return sorted(out, key=lambda r: r.subcube.key())


# --- the recursive search -------------------------------------------------------

@dataclass
class SearchStats:
    nodes: int = 0
    pruned: int = 0
    stopped: int = 0
    candidates: int = 0


@dataclass
class SearchResult:
    reports: list[SkewReport]
    stats: SearchStats = field(default_factory=SearchStats)
    candidates: list[Subcube] = field(default_factory=list)


def search(provider: PointCloudProvider, query: SkewQuery) -> SearchResult:
    """Depth-first growth from the full cube, then an exact minimality filter.

    At each node D with remaining budget k_t (decisions widened by the
    provider's sampling slack):
    * positive: D becomes a candidate when skew(D) > (1 - eps) gamma and the
      branch stops; it is pruned when <psi, mu_D> < (1 + gamma) 2^-k_t;
    * negative: D becomes a candidate and the branch stops when
      skew(D) < -(1 - eps) gamma;
    * otherwise each heavy S of the restriction spawns 2^|S| children.
    """
    provider.prepare(query)
    n = provider.n
    sgn = query.direction
    cap = query.parent_cap
    stats = SearchStats()
    visited: set[tuple[int, int]] = set()
    candidates: dict[tuple[int, int], Subcube] = {}
    stack = [RecursionState(Subcube.full(n), query.k)]
    while stack:
        state = stack.pop()
        D = state.cube
        if D.key() in visited:
            continue
        visited.add(D.key())
        stats.nodes += 1
        ip = provider.inner(D)
        hw = provider.skew_slack(D)
        excess = sgn * (ip - 1.0) - cap
        if excess > -hw - TOL:
            candidates[D.key()] = D
        if excess > hw + TOL:
            stats.stopped += 1
            continue
        kt = state.remaining
        if sgn > 0 and ip < (1 + query.gamma) * 2.0 ** (-kt) - hw - TOL:
            stats.pruned += 1
            continue
        if kt == 0:
            continue
        for S, _ in provider.heavy(D, query, kt):
            for z in submasks(S):
                child = D.extend(S, z)
                if child.key() not in visited:
                    stack.append(RecursionState(child, kt - popcount(S)))
    stats.candidates = len(candidates)
    reports = []
    for C in candidates.values():
        if C.codim == 0 or C.codim > query.k:
            continue
        s = provider.inner(C) - 1.0
        hw = provider.skew_slack(C)
        if sgn * s < query.gamma - hw - TOL:
            continue
        if all(_parent_ok(provider.inner(D) - 1.0, query, provider.skew_slack(D))
               for D in parents(C)):
            reports.append(SkewReport(C, _clip(s, C), query.sign, True,
                                      provider.estimated, hw))
    reports.sort(key=lambda r: r.subcube.key())
    cands = sorted(candidates.values(), key=Subcube.key)
    return SearchResult(reports, stats, cands)


def _clip(s: float, C: Subcube) -> float:
    return min(max(s, -1.0), float((1 << C.codim) - 1))


def _run(source, query: SkewQuery, provider) -> list[SkewReport]:
    if provider is None:
        provider = make_provider(source)
    return search(provider, query).reports


def fsr(source, query: SkewQuery, provider: PointCloudProvider | None = None) -> list[SkewReport]:
    """Positive-skew search; `source` is an explicit measure or a sample set."""
    if query.sign != POSITIVE:
        raise ValueError("fsr needs a positive query")
    return _run(source, query, provider)


def fsn(source, query: SkewQuery, provider: PointCloudProvider | None = None) -> list[SkewReport]:
    """Negative-skew search; `source` is an explicit measure or a sample set."""
    if query.sign != NEGATIVE:
        raise ValueError("fsn needs a negative query")
    return _run(source, query, provider)
