"""Finding large low-degree Fourier coefficients.

Three access models are covered:

* exact: read the coefficients off the Walsh-Hadamard transform;
* samples: FFC, which bisects the coordinates at random and looks for
  correlated pairs among parity vectors built from the samples, plus the
  superset graph that turns one top-level list into the heavy coefficients of
  any restriction;
* queries: a Kushilevitz-Mansour bucket search over coordinate prefixes.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from itertools import combinations
from math import ceil, comb, log, sqrt

import numpy as np

from .cube import Subcube, bits_of, mask_of, popcount, sign_array, submasks
from .fourier import (
    EXACT,
    SAMPLED,
    CoeffEntry,
    Spectrum,
    restricted_coeff,
    wht,
)
from .measure import ExplicitMeasure, SampleSet, QueryOracle, ZeroMassError, inner_cube

TOL = 1e-9
WHP = "whp"


@dataclass(frozen=True)
class CoeffList:
    entries: tuple[CoeffEntry, ...]
    rho: float
    k: int
    guarantee: str = EXACT

    def __post_init__(self):
        if any(e.degree > self.k for e in self.entries):
            raise ValueError("an entry exceeds the degree cap")
        if self.guarantee not in (EXACT, WHP):
            raise ValueError(f"unknown guarantee {self.guarantee!r}")
        ordered = tuple(sorted(self.entries, key=lambda e: (e.degree, e.mask)))
        object.__setattr__(self, "entries", ordered)

    def __len__(self) -> int:
        return len(self.entries)

    def __iter__(self):
        return iter(self.entries)

    def __contains__(self, mask) -> bool:
        return getattr(mask, "mask", mask) in self.masks

    @property
    def masks(self) -> frozenset[int]:
        return frozenset(e.mask for e in self.entries)

    def value(self, mask: int) -> float:
        for e in self.entries:
            if e.mask == mask:
                return e.value
        raise KeyError(mask)

    def dump_lines(self) -> list[str]:
        return [f"{e.mask:#x} {e.value:.17g}" for e in self.entries]


def find_heavy_exact(psi: ExplicitMeasure, k: int, rho: float,
                     spectrum: Spectrum | None = None) -> CoeffList:
    """All S with |S| <= k and |psihat(S)| >= rho, masks in psi's own coordinates."""
    spec = wht(psi) if spectrum is None else spectrum
    deg = spec.degrees()
    keep = np.flatnonzero((deg <= k) & (np.abs(spec.coeffs) >= rho - TOL))
    return CoeffList(tuple(CoeffEntry(int(s), float(spec.coeffs[s])) for s in keep), rho, k)


# --- FindCorr -----------------------------------------------------------------

def pack_signs(V: np.ndarray) -> np.ndarray:
    """Pack rows of +-1 entries into uint64 words, bit set where the entry is -1."""
    V = np.asarray(V)
    bits = np.packbits(V < 0, axis=1, bitorder="little")
    pad = (-bits.shape[1]) % 8
    if pad:
        bits = np.pad(bits, ((0, 0), (0, pad)))
    return np.ascontiguousarray(bits).view(np.uint64)


def packed_inner(P1: np.ndarray, P2: np.ndarray, d: int) -> np.ndarray:
    """Integer inner products <v1, v2> of packed +-1 rows: d - 2 * Hamming distance."""
    out = np.empty((P1.shape[0], P2.shape[0]), dtype=np.int64)
    for i in range(P1.shape[0]):
        dist = np.bitwise_count(P1[i][None, :] ^ P2).sum(axis=1, dtype=np.int64)
        out[i] = d - 2 * dist
    return out


def blocked_inner(V1: np.ndarray, V2: np.ndarray, block: int = 4096) -> np.ndarray:
    """Integer inner products via float32 matrix products over column blocks (exact below 2^24)."""
    d = V1.shape[1]
    if d >= 1 << 24:
        raise ValueError("float32 blocks are exact only for d < 2^24")
    out = np.zeros((V1.shape[0], V2.shape[0]), dtype=np.float32)
    for lo in range(0, d, block):
        a = V1[:, lo:lo + block].astype(np.float32)
        b = V2[:, lo:lo + block].astype(np.float32)
        out += a @ b.T
    return np.rint(out).astype(np.int64)


def _threshold_pairs(inner: np.ndarray, d: int, rho: float, absolute: bool):
    vals = np.abs(inner) if absolute else inner
    hits = np.argwhere(vals >= rho * d - TOL * d)
    return [(int(i), int(j), float(inner[i, j]) / d) for i, j in hits]


def find_corr(V1, V2, rho: float, tau: float | None = None, backend: str = "pairwise",
              absolute: bool = False) -> list[tuple[int, int, float]]:
    """All index pairs (i, j) with <V1[i], V2[j]>/d >= rho, as (i, j, correlation).

    Both backends compute exact integer inner products, so they agree pair for
    pair.  `absolute` compares |correlation| instead.  `tau` is accepted for the
    interface contract; exact backends never need the slack it allows.
    """
    V1 = np.atleast_2d(np.asarray(V1))
    V2 = np.atleast_2d(np.asarray(V2))
    if V1.shape[1] != V2.shape[1]:
        raise ValueError("vectors must share a length")
    if tau is not None and rho < tau:
        raise ValueError("need rho >= tau")
    d = V1.shape[1]
    if backend == "pairwise":
        inner = packed_inner(pack_signs(V1), pack_signs(V2), d)
    elif backend == "blocked":
        inner = blocked_inner(V1, V2)
    else:
        raise ValueError(f"unknown backend {backend!r}")
    return _threshold_pairs(inner, d, rho, absolute)


# --- FFC ------------------------------------------------------------------------

@dataclass(frozen=True)
class FfcParams:
    """Parameters of the sample-based finder; d and rounds default to the analysed sizes."""

    n: int
    k: int
    rho: float
    lam: float = 0.5
    seed: int = 0
    d: int | None = None
    rounds: int | None = None

    def __post_init__(self):
        if not 0 < self.lam <= 1:
            raise ValueError("lambda must lie in (0, 1]")
        if not 0 < self.rho <= 1:
            raise ValueError("rho must lie in (0, 1]")
        if self.k < 1 or self.n < 2:
            raise ValueError("need k >= 1 and n >= 2")
        ln = log(self.n)
        if self.d is None:
            object.__setattr__(self, "d", ceil(32 * self.k * ln / self.tau ** 2))
        if self.rounds is None:
            object.__setattr__(self, "rounds", ceil(16 * self.k ** 1.5 * ln))
        if self.d < 1 or self.rounds < 1:
            raise ValueError("d and rounds must be positive")

    @property
    def tau(self) -> float:
        return (self.rho / 2) ** (1 / self.lam)

    def as_dict(self) -> dict:
        return {"n": self.n, "k": self.k, "rho": self.rho, "lambda": self.lam,
                "tau": self.tau, "d": self.d, "rounds": self.rounds, "seed": self.seed}


def _small_subsets(coords: list[int], size: int) -> list[int]:
    return [mask_of(c) for j in range(size + 1) for c in combinations(coords, j)]


def _xor_rows(cols: np.ndarray, masks: list[int], words: int) -> np.ndarray:
    """Packed parity vectors y_S: XOR of the packed coordinate columns in S."""
    out = np.zeros((len(masks), words), dtype=np.uint64)
    for r, m in enumerate(masks):
        for i in bits_of(m):
            out[r] ^= cols[i]
    return out


def _ffc_round(cols, d, n, params: FfcParams, seq: np.random.SeedSequence, backend: str):
    rng = np.random.Generator(np.random.Philox(seq))
    side = rng.integers(0, 2, size=n)
    n1 = [i for i in range(n) if side[i] == 0]
    n2 = [i for i in range(n) if side[i] == 1]
    m1 = _small_subsets(n1, (params.k + 1) // 2)
    m2 = _small_subsets(n2, params.k // 2)
    words = cols.shape[1]
    Y1 = _xor_rows(cols, m1, words)
    Y2 = _xor_rows(cols, m2, words)
    if backend == "pairwise":
        inner = packed_inner(Y1, Y2, d)
    else:
        inner = blocked_inner(_unpack(Y1, d), _unpack(Y2, d))
    return {m1[i] | m2[j] for i, j, _ in _threshold_pairs(inner, d, params.rho / 2, True)}


def _unpack(P: np.ndarray, d: int) -> np.ndarray:
    bits = np.unpackbits(P.view(np.uint8), axis=1, bitorder="little")[:, :d]
    return (1 - 2 * bits.astype(np.int8)).astype(np.int8)


def pack_columns(points: np.ndarray, n: int) -> np.ndarray:
    """Row i = coordinate i over all points, packed (bit set where x_i = -1)."""
    pts = np.asarray(points, dtype=np.uint64)
    bits = ((pts[None, :] >> np.arange(n, dtype=np.uint64)[:, None]) & np.uint64(1)).astype(bool)
    packed = np.packbits(bits, axis=1, bitorder="little")
    pad = (-packed.shape[1]) % 8
    if pad:
        packed = np.pad(packed, ((0, 0), (0, pad)))
    return np.ascontiguousarray(packed).view(np.uint64)


def ffc_raw(samples: SampleSet, params: FfcParams, workers: int = 1,
            backend: str = "pairwise") -> set[int]:
    """The union over rounds of Q|R for every rho/2-correlated pair (no filtering)."""
    if samples.m < params.d:
        raise ValueError(f"FFC needs d={params.d} samples, got {samples.m}")
    if params.n != samples.n:
        raise ValueError("parameter n differs from the sample dimension")
    cols = pack_columns(samples.points[:params.d], samples.n)
    seqs = np.random.SeedSequence(params.seed).spawn(params.rounds)
    work = partial(_ffc_round, cols, params.d, samples.n, params, backend=backend)
    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            parts = list(pool.map(work, seqs))
    else:
        parts = [work(s) for s in seqs]
    found: set[int] = set()
    for p in parts:
        found |= p
    return found


def ffc(samples: SampleSet, params: FfcParams, holdout: SampleSet | None = None,
        workers: int = 1, backend: str = "pairwise") -> CoeffList:
    """Heavy coefficients from samples, re-estimated on held-out samples at 3 rho / 4.

    The first d samples feed the correlation search.  Re-estimation uses
    `holdout` if given, else the samples beyond the first d, else the same d.
    """
    raw = ffc_raw(samples, params, workers, backend)
    if holdout is None:
        holdout = SampleSet(samples.n, samples.points[params.d:], samples.seed) \
            if samples.m > params.d else samples
    masks = sorted(s for s in raw if popcount(s) <= params.k)
    err = sqrt(2 * log(2 / params.n ** (-2.0 * params.k)) / holdout.m)
    entries = []
    if masks:
        vals = _sample_means(holdout.points, np.array(masks, dtype=np.uint64))
        for s, v in zip(masks, vals):
            if abs(v) >= 0.75 * params.rho - TOL:
                entries.append(CoeffEntry(s, float(v), SAMPLED, err))
    return CoeffList(tuple(entries), params.rho, params.k, WHP)


def _sample_means(points: np.ndarray, masks: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    total = np.zeros(masks.size, dtype=np.int64)
    for lo in range(0, points.size, chunk):
        block = points[lo:lo + chunk]
        total += sign_array(block[:, None] & masks[None, :]).sum(axis=0, dtype=np.int64)
    return total / points.size


# --- superset graph and restricted coefficients -------------------------------

@dataclass(frozen=True, eq=False)
class CoeffGraph:
    """Edges T -> S for T subset of S in L; out[T][i] lists the S with |S \\ T| = i."""

    k: int
    members: frozenset[int]
    out: dict[int, tuple[tuple[int, ...], ...]]
    edges: int

    @property
    def vertices(self) -> frozenset[int]:
        return frozenset(self.out) | self.members


def preprocess(L: CoeffList) -> CoeffGraph:
    lists: dict[int, list[list[int]]] = {}
    edges = 0
    for e in L.entries:
        S = e.mask
        for T in submasks(S):
            lists.setdefault(T, [[] for _ in range(L.k + 1)])[popcount(S ^ T)].append(S)
            edges += 1
    out = {T: tuple(tuple(sorted(v)) for v in parts) for T, parts in lists.items()}
    return CoeffGraph(L.k, L.masks, out, edges)


def deduce_subcube_coeffs(G: CoeffGraph, C: Subcube, tau: float,
                          access: ExplicitMeasure | Spectrum | SampleSet,
                          spectrum: Spectrum | None = None) -> CoeffList:
    """Heavy coefficients of psi restricted to C, read off the superset graph.

    Returned masks are over the original coordinates (disjoint from C's fixed
    set).  With exact access the kept entries are exactly those of magnitude
    >= tau; with samples, the estimate inside C must reach 3 tau / 4.
    """
    J = C.mask
    budget = G.k - popcount(J)
    if budget < 0:
        raise ValueError("subcube codimension exceeds the graph degree cap")
    cands: set[int] = set()
    for T in submasks(J):
        parts = G.out.get(T)
        if parts is None:
            continue
        for i in range(budget + 1):
            for S in parts[i]:
                cands.add(S & ~J)
    masks = sorted(cands)
    if isinstance(access, SampleSet):
        inside = access.points[C.contains_array(access.points)]
        if inside.size == 0:
            raise ZeroMassError(f"no samples inside {C}")
        vals = _sample_means(inside, np.array(masks, dtype=np.uint64)) if masks else []
        err = sqrt(2 * log(2 / 1e-3) / inside.size)
        entries = [CoeffEntry(s, float(v), SAMPLED, err)
                   for s, v in zip(masks, vals) if abs(v) >= 0.75 * tau - TOL]
        return CoeffList(tuple(entries), tau, budget, WHP)
    if isinstance(access, Spectrum):
        spec = access
        ip = skew_ip_from_spectrum(spec, C)
    else:
        spec = wht(access) if spectrum is None else spectrum
        ip = inner_cube(access, C)
    if ip <= TOL:
        raise ZeroMassError(f"no mass on {C}")
    entries = []
    for s in masks:
        v = restricted_coeff(spec, C, s, ip)
        if abs(v) >= tau - TOL:
            entries.append(CoeffEntry(s, v))
    return CoeffList(tuple(entries), tau, budget)


def skew_ip_from_spectrum(spec: Spectrum, C: Subcube) -> float:
    """<psi, mu_C> from the spectrum: sum over S inside K of psihat(S) chi_S(y)."""
    return restricted_coeff(spec, C, 0, 1.0)


# --- query model ----------------------------------------------------------------

class BudgetExceeded(RuntimeError):
    def __init__(self, message: str, partial: CoeffList, queries: int):
        super().__init__(message)
        self.partial = partial
        self.queries = queries


@dataclass(frozen=True)
class GlPlan:
    """Sample sizes for the bucket search; `budget` is the declared query ceiling."""

    n: int
    rho: float
    t: float
    delta: float
    bucket_samples: int
    leaf_samples: int

    @classmethod
    def make(cls, n: int, rho: float, t: float, delta: float) -> "GlPlan":
        t = float(t)
        if rho <= 0 or t < 1 or not 0 < delta < 1:
            raise ValueError("need rho > 0, t >= 1, 0 < delta < 1")
        # one estimate per bucket per level; at most 4t/rho^2 buckets can be heavy
        per_estimate = delta / (4 * n * t * t / rho ** 2)
        acc = rho * rho / 4
        bucket = ceil((2 * t * t) ** 2 * log(2 / per_estimate) / (2 * acc * acc))
        leaf_acc = rho / 4
        leaf = ceil((2 * t) ** 2 * log(2 / per_estimate) / (2 * leaf_acc * leaf_acc))
        return cls(n, rho, t, delta, bucket, leaf)

    @property
    def budget(self) -> int:
        return 2 * self.n * self.bucket_samples + self.leaf_samples


def _bucket_weights_exact(spec: Spectrum, prefix_len: int, buckets: list[int]) -> list[float]:
    low = (1 << prefix_len) - 1
    sq = spec.coeffs ** 2
    keys = np.arange(sq.size) & low
    totals = np.bincount(keys, weights=sq, minlength=1 << prefix_len)
    return [float(totals[a]) for a in buckets]


def goldreich_levin(oracle: QueryOracle, rho: float, t: float, delta: float = 0.01,
                    seed: int = 0, exact_spectrum: Spectrum | None = None,
                    max_queries: int | None = None) -> CoeffList:
    """Kushilevitz-Mansour search for every S with |psihat(S)| >= rho.

    Coordinates are split as prefix [0, j) and suffix [j, n).  The weight of
    the bucket of prefix pattern a is
    E[psi(u.w) psi(u'.w) chi_a(u) chi_a(u')] over independent prefixes u, u'
    and a shared suffix w.  Buckets estimated at >= rho^2/2 are refined; the
    final singletons are kept when their estimate reaches 3 rho / 4, which with
    accuracy rho / 4 keeps every rho-heavy set and nothing below rho / 2.
    With `exact_spectrum` the weights and coefficients are read exactly
    instead and the output is exactly the rho-heavy sets.
    """
    n = oracle.n
    plan = GlPlan.make(n, rho, t, delta)
    if max_queries is not None and plan.budget > max_queries:
        raise BudgetExceeded(f"plan needs {plan.budget} queries, cap is {max_queries}",
                             CoeffList((), rho, n, WHP), 0)
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, 0x474C])))
    full = (1 << n) - 1
    if exact_spectrum is None:
        m = plan.bucket_samples
        u = rng.integers(0, 1 << n, size=m, dtype=np.uint64)
        u2 = rng.integers(0, 1 << n, size=m, dtype=np.uint64)
        w = rng.integers(0, 1 << n, size=m, dtype=np.uint64)
    start = oracle.queries
    buckets = [0]
    for j in range(1, n + 1):
        cand = []
        for a in buckets:
            cand.extend((a, a | (1 << (j - 1))))
        if exact_spectrum is not None:
            weights = _bucket_weights_exact(exact_spectrum, j, cand)
        else:
            low = np.uint64((1 << j) - 1)
            high = np.uint64(full) & ~low
            f1 = oracle.query((u & low) | (w & high))
            f2 = oracle.query((u2 & low) | (w & high))
            z = ((u ^ u2) & low).astype(np.int64)
            hist = np.bincount(z, weights=f1 * f2, minlength=1 << j) / m
            zs = np.arange(1 << j, dtype=np.uint64)
            weights = [float(np.dot(hist, sign_array(zs & np.uint64(a)))) for a in cand]
        buckets = [a for a, wt in zip(cand, weights) if wt >= rho * rho / 2]
        if max_queries is not None and oracle.queries - start > max_queries:
            raise BudgetExceeded("query cap reached during bucket search",
                                 CoeffList((), rho, n, WHP), oracle.queries - start)
    entries = []
    if buckets:
        if exact_spectrum is not None:
            vals = [exact_spectrum[a] for a in buckets]
            source, err = EXACT, 0.0
        else:
            x = rng.integers(0, 1 << n, size=plan.leaf_samples, dtype=np.uint64)
            fx = oracle.query(x)
            vals = [float(np.mean(fx * sign_array(x & np.uint64(a)))) for a in buckets]
            source, err = SAMPLED, rho / 4
        # exact values need no sampling margin
        keep = rho if source == EXACT else 0.75 * rho
        for a, v in zip(buckets, vals):
            if abs(v) >= keep - TOL:
                entries.append(CoeffEntry(a, float(v), source, err))
    guarantee = EXACT if exact_spectrum is not None else WHP
    return CoeffList(tuple(entries), rho, n, guarantee)
