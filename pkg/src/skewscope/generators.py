"""Structured and random instances: subcube-uniform, tribes, noisy parity, dual BCH, sparse.

Every generator is pure given its parameters and seed.  Randomness comes from
named Philox streams, so two draws with the same (seed, name) are identical.
"""
from __future__ import annotations

import os
import zlib
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .cube import Subcube, deposit, parity_array, popcount
from .measure import ExplicitMeasure, SampleSet

DEFAULT_MAX_EXPLICIT_N = 24


def max_explicit_n() -> int:
    """Largest n for which explicit tables are built; SKEWSCOPE_MAX_EXPLICIT_N overrides."""
    return int(os.environ.get("SKEWSCOPE_MAX_EXPLICIT_N", DEFAULT_MAX_EXPLICIT_N))


def _guard(n: int) -> None:
    limit = max_explicit_n()
    if n > limit:
        raise ValueError(f"explicit measure with n={n} exceeds the limit {limit} "
                         "(set SKEWSCOPE_MAX_EXPLICIT_N to raise it)")


def stream(seed: int, name: str) -> np.random.Generator:
    """A counter-based generator for the named sub-stream of `seed`."""
    ss = np.random.SeedSequence([int(seed) & (2 ** 64 - 1), zlib.crc32(name.encode())])
    return np.random.Generator(np.random.Philox(ss))


def uniform_points(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return rng.integers(0, 1 << n, size=m, dtype=np.uint64) if n < 64 else \
        rng.integers(0, 2 ** 63, size=m, dtype=np.uint64)


def sample_explicit(psi: ExplicitMeasure, m: int, seed: int, name: str = "explicit") -> SampleSet:
    rng = stream(seed, name)
    pts = rng.choice(psi.support_points, size=m, p=psi.support_probs / psi.support_probs.sum())
    return SampleSet(psi.n, pts, seed)


# --- GF(2^l) ---------------------------------------------------------------

# x^l + ... with the generator alpha = x primitive; bit i is the coefficient of x^i.
PRIMITIVE_POLYS = {
    2: 0b111,
    3: 0b1011,
    4: 0b10011,
    5: 0b100101,
    6: 0b1000011,
    7: 0b10001001,
    8: 0b100011101,
    9: 0x211,
    10: 0x409,
    11: 0x805,
    12: 0x1053,
    13: 0x201B,
    14: 0x4443,
    15: 0x8003,
    16: 0x1100B,
}


def clmul_mod(a: int, b: int, poly: int, l: int) -> int:
    """Carry-less product of a and b reduced modulo poly."""
    out = 0
    while b:
        if b & 1:
            out ^= a
        b >>= 1
        a <<= 1
        if a >> l:
            a ^= poly
    return out


class GF2m:
    """The field GF(2^l) built on the tabled polynomial, with log/antilog tables."""

    def __init__(self, l: int):
        if l not in PRIMITIVE_POLYS:
            raise ValueError(f"field degree {l} outside 2..16")
        self.l = l
        self.poly = PRIMITIVE_POLYS[l]
        self.size = 1 << l
        order = self.size - 1
        exp = np.zeros(2 * order, dtype=np.int64)
        log_ = np.full(self.size, -1, dtype=np.int64)
        x = 1
        for i in range(order):
            if log_[x] != -1:
                raise ValueError(f"alpha has order {i} < {order} for l={l}")
            exp[i] = x
            log_[x] = i
            x = clmul_mod(x, 2, self.poly, l)
        if x != 1:
            raise ValueError(f"alpha does not have order {order} for l={l}")
        exp[order:] = exp[:order]
        self.exp = exp
        self.log = log_

    def element(self, value: int) -> "GfElement":
        return GfElement(self, value)

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return int(self.exp[self.log[a] + self.log[b]])

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("0 has no inverse")
        return int(self.exp[(self.size - 1 - self.log[a]) % (self.size - 1)])

    def alpha_pow(self, e: int) -> int:
        return int(self.exp[e % (self.size - 1)])

    def order(self, a: int) -> int:
        """Multiplicative order, computed by repeated multiplication."""
        if a == 0:
            raise ValueError("0 has no multiplicative order")
        x, i = a, 1
        while x != 1:
            x = clmul_mod(x, a, self.poly, self.l)
            i += 1
        return i


@dataclass(frozen=True)
class GfElement:
    field: GF2m = field(repr=False, compare=False)
    value: int

    def __post_init__(self):
        if not 0 <= self.value < self.field.size:
            raise ValueError(f"{self.value} is not an element of GF(2^{self.field.l})")

    def __add__(self, other: "GfElement") -> "GfElement":
        return GfElement(self.field, self.value ^ other.value)

    __sub__ = __add__

    def __mul__(self, other: "GfElement") -> "GfElement":
        return GfElement(self.field, self.field.mul(self.value, other.value))

    def inverse(self) -> "GfElement":
        return GfElement(self.field, self.field.inv(self.value))


# --- BCH codes and their duals -----------------------------------------------

def gf2_rank(rows) -> int:
    """Rank over GF(2) of integer bit-rows."""
    basis: dict[int, int] = {}
    for r in rows:
        r = int(r)
        while r:
            top = r.bit_length() - 1
            if top in basis:
                r ^= basis[top]
            else:
                basis[top] = r
                break
    return len(basis)


def gf2_null_space(rows, n: int) -> list[int]:
    """A basis of {c : <row, c> = 0 for every row}, as n-bit words."""
    pivots: dict[int, int] = {}
    for r in rows:
        r = int(r)
        for col, prow in pivots.items():
            if (r >> col) & 1:
                r ^= prow
        if not r:
            continue
        col = (r & -r).bit_length() - 1
        for c2 in list(pivots):
            if (pivots[c2] >> col) & 1:
                pivots[c2] ^= r
        pivots[col] = r
    basis = []
    for free in range(n):
        if free in pivots:
            continue
        c = 1 << free
        for col, prow in pivots.items():
            if (prow >> free) & 1:
                c |= 1 << col
        basis.append(c)
    return basis


def span(basis) -> np.ndarray:
    """Every GF(2) combination of the basis words, index i using the set bits of i."""
    words = np.zeros(1, dtype=np.uint64)
    for b in basis:
        words = np.concatenate([words, words ^ np.uint64(b)])
    return words


@dataclass(frozen=True)
class BchSpec:
    """Even-distance BCH code of length 2^l - 1: H has e*l rows from alpha^{(2b-1)j} plus all-ones."""

    l: int
    e: int

    def __post_init__(self):
        if self.e < 1:
            raise ValueError("e must be at least 1")
        if self.distance > self.n:
            raise ValueError(f"distance {self.distance} exceeds length {self.n}")
        rows = self.rows
        if gf2_rank(rows) != self.e * self.l + 1:
            raise ValueError(f"parity-check matrix for l={self.l}, e={self.e} is rank deficient")

    @property
    def n(self) -> int:
        return (1 << self.l) - 1

    @property
    def distance(self) -> int:
        return 2 * self.e + 2

    @cached_property
    def field(self) -> GF2m:
        return GF2m(self.l)

    @cached_property
    def rows(self) -> tuple[int, ...]:
        """Rows of H as n-bit words (bit j = column j)."""
        F = self.field
        out = []
        for b in range(1, self.e + 1):
            powers = [F.alpha_pow((2 * b - 1) * j) for j in range(self.n)]
            for r in range(self.l):
                out.append(sum(((p >> r) & 1) << j for j, p in enumerate(powers)))
        out.append((1 << self.n) - 1)
        return tuple(out)

    def matrix(self) -> np.ndarray:
        return np.array([[(r >> j) & 1 for j in range(self.n)] for r in self.rows], dtype=np.uint8)

    @cached_property
    def null_basis(self) -> list[int]:
        return gf2_null_space(self.rows, self.n)

    def syndrome_zero(self, word: int) -> bool:
        return all(popcount(r & word) % 2 == 0 for r in self.rows)

    def metadata(self) -> dict:
        return {"l": self.l, "e": self.e, "n": self.n, "distance": self.distance,
                "polynomial": hex(self.field.poly)}


MAX_CODE_DIM = 26


def iter_codewords(spec: BchSpec, chunk_bits: int = 16):
    """Yield arrays of codewords covering the whole null space of H once."""
    basis = spec.null_basis
    if len(basis) > MAX_CODE_DIM:
        raise ValueError(f"code dimension {len(basis)} exceeds {MAX_CODE_DIM}")
    low = span(basis[:chunk_bits])
    for hi in span(basis[chunk_bits:]):
        yield low ^ hi


def weight_distribution(spec: BchSpec) -> np.ndarray:
    counts = np.zeros(spec.n + 1, dtype=np.int64)
    for words in iter_codewords(spec):
        counts += np.bincount(np.bitwise_count(words).astype(np.int64), minlength=spec.n + 1)
    return counts


def count_min_weight_codewords(spec: BchSpec) -> int:
    """Number of codewords of weight exactly the designed distance, by exhaustive enumeration."""
    return int(weight_distribution(spec)[spec.distance])


def min_weight_codewords(spec: BchSpec) -> np.ndarray:
    parts = [w[np.bitwise_count(w) == spec.distance] for w in iter_codewords(spec)]
    return np.sort(np.concatenate(parts))


# --- measures -----------------------------------------------------------------

def gen_subcube_uniform(n: int, C: Subcube) -> ExplicitMeasure:
    """mu_C: density 2^codim on C, zero elsewhere."""
    _guard(n)
    if C.n != n:
        raise ValueError("subcube dimension differs from n")
    pts = np.arange(1 << n, dtype=np.uint64)
    dens = np.where(C.contains_array(pts), float(1 << C.codim), 0.0)
    return ExplicitMeasure(n, dens)


def gen_random_sparse(n: int, support_size: int, seed: int) -> ExplicitMeasure:
    """Uniform over a random support of the given size."""
    _guard(n)
    if not 1 <= support_size <= 1 << n:
        raise ValueError(f"support size must be in 1..2^{n}")
    rng = stream(seed, "sparse-support")
    support = rng.choice(1 << n, size=support_size, replace=False)
    dens = np.zeros(1 << n)
    dens[support] = (1 << n) / support_size
    return ExplicitMeasure(n, dens, renormalize=True)


@dataclass(frozen=True)
class Tribes:
    """k blocks of t coordinates; one uniformly chosen block is forced to all +1.

    Block i, position j lives at coordinate i*t + j.
    """

    k: int
    t: int

    @property
    def n(self) -> int:
        return self.k * self.t

    def block_mask(self, i: int) -> int:
        return ((1 << self.t) - 1) << (i * self.t)

    def density_of(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.uint64)
        ones = np.zeros(pts.shape, dtype=np.int64)
        for i in range(self.k):
            ones += (pts & np.uint64(self.block_mask(i))) == 0
        return ones * (2.0 ** self.t / self.k)

    def measure(self) -> ExplicitMeasure:
        _guard(self.n)
        return ExplicitMeasure(self.n, self.density_of(np.arange(1 << self.n, dtype=np.uint64)),
                               renormalize=True)

    def samples(self, m: int, seed: int) -> SampleSet:
        rng = stream(seed, "tribes")
        pts = uniform_points(rng, m, self.n)
        chosen = rng.integers(0, self.k, size=m)
        masks = np.array([self.block_mask(i) for i in range(self.k)], dtype=np.uint64)
        pts &= ~masks[chosen]
        return SampleSet(self.n, pts, seed)

    def certificates(self) -> list[Subcube]:
        """The t^k subcubes fixing one coordinate per block to -1."""
        out = []
        for choice in np.ndindex(*([self.t] * self.k)):
            mask = sum(1 << (i * self.t + j) for i, j in enumerate(choice))
            out.append(Subcube(self.n, mask, mask))
        return sorted(out, key=Subcube.key)


def gen_tribes(k: int, t: int) -> Tribes:
    if k < 1 or t < 1:
        raise ValueError("k and t must be positive")
    return Tribes(k, t)


@dataclass(frozen=True)
class NoisyParity:
    """Uniform x in {+-1}^n with label chi_S(x) flipped w.p. eta, stored at coordinate n."""

    n_features: int
    secret: int
    eta: float

    def __post_init__(self):
        if not 0 <= self.eta < 0.5:
            raise ValueError("eta must lie in [0, 1/2)")
        if self.secret == 0 or self.secret >> self.n_features:
            raise ValueError("secret set must be non-empty and inside the features")

    @property
    def n(self) -> int:
        return self.n_features + 1

    @property
    def label(self) -> int:
        return self.n_features

    @property
    def support_mask(self) -> int:
        """S* together with the label coordinate."""
        return self.secret | (1 << self.label)

    def measure(self) -> ExplicitMeasure:
        _guard(self.n)
        pts = np.arange(1 << self.n, dtype=np.uint64)
        disagree = parity_array(pts & np.uint64(self.support_mask)).astype(bool)
        dens = np.where(disagree, 2.0 * self.eta, 2.0 * (1.0 - self.eta))
        return ExplicitMeasure(self.n, dens)

    def samples(self, m: int, seed: int) -> SampleSet:
        rng = stream(seed, "noisy-parity")
        x = uniform_points(rng, m, self.n_features)
        flip = (rng.random(m) < self.eta).astype(np.uint64)
        lab = parity_array(x & np.uint64(self.secret)).astype(np.uint64) ^ flip
        return SampleSet(self.n, x | (lab << np.uint64(self.label)), seed)

    def skewed_cubes(self) -> tuple[list[Subcube], list[Subcube]]:
        """(D+, D-): cubes over S* + label whose label agrees / disagrees with the parity."""
        pos, neg = [], []
        mask = self.support_mask
        for z in range(1 << popcount(self.secret)):
            y = deposit(z, self.secret)
            par = popcount(y) & 1
            pos.append(Subcube(self.n, mask, y | (par << self.label)))
            neg.append(Subcube(self.n, mask, y | ((par ^ 1) << self.label)))
        return sorted(pos, key=Subcube.key), sorted(neg, key=Subcube.key)


def gen_noisy_parity(n: int, S, eta: float) -> NoisyParity:
    mask = getattr(S, "mask", S)
    if not isinstance(mask, int):
        mask = sum(1 << int(i) for i in mask)
    return NoisyParity(n, mask, eta)


@dataclass(frozen=True)
class DualBch:
    """Uniform over the row space of a BCH parity-check matrix (the dual code)."""

    spec: BchSpec

    @property
    def n(self) -> int:
        return self.spec.n

    @cached_property
    def points(self) -> np.ndarray:
        return np.unique(span(self.spec.rows))

    def measure(self) -> ExplicitMeasure:
        _guard(self.n)
        dens = np.zeros(1 << self.n)
        dens[self.points.astype(np.int64)] = (1 << self.n) / self.points.size
        return ExplicitMeasure(self.n, dens)

    def samples(self, m: int, seed: int) -> SampleSet:
        rng = stream(seed, "dual-bch")
        rows = np.array(self.spec.rows, dtype=np.uint64)
        coef = rng.integers(0, 2, size=(m, rows.size), dtype=np.uint64)
        pts = np.bitwise_xor.reduce(coef * rows[None, :], axis=1)
        return SampleSet(self.n, pts, seed)


def gen_dual_bch(l: int, e: int) -> DualBch:
    return DualBch(BchSpec(l, e))


def corpus(seed: int = 0, max_n: int = 15) -> dict[str, ExplicitMeasure]:
    """A small named corpus spanning every generator family, n <= max_n."""
    out: dict[str, ExplicitMeasure] = {}
    out["uniform-8"] = ExplicitMeasure.uniform(8)
    out["all-ones-10"] = gen_subcube_uniform(10, Subcube(10, 0b1111, 0))
    out["subcube-12"] = gen_subcube_uniform(12, Subcube(12, 0b101010000011, 0b000010000001))
    out["tribes-3x4"] = gen_tribes(3, 4).measure()
    out["tribes-2x5"] = gen_tribes(2, 5).measure()
    out["parity-11"] = gen_noisy_parity(11, [0, 3, 7], 0.1).measure()
    out["parity-8-clean"] = gen_noisy_parity(8, [1, 2], 0.0).measure()
    out["dual-bch-4-1"] = gen_dual_bch(4, 1).measure()
    out["dual-bch-3-1"] = gen_dual_bch(3, 1).measure()
    for i, (n, s) in enumerate([(8, 8), (10, 32), (12, 256), (10, 1), (14, 1000)]):
        out[f"sparse-{n}-{s}"] = gen_random_sparse(n, s, seed + i)
    return {k: v for k, v in out.items() if v.n <= max_n}

