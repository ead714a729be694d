"""Measures over {+1,-1}^n and the skew algebra.

A measure is stored as a density psi with uniform mean 1, so a point x has
probability psi(x) / 2^n.  Three backends exist: an explicit density table, a
finite sample set, and a query oracle.  The inner product with the uniform
measure on a subcube C of codimension j is <psi, mu_C> = 2^j Pr[x in C], and
skew(C) = <psi, mu_C> - 1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property
from math import log, sqrt
from typing import Callable, Sequence

import numpy as np

from .cube import (
    DimensionError,
    Subcube,
    bits_of,
    deposit_array,
    extract_array,
    popcount,
)

NORMALIZATION_TOL = 1e-12
MAX_EXPLICIT_N = 30


class ZeroMassError(ValueError):
    """The measure puts no mass on the subcube, so restriction is undefined."""


class ExplicitMeasure:
    """A density table of length 2^n indexed by Point.bits.

    `coords` names the original coordinate behind each local coordinate; it is
    the identity for fresh measures and records the re-indexing done by
    `restrict` and `marginal`.
    """

    def __init__(self, n: int, density, coords: Sequence[int] | None = None,
                 *, renormalize: bool = False):
        if not 0 <= n <= MAX_EXPLICIT_N:
            raise ValueError(f"explicit measures support 0 <= n <= {MAX_EXPLICIT_N}, got {n}")
        d = np.array(density, dtype=np.float64)
        if d.shape != (1 << n,):
            raise ValueError(f"density must have length 2^{n}, got shape {d.shape}")
        if np.any(d < 0) or not np.all(np.isfinite(d)):
            raise ValueError("density has negative or non-finite entries")
        mean = float(d.mean())
        if renormalize:
            if mean <= 0:
                raise ValueError("cannot renormalize a zero density")
            d /= mean
        elif abs(mean - 1.0) > NORMALIZATION_TOL:
            raise ValueError(f"density mean is {mean!r}, expected 1 within {NORMALIZATION_TOL}")
        d.flags.writeable = False
        self.n = n
        self.density = d
        self.coords = tuple(range(n)) if coords is None else tuple(int(c) for c in coords)
        if len(self.coords) != n:
            raise ValueError("coords must name one original coordinate per local coordinate")

    @classmethod
    def from_weights(cls, n: int, weights, coords=None) -> "ExplicitMeasure":
        """Normalize arbitrary non-negative weights into a density."""
        w = np.asarray(weights, dtype=np.float64)
        total = w.sum()
        if total <= 0:
            raise ValueError("weights sum to zero")
        return cls(n, w * ((1 << n) / total), coords, renormalize=True)

    @classmethod
    def uniform(cls, n: int) -> "ExplicitMeasure":
        return cls(n, np.ones(1 << n))

    @classmethod
    def point_mass(cls, n: int, bits: int) -> "ExplicitMeasure":
        d = np.zeros(1 << n)
        d[bits] = float(1 << n)
        return cls(n, d)

    def __repr__(self) -> str:
        return f"ExplicitMeasure(n={self.n}, support={self.support_points.size})"

    def __call__(self, bits: int) -> float:
        return float(self.density[bits])

    @cached_property
    def support_points(self) -> np.ndarray:
        return np.flatnonzero(self.density).astype(np.uint64)

    @cached_property
    def support_probs(self) -> np.ndarray:
        return self.density[self.support_points.astype(np.int64)] / float(1 << self.n)

    def probabilities(self) -> np.ndarray:
        return self.density / float(1 << self.n)

    def lift(self, C: Subcube, n_orig: int) -> Subcube:
        """Map a subcube over local coordinates to the original coordinates."""
        mask = assignment = 0
        for local in bits_of(C.mask):
            g = self.coords[local]
            mask |= 1 << g
            if (C.assignment >> local) & 1:
                assignment |= 1 << g
        return Subcube(n_orig, mask, assignment)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Points drawn from a measure, stored as packed words."""

    n: int
    points: np.ndarray
    seed: int = 0

    def __post_init__(self):
        pts = np.ascontiguousarray(self.points, dtype=np.uint64)
        if pts.ndim != 1 or pts.size == 0:
            raise ValueError("a sample set needs a non-empty 1-d array of points")
        if not 1 <= self.n <= 63:
            raise ValueError(f"dimension {self.n} outside 1..63")
        if self.n < 64 and np.any(pts >> np.uint64(self.n)):
            raise ValueError(f"some points have bits at positions >= {self.n}")
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def m(self) -> int:
        return int(self.points.size)

    def __len__(self) -> int:
        return self.m

    def split(self, first: int) -> tuple["SampleSet", "SampleSet"]:
        """Two disjoint sample sets: the first `first` points and the rest."""
        if not 0 < first < self.m:
            raise ValueError("split point must leave both halves non-empty")
        return (SampleSet(self.n, self.points[:first], self.seed),
                SampleSet(self.n, self.points[first:], self.seed))


@dataclass(eq=False)
class QueryOracle:
    """Density evaluation plus sampling; counts every density query.

    `evaluate` maps an array of packed points to densities.  `sampler` maps
    (m, numpy Generator) to m packed points.
    """

    n: int
    evaluate: Callable[[np.ndarray], np.ndarray]
    sampler: Callable[[int, np.random.Generator], np.ndarray] | None = None
    bound: float | None = None
    queries: int = field(default=0)

    @classmethod
    def from_explicit(cls, psi: ExplicitMeasure) -> "QueryOracle":
        dens = psi.density
        probs = psi.probabilities()

        def evaluate(pts):
            return dens[np.asarray(pts, dtype=np.int64)]

        def sampler(m, rng):
            return rng.choice(dens.size, size=m, p=probs).astype(np.uint64)

        return cls(psi.n, evaluate, sampler, bound=float(dens.max()))

    def query(self, points) -> np.ndarray:
        pts = np.atleast_1d(np.asarray(points, dtype=np.uint64))
        self.queries += int(pts.size)
        vals = np.asarray(self.evaluate(pts), dtype=np.float64)
        if np.any(vals < 0):
            raise ValueError("oracle reported a negative density")
        return vals

    def sample(self, m: int, rng: np.random.Generator) -> np.ndarray:
        if self.sampler is None:
            raise NotImplementedError("this oracle has no sampler")
        return np.asarray(self.sampler(m, rng), dtype=np.uint64)


POSITIVE = "positive"
NEGATIVE = "negative"


@dataclass(frozen=True)
class SkewReport:
    subcube: Subcube
    skew: float
    sign: str
    minimal: bool
    estimated: bool = False
    est_error: float = 0.0

    def __post_init__(self):
        if self.sign not in (POSITIVE, NEGATIVE):
            raise ValueError(f"sign must be {POSITIVE!r} or {NEGATIVE!r}")
        hi = (1 << self.subcube.codim) - 1
        if not -1.0 - 1e-9 <= self.skew <= hi + 1e-9:
            raise ValueError(f"skew {self.skew} outside [-1, {hi}]")
        if (self.sign == POSITIVE) != (self.skew > 0):
            raise ValueError(f"sign {self.sign} inconsistent with skew {self.skew}")
        if self.est_error < 0:
            raise ValueError("est_error must be non-negative")

    @property
    def codim(self) -> int:
        return self.subcube.codim

    def line(self) -> str:
        return (f"{self.subcube} skew={self.skew:.12g} codim={self.codim} "
                f"minimal={str(self.minimal).lower()}")


def _check_cube(n: int, C: Subcube) -> None:
    if C.n != n:
        raise DimensionError(f"subcube has n={C.n}, measure has n={n}")


def mass_table(obj: ExplicitMeasure | SampleSet, mask: int) -> np.ndarray:
    """Pr[x_K = a] for every assignment a of the coordinates in `mask`.

    Index a is the compressed assignment (bit j = value at the j-th set bit of
    `mask`).  Exact for explicit measures, empirical for sample sets.
    """
    size = 1 << popcount(mask)
    if isinstance(obj, ExplicitMeasure):
        keys = extract_array(obj.support_points, mask).astype(np.int64)
        return np.bincount(keys, weights=obj.support_probs, minlength=size)
    if isinstance(obj, SampleSet):
        keys = extract_array(obj.points, mask).astype(np.int64)
        return np.bincount(keys, minlength=size) / obj.m
    raise TypeError(f"unsupported measure type {type(obj).__name__}")


def inner_table(obj: ExplicitMeasure | SampleSet, mask: int) -> np.ndarray:
    """<psi, mu_C> for every subcube C with fixed set `mask` (see mass_table)."""
    return mass_table(obj, mask) * float(1 << popcount(mask))


def inner_cube(psi: ExplicitMeasure, C: Subcube) -> float:
    """<psi, mu_C> = 2^codim(C) Pr[x in C], summed exactly."""
    _check_cube(psi.n, C)
    inside = C.contains_array(psi.support_points)
    return float(psi.support_probs[inside].sum()) * float(1 << C.codim)


def skew(psi: ExplicitMeasure, C: Subcube) -> float:
    return inner_cube(psi, C) - 1.0


def hoeffding_halfwidth(m: int, delta: float, value_range: float = 1.0) -> float:
    """Two-sided Hoeffding half-width for the mean of m draws in an interval of this length."""
    if m <= 0 or not 0 < delta < 1:
        raise ValueError("need m >= 1 and 0 < delta < 1")
    return value_range * sqrt(log(2.0 / delta) / (2.0 * m))


def estimate_skew(samples: SampleSet, C: Subcube, delta: float = 0.01) -> tuple[float, float]:
    """Empirical skew of C and its Hoeffding error bound at failure probability delta."""
    _check_cube(samples.n, C)
    frac = float(np.count_nonzero(C.contains_array(samples.points))) / samples.m
    scale = float(1 << C.codim)
    return scale * frac - 1.0, scale * hoeffding_halfwidth(samples.m, delta)


def restrict(psi: ExplicitMeasure, C: Subcube) -> ExplicitMeasure:
    """psi conditioned on C, as a measure over the free coordinates of C (order kept)."""
    _check_cube(psi.n, C)
    ip = inner_cube(psi, C)
    if ip <= 0:
        raise ZeroMassError(f"measure has no mass on {C}")
    free = C.free_mask
    width = psi.n - C.codim
    idx = deposit_array(np.arange(1 << width, dtype=np.uint64), free) | np.uint64(C.assignment)
    dens = psi.density[idx.astype(np.int64)] / ip
    coords = [psi.coords[i] for i in bits_of(free)]
    return ExplicitMeasure(width, dens, coords, renormalize=True)


def inorm(psi: ExplicitMeasure | SampleSet) -> float:
    """The max density; for samples, 2^n times the top empirical point frequency."""
    return inorm_report(psi)[0]


def inorm_report(psi: ExplicitMeasure | SampleSet) -> tuple[float, bool]:
    """(value, empirical).  Empirical values are lower-bound estimates for reporting only."""
    if isinstance(psi, ExplicitMeasure):
        return float(psi.density.max()), False
    _, counts = np.unique(psi.points, return_counts=True)
    return float(2.0 ** psi.n * counts.max() / psi.m), True


def marginal(psi: ExplicitMeasure, P) -> ExplicitMeasure:
    """The marginal on the coordinates of P (a mask or CoordSet), as a density over |P| bits."""
    mask = getattr(P, "mask", P)
    if mask >> psi.n:
        raise DimensionError("P has coordinates outside the measure")
    width = popcount(mask)
    probs = mass_table(psi, mask)
    coords = [psi.coords[i] for i in bits_of(mask)]
    return ExplicitMeasure(width, probs * float(1 << width), coords, renormalize=True)


def extend(psi: ExplicitMeasure, n: int, P=None) -> ExplicitMeasure:
    """psi(x) := psi'(x_P): the product of psi' on P with uniform elsewhere.

    P defaults to the first psi'.n coordinates.
    """
    if psi.n > n:
        raise ValueError(f"cannot extend a {psi.n}-bit measure to {n} bits")
    mask = ((1 << psi.n) - 1) if P is None else getattr(P, "mask", P)
    if popcount(mask) != psi.n or mask >> n:
        raise ValueError("P must name psi'.n coordinates inside 0..n-1")
    keys = extract_array(np.arange(1 << n, dtype=np.uint64), mask).astype(np.int64)
    return ExplicitMeasure(n, psi.density[keys], renormalize=True)
