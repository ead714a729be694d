"""Fourier analysis over {+1,-1}^n.

psi = sum_S psihat(S) chi_S with psihat(S) = E_uniform[psi chi_S] = E_{x~psi}[chi_S(x)].
Spectra are dense arrays indexed by the mask of S.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import e, log, sqrt

import numpy as np

from .cube import CoordSet, Subcube, deposit_array, popcount, sign_array
from .measure import ExplicitMeasure, SampleSet, ZeroMassError

IDENTITY_TOL = 1e-9
EXACT = "exact"
SAMPLED = "sampled"


def _butterfly(values: np.ndarray, n: int) -> np.ndarray:
    a = np.array(values, dtype=np.float64)
    for i in range(n):
        v = a.reshape(-1, 2, 1 << i)
        lo, hi = v[:, 0, :].copy(), v[:, 1, :]
        v[:, 0, :] += hi
        v[:, 1, :] = lo - hi
    return a


@dataclass(frozen=True, eq=False)
class Spectrum:
    n: int
    coeffs: np.ndarray

    def __post_init__(self):
        if self.coeffs.shape != (1 << self.n,):
            raise ValueError("spectrum must have 2^n coefficients")

    def __getitem__(self, S) -> float:
        return float(self.coeffs[getattr(S, "mask", S)])

    def degrees(self) -> np.ndarray:
        return np.bitwise_count(np.arange(1 << self.n, dtype=np.uint64)).astype(np.int64)

    def dump_lines(self, min_abs: float = 0.0) -> list[str]:
        """'<mask-hex> <value>' lines with |value| >= min_abs, sorted by |S| then mask."""
        masks = np.flatnonzero(np.abs(self.coeffs) >= min_abs)
        deg = self.degrees()[masks]
        order = np.lexsort((masks, deg))
        return [f"{int(masks[i]):#x} {self.coeffs[masks[i]]:.17g}" for i in order]


def wht(psi: ExplicitMeasure) -> Spectrum:
    """Fast Walsh-Hadamard transform, normalized by 2^-n.  O(n 2^n)."""
    raw = _butterfly(psi.density, psi.n)
    raw /= float(1 << psi.n)
    return Spectrum(psi.n, raw)


def inverse_wht(spec: Spectrum) -> np.ndarray:
    """The density with this spectrum (the unnormalized transform)."""
    return _butterfly(spec.coeffs, spec.n)


@dataclass(frozen=True)
class CoeffEntry:
    mask: int
    value: float
    source: str = EXACT
    sample_error: float = 0.0

    def __post_init__(self):
        if self.source not in (EXACT, SAMPLED):
            raise ValueError(f"unknown source {self.source!r}")
        if self.sample_error < 0:
            raise ValueError("sample_error must be non-negative")

    @property
    def degree(self) -> int:
        return popcount(self.mask)

    def coordset(self, n: int) -> CoordSet:
        return CoordSet(n, self.mask)


def chi_columns(points: np.ndarray, masks) -> np.ndarray:
    """+-1 matrix M[i, s] = chi_{masks[s]}(points[i]) as int8."""
    pts = np.asarray(points, dtype=np.uint64)[:, None]
    return sign_array(pts & np.asarray(masks, dtype=np.uint64)[None, :])


def coeff_estimate(samples: SampleSet, S, k: int | None = None,
                   delta: float | None = None) -> CoeffEntry:
    """Sample mean of chi_S with a Hoeffding error bound.

    The default failure probability is n^(-2k) with k = |S| unless given.
    chi_S ranges over [-1, 1], so the half-width is sqrt(2 ln(2/delta) / m).
    """
    mask = getattr(S, "mask", S)
    if mask == 0:
        return CoeffEntry(0, 1.0, SAMPLED, 0.0)
    if delta is None:
        kk = popcount(mask) if k is None else k
        delta = min(0.5, float(samples.n) ** (-2 * max(kk, 1)))
    value = float(sign_array(samples.points & np.uint64(mask)).mean(dtype=np.float64))
    err = sqrt(2.0 * log(2.0 / delta) / samples.m)
    return CoeffEntry(mask, value, SAMPLED, err)


def _subset_masks(mask: int) -> np.ndarray:
    return deposit_array(np.arange(1 << popcount(mask), dtype=np.uint64), mask)


def skew_from_spectrum(spec: Spectrum, C: Subcube) -> float:
    """sum over nonempty S inside the fixed set of psihat(S) chi_S(y)."""
    subs = _subset_masks(C.mask)
    signs = sign_array(subs & np.uint64(C.assignment))
    total = float(np.dot(spec.coeffs[subs.astype(np.int64)], signs))
    return total - float(spec.coeffs[0])


def level_weight(spec: Spectrum, k: int) -> float:
    """W^{<=k}: squared mass on |S| <= k, the empty set included."""
    if not 0 <= k <= spec.n:
        raise ValueError(f"need 0 <= k <= n, got {k}")
    return float(np.sum(spec.coeffs[spec.degrees() <= k] ** 2))


def level_weight_excl(spec: Spectrum, k: int, J) -> float:
    """Squared mass on sets with at most k coordinates outside J."""
    if not 0 <= k <= spec.n:
        raise ValueError(f"need 0 <= k <= n, got {k}")
    jmask = getattr(J, "mask", J)
    outside = np.arange(1 << spec.n, dtype=np.uint64) & np.uint64(~jmask & ((1 << spec.n) - 1))
    keep = np.bitwise_count(outside) <= k
    return float(np.sum(spec.coeffs[keep] ** 2))


def hypercontractive_bound(t: float, k: int) -> float:
    """e^2 (ln(e t))^k, the level-k ceiling for a density bounded by t."""
    if t < 1:
        raise ValueError(f"a density bound is at least 1, got {t}")
    return e ** 2 * (1.0 + log(t)) ** k


def restricted_coeff(spec: Spectrum, C: Subcube, S, ip: float) -> float:
    """Coefficient at S of psi restricted to C=(J,z): sum_{T<=J} psihat(S+T) chi_T(z) / ip.

    S is a mask over the original coordinates and must avoid J.
    """
    mask = getattr(S, "mask", S)
    if mask & C.mask:
        raise ValueError("S must be disjoint from the fixed coordinates")
    if ip <= 0:
        raise ZeroMassError(f"no mass on {C}")
    subs = _subset_masks(C.mask)
    signs = sign_array(subs & np.uint64(C.assignment))
    idx = (subs | np.uint64(mask)).astype(np.int64)
    return float(np.dot(spec.coeffs[idx], signs)) / ip
