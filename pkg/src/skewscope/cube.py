"""Points, coordinate sets and subcubes of the Boolean hypercube {+1,-1}^n.

Bit convention (used everywhere, including file formats): bit i of a word is 1
iff x_i = -1, so x_i = (-1)^{bit_i}.  With this encoding a character is a
popcount parity, chi_S(x) = (-1)^{popcount(S & x)}.  Coordinates are 0-based.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterable, Iterator, Sequence

import numpy as np


class DimensionError(ValueError):
    """Objects of different dimensions were combined."""


def popcount(word: int) -> int:
    return int(word).bit_count()


def bits_of(mask: int) -> list[int]:
    """Positions of the set bits of `mask`, ascending."""
    out = []
    i = 0
    while mask:
        if mask & 1:
            out.append(i)
        mask >>= 1
        i += 1
    return out


def mask_of(coords: Iterable[int]) -> int:
    m = 0
    for c in coords:
        m |= 1 << int(c)
    return m


def deposit(value: int, mask: int) -> int:
    """Scatter the low bits of `value` into the set positions of `mask` (pdep)."""
    out = 0
    j = 0
    while mask:
        low = mask & -mask
        if (value >> j) & 1:
            out |= low
        mask ^= low
        j += 1
    return out


def extract(word: int, mask: int) -> int:
    """Gather the bits of `word` at the set positions of `mask` (pext)."""
    out = 0
    j = 0
    while mask:
        low = mask & -mask
        if word & low:
            out |= 1 << j
        mask ^= low
        j += 1
    return out


def submasks(mask: int) -> list[int]:
    """All submasks of `mask` in ascending numeric order."""
    return [deposit(v, mask) for v in range(1 << popcount(mask))]


def deposit_array(values: np.ndarray, mask: int) -> np.ndarray:
    """Vectorised `deposit` over an integer array."""
    values = np.asarray(values, dtype=np.uint64)
    out = np.zeros_like(values)
    for j, pos in enumerate(bits_of(mask)):
        out |= ((values >> np.uint64(j)) & np.uint64(1)) << np.uint64(pos)
    return out


def extract_array(words: np.ndarray, mask: int) -> np.ndarray:
    """Vectorised `extract` over an integer array."""
    words = np.asarray(words, dtype=np.uint64)
    out = np.zeros_like(words)
    for j, pos in enumerate(bits_of(mask)):
        out |= ((words >> np.uint64(pos)) & np.uint64(1)) << np.uint64(j)
    return out


def parity_array(words: np.ndarray) -> np.ndarray:
    """popcount(w) mod 2, elementwise."""
    return (np.bitwise_count(np.asarray(words, dtype=np.uint64)) & 1).astype(np.int8)


def sign_array(words: np.ndarray) -> np.ndarray:
    """(-1)^popcount(w), elementwise, as int8."""
    return (1 - 2 * parity_array(words)).astype(np.int8)


def _full(n: int) -> int:
    return (1 << n) - 1


@dataclass(frozen=True)
class Point:
    n: int
    bits: int

    def __post_init__(self):
        if self.n < 1 or self.n > 63:
            raise ValueError(f"dimension {self.n} outside 1..63")
        if self.bits < 0 or self.bits >> self.n:
            raise ValueError(f"bits {self.bits:#x} do not fit in n={self.n}")

    @classmethod
    def from_signs(cls, signs: Sequence[int]) -> "Point":
        bits = 0
        for i, s in enumerate(signs):
            if s not in (1, -1):
                raise ValueError(f"coordinate {i} is {s}, expected +1 or -1")
            if s == -1:
                bits |= 1 << i
        return cls(len(signs), bits)

    def signs(self) -> tuple[int, ...]:
        return tuple(-1 if (self.bits >> i) & 1 else 1 for i in range(self.n))


@dataclass(frozen=True)
class CoordSet:
    n: int
    mask: int

    def __post_init__(self):
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} does not fit in n={self.n}")

    @classmethod
    def of(cls, n: int, coords: Iterable[int]) -> "CoordSet":
        coords = list(coords)
        if any(c < 0 or c >= n for c in coords):
            raise ValueError(f"coordinates {coords} outside 0..{n - 1}")
        return cls(n, mask_of(coords))

    def __len__(self) -> int:
        return popcount(self.mask)

    def __iter__(self) -> Iterator[int]:
        return iter(bits_of(self.mask))

    def __contains__(self, i: int) -> bool:
        return bool((self.mask >> i) & 1)


def _unpack(obj, attr: str) -> tuple[int | None, int]:
    if isinstance(obj, (Point, CoordSet, Subcube)):
        return obj.n, getattr(obj, attr)
    return None, int(obj)


def _check_dims(*dims: int | None) -> None:
    known = {d for d in dims if d is not None}
    if len(known) > 1:
        raise DimensionError(f"dimension mismatch: {sorted(known)}")


def chi(S: CoordSet | int, x: Point | int) -> int:
    """The character chi_S(x) = prod_{i in S} x_i, as +1 or -1."""
    ns, s = _unpack(S, "mask")
    nx, b = _unpack(x, "bits")
    _check_dims(ns, nx)
    return -1 if popcount(s & b) & 1 else 1


@dataclass(frozen=True, order=True)
class Subcube:
    """The subcube (K, y): points agreeing with `assignment` on the set bits of `mask`.

    `assignment` uses the Point bit encoding and carries no bits outside `mask`.
    """

    n: int
    mask: int
    assignment: int = 0

    def __post_init__(self):
        if self.n < 1 or self.n > 63:
            raise ValueError(f"dimension {self.n} outside 1..63")
        if self.mask < 0 or self.mask >> self.n:
            raise ValueError(f"mask {self.mask:#x} does not fit in n={self.n}")
        if self.assignment & ~self.mask:
            raise ValueError("assignment has bits on free coordinates")

    @classmethod
    def full(cls, n: int) -> "Subcube":
        return cls(n, 0, 0)

    @classmethod
    def from_dict(cls, n: int, fixed: dict[int, int]) -> "Subcube":
        """Build from {coordinate: +1/-1}."""
        mask = assignment = 0
        for i, s in fixed.items():
            if s not in (1, -1):
                raise ValueError(f"coordinate {i} fixed to {s}")
            mask |= 1 << i
            if s == -1:
                assignment |= 1 << i
        return cls(n, mask, assignment)

    @classmethod
    def from_string(cls, text: str) -> "Subcube":
        """Parse the '+', '-', '*' text form; position i describes coordinate i."""
        mask = assignment = 0
        for i, ch in enumerate(text):
            if ch == "+":
                mask |= 1 << i
            elif ch == "-":
                mask |= 1 << i
                assignment |= 1 << i
            elif ch != "*":
                raise ValueError(f"bad subcube character {ch!r} at {i}")
        return cls(len(text), mask, assignment)

    def __str__(self) -> str:
        out = []
        for i in range(self.n):
            if not (self.mask >> i) & 1:
                out.append("*")
            else:
                out.append("-" if (self.assignment >> i) & 1 else "+")
        return "".join(out)

    @property
    def fixed(self) -> CoordSet:
        return CoordSet(self.n, self.mask)

    @property
    def codim(self) -> int:
        return popcount(self.mask)

    @property
    def free_mask(self) -> int:
        return _full(self.n) & ~self.mask

    def value(self, i: int) -> int:
        """The +1/-1 value fixed at coordinate i."""
        if not (self.mask >> i) & 1:
            raise KeyError(f"coordinate {i} is free")
        return -1 if (self.assignment >> i) & 1 else 1

    def key(self) -> tuple[int, int]:
        return self.mask, self.assignment

    def contains(self, x: Point | int) -> bool:
        nx, b = _unpack(x, "bits")
        _check_dims(self.n, nx)
        return ((b ^ self.assignment) & self.mask) == 0

    def contains_array(self, points: np.ndarray) -> np.ndarray:
        pts = np.asarray(points, dtype=np.uint64)
        return ((pts ^ np.uint64(self.assignment)) & np.uint64(self.mask)) == 0

    def restrict_to(self, mask: int) -> "Subcube":
        """The parent keeping only the fixed coordinates in `mask`."""
        m = self.mask & mask
        return Subcube(self.n, m, self.assignment & m)

    def extend(self, mask: int, values: int) -> "Subcube":
        """Child fixing the extra coordinates `mask` to the bits `values`."""
        if mask & self.mask:
            raise ValueError("extension overlaps fixed coordinates")
        return Subcube(self.n, self.mask | mask, self.assignment | (values & mask))


def contains(C: Subcube, x: Point | int) -> bool:
    return C.contains(x)


def is_proper_parent(D: Subcube, C: Subcube) -> bool:
    """True iff D strictly contains C as a point set (D fixes fewer coordinates)."""
    _check_dims(D.n, C.n)
    if D.mask == C.mask or (D.mask & ~C.mask):
        return False
    return ((D.assignment ^ C.assignment) & D.mask) == 0


def parents(C: Subcube) -> list[Subcube]:
    """All 2^codim - 1 proper parents, ascending by fixed mask (full cube first)."""
    return [C.restrict_to(m) for m in submasks(C.mask) if m != C.mask]


def partition_children(C: Subcube, L: CoordSet | int) -> list[Subcube]:
    """The 2^|L| children of C fixing every coordinate of L, ascending by assignment."""
    nl, lmask = _unpack(L, "mask")
    _check_dims(C.n, nl)
    if lmask & C.mask:
        raise ValueError("L overlaps the fixed coordinates of C")
    return [C.extend(lmask, v) for v in submasks(lmask)]


def masks_up_to(n: int, k: int) -> list[int]:
    """All masks over n coordinates with popcount <= k, ascending."""
    if not 0 <= k <= n:
        raise ValueError(f"need 0 <= k <= n, got k={k}, n={n}")
    out = [mask_of(c) for j in range(k + 1) for c in combinations(range(n), j)]
    out.sort()
    return out


def count_subcubes(n: int, k: int) -> int:
    return sum(comb(n, j) << j for j in range(k + 1))


def enumerate_subcubes(n: int, k: int) -> Iterator[Subcube]:
    """Every subcube of codimension <= k once, by mask then assignment ascending."""
    for m in masks_up_to(n, k):
        for a in submasks(m):
            yield Subcube(n, m, a)
