"""Text formats for measures and sample sets.

Measure file::

    skewscope-measure v1 n=<n> format=<dense|sparse>
    dense:  2^n lines, one density per line, line i is Point.bits = i
    sparse: "<bits-hex> <density>" lines; absent points have density 0

Sample file::

    skewscope-samples v1 n=<n>
    one point per line as a {0,1}-string; character i is bit i (1 means x_i = -1)
"""
from __future__ import annotations

import hashlib
import io
import re
import sys
from pathlib import Path
from typing import IO

import numpy as np

from .measure import ExplicitMeasure, SampleSet

MEASURE_MAGIC = "skewscope-measure v1"
SAMPLES_MAGIC = "skewscope-samples v1"
_MEASURE_HEADER = re.compile(r"^skewscope-measure v1 n=(\d+) format=(dense|sparse)$")
_SAMPLES_HEADER = re.compile(r"^skewscope-samples v1 n=(\d+)$")


class FormatError(ValueError):
    pass


def write_measure(psi: ExplicitMeasure, out: IO[str], fmt: str = "sparse") -> None:
    if fmt not in ("dense", "sparse"):
        raise ValueError(f"unknown format {fmt!r}")
    out.write(f"{MEASURE_MAGIC} n={psi.n} format={fmt}\n")
    if fmt == "dense":
        out.writelines(f"{v:.17g}\n" for v in psi.density)
    else:
        for i in np.flatnonzero(psi.density):
            out.write(f"{int(i):x} {psi.density[i]:.17g}\n")


def read_measure(src: IO[str], renormalize: bool = False) -> ExplicitMeasure:
    header = src.readline().strip()
    m = _MEASURE_HEADER.match(header)
    if not m:
        raise FormatError(f"not a measure file header: {header!r}")
    n, fmt = int(m.group(1)), m.group(2)
    lines = [ln.strip() for ln in src if ln.strip()]
    if fmt == "dense":
        if len(lines) != 1 << n:
            raise FormatError(f"dense measure needs {1 << n} values, found {len(lines)}")
        dens = np.array([float(x) for x in lines])
    else:
        dens = np.zeros(1 << n)
        for ln in lines:
            key, val = ln.split()
            idx = int(key, 16)
            if idx >> n:
                raise FormatError(f"point {key} does not fit in n={n}")
            dens[idx] = float(val)
    return ExplicitMeasure(n, dens, renormalize=renormalize)


def point_string(bits: int, n: int) -> str:
    return "".join("1" if (bits >> i) & 1 else "0" for i in range(n))


def write_samples(samples: SampleSet, out: IO[str]) -> None:
    out.write(f"{SAMPLES_MAGIC} n={samples.n}\n")
    n = samples.n
    bits = ((samples.points[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)).astype(np.uint8)
    chars = (bits + ord("0")).view("S1").reshape(bits.shape)
    out.write("\n".join(row.tobytes().decode() for row in chars))
    out.write("\n")


def read_samples(src: IO[str]) -> SampleSet:
    header = src.readline().strip()
    m = _SAMPLES_HEADER.match(header)
    if not m:
        raise FormatError(f"not a sample file header: {header!r}")
    n = int(m.group(1))
    pts = []
    for ln in src:
        ln = ln.strip()
        if not ln:
            continue
        if len(ln) != n or set(ln) - {"0", "1"}:
            raise FormatError(f"bad sample line {ln!r}")
        pts.append(int(ln[::-1], 2))
    return SampleSet(n, np.array(pts, dtype=np.uint64))


def sniff(text: str) -> str:
    """'measure' or 'samples' from the first line."""
    first = text.split("\n", 1)[0].strip()
    if first.startswith(MEASURE_MAGIC):
        return "measure"
    if first.startswith(SAMPLES_MAGIC):
        return "samples"
    raise FormatError(f"unrecognised header {first!r}")


def loads(text: str, renormalize: bool = False) -> ExplicitMeasure | SampleSet:
    buf = io.StringIO(text)
    return read_measure(buf, renormalize) if sniff(text) == "measure" else read_samples(buf)


def load(path: str | Path, renormalize: bool = False) -> ExplicitMeasure | SampleSet:
    """Read a measure or sample file; '-' reads standard input."""
    text = sys.stdin.read() if str(path) == "-" else Path(path).read_text()
    return loads(text, renormalize)


def digest(path: str | Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()
