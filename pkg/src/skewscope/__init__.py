"""Find minimal skewed subcubes of distributions on the Boolean cube."""
__version__ = "0.1.0"

from .cube import Point, CoordSet, Subcube, chi, enumerate_subcubes
from .measure import ExplicitMeasure, QueryOracle, SampleSet, SkewReport, inner_cube, inorm, restrict, skew
from .fourier import Spectrum, restricted_coeff, wht
from .heavy import CoeffList, FfcParams, ffc, find_heavy_exact, goldreich_levin
from .enumeration import SkewQuery, brute_force_minimal, fsn, fsr, search

__all__ = [
    "Point", "CoordSet", "Subcube", "chi", "enumerate_subcubes",
    "ExplicitMeasure", "QueryOracle", "SampleSet", "SkewReport", "inner_cube", "inorm", "restrict", "skew",
    "Spectrum", "restricted_coeff", "wht",
    "CoeffList", "FfcParams", "ffc", "find_heavy_exact", "goldreich_levin",
    "SkewQuery", "brute_force_minimal", "fsn", "fsr", "search",
]
