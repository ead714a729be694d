"""Candidate counts of the negative search on tribes as the block width t grows.

For k blocks of width t the minimal negatively skewed cubes are the t^k
certificates; this tracks how many nodes and candidates the search touches.
"""
import argparse
import time

from skewscope.enumeration import ExactProvider, SkewQuery, search
from skewscope.generators import gen_tribes


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--k", type=int, nargs="+", default=[2, 3])
    ap.add_argument("--t", type=int, nargs="+", default=[3, 4, 5, 6])
    args = ap.parse_args()
    print(f"{'k':>2} {'t':>2} {'n':>3} {'t^k':>5} {'found':>6} {'nodes':>7} {'candidates':>10} {'secs':>6}")
    for k in args.k:
        for t in args.t:
            if k * t > 20:
                continue
            tr = gen_tribes(k, t)
            start = time.perf_counter()
            res = search(ExactProvider(tr.measure()), SkewQuery(k, 1.0, 1 / k, "negative"))
            secs = time.perf_counter() - start
            assert {r.subcube for r in res.reports} == set(tr.certificates())
            print(f"{k:>2} {t:>2} {k * t:>3} {t ** k:>5} {len(res.reports):>6} {res.stats.nodes:>7} "
                  f"{res.stats.candidates:>10} {secs:>6.2f}")


if __name__ == "__main__":
    main()
