"""Minimum-weight codeword counts and minimal skewed cube counts for dual-BCH measures."""
import argparse

from skewscope.enumeration import SkewQuery, brute_force_minimal
from skewscope.generators import BchSpec, count_min_weight_codewords, gen_dual_bch


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--pairs", nargs="+", default=["3,1", "4,1", "5,1", "4,2"],
                    help="l,e pairs")
    args = ap.parse_args()
    print(f"{'l':>2} {'e':>2} {'n':>3} {'d':>3} {'N_d':>6} {'2^(d-1) N_d':>12} {'+minimal':>9} {'-minimal':>9}")
    for pair in args.pairs:
        l, e = (int(v) for v in pair.split(","))
        spec = BchSpec(l, e)
        d = spec.distance
        nd = count_min_weight_codewords(spec)
        pos = neg = "-"
        if spec.n <= 15 and d <= 4:
            psi = gen_dual_bch(l, e).measure()
            pos = sum(r.codim == d for r in brute_force_minimal(psi, SkewQuery(d, 1.0, 1.0)))
            neg = sum(r.codim == d for r in brute_force_minimal(psi, SkewQuery(d, 1.0, 1.0, "negative")))
        print(f"{l:>2} {e:>2} {spec.n:>3} {d:>3} {nd:>6} {2 ** (d - 1) * nd:>12} {pos:>9} {neg:>9}")


if __name__ == "__main__":
    main()
