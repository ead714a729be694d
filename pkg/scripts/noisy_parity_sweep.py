"""Set recovery and skew error of the sampled search on noisy parity versus sample size."""
import argparse

import numpy as np

from skewscope.enumeration import SampledProvider, SkewQuery, search
from skewscope.generators import gen_noisy_parity


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--n", type=int, default=12)
    ap.add_argument("--eta", type=float, default=0.1)
    ap.add_argument("--samples", type=int, nargs="+", default=[5000, 10000, 20000, 40000])
    ap.add_argument("--seeds", type=int, default=20)
    args = ap.parse_args()
    gp = gen_noisy_parity(args.n, [0, 3, 7], args.eta)
    pos, neg = gp.skewed_cubes()
    want = set(pos) | set(neg)
    target = 1 - 2 * args.eta
    print(f"{'m':>6} {'exact':>6} {'err p50':>8} {'err p95':>8} {'within .05':>10}")
    for m in args.samples:
        exact = 0
        errs = []
        for seed in range(args.seeds):
            prov = SampledProvider(gp.samples(m, seed))
            reports = []
            for sign in ("positive", "negative"):
                reports += search(prov, SkewQuery(4, 0.5, 1.0, sign)).reports
            exact += {r.subcube for r in reports} == want
            errs += [abs(abs(r.skew) - target) for r in reports]
        e = np.array(errs)
        print(f"{m:>6} {exact:>3}/{args.seeds:<2} {np.quantile(e, 0.5):>8.4f} {np.quantile(e, 0.95):>8.4f} "
              f"{np.mean(e <= 0.05):>10.2%}")


if __name__ == "__main__":
    main()
