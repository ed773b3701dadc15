"""Growth of the gap between gamma(N) and its main Euler-Maclaurin integral."""

import argparse

from lrkqfi.asymptotics import remainder_scaling_probe
from lrkqfi.chain import DecayKernel


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--alphas", type=float, nargs="+", default=[0.0, 0.5, 2.0])
    ap.add_argument("--N", type=int, nargs="+", default=[256, 512, 1024, 2048])
    args = ap.parse_args()

    for alpha in args.alphas:
        rep = remainder_scaling_probe(DecayKernel.power(alpha), args.N)
        print(f"alpha={alpha:g}: remainder exponent {rep.remainder_exponent:.4f}, main exponent {rep.main_exponent:.4f}, "
              f"main/N = {rep.n_log_n_slope:.5f} ln N + {rep.n_log_n_intercept:.4f}, {'PASS' if rep.passed else 'FAIL'}")
        for r in rep.rows:
            print(f"  N={r.N:6d} gamma={r.gamma:.10e} main={r.main:.10e} remainder={r.remainder:+.6e}")


if __name__ == "__main__":
    main()
