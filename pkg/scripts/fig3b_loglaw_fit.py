"""Controlled delta-channel QFI for the log-law kernel, fitted with A (ln N)^c + B.

The fitted quantity is I0 / (N^2 T^2). The expected exponent is 2 (1 - alpha).
"""

import argparse

import numpy as np

from lrkqfi.chain import ChainParams, DecayKernel
from lrkqfi.fitting import fit_polylog
from lrkqfi.qfi import ProbeSpec, qfi_optimal


def normalized(N, kernel, T):
    return qfi_optimal(ChainParams(1, 1, 1, N, kernel), ProbeSpec("Delta", T)).value / (N**2 * T**2)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--alpha", type=float, default=0.2)
    ap.add_argument("--T", type=float, default=1.0)
    ap.add_argument("--wide-max", type=float, default=1e5)
    args = ap.parse_args()

    kernel = DecayKernel.log_law(args.alpha)
    narrow = list(range(50, 2001, 50))
    wide = sorted({2 * int(round(x / 2)) for x in np.geomspace(50, args.wide_max, 60)})
    for label, Ns in (("N 50..2000", narrow), (f"N 50..{args.wide_max:g}", wide)):
        fit = fit_polylog([(N, normalized(N, kernel, args.T)) for N in Ns])
        p = fit.parameters
        print(f"{label:16s} A={p['A']:.4f} c={p['c']:.4f} B={p['B']:.4f} rms={fit.residual:.2e}")
    print(f"expected exponent 2(1 - alpha) = {2 * (1 - args.alpha):.4f}")


if __name__ == "__main__":
    main()
