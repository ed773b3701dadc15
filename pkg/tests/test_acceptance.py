"""End-to-end acceptance checks, one per criterion.

Each ``criterion_*`` function returns ``(passed, detail)``. Under pytest every
criterion prints a single PASS/FAIL line (collected again in the terminal
summary); ``python tests/test_acceptance.py`` prints the same lines directly.
"""

import math
import time

import numpy as np
import pytest

from lrkqfi.asymptotics import (
    EmConfig,
    euler_maclaurin_sum,
    finite_size_window,
    remainder_scaling_probe,
    sine_power_quadrature,
)
from lrkqfi.chain import ChainParams, DecayKernel, structure_factors
from lrkqfi.fitting import fit_polylog, fit_power
from lrkqfi.oracle import build_dtheta_h, operator_spread, oracle_equivalence, verify_extremal_states
from lrkqfi.qfi import ProbeSpec, gamma, qfi_optimal, qfi_uncontrolled


def controlled(theta, N, kernel, T=1.0, J=1.0, mu=1.0, delta=1.0):
    return qfi_optimal(ChainParams(J, mu, delta, N, kernel), ProbeSpec(theta, T)).value


def free(theta, N, kernel, T=1.0, J=1.0, mu=1.0, delta=1.0):
    return qfi_uncontrolled(ChainParams(J, mu, delta, N, kernel), ProbeSpec(theta, T)).value


def cot_half_reference(N):
    n = np.arange(N)
    m = np.where(n < N // 2, 2 * n + 1, 2 * (N - 1 - n) + 1)
    return np.where(n < N // 2, 1.0, -1.0) / np.tan(m * np.pi / (2 * N))


def criterion_1():
    recs = oracle_equivalence(seed=20240611, trials=50, N_list=[2, 4, 6, 8])
    worst = max(recs, key=lambda r: r.rel_err)
    ok = worst.rel_err <= 1e-8
    return ok, f"{len(recs)} comparisons, max rel err {worst.rel_err:.2e} (N={worst.N}, {worst.family}, {worst.theta}, T={worst.T})"


def criterion_2():
    mu_exact = all(
        controlled("Mu", N, DecayKernel.power(0), T) == N**2 * T**2 for N in (2, 4, 10, 100, 4096) for T in (0.5, 1.0, 3.0)
    )
    N = 4096
    ratio = controlled("J", N, DecayKernel.power(0)) * math.pi**2 / (4 * N**2)
    worst = 0.0
    for N in (2, 4, 6):
        for kern in (DecayKernel.power(0), DecayKernel.power(0.8), DecayKernel.log_law(0.4)):
            T = 1.3
            lo, hi = operator_spread(build_dtheta_h(ChainParams(1, 1, 1, N, kern), "Delta"))
            via_oracle = T**2 * (hi - lo) ** 2
            worst = max(worst, abs(controlled("Delta", N, kern, T) - via_oracle) / via_oracle)
    ok = mu_exact and 0.99 <= ratio <= 1.01 and worst <= 1e-9
    return ok, f"I0(mu)=N^2T^2 exact: {mu_exact}; I0(J) pi^2/(4N^2T^2) at N=4096: {ratio:.6f}; delta vs oracle spread max rel {worst:.1e}"


def criterion_3():
    Ns = [2**m for m in range(8, 15)]
    T = 1.0
    pts = [(math.log(N), math.sqrt(controlled("Delta", N, DecayKernel.power(0), T)) / (N * T)) for N in Ns]
    c = fit_power(pts).exponent
    slope, intercept = np.polyfit([p[0] for p in pts], [p[1] for p in pts], 1)
    ok = abs(c - 1.0) <= 0.07
    return ok, f"log-log exponent of y vs ln N: {c:.4f} (target 1.00 +- 0.07); linear fit y = {slope:.5f} ln N + {intercept:.4f}"


def criterion_4():
    Ns = [2**m for m in range(8, 14)]
    exps = {a: fit_power([(N, controlled("Delta", N, DecayKernel.power(a))) for N in Ns]).exponent for a in (0.5, 1.5)}
    ok = all(abs(e - 2.0) <= 0.05 for e in exps.values())
    return ok, ", ".join(f"alpha={a}: e={e:.4f}" for a, e in exps.items())


def criterion_5():
    kern = DecayKernel.log_law(0.2)
    narrow = fit_polylog([(N, controlled("Delta", N, kern) / N**2) for N in range(50, 2001, 50)])
    wide_N = sorted({2 * int(round(x / 2)) for x in np.geomspace(50, 1e5, 60)})
    wide = fit_polylog([(N, controlled("Delta", N, kern) / N**2) for N in wide_N])
    c_n, c_w = narrow.parameters["c"], wide.parameters["c"]
    ok = 1.44 <= c_n <= 1.64 and abs(c_w - 1.6) <= 0.1
    p = narrow.parameters
    return ok, f"N 50..2000: A={p['A']:.3f} c={c_n:.4f} B={p['B']:.3f}; N 50..1e5: c={c_w:.4f} (1.6 within +-0.1: {abs(c_w - 1.6) <= 0.1})"


def criterion_6():
    Ns = [2**m for m in range(8, 13)]
    kern = DecayKernel.power(0)
    out = {}
    for theta in ("Delta", "J"):
        out[theta] = (
            fit_power([(N, free(theta, N, kern)) for N in Ns]).exponent,
            fit_power([(N, controlled(theta, N, kern)) for N in Ns]).exponent,
        )
    d_free, d_ctrl = out["Delta"]
    j_free, j_ctrl = out["J"]
    ok = abs(d_free - d_ctrl) <= 0.1 and abs(j_free - j_ctrl) <= 0.1 and abs(j_free - 2.0) <= 0.05
    return ok, f"Delta free {d_free:.4f} vs controlled {d_ctrl:.4f}; J free {j_free:.4f} vs controlled {j_ctrl:.4f}"


def criterion_7():
    cot_err = max(np.max(np.abs(structure_factors(N, DecayKernel.power(0)) - cot_half_reference(N))) for N in (4, 64, 1024))
    sine_err = 0.0
    for a in (0.25, 0.5, 0.75, 1.0):
        ref = math.pi / 2 if a == 1.0 else math.gamma(1 - a) * math.cos(math.pi * a / 2)
        sine_err = max(sine_err, abs(sine_power_quadrature(a) - ref))
    ok = cot_err <= 1e-12 and sine_err <= 1e-6
    return ok, f"cot identity max abs err {cot_err:.1e}; sine integral max err {sine_err:.1e} (alpha=1 vs pi/2 included)"


def criterion_8():
    rng = np.random.default_rng(8)
    poly_err = 0.0
    for degree in range(4):
        p = np.polynomial.Polynomial(rng.uniform(-2, 2, degree + 1))
        approx, _ = euler_maclaurin_sum(p, -3, 25, EmConfig(1), [p.deriv(q) for q in (1, 2, 3)])
        poly_err = max(poly_err, abs(approx - sum(p(n) for n in range(-3, 26))))
    rep = remainder_scaling_probe(DecayKernel.power(0), [256, 512, 1024, 2048])
    mean_scaled = np.mean([r.main / r.N for r in rep.rows])
    nlogn = rep.n_log_n_residual / mean_scaled <= 1e-3 and abs(rep.n_log_n_slope - 2 / math.pi) <= 0.02 * (2 / math.pi)
    ok = poly_err < 1e-10 and rep.remainder_exponent <= 1.05 and nlogn
    return ok, (
        f"polynomial max err {poly_err:.1e}; remainder exponent {rep.remainder_exponent:.4f}; "
        f"main/N = {rep.n_log_n_slope:.5f} ln N + {rep.n_log_n_intercept:.4f} (rel rms {rep.n_log_n_residual / mean_scaled:.1e})"
    )


def criterion_9():
    N = 100
    base = controlled("Delta", N, DecayKernel.power(0))
    small = controlled("Delta", N, DecayKernel.power(0.01)) / base
    large = controlled("Delta", N, DecayKernel.power(0.5)) / base
    s = finite_size_window(0.01, N).s_factor
    ok = abs(1 - small) <= 0.05 and abs(1 - large) > 0.30
    return ok, f"eps=0.01: ratio {small:.4f} (S={s:.4f}); eps=0.5: ratio {large:.4f}"


def criterion_10():
    worst_gs, worst_fo = 0.0, 0.0
    for a in (0.0, 0.5):
        rep = verify_extremal_states(ChainParams(1, 1, 1, 4, DecayKernel.power(a)))
        worst_gs = max(worst_gs, rep.gs_residual)
        worst_fo = max(worst_fo, abs(rep.fo_expectation - gamma(4, DecayKernel.power(a)) / 2))
    ok = worst_gs < 1e-8 and worst_fo <= 1e-8
    return ok, f"max ||dH|GS>|| {worst_gs:.1e}; max |<FO|dH|FO> - gamma/2| {worst_fo:.1e}"


CRITERIA = [
    (1, "oracle equivalence", criterion_1, 120),
    (2, "controlled-QFI closed forms", criterion_2, 30),
    (3, "super-Heisenberg scaling at alpha=0", criterion_3, 60),
    (4, "Heisenberg scaling restored", criterion_4, 60),
    (5, "log-law polylog fit", criterion_5, 120),
    (6, "resilience without control", criterion_6, 60),
    (7, "analytic identities", criterion_7, 30),
    (8, "Euler-Maclaurin suite", criterion_8, 60),
    (9, "finite-size window", criterion_9, 30),
    (10, "extremal states", criterion_10, 30),
]


def evaluate(number, name, fn, budget):
    start = time.perf_counter()
    ok, detail = fn()
    elapsed = time.perf_counter() - start
    in_time = elapsed <= budget
    status = "PASS" if ok and in_time else "FAIL"
    line = f"criterion {number}: {status} [{name}] {detail}; {elapsed:.1f}s (budget {budget}s)"
    return ok and in_time, line


@pytest.mark.parametrize("number,name,fn,budget", CRITERIA, ids=[f"criterion_{c[0]}" for c in CRITERIA])
def test_acceptance(number, name, fn, budget, acceptance_log):
    ok, line = evaluate(number, name, fn, budget)
    acceptance_log(line)
    assert ok, line


if __name__ == "__main__":
    for spec in CRITERIA:
        print(evaluate(*spec)[1], flush=True)
