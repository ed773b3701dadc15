"""Asymptotic tools: Euler-Maclaurin sums, the sine-power integral, scaling
predictors for the delta-channel QFI and the finite-size attenuation factor."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy import integrate, special

from .chain import DecayKernel, KernelKind, continuum_structure_factor, structure_factors
from .errors import DomainError, QuadratureError
from .fitting import fit_power

_GL_NODES = 32


@lru_cache(maxsize=None)
def _gauss_legendre(n):
    return np.polynomial.legendre.leggauss(n)


def _gl_panels(func, edges, n=_GL_NODES):
    """Integrate ``func`` over consecutive panels ``[edges[i], edges[i+1]]``; returns per-panel values."""
    return _gl_intervals(func, edges[:-1], edges[1:], n)


def _gl_intervals(func, lo, hi, n=_GL_NODES):
    x, w = _gauss_legendre(n)
    lo, hi = np.asarray(lo, float), np.asarray(hi, float)
    half, mid = 0.5 * (hi - lo), 0.5 * (hi + lo)
    pts = mid[:, None] + half[:, None] * x[None, :]
    vals = np.asarray(func(pts.ravel()), dtype=float).reshape(pts.shape)
    return (vals @ w) * half


def bernoulli_number(n):
    """``B_n`` with ``B_1 = -1/2``; even indices via ``zeta(2m)``, which is accurate to rounding."""
    if n == 0:
        return 1.0
    if n == 1:
        return -0.5
    if n % 2:
        return 0.0
    m = n // 2
    return (-1) ** (m + 1) * 2.0 * math.factorial(n) * float(special.zeta(n)) / (2.0 * math.pi) ** n


def bernoulli_polynomial(n, x):
    """``B_n(x)`` with the ``B_1 = -1/2`` convention."""
    x = np.asarray(x, dtype=float)
    return sum(math.comb(n, j) * bernoulli_number(j) * x ** (n - j) for j in range(n + 1))


@dataclass(frozen=True)
class EmConfig:
    """Euler-Maclaurin correction order ``M``."""

    order: int = 1

    def __post_init__(self):
        if int(self.order) != self.order or self.order < 0:
            raise DomainError(f"Euler-Maclaurin order must be an integer >= 0, got {self.order}")

    def bernoulli(self, n):
        return bernoulli_number(n)

    def periodic_bernoulli(self, x, n=None):
        """``B_n({x})``; defaults to ``n = 2M + 1``. Period one by construction."""
        n = 2 * self.order + 1 if n is None else n
        x = np.asarray(x, dtype=float)
        return bernoulli_polynomial(n, x - np.floor(x))

    def periodic_sup(self, n=None):
        n = 2 * self.order + 1 if n is None else n
        grid = np.linspace(0.0, 1.0, 4001)
        return float(np.max(np.abs(bernoulli_polynomial(n, grid))))


class EmResult(tuple):
    """``(approximation, remainder_estimate)`` with the remainder bound attached."""

    def __new__(cls, approximation, remainder_estimate, remainder_bound):
        obj = super().__new__(cls, (approximation, remainder_estimate))
        obj.remainder_bound = remainder_bound
        return obj

    @property
    def approximation(self):
        return self[0]

    @property
    def remainder_estimate(self):
        return self[1]


def _evaluate(fn, x, what):
    try:
        vals = np.asarray(fn(x), dtype=float)
    except (ArithmeticError, ValueError) as exc:
        raise DomainError(f"{what} not evaluable: {exc}") from exc
    vals = np.broadcast_to(vals, np.shape(x))
    if not np.all(np.isfinite(vals)):
        raise DomainError(f"{what} is not finite on the interval")
    return vals


def euler_maclaurin_sum(g, a: int, b: int, cfg: EmConfig = EmConfig(), derivatives=()) -> EmResult:
    """Approximate ``sum_{n=a}^{b} g(n)`` by its integral plus endpoint corrections.

    ``derivatives[q-1]`` is the q-th derivative of ``g``; orders up to ``2M + 1``
    are needed (the last one only for the remainder). The remainder
    ``int P_{2M+1}({x}) g^{(2M+1)} / (2M+1)!`` is returned as an absolute value,
    its bound ``sup|P| int|g^{(2M+1)}| / (2M+1)!`` as ``.remainder_bound``.
    """
    if int(a) != a or int(b) != b:
        raise DomainError("summation limits must be integers")
    a, b = int(a), int(b)
    if a > b:
        raise DomainError(f"need a <= b, got a={a}, b={b}")
    M = cfg.order
    top = 2 * M + 1
    if len(derivatives) < top:
        raise DomainError(f"order M={M} needs derivatives up to order {top}, got {len(derivatives)}")

    edges = np.arange(a, b + 1, dtype=float)
    ends = np.array([float(a), float(b)])
    g_ends = _evaluate(g, ends, "g")
    _evaluate(g, np.arange(a, b + 1, dtype=float), "g")
    integral = float(np.sum(_gl_panels(lambda x: _evaluate(g, x, "g"), edges))) if b > a else 0.0
    approx = integral + 0.5 * (g_ends[0] + g_ends[1])
    for m in range(1, M + 1):
        d = _evaluate(derivatives[2 * m - 2], ends, f"derivative of order {2 * m - 1}")
        approx += cfg.bernoulli(2 * m) / math.factorial(2 * m) * (d[1] - d[0])

    if b > a:
        high = derivatives[top - 1]
        signed = float(np.sum(_gl_panels(lambda x: cfg.periodic_bernoulli(x) * _evaluate(high, x, f"derivative of order {top}"), edges)))
        absolute = float(np.sum(_gl_panels(lambda x: np.abs(_evaluate(high, x, f"derivative of order {top}")), edges)))
    else:
        signed = absolute = 0.0
    scale = math.factorial(top)
    return EmResult(float(approx), abs(signed) / scale, cfg.periodic_sup() * absolute / scale)


# --- singular sine integral ---------------------------------------------------------------


def _sine_power_closed_form(alpha):
    # Gamma(1-a) cos(pi a / 2) written via reflection so that alpha = 1 gives pi/2 directly
    return math.pi / (2.0 * math.gamma(alpha) * math.sin(math.pi * alpha / 2.0))


def sine_power_quadrature(alpha: float, half_periods: int = 60, levels: int = 30) -> float:
    """``int_0^inf sin(s) s^-alpha ds`` by quadrature up to ``(n + 1/2) pi`` endpoints.

    The partial integrals at those endpoints alternate about the limit with a
    smoothly decaying amplitude; repeated averaging of neighbours
    (Euler/Richardson extrapolation) removes the oscillating tail.
    """
    if alpha < 1.0:
        head, _ = integrate.quad(np.sin, 0.0, math.pi / 2, weight="alg", wvar=(-alpha, 0.0), epsabs=1e-13, epsrel=1e-12)
    else:
        # sin(s)/s is regular at the origin
        head, _ = integrate.quad(lambda s: np.sinc(s / math.pi), 0.0, math.pi / 2, epsabs=1e-13, epsrel=1e-12)
    partial = [head]
    for n in range(1, half_periods + 1):
        piece, _ = integrate.quad(lambda s: math.sin(s) * s**-alpha, (n - 0.5) * math.pi, (n + 0.5) * math.pi, epsabs=1e-13, epsrel=1e-12)
        partial.append(partial[-1] + piece)
    seq = np.array(partial[-(levels + 1):])
    for _ in range(levels):
        seq = 0.5 * (seq[1:] + seq[:-1])
    return float(seq[-1])


def sine_power_integral(alpha: float, tol: float = 1e-6) -> float:
    """``Gamma(1 - alpha) cos(pi alpha / 2)`` for ``alpha`` in ``(0, 1]``, cross-checked by quadrature."""
    alpha = float(alpha)
    if not 1e-3 < alpha <= 1.0:
        raise DomainError(f"alpha must lie in (1e-3, 1], got {alpha}")
    closed = _sine_power_closed_form(alpha)
    numeric = sine_power_quadrature(alpha)
    if abs(closed - numeric) > tol:
        raise QuadratureError(f"quadrature {numeric!r} disagrees with closed form {closed!r} at alpha={alpha}")
    return closed


# --- delta-channel scaling surrogate -----------------------------------------------------


def kernel_log_integral(kernel: DecayKernel, N: float) -> float:
    """``int_1^N kappa(x) / x dx``; closed forms for power/log kernels, exact piecewise-linear otherwise."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    a = kernel.alpha
    L = math.log(N)
    # both closed forms are x S(a x) with S the attenuation factor below
    if kernel.kind is KernelKind.POWER:
        return L * attenuation(a * L)
    if kernel.kind is KernelKind.LOG:
        s = math.log1p(L)  # ln(1 + ln N)
        return s * attenuation((a - 1.0) * s)
    top = int(math.floor(N))
    if top > kernel.max_separation:
        raise DomainError(f"kernel table too short for N={N}")
    x = np.arange(1, top + 1, dtype=float)
    y = kernel.values(np.arange(1, top + 1))
    if N > top:
        if top + 1 > kernel.max_separation:
            raise DomainError(f"kernel table too short for N={N}")
        nxt = kernel.values(np.array([top + 1]))[0]
        x = np.append(x, N)
        y = np.append(y, y[-1] + (nxt - y[-1]) * (N - top))
    if x.size < 2:
        return 0.0
    slope = np.diff(y) / np.diff(x)
    offset = y[:-1] - slope * x[:-1]
    return float(np.sum(offset * np.log(x[1:] / x[:-1]) + slope * np.diff(x)))


def predict_delta_scaling(kernel: DecayKernel, N: float) -> float:
    """Scaling surrogate ``N^2 [int_1^N kappa(x)/x dx]^2`` for the controlled delta-channel QFI."""
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    return float(N) ** 2 * kernel_log_integral(kernel, N) ** 2


# --- finite-size window -----------------------------------------------------------------


class PerturbedFamily(str, enum.Enum):
    POWER = "power"  # kappa = x^-eps
    LOG = "log"  # kappa = (1 + ln x)^-(1 + eps)


def attenuation(a):
    """``S(a) = (1 - exp(-a)) / a`` with ``S(0) = 1``."""
    a = float(a)
    if abs(a) < 1e-8:
        return 1.0 - a / 2.0 + a * a / 6.0
    return -math.expm1(-a) / a


def attenuation_series(a, terms=20):
    return sum((-a) ** n / math.factorial(n + 1) for n in range(terms))


@dataclass(frozen=True)
class FiniteSizeWindow:
    epsilon: float
    N: int
    family: PerturbedFamily
    argument: float
    s_factor: float
    super_hs_effective: bool


def finite_size_window(epsilon: float, N: int, family=PerturbedFamily.POWER, threshold: float = 0.95) -> FiniteSizeWindow:
    """Attenuation of the logarithmic enhancement for a slightly perturbed kernel.

    Power family: ``S(eps ln N)``. Log family ``(1 + ln x)^-(1+eps)``: the same
    substitution gives ``S(eps ln(1 + ln N))``, which is ``S(eps ln ln N)`` to
    leading order and stays positive for every ``N >= 2``.
    """
    family = PerturbedFamily(family)
    if not epsilon > 0:
        raise DomainError(f"epsilon must be > 0, got {epsilon}")
    if N < 2:
        raise DomainError(f"N must be >= 2, got {N}")
    log_n = math.log(N)
    arg = epsilon * (log_n if family is PerturbedFamily.POWER else math.log1p(log_n))
    s = attenuation(arg)
    return FiniteSizeWindow(float(epsilon), int(N), family, arg, s, s >= threshold)


# --- Euler-Maclaurin remainder of gamma(N) -------------------------------------------------


def _bisect_roots(func, lo, hi, iterations=60):
    flo = func(lo)
    for _ in range(iterations):
        mid = 0.5 * (lo + hi)
        fm = func(mid)
        left = np.sign(fm) == np.sign(flo)
        lo = np.where(left, mid, lo)
        flo = np.where(left, fm, flo)
        hi = np.where(left, hi, mid)
    return 0.5 * (lo + hi)


def main_integral(N: int, kernel: DecayKernel, rtol: float = 1e-8, max_depth: int = 40) -> float:
    """``N/(2 pi) int_{pi/N}^{2 pi - pi/N} |f_N(k)| dk`` for the continuum structure factor.

    ``f_N`` is odd about ``pi``, so the integral is twice the one over
    ``[pi/N, pi]``. Panels are split at sign changes of ``f_N`` (so ``|f_N|`` is
    smooth on each), graded geometrically towards ``k = pi/N`` and bisected
    until two Gauss-Legendre orders agree. The absolute tolerance is ``rtol``
    times the integral's magnitude, shared among panels by width.
    """
    N = int(N)

    def fk(k):
        return continuum_structure_factor(k, N, kernel)

    def integrand(k):
        return np.abs(fk(k))

    lo, hi = math.pi / N, math.pi
    base = np.linspace(lo, hi, 8 * N + 1)
    vals = fk(base)
    change = np.flatnonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)
    roots = _bisect_roots(fk, base[change], base[change + 1]) if change.size else np.empty(0)
    coarse = np.linspace(lo, hi, N + 1)
    graded = lo + (coarse[1] - lo) * np.geomspace(1e-6, 1.0, 12)
    edges = np.unique(np.concatenate([coarse, graded, roots]))
    left, right = edges[:-1], edges[1:]

    total = 0.0
    atol = None
    for _ in range(max_depth):
        fine = _gl_intervals(integrand, left, right, 2 * _GL_NODES)
        rough = _gl_intervals(integrand, left, right, _GL_NODES)
        if atol is None:
            atol = rtol * max(float(np.sum(fine)), 1e-300)
        bad = np.abs(fine - rough) > atol * (right - left) / (hi - lo)
        total += float(np.sum(fine[~bad]))
        if not np.any(bad):
            return N / math.pi * total
        mid = 0.5 * (left[bad] + right[bad])
        left, right = np.concatenate([left[bad], mid]), np.concatenate([mid, right[bad]])
    raise QuadratureError(
        f"main integral for N={N} ({kernel.describe()}, alpha={kernel.alpha}) did not converge: "
        f"{left.size} panels still above tolerance after {max_depth} bisections, "
        f"smallest width {float(np.min(right - left)):.3e}"
    )


@dataclass
class RemainderRow:
    N: int
    gamma: float
    main: float
    remainder: float


@dataclass
class RemainderReport:
    kernel: DecayKernel
    rows: list
    remainder_exponent: float
    main_exponent: float
    n_log_n_slope: float
    n_log_n_intercept: float
    n_log_n_residual: float
    passed: bool
    notes: list = field(default_factory=list)


def remainder_scaling_probe(kernel: DecayKernel, N_list, exponent_tol: float = 0.05) -> RemainderReport:
    """Compare ``gamma(N)`` with its main Euler-Maclaurin integral over a range of N.

    Reports the growth exponent of ``|gamma - main|`` and of the main term, and a
    linear fit of ``main / N`` against ``ln N`` (slope ``a`` means ``main ~ a N ln N``).
    PASS when the remainder exponent is at most ``1 + exponent_tol`` and strictly
    below the main-term exponent, or when the remainder stays bounded.
    """
    Ns = [int(n) for n in N_list]
    if len(Ns) < 3:
        raise DomainError("remainder_scaling_probe needs at least 3 sizes")
    if any(b <= a for a, b in zip(Ns, Ns[1:])):
        raise DomainError("N_list must be strictly increasing")
    rows = []
    for N in Ns:
        g = float(np.sum(np.abs(structure_factors(N, kernel))))
        m = main_integral(N, kernel)
        rows.append(RemainderRow(N, g, m, g - m))
    notes = []
    rem = np.array([abs(r.remainder) for r in rows])
    main = np.array([r.main for r in rows])
    if np.min(rem) == 0.0:
        rem_exp = float("-inf")
        notes.append("remainder vanishes at some N")
    else:
        rem_exp = fit_power(list(zip(Ns, rem))).exponent
    if np.max(rem) < 2.0 * np.min(rem) or np.max(rem) <= 1e-9 * np.max(main):
        notes.append("remainder bounded over the sweep")
    main_exp = fit_power(list(zip(Ns, main))).exponent
    logs = np.log(Ns)
    slope, intercept = np.polyfit(logs, main / np.array(Ns), 1)
    resid = main / np.array(Ns) - (slope * logs + intercept)
    nln_rms = float(np.sqrt(np.mean(resid**2)))
    passed = rem_exp <= 1.0 + exponent_tol and rem_exp < main_exp
    return RemainderReport(kernel, rows, float(rem_exp), float(main_exp), float(slope), float(intercept), nln_rms, bool(passed), notes)
