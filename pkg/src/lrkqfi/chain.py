"""Long-range Kitaev chain: decay kernels, momentum grid and per-mode quantities.

The chain is diagonal in the antiperiodic momenta ``k_n = (2n+1) pi / N``.
Every quantity here is a closed-form function of a single mode; the
vectorised ``*_arrays`` helpers evaluate the whole grid at once and are what
the QFI engine uses.
"""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, SingularModeError

log = logging.getLogger(__name__)

# above this size the grid structure factor is evaluated by FFT
_DIRECT_SUM_MAX_N = 1024
_GRID_MATCH_TOL = 1e-9


class KernelKind(str, enum.Enum):
    POWER = "power"
    LOG = "log"
    TABLE = "table"


class Channel(str, enum.Enum):
    """Parameter being estimated."""

    J = "J"
    MU = "Mu"
    DELTA = "Delta"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower()
        for member in cls:
            if member.value.lower() == key:
                return member
        raise DomainError(f"unknown channel {value!r}; expected one of J, Mu, Delta")


@dataclass(frozen=True)
class DecayKernel:
    """Decay law of the pairing amplitude with site separation ``l``.

    ``kind`` selects ``l**-alpha`` (power), ``(1 + ln l)**-alpha`` (log) or an
    explicit table ``table[l-1]``. Tables are rescaled so that the first entry
    is one. ``regularity_order`` is the integer Q of the regularity conditions.
    """

    kind: KernelKind
    alpha: float = 0.0
    regularity_order: int = 1
    table: tuple | None = field(default=None, repr=False)

    def __post_init__(self):
        kind = KernelKind(self.kind)
        object.__setattr__(self, "kind", kind)
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise DomainError(f"alpha must be finite and >= 0, got {self.alpha}")
        if int(self.regularity_order) != self.regularity_order or self.regularity_order < 0:
            raise DomainError(f"regularity_order must be a non-negative integer, got {self.regularity_order}")
        object.__setattr__(self, "regularity_order", int(self.regularity_order))
        if kind is KernelKind.TABLE:
            if self.table is None or len(self.table) == 0:
                raise DomainError("a table kernel needs at least one entry")
            values = np.asarray(self.table, dtype=float)
            if not np.all(np.isfinite(values)):
                raise DomainError("table entries must be finite")
            if values[0] == 0:
                raise DomainError("table entry for l=1 must be non-zero")
            if values[0] != 1.0:
                log.info("rescaling kernel table by 1/%r so that kappa_1 = 1", values[0])
                values = values / values[0]
            object.__setattr__(self, "table", tuple(float(v) for v in values))
        elif self.table is not None:
            raise DomainError("only table kernels carry a table")

    @classmethod
    def power(cls, alpha):
        return cls(KernelKind.POWER, float(alpha), 1)

    @classmethod
    def log_law(cls, alpha):
        return cls(KernelKind.LOG, float(alpha), 1)

    @classmethod
    def custom(cls, table, regularity_order, alpha=0.0):
        return cls(KernelKind.TABLE, float(alpha), regularity_order, tuple(table))

    @property
    def max_separation(self):
        """Largest ``l`` the kernel can be evaluated at (``inf`` for closed forms)."""
        if self.kind is KernelKind.TABLE:
            return len(self.table)
        return math.inf

    def values(self, l):
        """Vectorised ``kappa_l`` for integer separations ``l >= 1``."""
        l = np.asarray(l)
        if l.size and (np.any(l < 1) or np.any(l != np.floor(l))):
            raise DomainError("kernel separation must be an integer >= 1")
        if self.kind is KernelKind.POWER:
            return np.power(l.astype(float), -self.alpha)
        if self.kind is KernelKind.LOG:
            return np.power(1.0 + np.log(l.astype(float)), -self.alpha)
        if l.size and np.max(l) > len(self.table):
            raise DomainError(f"separation {int(np.max(l))} overruns kernel table of length {len(self.table)}")
        return np.asarray(self.table)[l.astype(int) - 1]

    def describe(self):
        if self.kind is KernelKind.TABLE:
            return "table"
        return self.kind.value


def kernel_value(kernel: DecayKernel, l: int) -> float:
    """Return ``kappa_l`` for a single separation."""
    if int(l) != l or l < 1:
        raise DomainError(f"separation must be an integer >= 1, got {l}")
    return float(kernel.values(np.array([int(l)]))[0])


def _check_size(N):
    if int(N) != N or N < 2 or N % 2:
        raise DomainError(f"N must be an even integer >= 2, got {N}")
    return int(N)


@dataclass(frozen=True)
class ChainParams:
    J: float
    mu: float
    delta: float
    N: int
    kernel: DecayKernel = field(default_factory=lambda: DecayKernel.power(0.0))

    def __post_init__(self):
        object.__setattr__(self, "N", _check_size(self.N))
        for name in ("J", "mu", "delta"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise DomainError(f"{name} must be finite")
            object.__setattr__(self, name, value)
        if self.kernel.max_separation < self.N // 2:
            raise DomainError(f"kernel table too short for N={self.N}: need {self.N // 2} entries")

    def replace(self, **changes):
        data = dict(J=self.J, mu=self.mu, delta=self.delta, N=self.N, kernel=self.kernel)
        data.update(changes)
        return ChainParams(**data)


@dataclass(frozen=True)
class MomentumGrid:
    N: int
    momenta: np.ndarray = field(repr=False)

    def __len__(self):
        return self.N

    def __iter__(self):
        return iter(self.momenta)

    def __getitem__(self, i):
        return self.momenta[i]

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.momenta, dtype=dtype)


def make_grid(N: int) -> MomentumGrid:
    """Antiperiodic momenta ``(2n+1) pi / N`` for ``n = 0..N-1``."""
    N = _check_size(N)
    momenta = (2 * np.arange(N) + 1) * np.pi / N
    momenta.setflags(write=False)
    return MomentumGrid(N, momenta)


def grid_index(k: float, N: int) -> int:
    """Index ``n`` with ``k == (2n+1) pi / N``; raises if ``k`` is off the grid."""
    N = _check_size(N)
    x = (k * N / math.pi - 1.0) / 2.0
    n = round(x)
    if not 0 <= n < N or abs(x - n) > _GRID_MATCH_TOL * max(1.0, N):
        raise DomainError(f"k={k!r} is not an antiperiodic grid momentum for N={N}")
    return int(n)


def symmetric_couplings(N: int, kernel: DecayKernel) -> np.ndarray:
    """``kappa_{min(l, N-l)}`` for ``l = 1..N-1`` (translation-invariant pairing)."""
    N = _check_size(N)
    l = np.arange(1, N)
    return kernel.values(np.minimum(l, N - l))


def _structure_factor_direct(n, N, couplings):
    # sin(pi m / N) with m reduced modulo 2N keeps the phase exact for large l
    n = np.atleast_1d(np.asarray(n, dtype=np.int64))
    l = np.arange(1, N, dtype=np.int64)
    phase = np.mod(np.outer(2 * n + 1, l), 2 * N)
    return np.sin(np.pi * phase / N) @ couplings


def _structure_factor_fft(N, couplings):
    # f_n = Im sum_l c_l exp(2 pi i n l / N) with c_l = kappa_l exp(i pi l / N)
    l = np.arange(N)
    c = np.zeros(N, dtype=complex)
    c[1:] = couplings * np.exp(1j * np.pi * l[1:] / N)
    return np.imag(np.fft.ifft(c) * N)


def structure_factor(k: float, N: int, kernel: DecayKernel) -> float:
    """``f(k) = sum_{l=1}^{N-1} kappa_{min(l,N-l)} sin(k l)`` at a grid momentum."""
    n = grid_index(k, N)
    return float(_structure_factor_direct(n, N, symmetric_couplings(N, kernel))[0])


def structure_factors(N: int, kernel: DecayKernel) -> np.ndarray:
    """Structure factor on every grid momentum, in grid order."""
    N = _check_size(N)
    couplings = symmetric_couplings(N, kernel)
    if N <= _DIRECT_SUM_MAX_N:
        return _structure_factor_direct(np.arange(N), N, couplings)
    return _structure_factor_fft(N, couplings)


def continuum_structure_factor(k, N: int, kernel: DecayKernel) -> np.ndarray:
    """Off-grid partial sum ``2 sum_{l=1}^{N/2-1} kappa_l sin(k l)``.

    This is the smooth interpolant used for the main integral of the
    Euler-Maclaurin comparison; it drops the midpoint ``l = N/2`` term, which
    only contributes ``O(kappa_{N/2})`` per mode.
    """
    N = _check_size(N)
    k = np.asarray(k, dtype=float)
    l = np.arange(1, N // 2)
    if l.size == 0:
        return np.zeros_like(k)
    kappa = kernel.values(l)
    return 2.0 * (np.sin(np.multiply.outer(k, l)) @ kappa)


def dispersion(k: float, p: ChainParams) -> float:
    """Single-particle gap ``sqrt((delta f / 2)^2 + (J cos k + mu)^2)``."""
    f = structure_factor(k, p.N, p.kernel)
    return math.hypot(p.delta * f / 2.0, p.J * math.cos(k) + p.mu)


@dataclass(frozen=True)
class ModeQuantities:
    k: float
    f: float
    eps: float
    deps: float
    xi: float
    script_e: float


@dataclass(frozen=True)
class ModeArrays:
    """Grid-wide version of :class:`ModeQuantities`; every field has length N."""

    k: np.ndarray
    f: np.ndarray
    eps: np.ndarray
    deps: np.ndarray
    xi: np.ndarray
    script_e: np.ndarray


def channel_derivatives(k, f, eps, p: ChainParams, theta: Channel):
    """``(d eps / d theta, xi)`` for arrays of modes.

    Modes with ``eps == 0`` take the removable limit: the gap vanishes only when
    ``J cos k + mu = 0`` and ``delta f = 0``, where the mode Hamiltonian is zero
    and the generator reduces to ``T`` times the bare derivative block.
    """
    theta = Channel.parse(theta)
    k = np.asarray(k, dtype=float)
    f = np.asarray(f, dtype=float)
    eps = np.asarray(eps, dtype=float)
    cos_k = np.cos(k)
    h = p.J * cos_k + p.mu
    zero = eps == 0.0
    if np.any(zero & ((h != 0.0) | (p.delta * f != 0.0))):
        bad = float(k[zero & ((h != 0.0) | (p.delta * f != 0.0))][0])
        raise SingularModeError(f"vanishing gap with non-zero numerators at k={bad!r}", k=bad)
    safe = np.where(zero, 1.0, eps)
    # divide by eps twice (eps**2 underflows); overflow is caught by the finiteness check
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        if theta is Channel.J:
            deps = cos_k * h / safe
            xi = p.delta * f * cos_k / safe / (2.0 * safe)
            limit = np.abs(cos_k)
        elif theta is Channel.MU:
            deps = h / safe
            xi = p.delta * f / safe / (2.0 * safe)
            limit = np.ones_like(k)
        else:
            deps = p.delta * f**2 / (4.0 * safe)
            xi = -h * f / safe / (2.0 * safe)
            limit = np.abs(f) / 2.0
    deps = np.where(zero, limit, deps)
    xi = np.where(zero, 0.0, xi)
    if not (np.all(np.isfinite(deps)) and np.all(np.isfinite(xi))):
        bad = float(k[~(np.isfinite(deps) & np.isfinite(xi))][0])
        raise SingularModeError(f"non-finite mode derivative at k={bad!r}", k=bad)
    return deps, xi


def generator_spectrum(eps, deps, xi, T):
    """Per-mode generator eigenvalue ``sqrt(T^2 deps^2 + xi^2 sin^2(eps T))``.

    Algebraically the same as ``T^2 deps^2 + xi^2 [sin^2(2 eps T) + (1 - cos 2 eps T)^2] / 4``,
    written with ``sin^2`` so that small gaps do not cancel catastrophically.
    """
    if T < 0:
        raise DomainError(f"probe time must be >= 0, got {T}")
    return np.hypot(T * np.asarray(deps), np.asarray(xi) * np.sin(np.asarray(eps) * T))


def mode_arrays(p: ChainParams, theta: Channel, T: float) -> ModeArrays:
    k = make_grid(p.N).momenta
    f = structure_factors(p.N, p.kernel)
    eps = np.hypot(p.delta * f / 2.0, p.J * np.cos(k) + p.mu)
    deps, xi = channel_derivatives(k, f, eps, p, theta)
    return ModeArrays(k, f, eps, deps, xi, generator_spectrum(eps, deps, xi, T))


def mode_quantities(k: float, p: ChainParams, theta: Channel, T: float) -> ModeQuantities:
    n = grid_index(k, p.N)
    k = float(make_grid(p.N).momenta[n])
    f = structure_factor(k, p.N, p.kernel)
    eps = math.hypot(p.delta * f / 2.0, p.J * math.cos(k) + p.mu)
    deps, xi = channel_derivatives(np.array([k]), np.array([f]), np.array([eps]), p, theta)
    script_e = generator_spectrum(eps, deps, xi, T)
    return ModeQuantities(k, f, eps, float(deps[0]), float(xi[0]), float(script_e[0]))


@dataclass
class ConditionResult:
    passed: bool
    detail: str
    witness_l: int | None = None


@dataclass
class KernelReport:
    kernel: DecayKernel
    N: int
    boundedness: ConditionResult
    integrability: ConditionResult

    @property
    def passed(self):
        return self.boundedness.passed and self.integrability.passed

    def as_dict(self):
        def cond(c):
            return {"passed": c.passed, "detail": c.detail, "witness_l": c.witness_l}

        return {
            "kernel": self.kernel.describe(),
            "alpha": self.kernel.alpha,
            "Q": self.kernel.regularity_order,
            "N": self.N,
            "passed": self.passed,
            "boundedness": cond(self.boundedness),
            "integrability": cond(self.integrability),
        }


def validate_kernel(kernel: DecayKernel, N: int, growth_tol: float = 1e-9, tail_ratio: float = 0.9) -> KernelReport:
    """Numerical check of the two regularity conditions on ``l = 1..N``.

    (i) every finite difference of order ``0..2Q`` must not keep growing: its
    supremum over ``[1, N]`` may not exceed the supremum over ``[1, N/2]``.
    (ii) partial sums of ``|Delta^{2Q+1} kappa|`` must look Cauchy: the increment
    over ``(N/2, N]`` must be below ``tail_ratio`` times the one over ``(N/4, N/2]``
    (or negligible outright).
    """
    N = int(N)
    if N < 8:
        raise DomainError("validate_kernel needs N >= 8")
    Q = kernel.regularity_order
    top = int(min(N, kernel.max_separation))
    kappa = kernel.values(np.arange(1, top + 1))

    bounded = ConditionResult(True, f"differences of order 0..{2 * Q} bounded on [1, {top}]")
    for q in range(2 * Q + 1):
        d = np.abs(np.diff(kappa, n=q)) if q else np.abs(kappa)
        if d.size < 4:
            break
        half = d[: max(1, d.size // 2)]
        sup_full, sup_half = float(d.max()), float(half.max())
        if sup_full > sup_half * (1 + growth_tol) + growth_tol:
            witness = int(np.argmax(d)) + 1
            bounded = ConditionResult(
                False, f"order-{q} difference grows: sup {sup_full:.6g} on [1,{top}] vs {sup_half:.6g} on first half", witness
            )
            break

    order = 2 * Q + 1
    d = np.abs(np.diff(kappa, n=order))
    partial = np.concatenate([[0.0], np.cumsum(d)])
    m = partial.size - 1
    integrable = ConditionResult(True, f"partial sums of |order-{order} difference| converge")
    if m >= 4:
        tail = partial[m] - partial[m // 2]
        previous = partial[m // 2] - partial[m // 4]
        total = partial[m]
        negligible = tail <= 1e-12 * max(total, 1e-300) or tail == 0.0
        if not negligible and tail > tail_ratio * previous:
            integrable = ConditionResult(
                False,
                f"partial sums not Cauchy: tail increment {tail:.6g} vs previous {previous:.6g}",
                m // 2 + 1,
            )
    return KernelReport(kernel, N, bounded, integrable)
