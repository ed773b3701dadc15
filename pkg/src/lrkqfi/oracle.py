"""Exact many-body oracle for small chains.

Builds the LRK Hamiltonian on the full ``2**N`` Fock space (or through the
Jordan-Wigner spin form), integrates the estimation generator exactly in the
eigenbasis of H and reads off the QFI from its extremal eigenvalues. Nothing
here uses the momentum-space formulas except the extremal-state checks, which
build momentum ladder operators by an explicit Fourier transform.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from functools import lru_cache, reduce

import numpy as np
import scipy.linalg
import scipy.sparse as sp

from .chain import Channel, ChainParams, DecayKernel, make_grid, structure_factors, symmetric_couplings
from .errors import DomainError, ResourceError

MAX_SITES = 14
_TAU_THRESHOLD = 1e-12

_C = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))  # annihilates the occupied state (index 1)
_F = sp.csr_matrix(np.diag([1.0, -1.0]))  # (-1)^n
_I2 = sp.identity(2, format="csr")
_SX = sp.csr_matrix(np.array([[0.0, 1.0], [1.0, 0.0]]))
_SY = sp.csr_matrix(np.array([[0.0, 1.0j], [-1.0j, 0.0]]))
_SZ = sp.csr_matrix(np.diag([-1.0, 1.0]))  # +1 on the occupied state


class Representation(str, enum.Enum):
    FERMION = "fermion"
    SPIN = "spin"


@dataclass(frozen=True)
class ManyBodyOperator:
    """Operator on the ``2**N`` occupation-number basis.

    Site ``j`` (1-based) is bit ``N - j`` of the basis index, i.e. site 1 is the
    leftmost tensor factor. Stored sparse; ``dense()`` materialises it.
    """

    matrix: sp.spmatrix = field(repr=False)
    N: int

    @property
    def dimension(self):
        return self.matrix.shape[0]

    def dense(self):
        return self.matrix.toarray()

    def hermiticity_error(self):
        diff = (self.matrix - self.matrix.conj().T).tocoo()
        return float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    def sector(self, parity):
        """Dense block on the even (``parity=0``) or odd (``parity=1``) fermion-number sector."""
        idx = parity_indices(self.N, parity)
        return self.matrix.tocsr()[idx][:, idx].toarray()

    def __add__(self, other):
        return ManyBodyOperator(self.matrix + other.matrix, self.N)

    def shifted(self, c):
        return ManyBodyOperator(self.matrix + c * sp.identity(self.dimension, format="csr"), self.N)


@dataclass
class GeneratorResult:
    matrix: np.ndarray = field(repr=False)
    lambda_max: float
    lambda_min: float
    qfi: float
    vec_max: np.ndarray = field(repr=False, default=None)
    vec_min: np.ndarray = field(repr=False, default=None)

    def optimal_state(self):
        """Equal superposition of the extremal eigenvectors."""
        return (self.vec_max + self.vec_min) / math.sqrt(2.0)


def _check_sites(N):
    if int(N) != N or N < 2 or N % 2:
        raise DomainError(f"N must be an even integer >= 2, got {N}")
    if N > MAX_SITES:
        raise ResourceError(f"N={N} exceeds the exact-oracle cap of {MAX_SITES} sites (dimension {2**MAX_SITES})")
    return int(N)


@lru_cache(maxsize=None)
def parity_indices(N, parity):
    counts = np.array([bin(i).count("1") for i in range(2**N)])
    return np.flatnonzero(counts % 2 == parity)


def _kron_all(factors):
    return reduce(lambda a, b: sp.kron(a, b, format="csr"), factors)


@lru_cache(maxsize=16)
def annihilators(N):
    """Jordan-Wigner annihilation operators ``a_1..a_N`` (returned 0-based)."""
    N = _check_sites(N)
    ops = []
    for j in range(N):
        ops.append(_kron_all([_F] * j + [_C] + [_I2] * (N - j - 1)))
    return tuple(ops)


def _site_op(N, ops):
    """Tensor product with ``ops[site]`` (0-based) placed at the given sites."""
    return _kron_all([ops.get(s, _I2) for s in range(N)])


def _pairing_couplings(N, kernel, wrap):
    if wrap:
        return symmetric_couplings(N, kernel)
    if kernel.max_separation < N - 1:
        raise DomainError(f"unwrapped pairing needs kernel entries up to l={N - 1}")
    return kernel.values(np.arange(1, N))


def _fermion_blocks(N, kernel, wrap):
    """The three operators multiplying J, mu and delta in the Hamiltonian."""
    a = annihilators(N)
    ad = [op.T.tocsr() for op in a]
    dim = 2**N
    hop = sp.csr_matrix((dim, dim))
    for j in range(N):
        nxt, sign = (j + 1, 1.0) if j + 1 < N else (0, -1.0)  # a_{N+1} = -a_1
        hop = hop + sign * (ad[j] @ a[nxt] + ad[nxt] @ a[j])
    h_J = -0.5 * hop

    number = reduce(lambda x, y: x + y, [ad[j] @ a[j] for j in range(N)])
    h_mu = -(number - 0.5 * N * sp.identity(dim, format="csr"))

    kappa = _pairing_couplings(N, kernel, wrap)
    pair = sp.csr_matrix((dim, dim))
    if wrap:
        # (1/2) sum_j sum_l kappa_l a_j a_{j+l}, antiperiodic: a_{j+N} = -a_j
        for j in range(N):
            for l in range(1, N):
                m, sign = j + l, 1.0
                if m >= N:
                    m, sign = m - N, -1.0
                pair = pair + (0.5 * sign * kappa[l - 1]) * (a[j] @ a[m])
    else:
        for j in range(N - 1):
            for l in range(1, N - j):
                pair = pair + kappa[l - 1] * (a[j] @ a[j + l])
    h_delta = 0.5 * (pair + pair.T.conj())
    return h_J.tocsr(), h_mu.tocsr(), h_delta.tocsr()


def _spin_blocks(N, kernel):
    """Pauli-string form: periodic spin chain with wrapped Jordan-Wigner strings."""
    dim = 2**N
    xx_yy = sp.csr_matrix((dim, dim), dtype=complex)
    for j in range(N):
        m = (j + 1) % N
        xx_yy = xx_yy + _site_op(N, {j: _SX, m: _SX}) + _site_op(N, {j: _SY, m: _SY})
    h_J = -0.25 * xx_yy
    h_mu = -0.5 * reduce(lambda x, y: x + y, [_site_op(N, {j: _SZ}) for j in range(N)])

    kappa = symmetric_couplings(N, kernel)
    pair = sp.csr_matrix((dim, dim), dtype=complex)
    for j in range(N):
        for l in range(1, N):
            m = (j + l) % N
            string = {(j + s) % N: _SZ for s in range(1, l)}
            xx = _site_op(N, {**string, j: _SX, m: _SX})
            yy = _site_op(N, {**string, j: _SY, m: _SY})
            pair = pair + ((-1) ** l * kappa[l - 1]) * (xx - yy)
    h_delta = 0.125 * pair
    return h_J.tocsr(), h_mu.tocsr(), h_delta.tocsr()


def _blocks(p: ChainParams, representation, wrap):
    N = _check_sites(p.N)
    representation = Representation(representation)
    if representation is Representation.SPIN:
        if not wrap:
            raise DomainError("the spin representation is only defined for the wrapped pairing")
        return _spin_blocks(N, p.kernel)
    return _fermion_blocks(N, p.kernel, wrap)


def build_hamiltonian(p: ChainParams, representation=Representation.FERMION, wrap=True) -> ManyBodyOperator:
    """Full many-body LRK Hamiltonian.

    ``wrap=True`` uses the translation-invariant pairing with kernel
    ``kappa_{min(l, N-l)}`` and antiperiodic wrap, the form the momentum
    formulas diagonalise. ``wrap=False`` keeps the open-chain pairing sum with
    the raw kernel (hopping stays antiperiodic).
    """
    h_J, h_mu, h_delta = _blocks(p, representation, wrap)
    return ManyBodyOperator((p.J * h_J + p.mu * h_mu + p.delta * h_delta).tocsr(), p.N)


def normal_order_shift(p: ChainParams, theta) -> float:
    """Constant added to dH/dtheta so that its momentum-space vacuum sits at zero.

    J: 0 (already ``-sum_k cos k n_k``); mu: ``-N/2`` (gives ``-sum_k n_k``);
    delta: ``gamma / 4`` (gives ``(1/2) sum_k |f| b^dag b``).
    """
    theta = Channel.parse(theta)
    if theta is Channel.J:
        return 0.0
    if theta is Channel.MU:
        return -p.N / 2.0
    return float(np.sum(np.abs(structure_factors(p.N, p.kernel)))) / 4.0


def build_dtheta_h(p: ChainParams, theta, representation=Representation.FERMION, wrap=True, normal_ordered=False):
    """Term-wise derivative of the Hamiltonian with respect to J, mu or delta."""
    theta = Channel.parse(theta)
    h_J, h_mu, h_delta = _blocks(p, representation, wrap)
    block = {Channel.J: h_J, Channel.MU: h_mu, Channel.DELTA: h_delta}[theta]
    op = ManyBodyOperator(block.tocsr(), p.N)
    if normal_ordered:
        op = op.shifted(normal_order_shift(p, theta))
    return op


def _as_dense(op):
    if isinstance(op, ManyBodyOperator):
        return op.dense()
    if sp.issparse(op):
        return op.toarray()
    return np.asarray(op)


def evolution_kernel(omega, T):
    """``(exp(i omega T) - 1) / (i omega)``, equal to ``T`` at ``omega = 0``."""
    omega = np.asarray(omega, dtype=float)
    return T * np.exp(0.5j * omega * T) * np.sinc(omega * T / (2.0 * np.pi))


def exact_generator(H, dH, T: float) -> GeneratorResult:
    """Generator ``int_0^T U^dag(t) dH U(t) dt`` with ``U(t) = exp(-i H t)``.

    In the eigenbasis of H the integral is elementwise:
    ``G_mn = dH_mn tau(E_m - E_n)``. Gaps below ``1e-12 ||H||`` are treated as
    exact degeneracies (``tau = T``).
    """
    if T < 0:
        raise DomainError(f"probe time must be >= 0, got {T}")
    H = _as_dense(H)
    dH = _as_dense(dH)
    if H.shape != dH.shape or H.shape[0] != H.shape[1]:
        raise DomainError(f"shape mismatch: H {H.shape}, dH {dH.shape}")
    try:
        energies, vecs = scipy.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise ArithmeticError(f"eigendecomposition failed: {exc}") from exc
    scale = float(np.max(np.abs(energies))) if energies.size else 0.0
    omega = energies[:, None] - energies[None, :]
    omega[np.abs(omega) <= _TAU_THRESHOLD * scale] = 0.0
    dH_eig = vecs.conj().T @ dH @ vecs
    G_eig = dH_eig * evolution_kernel(omega, T)
    G_eig = 0.5 * (G_eig + G_eig.conj().T)
    lam, lam_vecs = scipy.linalg.eigh(G_eig)
    G = vecs @ G_eig @ vecs.conj().T
    vec_max = vecs @ lam_vecs[:, -1]
    vec_min = vecs @ lam_vecs[:, 0]
    lmax, lmin = float(lam[-1]), float(lam[0])
    return GeneratorResult(G, lmax, lmin, (lmax - lmin) ** 2, vec_max, vec_min)


def exact_qfi(p: ChainParams, probe, sector="even", wrap=True) -> GeneratorResult:
    """QFI from the exact generator, restricted to a fermion-parity sector.

    ``sector`` is ``"even"``, ``"odd"`` or ``"full"``.
    """
    theta = Channel.parse(probe.theta)
    H = build_hamiltonian(p, wrap=wrap)
    dH = build_dtheta_h(p, theta, wrap=wrap)
    if sector == "full":
        return exact_generator(H, dH, probe.T)
    parity = {"even": 0, "odd": 1}.get(sector)
    if parity is None:
        raise DomainError(f"unknown sector {sector!r}")
    return exact_generator(H.sector(parity), dH.sector(parity), probe.T)


def operator_spread(op: ManyBodyOperator, sector="full"):
    """``(min, max)`` eigenvalue of a many-body operator, optionally on one parity sector."""
    mat = op.dense() if sector == "full" else op.sector({"even": 0, "odd": 1}[sector])
    lam = scipy.linalg.eigvalsh(mat)
    return float(lam[0]), float(lam[-1])


# --- momentum-space ladder operators and extremal states -------------------------------


def momentum_annihilators(N):
    """``a(k_n) = N^{-1/2} sum_j exp(-i k_n j) a_j`` on the antiperiodic grid."""
    a = annihilators(N)
    k = make_grid(N).momenta
    sites = np.arange(1, N + 1)
    out = []
    for kn in k:
        phases = np.exp(-1j * kn * sites) / math.sqrt(N)
        out.append(reduce(lambda x, y: x + y, [phases[j] * a[j] for j in range(N)]).tocsr())
    return out


def _apply(ops, state):
    for op in reversed(ops):
        state = op @ state
    return state


@dataclass
class ExtremalReport:
    N: int
    gamma: float
    norm_gs: float
    norm_fo: float
    gs_residual: float  # || (dH_delta, normal ordered) |GS> ||
    fo_expectation: float  # <FO| dH_delta (normal ordered) |FO>
    fo_residual: float  # || (dH_delta - gamma/2) |FO> ||
    normal_order_error: float  # || dH_delta + gamma/4 - (1/2) sum |f| b^dag b ||_max
    delta_spread: tuple
    half_plus_residual: float
    half_minus_residual: float
    half_eigenvalue: float
    half_spread_error: float
    mu_vacuum_residual: float
    mu_full_residual: float
    mu_spread_error: float
    bogoliubov_norm_error: float
    bogoliubov_odd_error: float
    tol: float = 1e-8
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        residuals = [
            abs(self.norm_gs - 1.0),
            abs(self.norm_fo - 1.0),
            self.gs_residual,
            abs(self.fo_expectation - self.gamma / 2.0),
            self.fo_residual,
            self.normal_order_error,
            self.half_plus_residual,
            self.half_minus_residual,
            self.half_spread_error,
            self.mu_vacuum_residual,
            self.mu_full_residual,
            self.mu_spread_error,
            self.bogoliubov_norm_error,
            self.bogoliubov_odd_error,
        ]
        return all(r <= self.tol for r in residuals)


def bogoliubov_coefficients(N, kernel: DecayKernel):
    """``(u_k, v_k)`` diagonalising dH/d delta: ``u = 1/sqrt 2``, ``v = -+ i/sqrt 2`` by the sign of f."""
    f = structure_factors(N, kernel)
    u = np.full(N, 1.0 / math.sqrt(2.0), dtype=complex)
    v = np.where(f >= 0, -1j, 1j) / math.sqrt(2.0)
    return u, v


def verify_extremal_states(p: ChainParams, tol: float = 1e-8) -> ExtremalReport:
    """Check the closed-form extremal eigenstates of dH/dJ, dH/dmu and dH/d delta."""
    N = _check_sites(p.N)
    if N > 10:
        raise ResourceError("extremal-state verification is limited to N <= 10")
    dim = 2**N
    k = make_grid(N).momenta
    f = structure_factors(N, p.kernel)
    gam = float(np.sum(np.abs(f)))
    ak = momentum_annihilators(N)
    akd = [op.conj().T.tocsr() for op in ak]
    partner = [N - 1 - n for n in range(N)]  # index of -k = 2 pi - k
    pairs = range(N // 2)  # k in (0, pi)
    u, v = bogoliubov_coefficients(N, p.kernel)

    vac = np.zeros(dim, dtype=complex)
    vac[0] = 1.0
    eye = sp.identity(dim, format="csr", dtype=complex)

    gs = vac
    for n in pairs:
        gs = (u[n] * eye - v[n] * (akd[n] @ akd[partner[n]])) @ gs
    full = _apply(akd, vac)
    fo = full
    for n in pairs:
        fo = (np.conj(u[n]) * eye - np.conj(v[n]) * (ak[n] @ ak[partner[n]])) @ fo

    d_delta = build_dtheta_h(p, Channel.DELTA, normal_ordered=True).matrix
    b_ops = [(u[n] * ak[n] + v[n] * akd[partner[n]]).tocsr() for n in range(N)]
    bdb = reduce(lambda x, y: x + y, [0.5 * abs(f[n]) * (b_ops[n].conj().T @ b_ops[n]) for n in range(N)])
    diff = (d_delta - bdb).tocoo()
    normal_order_error = float(np.max(np.abs(diff.data))) if diff.nnz else 0.0

    gs_res = float(np.linalg.norm(d_delta @ gs))
    fo_exp = float(np.real(np.vdot(fo, d_delta @ fo)) / np.real(np.vdot(fo, fo)))
    fo_res = float(np.linalg.norm(d_delta @ fo - 0.5 * gam * fo))
    delta_spread = operator_spread(ManyBodyOperator(d_delta, N))

    d_J = build_dtheta_h(p, Channel.J).matrix
    cos_k = np.cos(k)
    half = 0.5 * float(np.sum(np.abs(cos_k)))
    half_plus = _apply([akd[n] for n in range(N) if cos_k[n] <= 0], vac)
    half_minus = _apply([akd[n] for n in range(N) if cos_k[n] > 0], vac)
    hp_res = float(np.linalg.norm(d_J @ half_plus - half * half_plus))
    hm_res = float(np.linalg.norm(d_J @ half_minus + half * half_minus))
    j_lo, j_hi = operator_spread(ManyBodyOperator(d_J, N))
    half_spread_error = max(abs(j_hi - half), abs(j_lo + half))

    d_mu = build_dtheta_h(p, Channel.MU).matrix
    mu_vac_res = float(np.linalg.norm(d_mu @ vac - 0.5 * N * vac))
    mu_full_res = float(np.linalg.norm(d_mu @ full + 0.5 * N * full))
    m_lo, m_hi = operator_spread(ManyBodyOperator(d_mu, N))
    mu_spread_error = max(abs(m_hi - 0.5 * N), abs(m_lo + 0.5 * N))

    norm_err = float(np.max(np.abs(np.abs(u) ** 2 + np.abs(v) ** 2 - 1.0)))
    odd_err = float(max(abs(v[n] + v[partner[n]]) for n in range(N) if f[n] != 0) if np.any(f != 0) else 0.0)

    return ExtremalReport(
        N=N,
        gamma=gam,
        norm_gs=float(np.linalg.norm(gs)),
        norm_fo=float(np.linalg.norm(fo)),
        gs_residual=gs_res,
        fo_expectation=fo_exp,
        fo_residual=fo_res,
        normal_order_error=normal_order_error,
        delta_spread=delta_spread,
        half_plus_residual=hp_res,
        half_minus_residual=hm_res,
        half_eigenvalue=half,
        half_spread_error=half_spread_error,
        mu_vacuum_residual=mu_vac_res,
        mu_full_residual=mu_full_res,
        mu_spread_error=mu_spread_error,
        bogoliubov_norm_error=norm_err,
        bogoliubov_odd_error=odd_err,
        tol=tol,
    )


# --- randomized equivalence trials ------------------------------------------------------


def random_kernel(rng, family):
    alpha = float(rng.uniform(0.0, 2.0))
    if family == "power":
        return DecayKernel.power(alpha)
    if family == "log":
        return DecayKernel.log_law(alpha)
    raise DomainError(f"unknown kernel family {family!r}")


def random_params(rng, N, family, min_gap=1e-6, max_tries=1000):
    """Draw ``J, mu, delta`` uniformly from [-2, 2] until every mode gap exceeds ``min_gap``."""
    for _ in range(max_tries):
        kernel = random_kernel(rng, family)
        J, mu, delta = (float(x) for x in rng.uniform(-2.0, 2.0, size=3))
        p = ChainParams(J, mu, delta, N, kernel)
        f = structure_factors(N, kernel)
        eps = np.hypot(delta * f / 2.0, J * np.cos(make_grid(N).momenta) + mu)
        if np.min(eps) > min_gap:
            return p
    raise RuntimeError("could not draw a gapped instance")


@dataclass
class TrialRecord:
    N: int
    family: str
    J: float
    mu: float
    delta: float
    alpha: float
    theta: str
    T: float
    momentum: float
    exact: float
    rel_err: float


def oracle_equivalence(seed, trials, N_list, T_list=(0.3, 1.0, 2.0), families=("power", "log"), channels=tuple(Channel)):
    """Compare momentum-space QFI with the exact oracle on random instances.

    ``trials`` random parameter sets are drawn per (N, kernel family, T); for
    each, all requested channels are compared. Returns the list of
    :class:`TrialRecord`.
    """
    from .qfi import ProbeSpec, qfi_uncontrolled

    for N in N_list:
        _check_sites(N)
    rng = np.random.default_rng(seed)
    records = []
    for N in N_list:
        for family in families:
            for T in T_list:
                for _ in range(trials):
                    p = random_params(rng, N, family)
                    H = build_hamiltonian(p).sector(0)
                    energies, vecs = scipy.linalg.eigh(H)
                    for theta in channels:
                        probe = ProbeSpec(theta, T)
                        dH = build_dtheta_h(p, theta).sector(0)
                        exact = _generator_from_eig(energies, vecs, dH, T)
                        mom = qfi_uncontrolled(p, probe).value
                        rel = abs(mom - exact) / exact if exact > 0 else abs(mom - exact)
                        records.append(
                            TrialRecord(N, family, p.J, p.mu, p.delta, p.kernel.alpha, Channel.parse(theta).value, T, mom, exact, rel)
                        )
    return records


def _generator_from_eig(energies, vecs, dH, T):
    scale = float(np.max(np.abs(energies)))
    omega = energies[:, None] - energies[None, :]
    omega[np.abs(omega) <= _TAU_THRESHOLD * scale] = 0.0
    G = (vecs.conj().T @ dH @ vecs) * evolution_kernel(omega, T)
    lam = scipy.linalg.eigvalsh(0.5 * (G + G.conj().T))
    return float((lam[-1] - lam[0]) ** 2)
