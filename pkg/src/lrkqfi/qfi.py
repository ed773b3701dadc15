"""Quantum Fisher information of the LRK chain, with and without optimal control."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .chain import Channel, ChainParams, DecayKernel, make_grid, mode_arrays, structure_factors
from .errors import DomainError


@dataclass(frozen=True)
class ProbeSpec:
    theta: Channel
    T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "theta", Channel.parse(self.theta))
        T = float(self.T)
        if not math.isfinite(T) or T < 0:
            raise DomainError(f"probe time T must be finite and >= 0, got {self.T}")
        object.__setattr__(self, "T", T)


@dataclass(frozen=True)
class QfiResult:
    value: float
    controlled: bool
    params: ChainParams
    probe: ProbeSpec
    gamma: float | None = None


def gamma(N: int, kernel: DecayKernel) -> float:
    """Collective pairing amplitude ``sum_k |f(k)|`` over all N grid momenta."""
    return float(np.sum(np.abs(structure_factors(N, kernel))))


def qfi_uncontrolled(p: ChainParams, probe: ProbeSpec) -> QfiResult:
    """``I = (sum_k E_k)^2`` for free evolution under the chain Hamiltonian."""
    modes = mode_arrays(p, probe.theta, probe.T)
    # numpy sums contiguous float arrays pairwise, so the reduction order is fixed
    total = float(np.sum(modes.script_e))
    g = float(np.sum(np.abs(modes.f))) if probe.theta is Channel.DELTA else None
    return QfiResult(total * total, False, p, probe, g)


def qfi_optimal(p: ChainParams, probe: ProbeSpec) -> QfiResult:
    """Upper bound reached when control keeps the probe in eigenstates of dH/dtheta.

    The bound is ``T^2`` times the squared spread of ``dH/dtheta``: ``sum_k |cos k|``
    for J, ``N`` for mu and ``gamma / 2`` for delta. The J sum is exact at finite
    N; its continuum value ``2N / pi`` is only approached asymptotically.
    """
    T = probe.T
    g = None
    if probe.theta is Channel.J:
        spread = float(np.sum(np.abs(np.cos(make_grid(p.N).momenta))))
    elif probe.theta is Channel.MU:
        spread = float(p.N)
    else:
        g = gamma(p.N, p.kernel)
        spread = g / 2.0
    return QfiResult((spread * T) ** 2, True, p, probe, g)


def qfi(p: ChainParams, probe: ProbeSpec, controlled: bool) -> QfiResult:
    return qfi_optimal(p, probe) if controlled else qfi_uncontrolled(p, probe)
