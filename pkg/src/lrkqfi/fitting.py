"""Scaling-exponent fits: straight lines in log-log space and ``A (ln N)^c + B``."""

from __future__ import annotations

import enum
import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, FitError

log = logging.getLogger(__name__)

POLYLOG_SEEDS = (0.5, 1.0, 1.5, 2.0)
MIN_POLYLOG_SPAN = 20.0


class FitModel(str, enum.Enum):
    POWER = "power"  # y = D N^e
    POLYLOG = "polylog"  # y = A (ln N)^c + B


@dataclass(frozen=True)
class ScalingFit:
    model: FitModel
    parameters: dict
    residual: float
    n_points: int
    converged: bool = True
    iterations: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def exponent(self):
        return self.parameters["e"] if self.model is FitModel.POWER else self.parameters["c"]

    def predict(self, N):
        N = np.asarray(N, dtype=float)
        if self.model is FitModel.POWER:
            return self.extra["prefactor"] * N ** self.parameters["e"]
        p = self.parameters
        return p["A"] * np.log(N) ** p["c"] + p["B"]


def _as_arrays(points, min_points):
    pts = list(points)
    if len(pts) < min_points:
        raise DomainError(f"need at least {min_points} points, got {len(pts)}")
    N = np.array([float(p[0]) for p in pts])
    y = np.array([float(p[1]) for p in pts])
    if not (np.all(np.isfinite(N)) and np.all(np.isfinite(y))):
        raise DomainError("fit data must be finite")
    if np.unique(N).size != N.size:
        raise DomainError("fit abscissae must be distinct")
    return N, y


def fit_power(points) -> ScalingFit:
    """Least-squares line through ``(ln N, ln y)``; the slope is the exponent.

    The residual is the RMS of the log-space residuals. Abscissae only need to
    be positive, so this also fits ``y`` against ``ln N``.
    """
    N, y = _as_arrays(points, 3)
    if np.any(N <= 0):
        raise DomainError("fit_power needs positive abscissae")
    if np.any(y <= 0):
        raise DomainError("fit_power needs positive y values")
    x, z = np.log(N), np.log(y)
    design = np.column_stack([x, np.ones_like(x)])
    (e, c), *_ = np.linalg.lstsq(design, z, rcond=None)
    rms = float(np.sqrt(np.mean((z - design @ np.array([e, c])) ** 2)))
    return ScalingFit(FitModel.POWER, {"e": float(e)}, rms, N.size, extra={"prefactor": float(math.exp(c))})


def _linear_ab(L, y, c):
    design = np.column_stack([L**c, np.ones_like(L)])
    (A, B), *_ = np.linalg.lstsq(design, y, rcond=None)
    return float(A), float(B)


def _refine(L, y, start, max_iter=200, grad_tol=1e-10):
    """Levenberg-damped Gauss-Newton on ``(A, c, B)``; returns (params, rms, converged, iterations)."""
    p = np.array(start, dtype=float)
    lnL = np.log(L)

    def residuals(q):
        return y - (q[0] * L ** q[1] + q[2])

    r = residuals(p)
    cost = float(r @ r)
    lam = 1e-3
    for it in range(1, max_iter + 1):
        Lc = L ** p[1]
        J = np.column_stack([Lc, p[0] * Lc * lnL, np.ones_like(L)])
        g = J.T @ r
        if np.linalg.norm(g) < grad_tol:
            return p, math.sqrt(cost / y.size), True, it
        H = J.T @ J
        while True:
            try:
                step = np.linalg.solve(H + lam * np.diag(np.diag(H)), g)
            except np.linalg.LinAlgError:
                lam *= 10
                if lam > 1e12:
                    return p, math.sqrt(cost / y.size), False, it
                continue
            trial = p + step
            r_new = residuals(trial)
            new_cost = float(r_new @ r_new)
            if np.isfinite(new_cost) and new_cost <= cost:
                break
            lam *= 10
            if lam > 1e12:
                # no descent direction left at working precision
                small = np.linalg.norm(step) <= 1e-12 * (1 + np.linalg.norm(p))
                return p, math.sqrt(cost / y.size), bool(small), it
        stalled = np.linalg.norm(step) <= 1e-14 * (1 + np.linalg.norm(p))
        p, r, cost = trial, r_new, new_cost
        lam = max(lam / 10, 1e-12)
        if stalled:
            return p, math.sqrt(cost / y.size), True, it
    return p, math.sqrt(cost / y.size), False, max_iter


def fit_polylog(points) -> ScalingFit:
    """Fit ``y = A (ln N)^c + B``.

    Each seed ``c`` in ``POLYLOG_SEEDS`` gets its best linear ``(A, B)``; seeds are
    refined in order of their starting residual until one converges with
    ``A > 0`` and ``c > 0``. Deterministic for a given input order.
    """
    N, y = _as_arrays(points, 4)
    if np.any(N <= 1):
        raise DomainError("fit_polylog needs N > 1 so that ln N > 0")
    if N.max() / N.min() < MIN_POLYLOG_SPAN:
        log.warning("polylog fit over max(N)/min(N) = %.3g < %g is poorly identified", N.max() / N.min(), MIN_POLYLOG_SPAN)
    L = np.log(N)
    starts = []
    for c in POLYLOG_SEEDS:
        A, B = _linear_ab(L, y, c)
        r = y - (A * L**c + B)
        starts.append((float(r @ r), (A, c, B)))
    starts.sort(key=lambda s: s[0])

    best = None
    for _, start in starts:
        params, rms, converged, iters = _refine(L, y, start)
        A, c, B = (float(v) for v in params)
        if best is None or rms < best[1]:
            best = ((A, c, B), rms)
        if converged and A > 0 and c > 0 and math.isfinite(rms):
            return ScalingFit(FitModel.POLYLOG, {"A": A, "c": c, "B": B}, rms, N.size, True, iters)
    raise FitError(
        "polylog fit did not converge to A > 0, c > 0 from any seed",
        best_residual=best[1],
        best_parameters=dict(zip("AcB", best[0])),
    )
