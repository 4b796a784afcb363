"""Spectral gaps of reversible chains: dense eigensolves, closed forms for the
uniform and grover proposals, the two-level reduction, mixing-time bounds, and
time-averaged kernels.

The dense solve works on I - P (diagonal rebuilt from off-diagonal row sums)
so that eigenvalue accuracy scales with the gap itself rather than with 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetExceeded, EigensolverFailure, NotReversible
from .model import MarkedStateHamiltonian
from .proposal import DenseKernel, ProposalKernel, StructuredMarkedKernel
from .quantum import (
    DEFAULT_PROPAGATOR,
    GROVER,
    MixerSpec,
    PropagatorConfig,
    quantum_kernel,
)
from .chain import TransitionMatrix

_LN2 = math.log(2.0)


@dataclass(frozen=True)
class SpectralReport:
    delta: float
    lambda2_abs: float
    method: str
    mixing_lower: float
    mixing_upper: float
    epsilon: float


@dataclass(frozen=True)
class TwoLevelReduction:
    """Symmetrized 2x2 chain matrix on span{marked, uniform-unmarked}."""

    a: float  # marked diagonal entry
    b: float  # off-diagonal entry
    c: float  # unmarked diagonal entry
    delta: float


def mixing_time_bounds(delta: float, pi_min: float, epsilon: float,
                       *, log_pi_min: float | None = None):
    """Relaxation-time sandwich on the worst-start mixing time.

    ``log_pi_min`` may be passed instead of ``pi_min`` when the latter would
    underflow.
    """
    if not 0.0 < delta <= 1.0:
        raise ValueError(f"delta must lie in (0, 1], got {delta}")
    if not 0.0 < epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0, 1), got {epsilon}")
    if log_pi_min is None:
        if not 0.0 < pi_min <= 1.0:
            raise ValueError(f"pi_min must lie in (0, 1], got {pi_min}")
        log_pi_min = math.log(pi_min)
    lower = (1.0 / delta - 1.0) * math.log(1.0 / (2.0 * epsilon))
    upper = (1.0 / delta) * (math.log(1.0 / epsilon) - log_pi_min)
    return lower, upper


def spectral_gap_dense(p: TransitionMatrix, epsilon: float = 0.01,
                       reversibility_tol: float = 1e-9,
                       max_n: int = 12) -> SpectralReport:
    """Gap 1 - |lambda_2| of P by a symmetric eigensolve.

    P is conjugated with sqrt(pi(x)/pi(y)) computed from log weights; the
    resulting symmetric matrix is cospectral with P, and its asymmetry is the
    reversibility certificate.
    """
    if p.n_spins > max_n:
        raise BudgetExceeded(f"dense eigensolve limited to N <= {max_n}")
    off = p.p.copy()
    np.fill_diagonal(off, 0.0)
    diag = off.sum(axis=1)
    lw = p.stationary.log_weights
    sym = -off * np.exp(0.5 * (lw[:, None] - lw[None, :]))
    np.fill_diagonal(sym, diag)
    scale = max(float(np.max(np.abs(sym))), 1e-300)
    asym = float(np.max(np.abs(sym - sym.T))) / scale
    if asym > reversibility_tol:
        raise NotReversible(
            f"detailed-balance deviation {asym:.3e} exceeds {reversibility_tol:.1e}"
        )
    sym = 0.5 * (sym + sym.T)
    try:
        mu = np.linalg.eigvalsh(sym)      # eigenvalues of I - P, ascending
    except np.linalg.LinAlgError as exc:
        raise EigensolverFailure(str(exc)) from exc
    delta = float(min(mu[1], 2.0 - mu[-1]))
    delta = min(max(delta, 0.0), 1.0)
    lower, upper = mixing_time_bounds(
        max(delta, 1e-300), 1.0, epsilon,
        log_pi_min=p.stationary.log_pi_min,
    )
    return SpectralReport(delta=delta, lambda2_abs=1.0 - delta,
                          method="dense-eigensolve", mixing_lower=lower,
                          mixing_upper=upper, epsilon=epsilon)


def uniform_gap_closed_form(n_spins: int, alpha: float, beta: float) -> float:
    """Exact gap of the uniform-proposal MH chain on the marked-state model.

    Evaluated in log space; the radicand is a perfect square, so this is
    2^-N * (1 + e^{-N beta alpha} (2^N - 1)).
    """
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    if beta < 0:
        raise ValueError("beta must be nonnegative")
    u = _log_pow2m1(n_spins) - n_spins * beta * alpha
    return math.exp(np.logaddexp(0.0, u) - n_spins * _LN2)


def _log_pow2m1(n_spins: int) -> float:
    """log(2^N - 1), stable for any N."""
    return n_spins * _LN2 + math.log1p(-(2.0 ** -n_spins))


def two_level_frequency(n_spins: int, alpha: float, h: float) -> float:
    radicand = (alpha + h) ** 2 - alpha * h * 2.0 ** (2 - n_spins)
    return 0.5 * math.sqrt(max(radicand, 0.0))


def grover_gap_closed_form(n_spins: int, alpha: float, beta: float,
                           h: float, t: float) -> float:
    """Exact gap of the grover-mixed chain; the omega -> 0 limit is removable
    and handled through sinc."""
    omega = two_level_frequency(n_spins, alpha, h)
    # h*sin(N*omega*t)/omega = h*N*t*sinc(N*omega*t/pi)
    base = h * n_spins * t * np.sinc(n_spins * omega * t / math.pi) * 2.0 ** -n_spins
    u = _log_pow2m1(n_spins) - n_spins * beta * alpha
    factor = math.exp(np.logaddexp(0.0, u))
    return float(base * base * factor)


def two_level_reduction(n_spins: int, alpha: float, beta: float,
                        h: float, t: float) -> TwoLevelReduction:
    """Reduce the grover chain to its 2x2 invariant block and return its gap.

    The gap is evaluated as hypot(2b, a - c) with a - c factored so the
    cancellation-free identity q_marked * (1 + e^{-N beta alpha}(2^N - 1))
    is recovered exactly.
    """
    from .quantum import grover_closed_form

    q_m = grover_closed_form(n_spins, alpha, h, t).q_marked
    g = 2.0 ** n_spins - 1.0
    decay = math.exp(-n_spins * beta * alpha)
    a = 1.0 - g * q_m * decay
    c = 1.0 - q_m
    b = math.sqrt(g) * q_m * math.exp(-0.5 * n_spins * beta * alpha)
    a_minus_c = q_m * (1.0 - g * decay)
    delta = math.hypot(2.0 * b, a_minus_c)
    return TwoLevelReduction(a=a, b=b, c=c, delta=delta)


# ---------------------------------------------------------------------------
# time-averaged kernels

@dataclass(frozen=True)
class AveragingScheme:
    """(h, t) randomization used when parameters are redrawn each MCMC step."""

    t_range: tuple
    h_fixed: float | None = None
    h_range: tuple | None = None
    sample_count: int = 64
    mode: str = "grid"   # grid | monte_carlo
    seed: int = 0

    def __post_init__(self):
        if self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.mode not in ("grid", "monte_carlo"):
            raise ValueError(f"unknown averaging mode {self.mode!r}")
        if (self.h_fixed is None) == (self.h_range is None):
            raise ValueError("exactly one of h_fixed/h_range must be set")

    def samples(self) -> np.ndarray:
        """Deterministic (h, t) pairs, shape (count, 2)."""
        t0, t1 = self.t_range
        if self.mode == "monte_carlo":
            rng = np.random.Generator(np.random.Philox(self.seed))
            ts = rng.uniform(t0, t1, self.sample_count)
            if self.h_fixed is not None:
                hs = np.full(self.sample_count, self.h_fixed)
            else:
                hs = rng.uniform(*self.h_range, self.sample_count)
            return np.column_stack([hs, ts])
        if self.h_fixed is not None:
            ts = np.linspace(t0, t1, self.sample_count)
            return np.column_stack([np.full_like(ts, self.h_fixed), ts])
        side = max(int(round(math.sqrt(self.sample_count))), 1)
        hs = np.linspace(*self.h_range, side)
        ts = np.linspace(t0, t1, side)
        hh, tt = np.meshgrid(hs, ts, indexing="ij")
        return np.column_stack([hh.ravel(), tt.ravel()])


def time_averaged_kernel(h_c: MarkedStateHamiltonian, variant: str,
                         scheme: AveragingScheme,
                         cfg: PropagatorConfig = DEFAULT_PROPAGATOR) -> ProposalKernel:
    """Mean proposal kernel over the sampled (h, t) pairs.

    A convex combination of unital kernels, hence symmetric and doubly
    stochastic; grover kernels are averaged in their four-value structured
    form so large N stays cheap.
    """
    kernels = [
        quantum_kernel(h_c, MixerSpec(variant, h), t, cfg)
        for h, t in scheme.samples()
    ]
    weight = 1.0 / len(kernels)
    if all(isinstance(k, StructuredMarkedKernel) for k in kernels):
        return StructuredMarkedKernel(
            h_c.n_spins, h_c.marked,
            weight * sum(k.off_marked for k in kernels),
            weight * sum(k.off_unmarked for k in kernels),
            weight * sum(k.stay_marked for k in kernels),
            weight * sum(k.stay_unmarked for k in kernels),
        )
    mean = np.zeros((h_c.dim, h_c.dim))
    for k in kernels:
        mean += weight * k.dense()
    return DenseKernel(mean, h_c.n_spins)


def averaged_grover_gap(n_spins: int, alpha: float, beta: float,
                        scheme: AveragingScheme) -> float:
    """Mean of the grover closed-form gap over the scheme's (h, t) samples.

    Because the gap is linear in the marked-proposal probability, this equals
    the gap of the chain driven by the averaged kernel.
    """
    gaps = [grover_gap_closed_form(n_spins, alpha, beta, h, t)
            for h, t in scheme.samples()]
    return float(np.mean(gaps))


def scaling_fit(points) -> float:
    """Least-squares slope of log2(delta) against N."""
    points = list(points)
    if len(points) < 4:
        raise ValueError("need at least 4 points for a scaling fit")
    ns = np.array([n for n, _ in points], dtype=float)
    deltas = np.array([d for _, d in points], dtype=float)
    if np.any(deltas <= 0):
        raise ValueError("all gaps must be positive")
    return float(np.polyfit(ns, np.log2(deltas), 1)[0])
