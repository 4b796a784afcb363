"""Statevector evolution under H = H_c + h*H_mix and quantum proposal kernels.

Two mixing terms are supported: the rank-1 "grover" mixer N|s><s| (|s> the
uniform superposition) and the "transverse" mixer sum_i sigma^x_i.  Evolution
uses dense diagonalization for small systems and an adaptive Lanczos
propagator above that; the grover mixer additionally admits an exact O(1)
propagator on its two-dimensional invariant subspace, which is what makes
single-column proposals tractable up to N = 24.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import (
    BudgetExceeded,
    DegenerateFrequency,
    MismatchedDimensions,
    NonConvergence,
)
from .model import MarkedStateHamiltonian
from .proposal import DenseKernel, ProposalKernel, StructuredMarkedKernel

GROVER = "grover"
TRANSVERSE = "transverse"

_DENSE_KERNEL_BUDGET = 14   # max n_spins for a dense 2^N x 2^N kernel
_COLUMN_BUDGET = 24         # max n_spins for a single proposal column
_DENSE_H_BUDGET = 13        # max n_spins for materializing H densely
_DENSE_AUTO = 10            # auto method switches to Krylov above this


@dataclass(frozen=True)
class MixerSpec:
    """Mixing Hamiltonian choice and its signed field strength h."""

    variant: str
    field_strength: float

    def __post_init__(self):
        if self.variant not in (GROVER, TRANSVERSE):
            raise ValueError(f"unknown mixer variant {self.variant!r}")
        if not math.isfinite(self.field_strength):
            raise ValueError("field strength must be finite")


def grover_mixer(field_strength: float) -> MixerSpec:
    return MixerSpec(GROVER, field_strength)


def transverse_field_mixer(field_strength: float) -> MixerSpec:
    return MixerSpec(TRANSVERSE, field_strength)


@dataclass(frozen=True)
class PropagatorConfig:
    """How e^{-iHt} is applied: dense diagonalization or adaptive Lanczos."""

    method: str = "auto"        # auto | dense | krylov
    krylov_dim: int = 30
    tolerance: float = 1e-12
    max_substeps: int = 4096

    def __post_init__(self):
        if self.method not in ("auto", "dense", "krylov"):
            raise ValueError(f"unknown propagator method {self.method!r}")
        if self.krylov_dim < 2:
            raise ValueError("krylov_dim must be >= 2")
        if not self.tolerance > 0:
            raise ValueError("tolerance must be positive")


DEFAULT_PROPAGATOR = PropagatorConfig()


def basis_state(n_spins: int, index: int) -> np.ndarray:
    psi = np.zeros(1 << n_spins, dtype=complex)
    psi[index] = 1.0
    return psi


def apply_hamiltonian(h_c: MarkedStateHamiltonian, mixer: MixerSpec,
                      psi: np.ndarray) -> np.ndarray:
    """Return H |psi> (unnormalized). Cost O(N 2^N) transverse, O(2^N) grover."""
    n = h_c.n_spins
    dim = h_c.dim
    if psi.shape != (dim,):
        raise MismatchedDimensions(f"state has shape {psi.shape}, expected ({dim},)")
    h = mixer.field_strength
    out = np.zeros(dim, dtype=np.result_type(psi, np.float64))
    if mixer.variant == GROVER:
        # h * N |s><s| psi: every amplitude receives h*N*mean(psi)
        out += h * n * psi.sum() / dim
    else:
        arr = psi.reshape((2,) * n)
        acc = np.zeros_like(arr)
        for axis in range(n):
            acc += np.flip(arr, axis=axis)   # sigma^x on one site = bit toggle
        out += h * acc.reshape(-1)
    out[h_c.marked] += -h_c.alpha * n * psi[h_c.marked]
    return out


def dense_hamiltonian(h_c: MarkedStateHamiltonian, mixer: MixerSpec) -> np.ndarray:
    n = h_c.n_spins
    if n > _DENSE_H_BUDGET:
        raise BudgetExceeded(f"dense Hamiltonian limited to N <= {_DENSE_H_BUDGET}")
    dim = h_c.dim
    h = mixer.field_strength
    if mixer.variant == GROVER:
        ham = np.full((dim, dim), h * n / dim)
    else:
        ham = np.zeros((dim, dim))
        rows = np.arange(dim)
        for i in range(n):
            ham[rows, rows ^ (1 << i)] = h
    ham[h_c.marked, h_c.marked] += -h_c.alpha * n
    return ham


# ---------------------------------------------------------------------------
# propagators


def _eigendecomposition(h_c, mixer):
    ham = dense_hamiltonian(h_c, mixer)
    return np.linalg.eigh(ham)


def _dense_evolve(h_c, mixer, psi, t):
    lam, vec = _eigendecomposition(h_c, mixer)
    return vec @ (np.exp(-1j * lam * t) * (vec.T @ psi))


def _lanczos_apply(matvec, psi, dt, m):
    """One Lanczos step of e^{-i*dt*H} psi with full reorthogonalization.

    Returns (result, residual_estimate); the estimate is the usual product of
    the next off-diagonal coefficient with the last component of the
    subspace-propagated unit vector.
    """
    dim = psi.shape[0]
    basis = np.empty((m, dim), dtype=complex)
    alphas = np.empty(m)
    betas = np.empty(m)
    basis[0] = psi
    w = matvec(psi)
    alphas[0] = np.real(np.vdot(basis[0], w))
    w = w - alphas[0] * basis[0]
    k = 1
    beta_next = float(np.linalg.norm(w))
    breakdown = beta_next < 1e-13
    while k < m and not breakdown:
        betas[k - 1] = beta_next
        v = w / beta_next
        coeffs = basis[:k].conj() @ v
        v = v - coeffs @ basis[:k]
        v /= np.linalg.norm(v)
        basis[k] = v
        w = matvec(v) - beta_next * basis[k - 1]
        alphas[k] = np.real(np.vdot(v, w))
        w = w - alphas[k] * v
        coeffs = basis[: k + 1].conj() @ w
        w = w - coeffs @ basis[: k + 1]
        beta_next = float(np.linalg.norm(w))
        k += 1
        breakdown = beta_next < 1e-13
    if k == 1:
        phase = np.exp(-1j * dt * alphas[0])
        return phase * psi, 0.0
    lam, s = eigh_tridiagonal(alphas[:k], betas[: k - 1])
    y = s @ (np.exp(-1j * dt * lam) * s[0])
    result = y @ basis[:k]
    err = 0.0 if breakdown else beta_next * abs(y[-1])
    return result, float(err)


def _krylov_evolve(h_c, mixer, psi, t, cfg):
    matvec = lambda v: apply_hamiltonian(h_c, mixer, v)
    state = psi.astype(complex)
    remaining = float(t)
    dt = remaining
    substeps = 0
    while abs(remaining) > abs(t) * 1e-15:
        result, err = _lanczos_apply(matvec, state, dt, cfg.krylov_dim)
        if err <= cfg.tolerance:
            state = result / np.linalg.norm(result)
            remaining -= dt
            substeps += 1
            if substeps > cfg.max_substeps:
                raise NonConvergence("substep cap reached before covering t")
            grown = 2.0 * dt
            dt = grown if abs(grown) <= abs(remaining) else remaining
        else:
            dt *= 0.5
            if abs(dt) < abs(t) * 2.0 ** -40:
                raise NonConvergence(
                    f"residual {err:.3e} not reducible below {cfg.tolerance:.3e}"
                )
    return state


def evolve(h_c: MarkedStateHamiltonian, mixer: MixerSpec, psi0: np.ndarray,
           t: float, cfg: PropagatorConfig = DEFAULT_PROPAGATOR) -> np.ndarray:
    """Return e^{-iHt} |psi0>; the result keeps unit norm within 1e-10."""
    if not math.isfinite(t):
        raise ValueError("evolution time must be finite")
    if psi0.shape != (h_c.dim,):
        raise MismatchedDimensions(
            f"state has shape {psi0.shape}, expected ({h_c.dim},)"
        )
    norm = np.linalg.norm(psi0)
    if abs(norm - 1.0) > 1e-10:
        raise ValueError(f"initial state norm {norm} is not 1")
    if t == 0.0:
        return psi0.astype(complex)
    method = cfg.method
    if method == "auto":
        method = "dense" if h_c.n_spins <= _DENSE_AUTO else "krylov"
    if method == "dense":
        return _dense_evolve(h_c, mixer, psi0.astype(complex), t)
    return _krylov_evolve(h_c, mixer, psi0, t, cfg)


# ---------------------------------------------------------------------------
# grover rank-2 invariant subspace

def _grover_rank2_matrix(h_c, h, t):
    """Exact (e^{-iHt} - I) restricted to span{|k>, |u>}, |u> the normalized
    uniform state over unmarked configurations.  Uses only generic matvecs and
    a 2x2 eigendecomposition."""
    n, dim, k = h_c.n_spins, h_c.dim, h_c.marked
    mixer = MixerSpec(GROVER, h)
    e_k = basis_state(n, k)
    u = np.full(dim, 1.0 / math.sqrt(dim - 1), dtype=complex) if dim > 1 else e_k
    if dim > 1:
        u[k] = 0.0
    cols = np.column_stack([e_k, u])
    h2 = np.empty((2, 2))
    for b in range(2):
        hv = apply_hamiltonian(h_c, mixer, cols[:, b])
        for a in range(2):
            h2[a, b] = np.real(np.vdot(cols[:, a], hv))
    lam, s = np.linalg.eigh(h2)
    u2 = (s * np.exp(-1j * lam * t)) @ s.T
    return u2 - np.eye(2)


def _grover_rank2_kernel(h_c, h, t) -> StructuredMarkedKernel:
    dim = h_c.dim
    m = _grover_rank2_matrix(h_c, h, t)
    off_marked = abs(m[1, 0]) ** 2 / (dim - 1)
    off_unmarked = abs(m[1, 1]) ** 2 / (dim - 1) ** 2
    stay_marked = abs(1.0 + m[0, 0]) ** 2
    stay_unmarked = abs(1.0 + m[1, 1] / (dim - 1)) ** 2
    return StructuredMarkedKernel(h_c.n_spins, h_c.marked, off_marked,
                                  off_unmarked, stay_marked, stay_unmarked)


# ---------------------------------------------------------------------------
# proposal kernels

def quantum_kernel(h_c: MarkedStateHamiltonian, mixer: MixerSpec, t: float,
                   cfg: PropagatorConfig = DEFAULT_PROPAGATOR) -> ProposalKernel:
    """Dense proposal kernel Q(x|y) = |<x| e^{-iHt} |y>|^2."""
    n = h_c.n_spins
    if n > _DENSE_KERNEL_BUDGET:
        raise BudgetExceeded(f"dense kernel limited to N <= {_DENSE_KERNEL_BUDGET}")
    method = cfg.method
    if method == "auto":
        if mixer.variant == GROVER:
            return _grover_rank2_kernel(h_c, mixer.field_strength, t)
        method = "dense" if n <= _DENSE_H_BUDGET else "krylov"
    if method == "dense":
        lam, vec = _eigendecomposition(h_c, mixer)
        u = (vec * np.exp(-1j * lam * t)) @ vec.T
        return DenseKernel(np.abs(u) ** 2, n)
    cols = np.empty((h_c.dim, h_c.dim))
    for y in range(h_c.dim):
        amps = evolve(h_c, mixer, basis_state(n, y), t, cfg)
        cols[:, y] = np.abs(amps) ** 2
    return DenseKernel(cols, n)


def quantum_proposal_column(h_c: MarkedStateHamiltonian, mixer: MixerSpec,
                            t: float, y: int,
                            cfg: PropagatorConfig = DEFAULT_PROPAGATOR) -> np.ndarray:
    """Measurement distribution after one evolution from basis state y."""
    n = h_c.n_spins
    if n > _COLUMN_BUDGET:
        raise BudgetExceeded(f"proposal columns limited to N <= {_COLUMN_BUDGET}")
    if not 0 <= y < h_c.dim:
        raise IndexError(f"configuration {y} out of range")
    if cfg.method == "auto" and mixer.variant == GROVER:
        return _grover_rank2_kernel(h_c, mixer.field_strength, t).column(y)
    amps = evolve(h_c, mixer, basis_state(n, y), t, cfg)
    return np.abs(amps) ** 2


# ---------------------------------------------------------------------------
# closed forms for the grover mixer

@dataclass(frozen=True)
class GroverClosedForm:
    """Two-level-subspace quantities for the grover-mixed marked-state model."""

    gamma: float
    omega: float
    phi: float
    n_z: float
    n_x: float
    k_factor: float
    q_marked: float
    q_unmarked: float
    q_marked_stay: float
    q_unmarked_stay: float


def grover_closed_form(n_spins: int, alpha: float, h: float,
                       t: float) -> GroverClosedForm:
    """Exact proposal probabilities of the grover-mixed evolution.

    ``q_marked`` is the probability of proposing the marked state from any
    other state (and vice versa), ``q_unmarked`` the probability of moving
    between two distinct unmarked states; the stay values follow from
    normalization.  The sin(gamma t)/gamma factor is evaluated through sinc so
    the gamma -> 0 limit is the removable one.
    """
    dim = 1 << n_spins
    radicand = (alpha + h) ** 2 - alpha * h * 2.0 ** (2 - n_spins)
    gamma_sq = (n_spins / 2.0) ** 2 * max(radicand, 0.0)
    if gamma_sq < 1e-300:
        raise DegenerateFrequency(
            f"gamma^2 = {gamma_sq:.3e}: two-level frequency degenerate"
        )
    gamma = math.sqrt(gamma_sq)
    phi = n_spins * (h - alpha) / 2.0
    n_z = (n_spins / gamma) * (0.5 * (h + alpha) - h / dim)
    n_x = (n_spins / gamma) * h * math.sqrt(dim - 1.0) / dim
    # sin(gamma t)/gamma = t*sinc(gamma t/pi)
    sin_over_gamma = t * np.sinc(gamma * t / math.pi)
    q_marked = (n_spins * h * sin_over_gamma) ** 2 / float(dim) ** 2
    sg, cg = math.sin(gamma * t), math.cos(gamma * t)
    sp, cp = math.sin(phi * t), math.cos(phi * t)
    k_factor = 1.0 - 2.0 * cp * cg + cg ** 2 + 2.0 * n_z * sp * sg + n_z ** 2 * sg ** 2
    q_unmarked = k_factor / (dim - 1.0) ** 2
    q_marked_stay = 1.0 - (dim - 1.0) * q_marked
    q_unmarked_stay = 1.0 - q_marked - (dim - 2.0) * q_unmarked
    return GroverClosedForm(
        gamma=gamma,
        omega=gamma / n_spins,
        phi=phi,
        n_z=n_z,
        n_x=n_x,
        k_factor=k_factor,
        q_marked=q_marked,
        q_unmarked=q_unmarked,
        q_marked_stay=q_marked_stay,
        q_unmarked_stay=q_unmarked_stay,
    )


def structured_grover_kernel(h_c: MarkedStateHamiltonian, h: float,
                             t: float) -> StructuredMarkedKernel:
    """Grover proposal kernel assembled from the closed-form q values."""
    cf = grover_closed_form(h_c.n_spins, h_c.alpha, h, t)
    return StructuredMarkedKernel(h_c.n_spins, h_c.marked, cf.q_marked,
                                  cf.q_unmarked, cf.q_marked_stay,
                                  cf.q_unmarked_stay)


def resonance_field(alpha: float, n_spins: int) -> float:
    """Field at which the two-level frequency collapses to O(2^{-N/2})."""
    if n_spins < 1:
        raise ValueError("n_spins must be >= 1")
    return -alpha / (1.0 - 2.0 ** -n_spins)
